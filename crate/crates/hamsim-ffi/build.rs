//! Generates `include/hamsim.h` from the public FFI surface with cbindgen.

use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").expect("manifest dir"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    let header = crate_dir.join("include").join("hamsim.h");
    match cbindgen::generate(&crate_dir) {
        Ok(bindings) => {
            bindings.write_to_file(&header);
        }
        // Parse errors should fail the build loudly; anything transient (e.g.
        // running from a stripped source tree) falls through with the header
        // left as-is.
        Err(cbindgen::Error::ParseSyntaxError { .. }) => panic!("cbindgen could not parse the FFI surface"),
        Err(err) => println!("cargo:warning=cbindgen skipped: {err}"),
    }
}
