//! Numerical laboratory for simulating unitary evolution `exp(-iHt)` of a
//! Hermitian generator `H` split into block-diagonal parts.
//!
//! The crate implements and cross-validates several propagation schemes on
//! dense state vectors of dimension N ≤ 256:
//!
//! * first-order and symmetric product formulas over a part decomposition
//!   `H = Σ H_i` ([`trotter`]),
//! * exact operator series for two-projector and two-reflection splittings,
//!   including unequal coefficients and a BCH-factored variant ([`series`]),
//! * Chebyshev/Clenshaw polynomial propagation with Bessel-function
//!   coefficients ([`chebyshev`], [`bessel`]),
//! * the two-dimensional rotation algebra of amplitude-amplification search,
//!   with closed-form equivalences between continuous and stepped evolution
//!   ([`grover`]),
//! * a fixed-point register emulator that measures how propagation accuracy
//!   degrades with word size ([`digital`]),
//! * a seeded identity-check suite for rank-one projector algebra
//!   ([`identities`]),
//! * and a deterministic benchmark harness behind the `hamsim` binary
//!   ([`bench`]).
//!
//! Everything is dense, deterministic, and dependency-light by design: the
//! reference propagator is an in-crate Jacobi eigendecomposition, random data
//! comes from an explicit splitmix64 stream, and all tolerances are pinned in
//! the test suites.

pub mod bench;
pub mod bessel;
pub mod chebyshev;
pub mod digital;
pub mod error;
pub mod grover;
pub mod identities;
pub mod linalg;
pub mod models;
pub mod rng;
pub mod series;
pub mod trotter;

pub use error::{HamsimError, Result};
