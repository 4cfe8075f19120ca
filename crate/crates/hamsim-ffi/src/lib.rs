//! C interface to the hamsim propagators.
//!
//! The surface follows the usual C-library conventions: opaque handles
//! (`HsState`, `HsParts`) created and destroyed through paired functions,
//! status codes for every fallible call, out-parameters for results, and a
//! thread-local message retrievable with [`hs_last_error_message`] after a
//! failure.  All evolution entry points propagate the same generator — the
//! sum of the two projector parts held by the `HsParts` handle — so their
//! results are directly comparable via [`hs_state_distance`].
//!
//! The companion header `include/hamsim.h` is generated from this file by
//! `cbindgen` during the build.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use hamsim::bessel::bessel_table;
use hamsim::chebyshev::{evolve_chebyshev, ChebyshevMode, HamiltonianRef};
use hamsim::error::HamsimError;
use hamsim::grover::search_run;
use hamsim::linalg::{exact_evolve, state_distance, StateVector};
use hamsim::models::{laplacian_parts, sum_parts_dense, BlockDiagonalPart};
use hamsim::rng::random_initial_state;
use hamsim::series::{evolve_projection_series, evolve_reflection_series};
use hamsim::trotter::{ProductFormula, TrotterPlan};
use num_complex::Complex64;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HsStatus {
    /// The call succeeded.
    HsOk = 0,
    /// A required pointer argument was null.
    HsNullPointer = 1,
    /// A scalar argument was outside its documented domain.
    HsInvalidArgument = 2,
    /// Two objects that must share a dimension do not.
    HsDimensionMismatch = 3,
    /// A dense-operator routine was asked to exceed its size cap.
    HsDimensionCap = 4,
    /// An operator that must be Hermitian is not.
    HsNotHermitian = 5,
    /// A part that must be a projector is not.
    HsNotProjector = 6,
    /// A part that must be a reflection is not.
    HsNotReflection = 7,
    /// A request exceeded a documented precision or search budget.
    HsPrecisionBudget = 8,
    /// An iterative numerical routine failed to converge.
    HsNoConvergence = 9,
    /// Malformed text input.
    HsParse = 10,
    /// An I/O operation failed.
    HsIo = 11,
    /// The library caught an internal panic; state may be inconsistent.
    HsInternal = 12,
}

/// Opaque complex state vector.
pub struct HsState {
    inner: StateVector,
}

/// Opaque pair of projector parts whose sum is the evolved generator.
pub struct HsParts {
    parts: Vec<BlockDiagonalPart>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn remember(status: HsStatus, message: String) -> HsStatus {
    let text = CString::new(message).unwrap_or_else(|_| CString::new("invalid message").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
    status
}

fn status_of(err: &HamsimError) -> HsStatus {
    match err {
        HamsimError::DimensionMismatch { .. } => HsStatus::HsDimensionMismatch,
        HamsimError::DimensionCap { .. } => HsStatus::HsDimensionCap,
        HamsimError::NotHermitian { .. } => HsStatus::HsNotHermitian,
        HamsimError::NotProjector { .. } => HsStatus::HsNotProjector,
        HamsimError::NotReflection { .. } => HsStatus::HsNotReflection,
        HamsimError::InvalidArgument { .. } => HsStatus::HsInvalidArgument,
        HamsimError::PrecisionBudget { .. } => HsStatus::HsPrecisionBudget,
        HamsimError::NoConvergence { .. } => HsStatus::HsNoConvergence,
        HamsimError::Parse { .. } => HsStatus::HsParse,
        HamsimError::Io { .. } => HsStatus::HsIo,
    }
}

fn fail(err: HamsimError) -> HsStatus {
    remember(status_of(&err), err.to_string())
}

fn null_arg(name: &str) -> HsStatus {
    remember(HsStatus::HsNullPointer, format!("{name} must not be null"))
}

/// Runs `body` with panics converted to `HsInternal` so unwinding never
/// crosses the C boundary.
fn guarded(body: impl FnOnce() -> HsStatus) -> HsStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => remember(HsStatus::HsInternal, "internal panic".to_string()),
    }
}

fn emit_state(out: *mut *mut HsState, state: StateVector) -> HsStatus {
    // Safety: the caller guaranteed `out` is valid; null was rejected earlier.
    unsafe { *out = Box::into_raw(Box::new(HsState { inner: state })) };
    HsStatus::HsOk
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Creates a seeded random unit state on `dim` sites.  Identical
/// `(dim, seed)` pairs produce identical states on every platform.
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle that must
/// be released with [`hs_state_free`].
#[no_mangle]
pub unsafe extern "C" fn hs_state_random(
    dim: usize,
    seed: u64,
    out: *mut *mut HsState,
) -> HsStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        if dim == 0 {
            return remember(
                HsStatus::HsInvalidArgument,
                "state dimension must be positive".to_string(),
            );
        }
        emit_state(out, random_initial_state(dim, seed))
    })
}

/// Creates a state from component arrays of length `dim`; `im` may be null
/// for a real vector.  The amplitudes are taken as given (no normalisation).
///
/// # Safety
/// `re` (and `im` when non-null) must point to `dim` readable doubles; `out`
/// must be valid and receives a handle to release with [`hs_state_free`].
#[no_mangle]
pub unsafe extern "C" fn hs_state_from_components(
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut *mut HsState,
) -> HsStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        if re.is_null() {
            return null_arg("re");
        }
        if dim == 0 {
            return remember(
                HsStatus::HsInvalidArgument,
                "state dimension must be positive".to_string(),
            );
        }
        let re = unsafe { std::slice::from_raw_parts(re, dim) };
        let im = if im.is_null() {
            None
        } else {
            Some(unsafe { std::slice::from_raw_parts(im, dim) })
        };
        let amps = (0..dim)
            .map(|i| Complex64::new(re[i], im.map_or(0.0, |im| im[i])))
            .collect();
        emit_state(out, StateVector::new(amps))
    })
}

/// Returns the dimension of `state`, or 0 for a null handle.
///
/// # Safety
/// `state` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn hs_state_dim(state: *const HsState) -> usize {
    if state.is_null() {
        return 0;
    }
    unsafe { (*state).inner.dim() }
}

/// Copies the components of `state` into caller-provided arrays of its
/// dimension; either destination may be null to skip that half.
///
/// # Safety
/// `state` must be a live handle; non-null destinations must hold as many
/// writable doubles as the state dimension.
#[no_mangle]
pub unsafe extern "C" fn hs_state_components(
    state: *const HsState,
    re: *mut f64,
    im: *mut f64,
) -> HsStatus {
    guarded(|| {
        if state.is_null() {
            return null_arg("state");
        }
        let amps = unsafe { &(*state).inner.amps };
        for (i, amp) in amps.iter().enumerate() {
            if !re.is_null() {
                unsafe { *re.add(i) = amp.re };
            }
            if !im.is_null() {
                unsafe { *im.add(i) = amp.im };
            }
        }
        HsStatus::HsOk
    })
}

/// Euclidean distance between two states of equal dimension.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hs_state_distance(
    a: *const HsState,
    b: *const HsState,
    out: *mut f64,
) -> HsStatus {
    guarded(|| {
        if a.is_null() {
            return null_arg("a");
        }
        if b.is_null() {
            return null_arg("b");
        }
        if out.is_null() {
            return null_arg("out");
        }
        match state_distance(unsafe { &(*a).inner }, unsafe { &(*b).inner }) {
            Ok(d) => {
                unsafe { *out = d };
                HsStatus::HsOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a state handle; null is ignored.
///
/// # Safety
/// `state` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_state_free(state: *mut HsState) {
    if !state.is_null() {
        drop(unsafe { Box::from_raw(state) });
    }
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

/// Builds the odd/even projector decomposition of the scaled closed-chain
/// Laplacian on `length` sites (`scale = 0.5` makes both parts exact
/// projectors; other scales are rejected by the series evolvers).
///
/// # Safety
/// `out` must be a valid pointer; on success it receives a handle to release
/// with [`hs_parts_free`].
#[no_mangle]
pub unsafe extern "C" fn hs_laplacian_parts(
    length: usize,
    scale: f64,
    out: *mut *mut HsParts,
) -> HsStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match laplacian_parts(length, scale) {
            Ok((odd, even)) => {
                let handle = Box::new(HsParts {
                    parts: vec![odd, even],
                });
                unsafe { *out = Box::into_raw(handle) };
                HsStatus::HsOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Returns the dimension the parts act on, or 0 for a null handle.
///
/// # Safety
/// `parts` must be null or a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn hs_parts_dim(parts: *const HsParts) -> usize {
    if parts.is_null() {
        return 0;
    }
    unsafe { (&(*parts).parts)[0].dim() }
}

/// Releases a parts handle; null is ignored.
///
/// # Safety
/// `parts` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hs_parts_free(parts: *mut HsParts) {
    if !parts.is_null() {
        drop(unsafe { Box::from_raw(parts) });
    }
}

// ---------------------------------------------------------------------------
// Evolution
// ---------------------------------------------------------------------------

unsafe fn evolve_common(
    parts: *const HsParts,
    x: *const HsState,
    out: *mut *mut HsState,
) -> Result<(&'static [BlockDiagonalPart], &'static StateVector), HsStatus> {
    if parts.is_null() {
        return Err(null_arg("parts"));
    }
    if x.is_null() {
        return Err(null_arg("x"));
    }
    if out.is_null() {
        return Err(null_arg("out"));
    }
    Ok(unsafe { (&(*parts).parts, &(*x).inner) })
}

/// Product-formula evolution of `x` under the part sum for time `t` with `m`
/// steps; `order` selects the formula (1 = sequential, 2 = symmetric).
///
/// # Safety
/// `parts` and `x` must be live handles; `out` must be valid and receives a
/// new state handle on success.
#[no_mangle]
pub unsafe extern "C" fn hs_evolve_trotter(
    parts: *const HsParts,
    t: f64,
    m: u64,
    order: u32,
    x: *const HsState,
    out: *mut *mut HsState,
) -> HsStatus {
    guarded(|| {
        let (p, x) = match unsafe { evolve_common(parts, x, out) } {
            Ok(v) => v,
            Err(s) => return s,
        };
        let formula = match order {
            1 => ProductFormula::First,
            2 => ProductFormula::Symmetric,
            _ => {
                return remember(
                    HsStatus::HsInvalidArgument,
                    format!("formula order must be 1 or 2, got {order}"),
                )
            }
        };
        let plan = match TrotterPlan::with_steps(p.to_vec(), t, m, formula) {
            Ok(plan) => plan,
            Err(e) => return fail(e),
        };
        match plan.run(x) {
            Ok(y) => emit_state(out, y),
            Err(e) => fail(e),
        }
    })
}

/// Projection-operator series evolution of `x` for time `t`, stepping at most
/// `dt_cap` per step with truncation order `p`.
///
/// # Safety
/// `parts` and `x` must be live handles; `out` must be valid and receives a
/// new state handle on success.
#[no_mangle]
pub unsafe extern "C" fn hs_evolve_projection_series(
    parts: *const HsParts,
    t: f64,
    dt_cap: f64,
    p: usize,
    x: *const HsState,
    out: *mut *mut HsState,
) -> HsStatus {
    guarded(|| {
        let (parts, x) = match unsafe { evolve_common(parts, x, out) } {
            Ok(v) => v,
            Err(s) => return s,
        };
        match evolve_projection_series(&parts[0], &parts[1], t, dt_cap, p, x) {
            Ok(y) => emit_state(out, y),
            Err(e) => fail(e),
        }
    })
}

/// Reflection-operator series evolution of `x` for time `t` (same generator:
/// each projector `P` is lifted to the reflection `1 − 2P` internally),
/// stepping at most `dt_cap` per step with truncation order `p`.
///
/// # Safety
/// `parts` and `x` must be live handles; `out` must be valid and receives a
/// new state handle on success.
#[no_mangle]
pub unsafe extern "C" fn hs_evolve_reflection_series(
    parts: *const HsParts,
    t: f64,
    dt_cap: f64,
    p: usize,
    x: *const HsState,
    out: *mut *mut HsState,
) -> HsStatus {
    guarded(|| {
        let (parts, x) = match unsafe { evolve_common(parts, x, out) } {
            Ok(v) => v,
            Err(s) => return s,
        };
        let r1 = parts[0].to_reflection();
        let r2 = parts[1].to_reflection();
        match evolve_reflection_series(&r1, &r2, t, dt_cap, p, x) {
            Ok(y) => emit_state(out, y),
            Err(e) => fail(e),
        }
    })
}

/// Stepped Chebyshev evolution of `x` for time `t` to target accuracy `eps`.
///
/// # Safety
/// `parts` and `x` must be live handles; `out` must be valid and receives a
/// new state handle on success.
#[no_mangle]
pub unsafe extern "C" fn hs_evolve_chebyshev(
    parts: *const HsParts,
    t: f64,
    eps: f64,
    x: *const HsState,
    out: *mut *mut HsState,
) -> HsStatus {
    guarded(|| {
        let (parts, x) = match unsafe { evolve_common(parts, x, out) } {
            Ok(v) => v,
            Err(s) => return s,
        };
        match evolve_chebyshev(
            &HamiltonianRef::Parts(parts),
            t,
            eps,
            ChebyshevMode::Stepped,
            None,
            x,
        ) {
            Ok((y, _plan)) => emit_state(out, y),
            Err(e) => fail(e),
        }
    })
}

/// Dense reference evolution of `x` for time `t` by full diagonalisation.
///
/// # Safety
/// `parts` and `x` must be live handles; `out` must be valid and receives a
/// new state handle on success.
#[no_mangle]
pub unsafe extern "C" fn hs_evolve_exact(
    parts: *const HsParts,
    t: f64,
    x: *const HsState,
    out: *mut *mut HsState,
) -> HsStatus {
    guarded(|| {
        let (parts, x) = match unsafe { evolve_common(parts, x, out) } {
            Ok(v) => v,
            Err(s) => return s,
        };
        let h = match sum_parts_dense(parts) {
            Ok(h) => h,
            Err(e) => return fail(e),
        };
        match exact_evolve(&h, t, x) {
            Ok(y) => emit_state(out, y),
            Err(e) => fail(e),
        }
    })
}

// ---------------------------------------------------------------------------
// Auxiliary numerics
// ---------------------------------------------------------------------------

/// Fills `out[0..=order]` with Bessel values `J_0(t) .. J_order(t)` from the
/// backward-recursion table.
///
/// # Safety
/// `out` must point to `order + 1` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hs_bessel_table(t: f64, order: usize, out: *mut f64) -> HsStatus {
    guarded(|| {
        if out.is_null() {
            return null_arg("out");
        }
        match bessel_table(t, order) {
            Ok(table) => {
                for k in 0..=order {
                    unsafe { *out.add(k) = table.j(k) };
                }
                HsStatus::HsOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Runs the discrete search walk over `items` elements; on success writes the
/// number of walk applications and the final marked-state probability.
///
/// # Safety
/// Non-null destinations must be valid pointers; either may be null to skip
/// that output.
#[no_mangle]
pub unsafe extern "C" fn hs_grover_search(
    items: usize,
    steps: *mut u64,
    success: *mut f64,
) -> HsStatus {
    guarded(|| match search_run(items) {
        Ok(outcome) => {
            if !steps.is_null() {
                unsafe { *steps = outcome.steps };
            }
            if !success.is_null() {
                unsafe { *success = outcome.success_probability };
            }
            HsStatus::HsOk
        }
        Err(e) => fail(e),
    })
}

// ---------------------------------------------------------------------------
// Introspection
// ---------------------------------------------------------------------------

/// Returns the library version as a static string.
#[no_mangle]
pub extern "C" fn hs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the static name of a status code.
#[no_mangle]
pub extern "C" fn hs_status_name(status: HsStatus) -> *const c_char {
    let name: &'static str = match status {
        HsStatus::HsOk => "ok\0",
        HsStatus::HsNullPointer => "null pointer\0",
        HsStatus::HsInvalidArgument => "invalid argument\0",
        HsStatus::HsDimensionMismatch => "dimension mismatch\0",
        HsStatus::HsDimensionCap => "dimension cap exceeded\0",
        HsStatus::HsNotHermitian => "not Hermitian\0",
        HsStatus::HsNotProjector => "not a projector\0",
        HsStatus::HsNotReflection => "not a reflection\0",
        HsStatus::HsPrecisionBudget => "precision budget exceeded\0",
        HsStatus::HsNoConvergence => "no convergence\0",
        HsStatus::HsParse => "parse error\0",
        HsStatus::HsIo => "i/o error\0",
        HsStatus::HsInternal => "internal panic\0",
    };
    name.as_ptr() as *const c_char
}

/// Returns the message recorded by the most recent failing call on this
/// thread; the pointer stays valid until the next failing call on the same
/// thread.
#[no_mangle]
pub extern "C" fn hs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}
