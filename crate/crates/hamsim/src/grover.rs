//! Two-state search frame: the reflection-product search walk, its
//! continuous-evolution counterpart, and closed-form equivalence checks
//! between the two.
//!
//! Everything here lives in the 2x2 frame spanned by the marked state
//! `|t> = (1, 0)` and the uniform superposition
//! `|s> = (1/sqrt(N), sqrt((N-1)/N))`. The discrete walk
//! `U_G = -(1 - 2|s><s|)(1 - 2|t><t|)` is a rotation of the frame Bloch
//! sphere about its y axis by `alpha = 2 asin(1/sqrt(N))`, so arbitrary real
//! powers of the walk are rotations by `q * alpha`; no matrix logarithm is
//! ever taken, which keeps negative and fractional powers exact. The
//! continuous evolutions generated by `a1 |s><s| + |t><t|` are returned with
//! the trace part of the generator removed, so comparisons against walk
//! powers need at most a global phase factored out.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use crate::error::{HamsimError, Result};
use crate::linalg::{operator_distance, operator_distance_mod_phase, DenseOperator, NormKind, StateVector};
use crate::models::SearchModel;

// ---------------------------------------------------------------------------
// Frame states and the discrete walk
// ---------------------------------------------------------------------------

fn require_items(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(HamsimError::invalid(format!(
            "search frame needs at least 2 items, got {n}"
        )));
    }
    Ok(n as f64)
}

/// Marked basis state `|t>` in frame coordinates.
pub fn marked_state() -> StateVector {
    StateVector::basis(2, 0)
}

/// Uniform superposition `|s>` in frame coordinates.
pub fn superposition_state(n: usize) -> Result<StateVector> {
    let nf = require_items(n)?;
    Ok(StateVector::new(vec![
        Complex64::new(1.0 / nf.sqrt(), 0.0),
        Complex64::new(((nf - 1.0) / nf).sqrt(), 0.0),
    ]))
}

/// Rotation angle of one walk application: `alpha = 2 asin(1/sqrt(N))`.
pub fn walk_angle(n: usize) -> Result<f64> {
    let nf = require_items(n)?;
    Ok(2.0 * (1.0 / nf.sqrt()).asin())
}

/// Evolution time per walk step under the commutator generator
/// `H_G = i [|t><t|, |s><s|]`: the walk equals `exp(-i H_G tau)` with
/// `tau = (2N / sqrt(N-1)) asin(1/sqrt(N))`.
pub fn walk_step_time(n: usize) -> Result<f64> {
    let nf = require_items(n)?;
    Ok(2.0 * nf / (nf - 1.0).sqrt() * (1.0 / nf.sqrt()).asin())
}

/// Real rotation `[[c, s], [-s, c]]` of the frame.
fn frame_rotation(c: f64, s: f64) -> DenseOperator {
    DenseOperator::from_fn(2, |i, j| match (i, j) {
        (0, 1) => Complex64::new(s, 0.0),
        (1, 0) => Complex64::new(-s, 0.0),
        _ => Complex64::new(c, 0.0),
    })
}

/// One application of the search walk: the sign-fixed product of the
/// reflections about `|s>` and `|t>`, written directly with its closed-form
/// entries `[[1 - 2/N, 2 sqrt(N-1)/N], [-2 sqrt(N-1)/N, 1 - 2/N]]`.
pub fn grover_operator(n: usize) -> Result<DenseOperator> {
    let nf = require_items(n)?;
    Ok(frame_rotation(1.0 - 2.0 / nf, 2.0 * (nf - 1.0).sqrt() / nf))
}

/// Real power `U_G^q` of the walk, computed by scaling the rotation angle to
/// `q * alpha`; valid for negative and fractional `q` alike.
pub fn walk_power(n: usize, q: f64) -> Result<DenseOperator> {
    let theta = q * walk_angle(n)?;
    Ok(frame_rotation(theta.cos(), theta.sin()))
}

/// Result of a discrete search run in the frame.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Number of walk applications performed.
    pub steps: u64,
    /// Probability of observing the marked state afterwards.
    pub success_probability: f64,
    /// Final frame state.
    pub state: StateVector,
}

/// Runs the discrete search: `floor(pi / (2 alpha))` applications of the walk
/// to the uniform superposition. The marked-state probability of the final
/// state reaches at least `1 - 1/N`.
pub fn search_run(n: usize) -> Result<SearchOutcome> {
    let alpha = walk_angle(n)?;
    let steps = (FRAC_PI_2 / alpha).floor() as u64;
    let walk = grover_operator(n)?;
    let mut state = superposition_state(n)?;
    for _ in 0..steps {
        state = walk.apply(&state)?;
    }
    let success_probability = state.amps[0].norm_sqr();
    Ok(SearchOutcome { steps, success_probability, state })
}

// ---------------------------------------------------------------------------
// Continuous evolution in the frame
// ---------------------------------------------------------------------------

/// Rotation axis and angular speed of the continuous evolution generated by
/// `a1 |s><s| + |t><t|` once its trace part is removed: the traceless
/// remainder is `n_x sigma_1 + n_z sigma_3` with `n_x = a1 sqrt(N-1)/N` and
/// `n_z = (1 - a1)/2 + a1/N`, and `speed = sqrt(n_x^2 + n_z^2)` is strictly
/// positive for every `N >= 2` and `a1` in `[-1, 1]`.
#[derive(Debug, Clone, Copy)]
struct FrameGeometry {
    nx: f64,
    nz: f64,
    speed: f64,
    alpha: f64,
}

impl FrameGeometry {
    fn new(n: usize, a1: f64) -> Result<Self> {
        // SearchModel::new validates the item count and the weight range.
        SearchModel::new(n, a1)?;
        let nf = n as f64;
        let nx = a1 * (nf - 1.0).sqrt() / nf;
        let nz = (1.0 - a1) / 2.0 + a1 / nf;
        Ok(FrameGeometry {
            nx,
            nz,
            speed: nx.hypot(nz),
            alpha: 2.0 * (1.0 / nf.sqrt()).asin(),
        })
    }
}

/// Continuous-evolution matrix in the frame for the generator
/// `a1 |s><s| + |t><t|` with its trace part removed: a rotation by angle
/// `speed * t` about the Bloch axis `(n_x, 0, n_z) / speed`,
/// `U(t) = cos(speed t) I - i sin(speed t) (nhat . sigma)`. The omitted
/// global phase is `exp(-i (1 + a1) t / 2)`.
pub fn continuous_evolution(n: usize, a1: f64, t: f64) -> Result<DenseOperator> {
    let geo = FrameGeometry::new(n, a1)?;
    let (sin_at, cos_at) = (geo.speed * t).sin_cos();
    let ux = geo.nx / geo.speed;
    let uz = geo.nz / geo.speed;
    Ok(DenseOperator::from_fn(2, |i, j| match (i, j) {
        (0, 0) => Complex64::new(cos_at, -sin_at * uz),
        (1, 1) => Complex64::new(cos_at, sin_at * uz),
        _ => Complex64::new(0.0, -sin_at * ux),
    }))
}

// ---------------------------------------------------------------------------
// Walk/continuous equivalence
// ---------------------------------------------------------------------------

/// Closed-form walk parameters matching a continuous evolution of duration
/// `t` in the frame.
#[derive(Debug, Clone, Copy)]
pub struct GroverParams {
    /// Item count of the search space.
    pub items: usize,
    /// Real walk power equivalent to the continuous evolution.
    pub power: f64,
    /// Diagonal-phase angle entering the sandwich identity.
    pub beta: f64,
    /// Evolution time per walk step under the commutator generator.
    pub step_time: f64,
}

/// Walk power and phase angle reproducing the continuous evolution of
/// duration `t` for weight `a1`:
/// `Q = asin((n_x / speed) sin(speed t)) / alpha` and
/// `beta = -pi/4 - atan((n_z / speed) tan(speed t)) / 2`, valid on the
/// principal window `speed * t < pi/2` (and `t >= 0`).
pub fn equivalent_walk_params(n: usize, a1: f64, t: f64) -> Result<GroverParams> {
    let geo = FrameGeometry::new(n, a1)?;
    if !t.is_finite() || t < 0.0 {
        return Err(HamsimError::invalid(format!(
            "evolution time must be finite and nonnegative, got {t}"
        )));
    }
    let at = geo.speed * t;
    if at >= FRAC_PI_2 {
        return Err(HamsimError::invalid(format!(
            "evolution time {t} leaves the principal window speed*t < pi/2 \
             (speed {:.6}, window end {:.6})",
            geo.speed,
            FRAC_PI_2 / geo.speed
        )));
    }
    let arg = geo.nx / geo.speed * at.sin();
    if arg.abs() > 1.0 {
        return Err(HamsimError::invalid(format!(
            "walk-power arcsine argument {arg} falls outside [-1, 1]"
        )));
    }
    Ok(GroverParams {
        items: n,
        power: arg.asin() / geo.alpha,
        beta: -FRAC_PI_4 - 0.5 * (geo.nz / geo.speed * at.tan()).atan(),
        step_time: walk_step_time(n)?,
    })
}

/// `exp(i phi sigma_3) = diag(e^{i phi}, e^{-i phi})`.
fn diagonal_phase(phi: f64) -> DenseOperator {
    DenseOperator::from_fn(2, |i, j| match (i, j) {
        (0, 0) => Complex64::from_polar(1.0, phi),
        (1, 1) => Complex64::from_polar(1.0, -phi),
        _ => Complex64::ZERO,
    })
}

/// Shared residual for the fractional/unequal sandwich identity
/// `U_C(t) = exp(i beta sigma_3) U_G^Q exp(i (pi/2 + beta) sigma_3)`,
/// compared modulo a global phase.
fn sandwich_residual(n: usize, a1: f64, t: f64) -> Result<f64> {
    let params = equivalent_walk_params(n, a1, t)?;
    let u_c = continuous_evolution(n, a1, t)?;
    let discrete = diagonal_phase(params.beta)
        .matmul(&walk_power(n, params.power)?)?
        .matmul(&diagonal_phase(FRAC_PI_2 + params.beta))?;
    operator_distance_mod_phase(&u_c, &discrete, NormKind::Spectral)
}

/// Residual of the end-point identity: the continuous evolution with equal
/// weights for duration `T = (pi/2) sqrt(N)` equals `i (1 - 2|t><t|)` times
/// the walk raised to `acos(1/sqrt(N)) / alpha`. Compared directly (the
/// trace-part conventions already cancel every phase).
pub fn equivalence_check_integral(n: usize) -> Result<f64> {
    let nf = require_items(n)?;
    let t_total = FRAC_PI_2 * nf.sqrt();
    let u_c = continuous_evolution(n, 1.0, t_total)?;
    let q_end = (1.0 / nf.sqrt()).acos() / walk_angle(n)?;
    let walk = walk_power(n, q_end)?;
    // i (1 - 2|t><t|) = diag(-i, i).
    let reflect = DenseOperator::from_fn(2, |i, j| match (i, j) {
        (0, 0) => Complex64::new(0.0, -1.0),
        (1, 1) => Complex64::new(0.0, 1.0),
        _ => Complex64::ZERO,
    });
    operator_distance(&u_c, &reflect.matmul(&walk)?, NormKind::Spectral)
}

/// Residual of the sandwich identity for equal weights (`a1 = 1`) at an
/// intermediate duration `0 <= t`, `t / sqrt(N) < pi/2`; compared modulo a
/// global phase.
pub fn equivalence_check_fractional(n: usize, t: f64) -> Result<f64> {
    sandwich_residual(n, 1.0, t)
}

/// Residual of the sandwich identity for general weight `a1` in `[-1, 1]` at
/// duration `t` inside the principal window `speed * t < pi/2`; compared
/// modulo a global phase.
pub fn equivalence_check_unequal(n: usize, a1: f64, t: f64) -> Result<f64> {
    sandwich_residual(n, a1, t)
}

// ---------------------------------------------------------------------------
// Bloch-sphere views of the frame
// ---------------------------------------------------------------------------

/// Point on the frame Bloch sphere.
#[derive(Debug, Clone, Copy)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// Euclidean length; 1 for normalized pure states.
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Euclidean dot product with another Bloch vector.
    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

/// Maps a two-component state to its Bloch vector
/// `(2 Re(conj(psi_0) psi_1), 2 Im(conj(psi_0) psi_1), |psi_0|^2 - |psi_1|^2)`;
/// unit vectors map to unit Bloch vectors.
pub fn bloch_map(state: &StateVector) -> Result<BlochVector> {
    if state.dim() != 2 {
        return Err(HamsimError::DimensionMismatch { expected: 2, got: state.dim() });
    }
    let cross = state.amps[0].conj() * state.amps[1];
    Ok(BlochVector {
        x: 2.0 * cross.re,
        y: 2.0 * cross.im,
        z: state.amps[0].norm_sqr() - state.amps[1].norm_sqr(),
    })
}

/// Rotation angle and axis of a 2x2 special-unitary frame matrix written as
/// `U = cos(theta) I - i sin(theta) (nhat . sigma)`. Returns the angle in
/// `[0, pi]` and the unit axis; a matrix within `1e-15` of `+/- I` has no
/// defined axis and reports the z axis with angle `0` (or `pi`).
pub fn rotation_axis(u: &DenseOperator) -> Result<(f64, BlochVector)> {
    if u.dim() != 2 {
        return Err(HamsimError::DimensionMismatch { expected: 2, got: u.dim() });
    }
    let (u00, u01) = (u.get(0, 0), u.get(0, 1));
    let (u10, u11) = (u.get(1, 0), u.get(1, 1));
    let cos_theta = 0.5 * (u00.re + u11.re);
    // U = c I - i (x s1 + y s2 + z s3) gives u01 = -y - i x, u10 = y - i x,
    // u00 = c - i z, u11 = c + i z.
    let x = -0.5 * (u01.im + u10.im);
    let y = 0.5 * (u10.re - u01.re);
    let z = 0.5 * (u11.im - u00.im);
    let sin_theta = (x * x + y * y + z * z).sqrt();
    if sin_theta < 1e-15 {
        let theta = if cos_theta >= 0.0 { 0.0 } else { std::f64::consts::PI };
        return Ok((theta, BlochVector { x: 0.0, y: 0.0, z: 1.0 }));
    }
    Ok((
        sin_theta.atan2(cos_theta),
        BlochVector { x: x / sin_theta, y: y / sin_theta, z: z / sin_theta },
    ))
}
