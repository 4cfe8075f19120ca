//! Chebyshev-expansion propagator for general Hermitian operators.
//!
//! The evolution `exp(−iHt)` is computed by enclosing the spectrum in a
//! window `[λ_min, λ_max]`, mapping it linearly onto `[−1, 1]`
//! (`H̃ = (2H − (λ_max+λ_min)I)/(λ_max−λ_min)`, `t̃ = t(λ_max−λ_min)/2`),
//! and expanding `exp(−iH̃t̃) = Σ_k C_k(t̃) T_k(H̃)` in Chebyshev polynomials
//! with Bessel-function coefficients `C_0 = J_0(t̃)`, `C_k = 2(−i)^k J_k(t̃)`.
//! The polynomial sum is evaluated with Clenshaw's reverse recursion, costing
//! exactly one `H̃` application per expansion order.
//!
//! Two strategies are provided: a stepped mode that subdivides `t` so the
//! per-step rescaled time is `π` and reuses the reflection-series truncation
//! bound, and a one-shot mode that evaluates the whole interval with a single
//! (higher-order) expansion.

use num_complex::Complex64;

use crate::bessel::bessel_table;
use crate::error::{HamsimError, Result};
use crate::linalg::{DenseOperator, StateVector, HERMITICITY_TOL};
use crate::models::{Block, BlockDiagonalPart};
use crate::series::{truncation_order, SeriesScheme};
use crate::trotter::ceil_with_snap;

/// Largest one-shot expansion order searched.
pub const ONE_SHOT_ORDER_CAP: usize = 512;

/// A guaranteed enclosure `[λ_min, λ_max]` of an operator's spectrum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralWindow {
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl SpectralWindow {
    pub fn new(lambda_min: f64, lambda_max: f64) -> Result<Self> {
        if !lambda_min.is_finite() || !lambda_max.is_finite() || lambda_max < lambda_min {
            return Err(HamsimError::invalid(format!(
                "spectral window bounds must be finite with λ_max ≥ λ_min, got [{lambda_min}, {lambda_max}]"
            )));
        }
        Ok(SpectralWindow {
            lambda_min,
            lambda_max,
        })
    }

    pub fn width(&self) -> f64 {
        self.lambda_max - self.lambda_min
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lambda_max + self.lambda_min)
    }

    /// A zero-width window pins the operator to a scalar: evolution is a pure
    /// phase.
    pub fn is_degenerate(&self) -> bool {
        self.width() == 0.0
    }
}

/// Borrowed view of a Hamiltonian, either dense or as a sum of block
/// structured parts, so the propagator can apply it without materializing.
pub enum HamiltonianRef<'a> {
    Dense(&'a DenseOperator),
    Parts(&'a [BlockDiagonalPart]),
}

impl HamiltonianRef<'_> {
    pub fn dim(&self) -> Result<usize> {
        match self {
            HamiltonianRef::Dense(h) => Ok(h.dim()),
            HamiltonianRef::Parts(parts) => {
                let first = parts.first().ok_or_else(|| {
                    HamsimError::invalid("a part-sum Hamiltonian needs at least one part")
                })?;
                for part in *parts {
                    if part.dim() != first.dim() {
                        return Err(HamsimError::DimensionMismatch {
                            expected: first.dim(),
                            got: part.dim(),
                        });
                    }
                }
                Ok(first.dim())
            }
        }
    }

    /// `H x` (dense multiply, or the accumulated sum of part applications).
    pub fn apply(&self, x: &StateVector) -> Result<StateVector> {
        match self {
            HamiltonianRef::Dense(h) => h.apply(x),
            HamiltonianRef::Parts(parts) => {
                let mut out = StateVector::zeros(x.dim());
                for part in *parts {
                    let px = part.apply(x)?;
                    out.axpy(Complex64::ONE, &px);
                }
                Ok(out)
            }
        }
    }
}

/// Gershgorin-disc spectral enclosure: every eigenvalue lies within
/// `diag ± Σ|off-diagonal|` of some row, so the min/max over rows bound the
/// spectrum.  Exact for diagonal operators.
pub fn spectral_bounds(h: &HamiltonianRef) -> Result<SpectralWindow> {
    let dim = h.dim()?;
    let mut diag = vec![0.0f64; dim];
    let mut off = vec![0.0f64; dim];
    match h {
        HamiltonianRef::Dense(op) => {
            let dev = op.hermiticity_deviation();
            if dev > HERMITICITY_TOL {
                return Err(HamsimError::NotHermitian { deviation: dev });
            }
            for r in 0..dim {
                diag[r] = op.get(r, r).re;
                for c in 0..dim {
                    if c != r {
                        off[r] += op.get(r, c).norm();
                    }
                }
            }
        }
        HamiltonianRef::Parts(parts) => {
            for part in *parts {
                for block in part.blocks() {
                    match *block {
                        Block::Diag { index, value } => diag[index] += value,
                        Block::Pair {
                            i,
                            j,
                            hii,
                            hjj,
                            hij,
                        } => {
                            diag[i] += hii;
                            diag[j] += hjj;
                            off[i] += hij.norm();
                            off[j] += hij.norm();
                        }
                    }
                }
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in 0..dim {
        lo = lo.min(diag[r] - off[r]);
        hi = hi.max(diag[r] + off[r]);
    }
    SpectralWindow::new(lo, hi)
}

/// Scalars of the window transformation: rescaled total time
/// `t̃ = t·(λ_max−λ_min)/2` and the global phase `e^{−i(λ_max+λ_min)t/2}`
/// satisfying `exp(−iHt) = phase · exp(−iH̃t̃)`.
#[derive(Debug, Clone, Copy)]
pub struct Rescaled {
    pub t_tilde: f64,
    pub global_phase: Complex64,
}

pub fn rescale(t: f64, window: &SpectralWindow) -> Rescaled {
    Rescaled {
        t_tilde: t * window.width() / 2.0,
        global_phase: Complex64::from_polar(1.0, -window.center() * t),
    }
}

/// Dense realization of `H̃ = (2H − (λ_max+λ_min)I)/(λ_max−λ_min)`; rejects
/// degenerate windows (those evolve by a pure phase instead).
pub fn rescaled_dense(h: &DenseOperator, window: &SpectralWindow) -> Result<DenseOperator> {
    if window.is_degenerate() {
        return Err(HamsimError::invalid(
            "degenerate spectral window has no rescaled operator; evolution is a pure phase",
        ));
    }
    let w = window.width();
    let c = window.center();
    Ok(DenseOperator::from_fn(h.dim(), |r, col| {
        let mut v = h.get(r, col) * (2.0 / w);
        if r == col {
            v -= Complex64::new(2.0 * c / w, 0.0);
        }
        v
    }))
}

/// Expansion coefficients `C_0 = J_0(t̃)`, `C_k = 2(−i)^k J_k(t̃)` for
/// `exp(−iH̃t̃) = Σ_k C_k T_k(H̃)`.  All magnitudes are ≤ 2.
pub fn chebyshev_coefficients(t_tilde: f64, p: usize) -> Result<Vec<Complex64>> {
    let table = bessel_table(t_tilde, p)?;
    let minus_i = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    Ok((0..=p)
        .map(|k| {
            let scale = if k == 0 { 1.0 } else { 2.0 };
            minus_i[k % 4] * (scale * table.j(k))
        })
        .collect())
}

/// Clenshaw evaluation of `Σ_{k=0}^p C_k T_k(H̃) x` with exactly `p`
/// applications of `H̃`: `y_k = C_k x + 2H̃y_{k+1} − y_{k+2}` downward from
/// `k = p−1` (seeded by `y_p = C_p x`, `y_{p+1} = 0`), finishing with
/// `(C_0 x + y_0 − y_2)/2`.
pub fn clenshaw_apply<F>(h_apply: F, coeffs: &[Complex64], x: &StateVector) -> Result<StateVector>
where
    F: Fn(&StateVector) -> Result<StateVector>,
{
    if coeffs.is_empty() {
        return Err(HamsimError::invalid(
            "Clenshaw evaluation needs at least the order-0 coefficient",
        ));
    }
    let p = coeffs.len() - 1;
    if p == 0 {
        return Ok(x.scaled(coeffs[0]));
    }
    let mut y_next = x.scaled(coeffs[p]); // y_{k+1}
    let mut y_after = StateVector::zeros(x.dim()); // y_{k+2}
    for k in (0..p).rev() {
        let mut y = h_apply(&y_next)?.scaled(Complex64::new(2.0, 0.0));
        y.axpy(coeffs[k], x);
        y.axpy(-Complex64::ONE, &y_after);
        if k == 0 {
            let mut out = x.scaled(coeffs[0]);
            out.axpy(Complex64::ONE, &y);
            out.axpy(-Complex64::ONE, &y_after);
            return Ok(out.scaled(Complex64::new(0.5, 0.0)));
        }
        y_after = std::mem::replace(&mut y_next, y);
    }
    unreachable!("loop returns at k = 0");
}

/// One-step truncation bound `t̃^{p+1}/(2^p (p+1)!) · (1 − t̃/(2(p+2)))^{−1}`
/// for the Chebyshev tail beyond order `p`; `+∞` where the geometric guard is
/// infeasible.
pub fn one_shot_bound(t_tilde: f64, p: usize) -> Result<f64> {
    if !t_tilde.is_finite() || t_tilde < 0.0 {
        return Err(HamsimError::invalid(
            "rescaled time must be finite and non-negative",
        ));
    }
    let guard = 1.0 - t_tilde / (2.0 * (p + 2) as f64);
    if guard <= 0.0 {
        return Ok(f64::INFINITY);
    }
    // t̃^{p+1}/(2^p (p+1)!) = 2·(t̃/2)^{p+1}/(p+1)! as a running product.
    let base = t_tilde / 2.0;
    let mut pow_fact = base;
    for j in 2..=(p + 1) {
        pow_fact *= base / j as f64;
    }
    Ok(2.0 * pow_fact / guard)
}

/// Minimal order satisfying [`one_shot_bound`] `< eps` subject to the decay
/// requirement `p > e·t̃/2` (below it the expansion terms have not yet entered
/// their factorial decay and the bound is not meaningful).
pub fn one_shot_order(t_tilde: f64, eps: f64) -> Result<usize> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(HamsimError::invalid("error target must be positive"));
    }
    if t_tilde == 0.0 {
        return Ok(0);
    }
    let start = (std::f64::consts::E * t_tilde / 2.0).floor() as usize + 1;
    for p in start..=ONE_SHOT_ORDER_CAP {
        if one_shot_bound(t_tilde, p)? < eps {
            return Ok(p);
        }
    }
    Err(HamsimError::budget(format!(
        "no one-shot order ≤ {ONE_SHOT_ORDER_CAP} meets {eps:.3e} at rescaled time {t_tilde:.3}"
    )))
}

/// Practical truncation-order heuristic `p = 2ln(t/ε)/ln(ln(t/ε))`, reported
/// alongside the rigorous bound for comparison.  Requires `t/ε > e`.
pub fn heuristic_order(t: f64, eps: f64) -> Result<usize> {
    if t.is_nan() || t <= 0.0 || eps.is_nan() || eps <= 0.0 {
        return Err(HamsimError::invalid(
            "heuristic order needs positive time and error target",
        ));
    }
    let x = (t / eps).ln();
    if x <= 1.0 {
        return Err(HamsimError::invalid(
            "heuristic order needs t/ε > e for a positive double logarithm",
        ));
    }
    Ok((2.0 * x / x.ln()).ceil() as usize)
}

/// Evolution strategy: subdivide so the per-step rescaled time is `π`, or
/// expand the whole interval at once.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChebyshevMode {
    Stepped,
    OneShot,
}

/// A fully resolved propagation: window, rescaling scalars, step split, and
/// the coefficient table shared by every step.
#[derive(Debug, Clone)]
pub struct ChebyshevPlan {
    pub window: SpectralWindow,
    pub mode: ChebyshevMode,
    pub t: f64,
    /// Total rescaled time `t·width/2`.
    pub t_tilde: f64,
    /// Rescaled time advanced per step (equals `t_tilde` in one-shot mode).
    pub t_tilde_step: f64,
    /// `e^{−i·center·t}`, the accumulated window phase over the full run.
    pub global_phase: Complex64,
    /// Wall-clock time advanced per step (`t/m`).
    pub dt: f64,
    pub m: u64,
    pub order: usize,
    /// `C_0 … C_p` at `t_tilde_step`.
    pub coeffs: Vec<Complex64>,
}

impl ChebyshevPlan {
    pub fn new(window: SpectralWindow, t: f64, eps: f64, mode: ChebyshevMode) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(HamsimError::invalid(
                "evolution time must be finite and non-negative",
            ));
        }
        if !eps.is_finite() || eps <= 0.0 {
            return Err(HamsimError::invalid("error target must be positive"));
        }
        let Rescaled {
            t_tilde,
            global_phase,
        } = rescale(t, &window);
        if t_tilde == 0.0 {
            // Degenerate window or zero time: pure phase, no polynomial work.
            return Ok(ChebyshevPlan {
                window,
                mode,
                t,
                t_tilde: 0.0,
                t_tilde_step: 0.0,
                global_phase,
                dt: t,
                m: 1,
                order: 0,
                coeffs: vec![Complex64::ONE],
            });
        }
        let width = window.width();
        let (m, dt, t_tilde_step, order) = match mode {
            ChebyshevMode::Stepped => {
                let dt_target = 2.0 * std::f64::consts::PI / width;
                let m = ceil_with_snap(t / dt_target).max(1);
                let dt = t / m as f64;
                let t_tilde_step = t_tilde / m as f64;
                let order = truncation_order(SeriesScheme::Reflection, t_tilde, t_tilde_step, eps)?;
                (m, dt, t_tilde_step, order)
            }
            ChebyshevMode::OneShot => {
                let order = one_shot_order(t_tilde, eps)?;
                (1, t, t_tilde, order)
            }
        };
        let coeffs = chebyshev_coefficients(t_tilde_step, order)?;
        Ok(ChebyshevPlan {
            window,
            mode,
            t,
            t_tilde,
            t_tilde_step,
            global_phase,
            dt,
            m,
            order,
            coeffs,
        })
    }

    /// Applications of the (rescaled) Hamiltonian over the whole run.
    pub fn part_applications(&self) -> u64 {
        self.m * self.order as u64
    }
}

/// Evolves `x` under `exp(−iHt)` to accuracy `eps` with the Chebyshev
/// expansion.  The spectral window defaults to the Gershgorin enclosure;
/// callers with sharper knowledge (e.g. `[0, 2]` for the half-Laplacian) may
/// override it.  Returns the evolved state together with the resolved plan.
pub fn evolve_chebyshev(
    h: &HamiltonianRef,
    t: f64,
    eps: f64,
    mode: ChebyshevMode,
    window: Option<SpectralWindow>,
    x: &StateVector,
) -> Result<(StateVector, ChebyshevPlan)> {
    let dim = h.dim()?;
    if dim != x.dim() {
        return Err(HamsimError::DimensionMismatch {
            expected: dim,
            got: x.dim(),
        });
    }
    let window = match window {
        Some(w) => w,
        None => spectral_bounds(h)?,
    };
    let plan = ChebyshevPlan::new(window, t, eps, mode)?;
    if plan.t_tilde == 0.0 {
        return Ok((x.scaled(plan.global_phase), plan));
    }
    let width = window.width();
    let center = window.center();
    let h_tilde = |v: &StateVector| -> Result<StateVector> {
        let mut out = h.apply(v)?.scaled(Complex64::new(2.0 / width, 0.0));
        out.axpy(Complex64::new(-2.0 * center / width, 0.0), v);
        Ok(out)
    };
    let step_phase = Complex64::from_polar(1.0, -center * plan.dt);
    let mut y = x.clone();
    for _ in 0..plan.m {
        y = clenshaw_apply(h_tilde, &plan.coeffs, &y)?.scaled(step_phase);
    }
    Ok((y, plan))
}
