//! Product-formula propagators over colored block-diagonal parts: the
//! first-order split `exp(−iH_l Δt)···exp(−iH_1 Δt)` and the palindromic
//! symmetric split, plus commutator-based error estimators, step-count
//! selection, and the repetition/majority-rule cost estimator.
//!
//! Each part exponential is computed blockwise in closed form (a phase for a
//! 1×1 block, the axis-angle formula for a 2×2 Hermitian block), so a step
//! costs one pass over the blocks per part and is exactly unitary.

use num_complex::Complex64;

use crate::error::{HamsimError, Result};
use crate::linalg::{spectral_norm, DenseOperator, StateVector};
use crate::models::{Block, BlockDiagonalPart};

/// Hard cap on the repetition-count search in [`repetition_cost`]; for
/// per-run error ≥ 1/4 the majority-rule failure bound stops shrinking, so
/// enumeration past this point cannot succeed.
pub const REPETITION_CAP: u64 = 9_999;

/// Which product formula a step uses, labeled by the exponent `k` of its
/// leading error term `E^(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductFormula {
    /// `exp(−iH_l Δt)···exp(−iH_1 Δt)`; leading error `E^(2) Δt²` per step.
    First,
    /// Palindromic half-step product; leading error `E^(3) Δt³` per step.
    Symmetric,
}

impl ProductFormula {
    /// The error exponent `k` of the leading per-step defect `E^(k) Δt^k`.
    pub fn error_exponent(&self) -> u32 {
        match self {
            ProductFormula::First => 2,
            ProductFormula::Symmetric => 3,
        }
    }

    /// Number of part exponentials applied per step for `l` parts.
    pub fn applications_per_step(&self, l: usize) -> usize {
        match self {
            ProductFormula::First => l,
            ProductFormula::Symmetric => {
                if l == 0 {
                    0
                } else {
                    2 * l - 1
                }
            }
        }
    }

    pub fn from_error_exponent(k: u32) -> Result<Self> {
        match k {
            2 => Ok(ProductFormula::First),
            3 => Ok(ProductFormula::Symmetric),
            _ => Err(HamsimError::invalid(format!(
                "product-formula error exponent must be 2 or 3, got {k}"
            ))),
        }
    }
}

enum CachedBlock {
    Phase { index: usize, phase: Complex64 },
    /// Row-major 2×2 unitary acting on the amplitude pair `(i, j)`.
    Unitary { i: usize, j: usize, u: [Complex64; 4] },
}

/// The exponential `exp(−iH Δt)` of one block-diagonal part, cached
/// blockwise.  Indices not covered by a block are left unchanged
/// (their diagonal value is 0, whose phase is 1).
pub struct PartPropagator {
    dim: usize,
    blocks: Vec<CachedBlock>,
}

impl PartPropagator {
    pub fn new(part: &BlockDiagonalPart, dt: f64) -> Self {
        let mut blocks = Vec::with_capacity(part.blocks().len());
        for block in part.blocks() {
            match *block {
                Block::Diag { index, value } => {
                    blocks.push(CachedBlock::Phase {
                        index,
                        phase: Complex64::from_polar(1.0, -value * dt),
                    });
                }
                Block::Pair { i, j, hii, hjj, hij } => {
                    // H = c0·I + c⃗·σ with c⃗ = (Re hij, −Im hij, (hii−hjj)/2);
                    // exp(−iHΔt) = e^{−ic0Δt}(cos(rΔt) I − i sin(rΔt) ĉ·σ).
                    let c0 = 0.5 * (hii + hjj);
                    let c = [hij.re, -hij.im, 0.5 * (hii - hjj)];
                    let r = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
                    let phase = Complex64::from_polar(1.0, -c0 * dt);
                    let zero = Complex64::new(0.0, 0.0);
                    let u = if r == 0.0 {
                        [phase, zero, zero, phase]
                    } else {
                        let (sin, cos) = (r * dt).sin_cos();
                        let n = [c[0] / r, c[1] / r, c[2] / r];
                        let msin = Complex64::new(0.0, -sin);
                        [
                            phase * (Complex64::new(cos, 0.0) + msin * n[2]),
                            phase * msin * Complex64::new(n[0], -n[1]),
                            phase * msin * Complex64::new(n[0], n[1]),
                            phase * (Complex64::new(cos, 0.0) - msin * n[2]),
                        ]
                    };
                    blocks.push(CachedBlock::Unitary { i, j, u });
                }
            }
        }
        Self {
            dim: part.dim(),
            blocks,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply_in_place(&self, x: &mut StateVector) -> Result<()> {
        if x.dim() != self.dim {
            return Err(HamsimError::DimensionMismatch {
                expected: self.dim,
                got: x.dim(),
            });
        }
        for block in &self.blocks {
            match *block {
                CachedBlock::Phase { index, phase } => {
                    x.amps[index] *= phase;
                }
                CachedBlock::Unitary { i, j, u } => {
                    let a = x.amps[i];
                    let b = x.amps[j];
                    x.amps[i] = u[0] * a + u[1] * b;
                    x.amps[j] = u[2] * a + u[3] * b;
                }
            }
        }
        Ok(())
    }

    pub fn apply(&self, x: &StateVector) -> Result<StateVector> {
        let mut y = x.clone();
        self.apply_in_place(&mut y)?;
        Ok(y)
    }
}

/// One product-formula step with all part exponentials cached.
///
/// Parts are normalized to ascending color order internally, so the step is
/// independent of the order the caller lists them in; for the symmetric
/// formula this makes the palindromic symmetry hold bit-for-bit.
pub struct TrotterStepper {
    dim: usize,
    sequence: Vec<PartPropagator>,
}

impl TrotterStepper {
    pub fn new(parts: &[BlockDiagonalPart], dt: f64, formula: ProductFormula) -> Result<Self> {
        let Some(first) = parts.first() else {
            return Err(HamsimError::invalid("at least one part is required"));
        };
        let dim = first.dim();
        for part in parts {
            if part.dim() != dim {
                return Err(HamsimError::DimensionMismatch {
                    expected: dim,
                    got: part.dim(),
                });
            }
        }
        if !dt.is_finite() {
            return Err(HamsimError::invalid("step size must be finite"));
        }
        let mut ordered: Vec<&BlockDiagonalPart> = parts.iter().collect();
        ordered.sort_by_key(|p| p.color());
        let sequence = match formula {
            ProductFormula::First => ordered
                .iter()
                .map(|p| PartPropagator::new(p, dt))
                .collect(),
            ProductFormula::Symmetric => {
                if ordered.len() == 1 {
                    vec![PartPropagator::new(ordered[0], dt)]
                } else {
                    // Half steps descending to the first part, its full step,
                    // then half steps ascending again: a palindrome with the
                    // two adjacent first-part halves merged.
                    let mut seq = Vec::with_capacity(2 * ordered.len() - 1);
                    for p in ordered.iter().skip(1).rev() {
                        seq.push(PartPropagator::new(p, 0.5 * dt));
                    }
                    seq.push(PartPropagator::new(ordered[0], dt));
                    for p in ordered.iter().skip(1) {
                        seq.push(PartPropagator::new(p, 0.5 * dt));
                    }
                    seq
                }
            }
        };
        Ok(Self { dim, sequence })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Part exponentials applied per step (`l` first-order, `2l−1` symmetric).
    pub fn applications_per_step(&self) -> usize {
        self.sequence.len()
    }

    pub fn step_in_place(&self, x: &mut StateVector) -> Result<()> {
        for prop in &self.sequence {
            prop.apply_in_place(x)?;
        }
        Ok(())
    }

    pub fn step(&self, x: &StateVector) -> Result<StateVector> {
        let mut y = x.clone();
        self.step_in_place(&mut y)?;
        Ok(y)
    }

    pub fn evolve(&self, steps: u64, x: &StateVector) -> Result<StateVector> {
        let mut y = x.clone();
        for _ in 0..steps {
            self.step_in_place(&mut y)?;
        }
        Ok(y)
    }
}

/// One first-order step: applies `exp(−iH_l Δt)···exp(−iH_1 Δt)` to `x`,
/// parts taken in ascending color order.
pub fn trotter_step_first(
    parts: &[BlockDiagonalPart],
    dt: f64,
    x: &StateVector,
) -> Result<StateVector> {
    TrotterStepper::new(parts, dt, ProductFormula::First)?.step(x)
}

/// One symmetric step: half steps down the color order, a full step of the
/// first part, then half steps back up.  Applying the same step with `−Δt`
/// inverts it.
pub fn trotter_step_symmetric(
    parts: &[BlockDiagonalPart],
    dt: f64,
    x: &StateVector,
) -> Result<StateVector> {
    TrotterStepper::new(parts, dt, ProductFormula::Symmetric)?.step(x)
}

/// A full evolution plan: `m` uniform steps of size `Δt = t/m`.
pub struct TrotterPlan {
    parts: Vec<BlockDiagonalPart>,
    formula: ProductFormula,
    t: f64,
    dt: f64,
    m: u64,
}

impl TrotterPlan {
    /// Plans `m = ⌈t/Δt_cap⌉` steps of effective size `t/m ≤ Δt_cap`, so the
    /// evolution lands on `t` exactly.  A cap within one part in 10⁹ of an
    /// exact divisor is treated as exact.
    pub fn new(
        parts: Vec<BlockDiagonalPart>,
        t: f64,
        dt_cap: f64,
        formula: ProductFormula,
    ) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(HamsimError::invalid(format!(
                "evolution time must be finite and non-negative, got {t}"
            )));
        }
        if dt_cap.is_nan() || dt_cap <= 0.0 {
            return Err(HamsimError::invalid(format!(
                "step-size cap must be positive, got {dt_cap}"
            )));
        }
        let m = ceil_with_snap(t / dt_cap).max(1);
        Self::with_steps(parts, t, m, formula)
    }

    /// Plans exactly `m` steps of size `t/m`.
    pub fn with_steps(
        parts: Vec<BlockDiagonalPart>,
        t: f64,
        m: u64,
        formula: ProductFormula,
    ) -> Result<Self> {
        if parts.is_empty() {
            return Err(HamsimError::invalid("at least one part is required"));
        }
        if m == 0 {
            return Err(HamsimError::invalid("step count must be positive"));
        }
        if !t.is_finite() || t < 0.0 {
            return Err(HamsimError::invalid(format!(
                "evolution time must be finite and non-negative, got {t}"
            )));
        }
        let dt = t / m as f64;
        Ok(Self {
            parts,
            formula,
            t,
            dt,
            m,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn formula(&self) -> ProductFormula {
        self.formula
    }

    pub fn parts(&self) -> &[BlockDiagonalPart] {
        &self.parts
    }

    /// Total part exponentials over the whole evolution.
    pub fn part_applications(&self) -> u64 {
        self.m * self.formula.applications_per_step(self.parts.len()) as u64
    }

    pub fn stepper(&self) -> Result<TrotterStepper> {
        TrotterStepper::new(&self.parts, self.dt, self.formula)
    }

    pub fn run(&self, x: &StateVector) -> Result<StateVector> {
        self.stepper()?.evolve(self.m, x)
    }
}

pub(crate) fn ceil_with_snap(x: f64) -> u64 {
    let snapped = if (x - x.round()).abs() < 1e-9 * x.abs().max(1.0) {
        x.round()
    } else {
        x.ceil()
    };
    if snapped < 0.0 {
        0
    } else {
        snapped as u64
    }
}

/// Leading-order discretisation error norms for a part decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterErrorEstimate {
    pub e2_norm: f64,
    pub e3_norm: f64,
}

impl TrotterErrorEstimate {
    /// Leading-order accumulated error `m^{1−k} t^k ‖E^(k)‖` for `m` steps
    /// covering time `t` with the formula of error exponent `k`.
    pub fn predicted_error(&self, t: f64, m: u64, k: u32) -> Result<f64> {
        let e = match k {
            2 => self.e2_norm,
            3 => self.e3_norm,
            _ => {
                return Err(HamsimError::invalid(format!(
                    "error exponent must be 2 or 3, got {k}"
                )))
            }
        };
        let mf = m.max(1) as f64;
        Ok(t.abs().powi(k as i32) * e / mf.powi(k as i32 - 1))
    }
}

/// Spectral norms of the leading (step-size-independent) error operators
///
/// `E^(2) = (i/2) Σ_{i<j} [H_i, H_j]`
///
/// `E^(3) = (1/24) Σ_{i<j} (2[H_i,[H_i,H_j]] + [H_j,[H_i,H_j]])
///        + (1/12) Σ_{i<j<k} (2[H_i,[H_j,H_k]] + [H_j,[H_i,H_k]])`
///
/// The inputs are materialized densely, so the usual dimension cap applies.
pub fn commutator_error_norms(parts: &[DenseOperator]) -> Result<TrotterErrorEstimate> {
    let Some(first) = parts.first() else {
        return Err(HamsimError::invalid("at least one part is required"));
    };
    let dim = first.dim();
    first.require_within_cap()?;
    for part in parts {
        if part.dim() != dim {
            return Err(HamsimError::DimensionMismatch {
                expected: dim,
                got: part.dim(),
            });
        }
    }
    let l = parts.len();
    let real = |v: f64| Complex64::new(v, 0.0);
    let mut sum2 = DenseOperator::zeros(dim);
    let mut sum3 = DenseOperator::zeros(dim);
    for i in 0..l {
        for j in (i + 1)..l {
            let cij = parts[i].commutator(&parts[j])?;
            sum2 = sum2.add(&cij)?;
            let nested_i = parts[i].commutator(&cij)?;
            let nested_j = parts[j].commutator(&cij)?;
            sum3 = sum3.add(&nested_i.scaled(real(2.0 / 24.0)))?;
            sum3 = sum3.add(&nested_j.scaled(real(1.0 / 24.0)))?;
            for k in (j + 1)..l {
                let cjk = parts[j].commutator(&parts[k])?;
                let cik = parts[i].commutator(&parts[k])?;
                let triple_i = parts[i].commutator(&cjk)?;
                let triple_j = parts[j].commutator(&cik)?;
                sum3 = sum3.add(&triple_i.scaled(real(2.0 / 12.0)))?;
                sum3 = sum3.add(&triple_j.scaled(real(1.0 / 12.0)))?;
            }
        }
    }
    Ok(TrotterErrorEstimate {
        e2_norm: 0.5 * spectral_norm(&sum2)?,
        e3_norm: spectral_norm(&sum3)?,
    })
}

/// Convenience wrapper materializing block-diagonal parts densely first.
pub fn commutator_error_norms_blocks(
    parts: &[BlockDiagonalPart],
) -> Result<TrotterErrorEstimate> {
    let dense: Vec<DenseOperator> = parts.iter().map(|p| p.to_dense()).collect();
    commutator_error_norms(&dense)
}

/// Smallest step count `m` with `m^{1−k} t^k E_norm ≤ ε₁` (the bound is
/// allowed to hold with equality).  A zero error norm needs a single step.
pub fn choose_steps(t: f64, eps1: f64, k: u32, e_norm: f64) -> Result<u64> {
    if !t.is_finite() || t <= 0.0 {
        return Err(HamsimError::invalid(format!(
            "evolution time must be positive, got {t}"
        )));
    }
    if eps1.is_nan() || eps1 <= 0.0 {
        return Err(HamsimError::invalid(format!(
            "per-run error budget must be positive, got {eps1}"
        )));
    }
    if !(k == 2 || k == 3) {
        return Err(HamsimError::invalid(format!(
            "error exponent must be 2 or 3, got {k}"
        )));
    }
    if !e_norm.is_finite() || e_norm < 0.0 {
        return Err(HamsimError::invalid(format!(
            "error norm must be finite and non-negative, got {e_norm}"
        )));
    }
    if e_norm == 0.0 {
        return Ok(1);
    }
    let raw = (t.powi(k as i32) * e_norm / eps1).powf(1.0 / (k as f64 - 1.0));
    Ok(ceil_with_snap(raw).max(1))
}

/// Majority-rule repetition estimator: the smallest odd `R` whose failure
/// bound `2^{R−1} ε₁^{⌈R/2⌉}` is at most the target `ε`, together with the
/// predicted cost of the repeated protocol relative to a direct first-order
/// run at the target accuracy (whose step count scales as `1/ε`):
/// `cost factor = R·ε/ε₁`.
///
/// The protocol itself is a cost estimator only; no stochastic runs happen.
pub fn repetition_cost(eps1: f64, eps: f64) -> Result<(u64, f64)> {
    if eps1.is_nan() || eps1 <= 0.0 || eps1 >= 0.5 {
        return Err(HamsimError::invalid(format!(
            "per-run error probability must lie in (0, 1/2), got {eps1}"
        )));
    }
    if eps.is_nan() || eps <= 0.0 || eps > eps1 {
        return Err(HamsimError::invalid(format!(
            "target probability must lie in (0, ε₁], got {eps}"
        )));
    }
    let ln_eps1 = eps1.ln();
    let ln_eps = eps.ln();
    let ln2 = std::f64::consts::LN_2;
    let mut r: u64 = 1;
    loop {
        // ln(2^{R−1} ε₁^{(R+1)/2}) for odd R.
        let ln_bound = (r - 1) as f64 * ln2 + r.div_ceil(2) as f64 * ln_eps1;
        if ln_bound <= ln_eps {
            return Ok((r, r as f64 * eps / eps1));
        }
        r += 2;
        if r > REPETITION_CAP {
            return Err(HamsimError::NoConvergence {
                what: format!(
                    "majority-rule bound never reaches {eps} (per-run error {eps1} shrinks the \
                     bound only for values below 1/4)"
                ),
            });
        }
    }
}
