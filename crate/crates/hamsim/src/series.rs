//! Alternating-word series propagators for Hamiltonians split into two
//! projector (or reflection) parts.
//!
//! The exact step operator factorizes into an identity term plus two families
//! of alternating operator words, `(H₁H₂H₁…)_k` and `(H₂H₁H₂…)_k`, weighted by
//! scalar coefficient tables:
//!
//! * projection scheme: `exp(−i(H₁+H₂)Δt) = I + Σ_k c_k(Δt)[(H₁H₂…)_k + (H₂H₁…)_k]`
//!   with `c_k(t) = (−1)^k e^{−it} Σ_{j≥k} (it)^j/j!`;
//! * reflection scheme: `exp(−i(H₁+H₂)Δt) = e^{−iΔt}[r₀ I + Σ_k r_k[(R₁R₂…)_k + (R₂R₁…)_k]]`
//!   with `R_i = I − 2H_i` and `r_k(t) = i^k J_k(t)`.
//!
//! Words are summed with nested Horner-like sweeps costing one part
//! application per word letter, so a truncation order `p` costs `2p` part
//! applications per time step.  The module also provides the truncation-order
//! bounds for both schemes, coefficient tables for unequal part weights
//! `a₁H₁ + a₂H₂` (integrated term-wise as truncated power series), and the
//! product-form ("BCH-like") coefficient tables used for cross-checks.

use num_complex::Complex64;

use crate::bessel::bessel_table;
use crate::error::{HamsimError, Result};
use crate::linalg::{DenseOperator, StateVector};
use crate::models::BlockDiagonalPart;
use crate::trotter::ceil_with_snap;

/// Largest per-step time argument accepted by the coefficient evaluators.
/// Beyond this the factorial tail sums would need more than ~200 terms and
/// the difference form loses its accuracy headroom.
pub const COEFF_TIME_CAP: f64 = 64.0;

/// Largest truncation order searched by [`truncation_order`] and accepted by
/// the evolvers.
pub const TRUNCATION_ORDER_CAP: usize = 200;

/// Relative size at which the forward tail sum for `c_k` is cut off.
const TAIL_REL_CUTOFF: f64 = 1e-20;

/// Largest order supported by the unequal-weight coefficient tables.
pub const UNEQUAL_ORDER_CAP: usize = 40;

/// Guard degree added on top of the requested order for the truncated power
/// series used by [`coeffs_unequal`].
const UNEQUAL_GUARD_DEGREE: usize = 30;

/// A table is rejected when the magnitude of its trailing series terms,
/// evaluated at the requested time, exceeds this.
const UNEQUAL_TAIL_TOL: f64 = 1e-13;

/// Number of trailing series terms summed for the tail estimate.
const UNEQUAL_TAIL_GUARD: usize = 5;

/// Which two-operator expansion a coefficient table belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesScheme {
    /// Equal-weight projector words with coefficients `c_k`.
    Projection,
    /// Equal-weight reflection words with coefficients `r_k` and the
    /// `e^{−it}` prefactor.
    Reflection,
    /// Projector words for `a₁H₁ + a₂H₂` with separate start-word tables.
    ProjectionUnequal,
    /// Reflection words for `exp(i(a₁R₁+a₂R₂)t/2)` with the
    /// `e^{−i(a₁+a₂)t/2}` prefactor completing `exp(−i(a₁H₁+a₂H₂)t)`.
    ReflectionUnequal,
    /// Product form `e^{−iH₁t} e^{−iH₂t} [I + Σ_{k≥2} …]`; the tables cover
    /// only the bracket, and the caller applies the two outer exponentials.
    BchForm,
}

impl SeriesScheme {
    pub fn name(self) -> &'static str {
        match self {
            SeriesScheme::Projection => "projection",
            SeriesScheme::Reflection => "reflection",
            SeriesScheme::ProjectionUnequal => "projection-unequal",
            SeriesScheme::ReflectionUnequal => "reflection-unequal",
            SeriesScheme::BchForm => "bch-form",
        }
    }
}

/// Evaluated coefficient tables for a two-operator alternating-word series at
/// a fixed time.
///
/// The represented operator is
/// `prefactor · (identity·I + Σ_{k=1..order} start_first[k]·W₁_k + start_second[k]·W₂_k)`
/// where `W₁_k` is the length-`k` alternating word starting with the first
/// operator and `W₂_k` the one starting with the second.  Index 0 of the
/// start-word tables is unused and holds zero.
#[derive(Debug, Clone)]
pub struct SeriesCoefficients {
    pub scheme: SeriesScheme,
    pub t: f64,
    pub order: usize,
    pub identity: Complex64,
    pub start_first: Vec<Complex64>,
    pub start_second: Vec<Complex64>,
    pub prefactor: Complex64,
}

fn check_time_cap(t: f64) -> Result<()> {
    if !t.is_finite() {
        return Err(HamsimError::invalid("series time must be finite"));
    }
    if t.abs() > COEFF_TIME_CAP {
        return Err(HamsimError::budget(format!(
            "per-step time {t:.3e} exceeds the coefficient cap {COEFF_TIME_CAP}"
        )));
    }
    Ok(())
}

/// Coefficient `c_k(t)` of the equal-weight projector expansion.
///
/// Evaluates `(−1)^k e^{−it} Σ_{j≥k} (it)^j/j!`: as a forward tail sum when
/// `k ≥ |t|` (terms decrease from the first), and through the complementary
/// partial sum `(−1)^k [1 − e^{−it} Σ_{j<k} (it)^j/j!]` when `k < |t|`, where
/// the coefficient itself is large and the partial sum carries no
/// cancellation.
pub fn coeff_projection(k: usize, t: f64) -> Result<Complex64> {
    check_time_cap(t)?;
    if k == 0 {
        return Ok(Complex64::ONE);
    }
    if t == 0.0 {
        return Ok(Complex64::ZERO);
    }
    let it = Complex64::new(0.0, t);
    let phase = Complex64::from_polar(1.0, -t);
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    if k as f64 >= t.abs() {
        // Tail form: term magnitudes decrease monotonically from j = k.
        let mut term = Complex64::ONE;
        for j in 1..=k {
            term *= it / j as f64;
        }
        let mut sum = term;
        let mut j = k;
        loop {
            j += 1;
            term *= it / j as f64;
            sum += term;
            if term.norm() <= TAIL_REL_CUTOFF * sum.norm().max(f64::MIN_POSITIVE) && j > k + 2 {
                break;
            }
        }
        Ok(phase * sum * sign)
    } else {
        // Difference form: the partial sum has monotonically growing terms,
        // so forward accumulation is relatively accurate, and the subtraction
        // from 1 is benign because the result is itself large.
        let mut term = Complex64::ONE;
        let mut partial = term;
        for j in 1..k {
            term *= it / j as f64;
            partial += term;
        }
        Ok((Complex64::ONE - phase * partial) * sign)
    }
}

/// Coefficient `r_k(t) = i^k J_k(t)` of the equal-weight reflection
/// expansion.  Negative times use `J_k(−t) = (−1)^k J_k(t)`.
pub fn coeff_reflection(k: usize, t: f64) -> Result<Complex64> {
    check_time_cap(t)?;
    let table = bessel_table(t.abs(), k)?;
    Ok(i_pow(k, t.signum()) * table.j(k))
}

/// `(±i)^k` for the reflection coefficient phase: `i^k` for `t ≥ 0` and
/// `(−i)^k` for `t < 0`.
fn i_pow(k: usize, sign: f64) -> Complex64 {
    let s = if sign < 0.0 { -1.0 } else { 1.0 };
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, s),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -s),
    }
}

/// Table `[c_0 … c_p]` of projection coefficients at a common time.
pub fn projection_coeff_table(t: f64, p: usize) -> Result<Vec<Complex64>> {
    if p > TRUNCATION_ORDER_CAP {
        return Err(HamsimError::budget(format!(
            "series order {p} exceeds cap {TRUNCATION_ORDER_CAP}"
        )));
    }
    (0..=p).map(|k| coeff_projection(k, t)).collect()
}

/// Table `[r_0 … r_p]` of reflection coefficients at a common time, from a
/// single downward-recursion Bessel pass.
pub fn reflection_coeff_table(t: f64, p: usize) -> Result<Vec<Complex64>> {
    if p > TRUNCATION_ORDER_CAP {
        return Err(HamsimError::budget(format!(
            "series order {p} exceeds cap {TRUNCATION_ORDER_CAP}"
        )));
    }
    check_time_cap(t)?;
    let table = bessel_table(t.abs(), p)?;
    Ok((0..=p)
        .map(|k| i_pow(k, t.signum()) * table.j(k))
        .collect())
}

/// Equal-weight projection tables packaged as [`SeriesCoefficients`].
pub fn coeffs_projection_series(t: f64, p: usize) -> Result<SeriesCoefficients> {
    let c = projection_coeff_table(t, p)?;
    let mut start = c.clone();
    start[0] = Complex64::ZERO;
    Ok(SeriesCoefficients {
        scheme: SeriesScheme::Projection,
        t,
        order: p,
        identity: Complex64::ONE,
        start_first: start.clone(),
        start_second: start,
        prefactor: Complex64::ONE,
    })
}

/// Equal-weight reflection tables packaged as [`SeriesCoefficients`]; the
/// prefactor `e^{−it}` completes `exp(−i(H₁+H₂)t)`.
pub fn coeffs_reflection_series(t: f64, p: usize) -> Result<SeriesCoefficients> {
    let r = reflection_coeff_table(t, p)?;
    let mut start = r.clone();
    start[0] = Complex64::ZERO;
    Ok(SeriesCoefficients {
        scheme: SeriesScheme::Reflection,
        t,
        order: p,
        identity: r[0],
        start_first: start.clone(),
        start_second: start,
        prefactor: Complex64::from_polar(1.0, -t),
    })
}

/// Splits a total evolution time into `m = ceil(t/dt_cap)` equal steps (with
/// a relative snap so exact multiples do not gain a spurious step) and
/// returns `(m, t/m)`.
pub fn series_steps(t: f64, dt_cap: f64) -> Result<(u64, f64)> {
    if !t.is_finite() || t < 0.0 {
        return Err(HamsimError::invalid(
            "evolution time must be finite and non-negative",
        ));
    }
    if !dt_cap.is_finite() || dt_cap <= 0.0 {
        return Err(HamsimError::invalid("step-size cap must be positive"));
    }
    let m = ceil_with_snap(t / dt_cap).max(1);
    Ok((m, t / m as f64))
}

/// Part applications consumed by an `m`-step order-`p` series run (two
/// `p`-letter sweeps per step).
pub fn series_part_applications(m: u64, p: usize) -> u64 {
    2 * m * p as u64
}

/// Sums `Σ_{k=1..p} coeffs[k] · (O₁O₂O₁…)_k x` for the alternating word whose
/// odd positions hold `first` and even positions hold `second`, by a nested
/// sweep: `u ← coeffs[p]·x`, then `u ← coeffs[k]·x + O_{k+1}u` for
/// `k = p−1 … 1`, and finally `O₁u`.  Costs exactly `p` part applications.
fn alternating_word_sum(
    first: &BlockDiagonalPart,
    second: &BlockDiagonalPart,
    coeffs: &[Complex64],
    x: &StateVector,
) -> Result<StateVector> {
    let p = coeffs.len() - 1;
    if p == 0 {
        return Ok(StateVector::zeros(x.dim()));
    }
    let op_at = |pos: usize| if pos % 2 == 1 { first } else { second };
    let mut u = x.scaled(coeffs[p]);
    for k in (1..p).rev() {
        let applied = op_at(k + 1).apply(&u)?;
        u = x.scaled(coeffs[k]);
        u.axpy(Complex64::ONE, &applied);
    }
    op_at(1).apply(&u)
}

fn check_series_args(
    a: &BlockDiagonalPart,
    b: &BlockDiagonalPart,
    order: usize,
    x: &StateVector,
) -> Result<()> {
    if a.dim() != b.dim() || a.dim() != x.dim() {
        return Err(HamsimError::DimensionMismatch {
            expected: a.dim(),
            got: if a.dim() != b.dim() { b.dim() } else { x.dim() },
        });
    }
    if order > TRUNCATION_ORDER_CAP {
        return Err(HamsimError::budget(format!(
            "series order {order} exceeds cap {TRUNCATION_ORDER_CAP}"
        )));
    }
    Ok(())
}

/// Evolves `x` under `exp(−i(P₁+P₂)t)` with the projector-word series:
/// `m = ceil(t/dt_cap)` steps of `I + Σ_{k≤p} c_k[(P₁P₂…)_k + (P₂P₁…)_k]`.
pub fn evolve_projection_series(
    p1: &BlockDiagonalPart,
    p2: &BlockDiagonalPart,
    t: f64,
    dt_cap: f64,
    order: usize,
    x: &StateVector,
) -> Result<StateVector> {
    check_series_args(p1, p2, order, x)?;
    for part in [p1, p2] {
        if !part.is_projector() {
            return Err(HamsimError::NotProjector {
                deviation: part.projector_deviation(),
            });
        }
    }
    let (m, dt) = series_steps(t, dt_cap)?;
    let coeffs = projection_coeff_table(dt, order)?;
    let mut y = x.clone();
    for _ in 0..m {
        let w1 = alternating_word_sum(p1, p2, &coeffs, &y)?;
        let w2 = alternating_word_sum(p2, p1, &coeffs, &y)?;
        y.axpy(Complex64::ONE, &w1);
        y.axpy(Complex64::ONE, &w2);
    }
    Ok(y)
}

/// Evolves `x` under `exp(−i(H₁+H₂)t)` for `H_i = (I−R_i)/2` with the
/// reflection-word series: `m = ceil(t/dt_cap)` steps of
/// `e^{−iΔt}[r₀ I + Σ_{k≤p} r_k((R₁R₂…)_k + (R₂R₁…)_k)]`.
pub fn evolve_reflection_series(
    r1: &BlockDiagonalPart,
    r2: &BlockDiagonalPart,
    t: f64,
    dt_cap: f64,
    order: usize,
    x: &StateVector,
) -> Result<StateVector> {
    check_series_args(r1, r2, order, x)?;
    for part in [r1, r2] {
        if !part.is_reflection() {
            return Err(HamsimError::NotReflection {
                deviation: part.reflection_deviation(),
            });
        }
    }
    let (m, dt) = series_steps(t, dt_cap)?;
    let coeffs = reflection_coeff_table(dt, order)?;
    let phase = Complex64::from_polar(1.0, -dt);
    let mut y = x.clone();
    for _ in 0..m {
        let w1 = alternating_word_sum(r1, r2, &coeffs, &y)?;
        let w2 = alternating_word_sum(r2, r1, &coeffs, &y)?;
        let mut stepped = y.scaled(coeffs[0]);
        stepped.axpy(Complex64::ONE, &w1);
        stepped.axpy(Complex64::ONE, &w2);
        y = stepped.scaled(phase);
    }
    Ok(y)
}

/// Truncation-error bound for an `m = ceil(t/dt)` step run at order `p`:
///
/// * projection: `2m·dt^{p+1}/(p+1)! · (1 − dt/(p+2))^{−2}`,
/// * reflection: `2m·dt^{p+1}/(2^{p+1}(p+1)!) · (1 − dt/(2(p+2)))^{−1}`.
///
/// Returns `+∞` when the geometric guard is infeasible at this `(dt, p)`
/// (i.e. `dt ≥ p+2` resp. `dt ≥ 2(p+2)`), so callers can treat the bound as
/// vacuous there.
pub fn truncation_bound(scheme: SeriesScheme, t: f64, dt: f64, p: usize) -> Result<f64> {
    if !dt.is_finite() || dt <= 0.0 {
        return Err(HamsimError::invalid("step size must be positive"));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(HamsimError::invalid(
            "evolution time must be finite and non-negative",
        ));
    }
    let m = (t / dt).ceil();
    // Running product dt^{p+1}/(p+1)! (or with dt/2) avoids overflow of the
    // separate factors.
    let base = match scheme {
        SeriesScheme::Projection => dt,
        SeriesScheme::Reflection => dt / 2.0,
        other => {
            return Err(HamsimError::invalid(format!(
                "truncation bound applies to the projection and reflection schemes, not {}",
                other.name()
            )))
        }
    };
    let mut pow_fact = base;
    for j in 2..=(p + 1) {
        pow_fact *= base / j as f64;
    }
    let bound = match scheme {
        SeriesScheme::Projection => {
            let guard = 1.0 - dt / (p + 2) as f64;
            if guard <= 0.0 {
                return Ok(f64::INFINITY);
            }
            2.0 * m * pow_fact / (guard * guard)
        }
        SeriesScheme::Reflection => {
            let guard = 1.0 - dt / (2.0 * (p + 2) as f64);
            if guard <= 0.0 {
                return Ok(f64::INFINITY);
            }
            2.0 * m * pow_fact / guard
        }
        _ => unreachable!(),
    };
    Ok(bound)
}

/// Minimal truncation order `p` whose [`truncation_bound`] falls below `eps`,
/// skipping orders where the bound is vacuous.
pub fn truncation_order(scheme: SeriesScheme, t: f64, dt: f64, eps: f64) -> Result<usize> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(HamsimError::invalid("error target must be positive"));
    }
    for p in 0..=TRUNCATION_ORDER_CAP {
        let bound = truncation_bound(scheme, t, dt, p)?;
        if bound < eps {
            return Ok(p);
        }
    }
    Err(HamsimError::budget(format!(
        "no order ≤ {TRUNCATION_ORDER_CAP} meets the {} bound {eps:.3e} at dt {dt:.3e}",
        scheme.name()
    )))
}

/// Dense realization of the operator described by a coefficient table:
/// `prefactor·(identity·I + Σ_k start_first[k]·W₁_k + start_second[k]·W₂_k)`.
/// Intended for cross-checks at small dimension; the per-step evolvers never
/// materialize operators.
pub fn series_operator_dense(
    coeffs: &SeriesCoefficients,
    op1: &DenseOperator,
    op2: &DenseOperator,
) -> Result<DenseOperator> {
    if op1.dim() != op2.dim() {
        return Err(HamsimError::DimensionMismatch {
            expected: op1.dim(),
            got: op2.dim(),
        });
    }
    let dim = op1.dim();
    let mut total = DenseOperator::identity(dim).scaled(coeffs.identity);
    let mut w1 = DenseOperator::identity(dim);
    let mut w2 = DenseOperator::identity(dim);
    for k in 1..=coeffs.order {
        let (o1, o2) = if k % 2 == 1 { (op1, op2) } else { (op2, op1) };
        w1 = w1.matmul(o1)?;
        w2 = w2.matmul(o2)?;
        total = total.add(&w1.scaled(coeffs.start_first[k]))?;
        total = total.add(&w2.scaled(coeffs.start_second[k]))?;
    }
    Ok(total.scaled(coeffs.prefactor))
}

/// Truncated power series in `t` with complex coefficients, evaluated by
/// Horner's method with an explicit trailing-term magnitude estimate.
struct TruncatedPowerSeries {
    coef: Vec<Complex64>,
}

impl TruncatedPowerSeries {
    fn eval(&self, t: f64) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &c in self.coef.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    /// Magnitude of the last `guard` stored terms at `t`, used as a proxy for
    /// the truncation remainder.
    fn tail_magnitude(&self, t: f64, guard: usize) -> f64 {
        let n = self.coef.len();
        let lo = n.saturating_sub(guard);
        let mut tp = t.abs().powi(lo as i32);
        let mut sum = 0.0;
        for &c in &self.coef[lo..] {
            sum += c.norm() * tp;
            tp *= t.abs();
        }
        sum
    }

    fn derivative(&self) -> TruncatedPowerSeries {
        let coef = self
            .coef
            .iter()
            .enumerate()
            .skip(1)
            .map(|(m, &c)| c * m as f64)
            .collect();
        TruncatedPowerSeries { coef }
    }
}

fn check_unequal_args(a1: f64, a2: f64, t: f64, p: usize) -> Result<()> {
    check_time_cap(t)?;
    for (name, a) in [("a1", a1), ("a2", a2)] {
        if !a.is_finite() || a.abs() > 1.0 {
            return Err(HamsimError::invalid(format!(
                "part weight {name} must lie in [-1, 1], got {a}"
            )));
        }
    }
    if p > UNEQUAL_ORDER_CAP {
        return Err(HamsimError::invalid(format!(
            "unequal-weight tables support order ≤ {UNEQUAL_ORDER_CAP}, got {p}"
        )));
    }
    Ok(())
}

fn reject_tail(scheme: SeriesScheme, t: f64, worst: f64) -> Result<()> {
    if worst > UNEQUAL_TAIL_TOL {
        return Err(HamsimError::budget(format!(
            "{} series tail estimate {worst:.3e} at t={t} exceeds {UNEQUAL_TAIL_TOL:.0e}; \
             reduce t or evolve in steps",
            scheme.name()
        )));
    }
    Ok(())
}

/// Coefficient tables for unequal part weights.
///
/// * `ProjectionUnequal`: tables `c_k, d_k` for
///   `exp(−i(a₁H₁+a₂H₂)t) = I + Σ_k [c_k(H₁H₂…)_k + d_k(H₂H₁…)_k]`, obtained
///   by term-wise integration of `dc_k/dt = −ia₁(c_k + d_{k−1})`,
///   `dd_k/dt = −ia₂(c_{k−1} + d_k)` from `c₀ = d₀ = 1`.
/// * `ReflectionUnequal`: tables `p_k, q_k` for
///   `exp(i(a₁R₁+a₂R₂)t/2) = p₀I + Σ_k [p_k(R₁R₂…)_k + q_k(R₂R₁…)_k]`,
///   seeded by the explicit `p₀, p₁, q₁` double sums and extended upward via
///   `p_{k+1} = (2/(ia₁))q_k′ − (a₂/a₁)p_{k−1}` (and its mirror).  The
///   prefactor `e^{−i(a₁+a₂)t/2}` completes `exp(−i(a₁H₁+a₂H₂)t)`.  The
///   upward extension amplifies roundoff with growing `k` (the coefficients
///   are Bessel-like, and upward recursion follows the dominant solution), so
///   the tables are intended for moderate orders; the equal-weight evolvers
///   use the downward-recursion engine instead.
pub fn coeffs_unequal(
    scheme: SeriesScheme,
    a1: f64,
    a2: f64,
    t: f64,
    p: usize,
) -> Result<SeriesCoefficients> {
    check_unequal_args(a1, a2, t, p)?;
    match scheme {
        SeriesScheme::ProjectionUnequal => unequal_projection_tables(a1, a2, t, p),
        SeriesScheme::ReflectionUnequal => unequal_reflection_tables(a1, a2, t, p),
        other => Err(HamsimError::invalid(format!(
            "unequal-weight tables exist for the projection and reflection schemes, not {}",
            other.name()
        ))),
    }
}

fn unequal_projection_tables(a1: f64, a2: f64, t: f64, p: usize) -> Result<SeriesCoefficients> {
    let top = p + UNEQUAL_GUARD_DEGREE;
    let ia1 = Complex64::new(0.0, -a1);
    let ia2 = Complex64::new(0.0, -a2);
    let mut prev_c = vec![Complex64::ZERO; top + 1];
    prev_c[0] = Complex64::ONE;
    let mut prev_d = prev_c.clone();
    let mut start_first = vec![Complex64::ZERO; p + 1];
    let mut start_second = vec![Complex64::ZERO; p + 1];
    let mut worst_tail: f64 = 0.0;
    for k in 1..=p {
        let mut ck = vec![Complex64::ZERO; top + 1];
        let mut dk = vec![Complex64::ZERO; top + 1];
        for m in 0..top {
            ck[m + 1] = ia1 * (ck[m] + prev_d[m]) / (m + 1) as f64;
            dk[m + 1] = ia2 * (prev_c[m] + dk[m]) / (m + 1) as f64;
        }
        let cs = TruncatedPowerSeries { coef: ck };
        let ds = TruncatedPowerSeries { coef: dk };
        worst_tail = worst_tail
            .max(cs.tail_magnitude(t, UNEQUAL_TAIL_GUARD))
            .max(ds.tail_magnitude(t, UNEQUAL_TAIL_GUARD));
        start_first[k] = cs.eval(t);
        start_second[k] = ds.eval(t);
        prev_c = cs.coef;
        prev_d = ds.coef;
    }
    reject_tail(SeriesScheme::ProjectionUnequal, t, worst_tail)?;
    Ok(SeriesCoefficients {
        scheme: SeriesScheme::ProjectionUnequal,
        t,
        order: p,
        identity: Complex64::ONE,
        start_first,
        start_second,
        prefactor: Complex64::ONE,
    })
}

/// Pascal-triangle binomial rows `C(n, l)`, exact in `f64` for the degrees
/// used here (all values stay below 2^53).
fn pascal_rows(n_max: usize) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut row = vec![1.0; n + 1];
        for l in 1..n {
            row[l] = rows[n - 1][l - 1] + rows[n - 1][l];
        }
        rows.push(row);
    }
    rows
}

fn unequal_reflection_tables(a1: f64, a2: f64, t: f64, p: usize) -> Result<SeriesCoefficients> {
    let prefactor = Complex64::from_polar(1.0, -(a1 + a2) * t / 2.0);
    let mut start_first = vec![Complex64::ZERO; p + 1];
    let mut start_second = vec![Complex64::ZERO; p + 1];
    if a1 == 0.0 || a2 == 0.0 {
        // One weight vanishes: exp(i a R t/2) = cos(at/2) I + i sin(at/2) R.
        let (a, table) = if a1 == 0.0 {
            (a2, &mut start_second)
        } else {
            (a1, &mut start_first)
        };
        if p >= 1 {
            table[1] = Complex64::new(0.0, (a * t / 2.0).sin());
        }
        let identity = Complex64::new((a * t / 2.0).cos(), 0.0);
        return Ok(SeriesCoefficients {
            scheme: SeriesScheme::ReflectionUnequal,
            t,
            order: p,
            identity,
            start_first,
            start_second,
            prefactor,
        });
    }

    let top = p + UNEQUAL_GUARD_DEGREE;
    let pascal = pascal_rows(top / 2 + 1);
    let mut p0 = vec![Complex64::ZERO; top + 1];
    let mut p1 = vec![Complex64::ZERO; top + 1];
    let mut q1 = vec![Complex64::ZERO; top + 1];
    // (i/2)^n / n! as a running product.
    let half_i = Complex64::new(0.0, 0.5);
    let mut prefac = Complex64::ONE;
    for n in 0..=top {
        if n > 0 {
            prefac *= half_i / n as f64;
        }
        let j = n / 2;
        if n % 2 == 0 {
            let mut s = 0.0;
            for (l, pjl) in pascal[j].iter().enumerate().take(j + 1) {
                s += pjl * pjl * a1.powi(2 * (j - l) as i32) * a2.powi(2 * l as i32);
            }
            p0[n] = prefac * s;
        } else {
            let mut s1 = 0.0;
            let mut s1q = 0.0;
            for (l, (pjl, pj1l)) in pascal[j].iter().zip(&pascal[j + 1]).enumerate().take(j + 1) {
                let b = pjl * pj1l;
                s1 += b * a1.powi((2 * (j - l) + 1) as i32) * a2.powi(2 * l as i32);
                s1q += b * a2.powi((2 * (j - l) + 1) as i32) * a1.powi(2 * l as i32);
            }
            p1[n] = prefac * s1;
            q1[n] = prefac * s1q;
        }
    }

    let p0 = TruncatedPowerSeries { coef: p0 };
    let mut ps = vec![
        TruncatedPowerSeries {
            coef: p0.coef.clone(),
        },
        TruncatedPowerSeries { coef: p1 },
    ];
    let mut qs = vec![
        TruncatedPowerSeries {
            coef: p0.coef.clone(),
        },
        TruncatedPowerSeries { coef: q1 },
    ];
    for k in 1..p {
        let dq = qs[k].derivative();
        let dp = ps[k].derivative();
        let c_dq = Complex64::new(0.0, -2.0 / a1); // 2/(i a1)
        let c_pp = Complex64::new(-a2 / a1, 0.0);
        let pn: Vec<Complex64> = dq
            .coef
            .iter()
            .zip(&ps[k - 1].coef)
            .map(|(d, prev)| c_dq * d + c_pp * prev)
            .collect();
        let c_dp = Complex64::new(0.0, -2.0 / a2);
        let c_qq = Complex64::new(-a1 / a2, 0.0);
        let qn: Vec<Complex64> = dp
            .coef
            .iter()
            .zip(&qs[k - 1].coef)
            .map(|(d, prev)| c_dp * d + c_qq * prev)
            .collect();
        ps.push(TruncatedPowerSeries { coef: pn });
        qs.push(TruncatedPowerSeries { coef: qn });
    }

    let mut worst_tail: f64 = p0.tail_magnitude(t, UNEQUAL_TAIL_GUARD);
    let identity = p0.eval(t);
    for k in 1..=p {
        worst_tail = worst_tail
            .max(ps[k].tail_magnitude(t, UNEQUAL_TAIL_GUARD))
            .max(qs[k].tail_magnitude(t, UNEQUAL_TAIL_GUARD));
        start_first[k] = ps[k].eval(t);
        start_second[k] = qs[k].eval(t);
    }
    reject_tail(SeriesScheme::ReflectionUnequal, t, worst_tail)?;
    Ok(SeriesCoefficients {
        scheme: SeriesScheme::ReflectionUnequal,
        t,
        order: p,
        identity,
        start_first,
        start_second,
        prefactor,
    })
}

/// Product-form coefficient tables: the bracket of
/// `exp(−i(H₁+H₂)t) = e^{−iH₁t} e^{−iH₂t} [I + Σ_{k≥2} c_k⁽¹⁾W₁_k + c_k⁽²⁾W₂_k]`
/// with `c_k⁽¹⁾ = e^{it}(c_{k−1}+c_k) − c_{k−1}` and
/// `c_k⁽²⁾ = (e^{it}−1)²(c_{k−2}+c_{k−1}) + c_k⁽¹⁾`.  The `k = 1` entries
/// vanish identically, so the stored tables start at `k = 2`.  Exposed for
/// verification; the coefficients decay no faster than `c_k`, so this is not
/// a production scheme.
pub fn bch_form_coeffs(t: f64, p: usize) -> Result<SeriesCoefficients> {
    if p > UNEQUAL_ORDER_CAP {
        return Err(HamsimError::invalid(format!(
            "product-form tables support order ≤ {UNEQUAL_ORDER_CAP}, got {p}"
        )));
    }
    let c = projection_coeff_table(t, p)?;
    let e_it = Complex64::from_polar(1.0, t);
    let e_it_m1_sq = (e_it - Complex64::ONE) * (e_it - Complex64::ONE);
    let mut start_first = vec![Complex64::ZERO; p + 1];
    let mut start_second = vec![Complex64::ZERO; p + 1];
    for k in 2..=p {
        let c1 = e_it * (c[k - 1] + c[k]) - c[k - 1];
        start_first[k] = c1;
        start_second[k] = e_it_m1_sq * (c[k - 2] + c[k - 1]) + c1;
    }
    Ok(SeriesCoefficients {
        scheme: SeriesScheme::BchForm,
        t,
        order: p,
        identity: Complex64::ONE,
        start_first,
        start_second,
        prefactor: Complex64::ONE,
    })
}
