//! Bessel functions of the first kind `J_0..J_p` at a fixed real argument,
//! computed with Miller's algorithm: seed the three-term recurrence
//! `J_{k−1}(t) = (2k/t) J_k(t) − J_{k+1}(t)` far above the largest wanted
//! order with an arbitrary tiny value, recurse downward (the direction in
//! which the wanted solution grows), then fix the overall scale with the
//! even-order normalisation `J_0(t) + 2 Σ_{k≥1} J_{2k}(t) = 1`.
//!
//! These tables feed the Chebyshev propagator (coefficients `2(−i)^k J_k`)
//! and the reflection-series coefficients (`i^k J_k`).

use crate::error::{HamsimError, Result};

/// Orders above this are rejected outright; every consumer in this crate
/// needs a few hundred at most.
pub const MAX_ORDER: usize = 65_536;

/// Magnitude at which the downward recurrence is rescaled to avoid overflow.
const RESCALE_GUARD: f64 = 1e250;

/// Seed magnitude for the top of the downward recurrence.
const SEED: f64 = 1e-300;

/// `J_0(t)..J_p(t)` with the generating argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselTable {
    t: f64,
    values: Vec<f64>,
}

impl BesselTable {
    pub fn t(&self) -> f64 {
        self.t
    }

    /// `J_0..J_p` in order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn j(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// Residual of the independent sum-of-squares identity
    /// `J_0² + 2 Σ_{k≥1} J_k² = 1`, summed over the stored orders.  The
    /// normalisation step enforces the even-order linear identity, so this
    /// one is a genuine check; it is meaningful once the table extends well
    /// past `k ≈ t`, where the neglected tail is negligible.
    pub fn sum_of_squares_residual(&self) -> f64 {
        let mut sum = self.values[0] * self.values[0];
        for v in &self.values[1..] {
            sum += 2.0 * v * v;
        }
        (sum - 1.0).abs()
    }

    /// Largest relative deviation between the stored values and an upward
    /// pass of the recurrence seeded from the stored `J_0, J_1`, taken over
    /// `2 ≤ k ≤ min(p, ⌊t⌋)` where the upward direction is stable.  Returns
    /// zero when that range is empty.
    pub fn upward_recursion_residual(&self) -> f64 {
        let top = (self.t.floor() as usize).min(self.order());
        if top < 2 || self.t == 0.0 {
            return 0.0;
        }
        let mut prev = self.values[0];
        let mut curr = self.values[1];
        let mut worst = 0.0f64;
        for k in 1..top {
            let next = (2.0 * k as f64 / self.t) * curr - prev;
            prev = curr;
            curr = next;
            let reference = self.values[k + 1];
            let deviation = (next - reference).abs() / reference.abs().max(1e-30);
            worst = worst.max(deviation);
        }
        worst
    }
}

/// Start index for Miller's recurrence: a guard margin over the largest
/// wanted order, and the same margin over `t` so the start sits above the
/// turning point `k ≈ t` even when few orders are requested.
fn miller_start(t: f64, p: usize) -> usize {
    let margin = |x: f64| -> usize {
        let ln = (x + 2.0).ln().max(1.0);
        (15.0 + 2.0 * (x * ln).sqrt()).ceil() as usize
    };
    let from_order = p + margin(p as f64);
    let from_argument = t.ceil() as usize + margin(t);
    from_order.max(from_argument)
}

/// Miller's algorithm for `J_0(t)..J_p(t)`, `t ≥ 0`.
pub fn bessel_table(t: f64, p: usize) -> Result<BesselTable> {
    if !t.is_finite() || t < 0.0 {
        return Err(HamsimError::invalid(format!(
            "Bessel argument must be finite and non-negative, got {t}"
        )));
    }
    if p > MAX_ORDER {
        return Err(HamsimError::invalid(format!(
            "Bessel order {p} exceeds the cap {MAX_ORDER}"
        )));
    }
    let mut values = vec![0.0f64; p + 1];
    if t == 0.0 {
        values[0] = 1.0;
        return Ok(BesselTable { t, values });
    }
    let start = miller_start(t, p);
    let mut plus = 0.0f64; // unnormalised J_{k+1}
    let mut curr = SEED; // unnormalised J_k
    let mut norm = 0.0f64; // accumulates J_0 + 2 Σ J_{2j}
    let mut k = start;
    loop {
        if k <= p {
            values[k] = curr;
        }
        if k.is_multiple_of(2) {
            norm += if k == 0 { curr } else { 2.0 * curr };
        }
        if k == 0 {
            break;
        }
        let next = (2.0 * k as f64 / t) * curr - plus;
        plus = curr;
        curr = next;
        if curr.abs() > RESCALE_GUARD {
            curr /= RESCALE_GUARD;
            plus /= RESCALE_GUARD;
            norm /= RESCALE_GUARD;
            for v in values.iter_mut() {
                *v /= RESCALE_GUARD;
            }
        }
        k -= 1;
    }
    if !norm.is_finite() || norm == 0.0 {
        return Err(HamsimError::NoConvergence {
            what: format!("Miller normalisation for t = {t}, order {p}"),
        });
    }
    for v in values.iter_mut() {
        *v /= norm;
        if !v.is_finite() {
            return Err(HamsimError::NoConvergence {
                what: format!("Miller recurrence for t = {t}, order {p}"),
            });
        }
    }
    Ok(BesselTable { t, values })
}
