//! Fixed-point register emulation of the digital amplitude representation:
//! block-scaled b-bit integer registers, the `(rI + R)` linear-algebra
//! fragment and the Clenshaw recursion executed in register arithmetic, the
//! bitwise-factorised observable lift, and round-off scaling scans.
//!
//! A digital state stores one pair of signed b-bit integers per amplitude
//! together with a single shared power-of-two exponent (block floating
//! point): amplitude `j` is `(re_j + i im_j) * 2^(scale_exp - b)`. Every
//! elementary real multiplication quantises its product back to an integer
//! at the current scale in the configured rounding mode; integer additions
//! are exact apart from the right shifts needed to align exponents or absorb
//! overflow. Overflow rescales are counted on the state as logged events.

use num_complex::Complex64;

use crate::chebyshev::{rescaled_dense, ChebyshevPlan};
use crate::error::{HamsimError, Result};
use crate::linalg::{state_distance, DenseOperator, StateVector};
use crate::models::{Block, BlockDiagonalPart};

/// Smallest supported register width.
pub const MIN_BITS: u32 = 4;
/// Largest supported register width (keeps integers exact in `f64` products).
pub const MAX_BITS: u32 = 52;
/// Largest state dimension accepted by the observable lift (dense `O_a`).
pub const LIFT_DIM_CAP: usize = 8;
/// Largest register width accepted by the observable lift (dense `2^b`).
pub const LIFT_BITS_CAP: u32 = 6;

/// How products are quantised back to integer registers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rounding {
    /// Drop the fractional part (toward zero), mirroring integer truncation.
    Truncate,
    /// Round to the nearest integer (ties away from zero); halves the
    /// worst-case quantisation error.
    Nearest,
}

impl Rounding {
    pub fn name(&self) -> &'static str {
        match self {
            Rounding::Truncate => "truncate",
            Rounding::Nearest => "nearest",
        }
    }
}

/// Register width and rounding mode of the fixed-point pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPointConfig {
    /// Bits per real register component, in `[4, 52]`.
    pub bits: u32,
    /// Rounding mode applied after every elementary real multiplication.
    pub rounding: Rounding,
}

impl FixedPointConfig {
    pub fn new(bits: u32, rounding: Rounding) -> Result<Self> {
        if !(MIN_BITS..=MAX_BITS).contains(&bits) {
            return Err(HamsimError::invalid(format!(
                "register width must lie in [{MIN_BITS}, {MAX_BITS}] bits, got {bits}"
            )));
        }
        Ok(FixedPointConfig { bits, rounding })
    }
}

/// Block-scaled fixed-point amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DigitalState {
    cfg: FixedPointConfig,
    /// One `(re, im)` integer pair per amplitude, each `|int| < 2^bits`.
    registers: Vec<(i64, i64)>,
    /// Shared exponent: amplitude `j` is `registers[j] * 2^(scale_exp - bits)`.
    scale_exp: i32,
    /// Overflow rescales performed along this value's computation path.
    scale_bumps: u32,
}

impl DigitalState {
    pub fn dim(&self) -> usize {
        self.registers.len()
    }

    pub fn config(&self) -> FixedPointConfig {
        self.cfg
    }

    pub fn scale_exp(&self) -> i32 {
        self.scale_exp
    }

    /// Number of overflow rescales (exponent bumps) logged so far.
    pub fn scale_bumps(&self) -> u32 {
        self.scale_bumps
    }

    pub fn register(&self, j: usize) -> (i64, i64) {
        self.registers[j]
    }
}

// ---------------------------------------------------------------------------
// Integer helpers
// ---------------------------------------------------------------------------

/// Quantises a real product to an integer in the given rounding mode.
fn quantize(v: f64, rounding: Rounding) -> i64 {
    match rounding {
        Rounding::Truncate => v.trunc() as i64,
        Rounding::Nearest => v.round() as i64,
    }
}

/// Shifts an integer right by `k` bits with the configured rounding
/// (truncation toward zero, or nearest with ties away from zero).
fn shift_right(v: i64, k: u32, rounding: Rounding) -> i64 {
    if k == 0 || v == 0 {
        return v;
    }
    if k >= 120 {
        return 0;
    }
    let d = 1i128 << k;
    match rounding {
        Rounding::Truncate => ((v as i128) / d) as i64,
        Rounding::Nearest => {
            let two_v = 2 * v as i128;
            let adj = if v >= 0 { two_v + d } else { two_v - d };
            (adj / (2 * d)) as i64
        }
    }
}

/// Raw register arrays before renormalisation (headroom beyond b bits).
struct RawRegisters {
    re: Vec<i64>,
    im: Vec<i64>,
    scale_exp: i32,
}

impl RawRegisters {
    fn zeros(dim: usize, scale_exp: i32) -> Self {
        RawRegisters { re: vec![0; dim], im: vec![0; dim], scale_exp }
    }

    fn max_abs(&self) -> i64 {
        self.re
            .iter()
            .chain(self.im.iter())
            .map(|v| v.abs())
            .max()
            .unwrap_or(0)
    }

    /// Renormalises so that the largest register magnitude sits in
    /// `[2^(b-1), 2^b)` (or everything is zero), producing a canonical
    /// digital state. Right shifts absorb overflow and are logged as bumps;
    /// left shifts are exact.
    fn into_state(mut self, cfg: FixedPointConfig, inherited_bumps: u32) -> DigitalState {
        let limit = 1i64 << cfg.bits;
        let mut bumps = inherited_bumps;
        loop {
            let max = self.max_abs();
            if max == 0 {
                break;
            }
            if max >= limit {
                for v in self.re.iter_mut().chain(self.im.iter_mut()) {
                    *v = shift_right(*v, 1, cfg.rounding);
                }
                self.scale_exp += 1;
                bumps += 1;
            } else if max < limit / 2 {
                for v in self.re.iter_mut().chain(self.im.iter_mut()) {
                    *v <<= 1;
                }
                self.scale_exp -= 1;
            } else {
                break;
            }
        }
        DigitalState {
            cfg,
            registers: self.re.into_iter().zip(self.im).collect(),
            scale_exp: self.scale_exp,
            scale_bumps: bumps,
        }
    }
}

/// Registers of `state` re-expressed at scale `target_exp >= state.scale_exp`
/// (right shifts quantise; a zero state aligns to any scale for free).
fn aligned_registers(state: &DigitalState, target_exp: i32) -> Vec<(i64, i64)> {
    let shift = target_exp - state.scale_exp;
    debug_assert!(shift >= 0);
    let k = shift as u32;
    state
        .registers
        .iter()
        .map(|&(re, im)| {
            (
                shift_right(re, k, state.cfg.rounding),
                shift_right(im, k, state.cfg.rounding),
            )
        })
        .collect()
}

fn is_zero_state(state: &DigitalState) -> bool {
    state.registers.iter().all(|&(re, im)| re == 0 && im == 0)
}

// ---------------------------------------------------------------------------
// Encoding and decoding
// ---------------------------------------------------------------------------

/// Quantises a floating state into b-bit registers with a shared exponent:
/// the smallest exponent `e` with every `|component| < 2^e`, so the largest
/// register uses the full width.
pub fn encode(x: &StateVector, cfg: FixedPointConfig) -> DigitalState {
    let max = x
        .amps
        .iter()
        .map(|a| a.re.abs().max(a.im.abs()))
        .fold(0.0f64, f64::max);
    if max == 0.0 || !max.is_finite() {
        return RawRegisters::zeros(x.dim(), 0).into_state(cfg, 0);
    }
    let scale_exp = max.log2().floor() as i32 + 1;
    let factor = (2.0f64).powi(cfg.bits as i32 - scale_exp);
    let mut raw = RawRegisters::zeros(x.dim(), scale_exp);
    for (j, a) in x.amps.iter().enumerate() {
        raw.re[j] = quantize(a.re * factor, cfg.rounding);
        raw.im[j] = quantize(a.im * factor, cfg.rounding);
    }
    raw.into_state(cfg, 0)
}

/// Reconstructs the floating state represented by the registers.
pub fn decode(state: &DigitalState) -> StateVector {
    let factor = (2.0f64).powi(state.scale_exp - state.cfg.bits as i32);
    StateVector::new(
        state
            .registers
            .iter()
            .map(|&(re, im)| Complex64::new(re as f64 * factor, im as f64 * factor))
            .collect(),
    )
}

// ---------------------------------------------------------------------------
// Register arithmetic building blocks
// ---------------------------------------------------------------------------

/// Multiplies every register pair by a complex scalar, quantising the four
/// real products at the current scale.
fn complex_scale(state: &DigitalState, c: Complex64) -> DigitalState {
    let rounding = state.cfg.rounding;
    let mut raw = RawRegisters::zeros(state.dim(), state.scale_exp);
    for (j, &(re, im)) in state.registers.iter().enumerate() {
        let (re, im) = (re as f64, im as f64);
        raw.re[j] = quantize(c.re * re, rounding) - quantize(c.im * im, rounding);
        raw.im[j] = quantize(c.re * im, rounding) + quantize(c.im * re, rounding);
    }
    raw.into_state(state.cfg, state.scale_bumps)
}

/// Dense matrix application in register arithmetic: each complex entry
/// contributes four quantised real products, accumulated exactly in wide
/// integers before renormalisation.
fn matvec(m: &DenseOperator, state: &DigitalState) -> Result<DigitalState> {
    let dim = state.dim();
    if m.dim() != dim {
        return Err(HamsimError::DimensionMismatch { expected: m.dim(), got: dim });
    }
    let rounding = state.cfg.rounding;
    let mut raw = RawRegisters::zeros(dim, state.scale_exp);
    for r in 0..dim {
        let (mut acc_re, mut acc_im) = (0i64, 0i64);
        for c in 0..dim {
            let entry = m.get(r, c);
            if entry == Complex64::ZERO {
                continue;
            }
            let (re, im) = state.registers[c];
            let (re, im) = (re as f64, im as f64);
            acc_re += quantize(entry.re * re, rounding) - quantize(entry.im * im, rounding);
            acc_im += quantize(entry.re * im, rounding) + quantize(entry.im * re, rounding);
        }
        raw.re[r] = acc_re;
        raw.im[r] = acc_im;
    }
    Ok(raw.into_state(state.cfg, state.scale_bumps))
}

/// Signed sum of digital states (`signs[k] * terms[k]`), aligned to the
/// largest exponent and added exactly.
fn signed_sum(terms: &[&DigitalState], signs: &[i64]) -> DigitalState {
    debug_assert_eq!(terms.len(), signs.len());
    debug_assert!(!terms.is_empty());
    let cfg = terms[0].cfg;
    let dim = terms[0].dim();
    let target_exp = terms
        .iter()
        .filter(|s| !is_zero_state(s))
        .map(|s| s.scale_exp)
        .max()
        .unwrap_or(0);
    let mut raw = RawRegisters::zeros(dim, target_exp);
    for (state, &sign) in terms.iter().zip(signs) {
        if is_zero_state(state) {
            continue;
        }
        for (j, (re, im)) in aligned_registers(state, target_exp).into_iter().enumerate() {
            raw.re[j] += sign * re;
            raw.im[j] += sign * im;
        }
    }
    let bumps = terms.iter().map(|s| s.scale_bumps).max().unwrap_or(0);
    raw.into_state(cfg, bumps)
}

// ---------------------------------------------------------------------------
// Linear-algebra fragment and register swaps
// ---------------------------------------------------------------------------

/// Exchanges the register pairs of the two sites of every paired block (the
/// classical action of the swap operator on the digital registers). Exact:
/// no arithmetic is performed, so two applications restore the state.
pub fn swap_registers(state: &DigitalState, part: &BlockDiagonalPart) -> Result<DigitalState> {
    if part.dim() != state.dim() {
        return Err(HamsimError::DimensionMismatch {
            expected: part.dim(),
            got: state.dim(),
        });
    }
    let mut out = state.clone();
    for block in part.blocks() {
        if let Block::Pair { i, j, .. } = *block {
            out.registers.swap(i, j);
        }
    }
    Ok(out)
}

/// The linear-algebra fragment `y = (r I + R) x` in register arithmetic:
/// the diagonal terms multiply each register in place and the off-diagonal
/// terms read the partner register of each paired block (swap-then-multiply
/// semantics). Products are quantised at the input scale; the accumulated
/// integers are renormalised once at the end.
pub fn fragment_apply(
    r: Complex64,
    part: &BlockDiagonalPart,
    state: &DigitalState,
) -> Result<DigitalState> {
    if part.dim() != state.dim() {
        return Err(HamsimError::DimensionMismatch {
            expected: part.dim(),
            got: state.dim(),
        });
    }
    let rounding = state.cfg.rounding;
    let mut raw = RawRegisters::zeros(state.dim(), state.scale_exp);
    // r x_j on every site, including sites no block covers.
    for (j, &(re, im)) in state.registers.iter().enumerate() {
        let (re, im) = (re as f64, im as f64);
        raw.re[j] = quantize(r.re * re, rounding) - quantize(r.im * im, rounding);
        raw.im[j] = quantize(r.re * im, rounding) + quantize(r.im * re, rounding);
    }
    let mut add_product = |site: usize, entry: Complex64, source: (i64, i64)| {
        let (re, im) = (source.0 as f64, source.1 as f64);
        raw.re[site] += quantize(entry.re * re, rounding) - quantize(entry.im * im, rounding);
        raw.im[site] += quantize(entry.re * im, rounding) + quantize(entry.im * re, rounding);
    };
    for block in part.blocks() {
        match *block {
            Block::Diag { index, value } => {
                add_product(index, Complex64::new(value, 0.0), state.registers[index]);
            }
            Block::Pair { i, j, hii, hjj, hij } => {
                add_product(i, Complex64::new(hii, 0.0), state.registers[i]);
                add_product(j, Complex64::new(hjj, 0.0), state.registers[j]);
                add_product(i, hij, state.registers[j]);
                add_product(j, hij.conj(), state.registers[i]);
            }
        }
    }
    Ok(raw.into_state(state.cfg, state.scale_bumps))
}

// ---------------------------------------------------------------------------
// Fixed-point Clenshaw propagation
// ---------------------------------------------------------------------------

/// Runs a resolved Chebyshev plan entirely in register arithmetic: per step
/// the Clenshaw recursion `y_k = C_k x + 2 H~ y_{k+1} - y_{k+2}` with the
/// final half-correction, then the step phase. Mirrors the floating
/// propagation step for step so that the decoded difference isolates
/// quantisation error.
pub fn clenshaw_fixed_point(
    h: &DenseOperator,
    plan: &ChebyshevPlan,
    cfg: FixedPointConfig,
    x: &StateVector,
) -> Result<DigitalState> {
    if h.dim() != x.dim() {
        return Err(HamsimError::DimensionMismatch { expected: h.dim(), got: x.dim() });
    }
    let mut state = encode(x, cfg);
    if plan.t_tilde == 0.0 {
        // Pure phase: degenerate window or zero duration.
        return Ok(complex_scale(&state, plan.global_phase));
    }
    // 2 H~ as one dense matrix, so each recursion term costs one register
    // matrix application.
    let doubled = rescaled_dense(h, &plan.window)?.scaled(Complex64::new(2.0, 0.0));
    let step_phase = Complex64::from_polar(1.0, -plan.window.center() * plan.dt);
    for _ in 0..plan.m {
        state = clenshaw_pass(&doubled, &plan.coeffs, &state)?;
        state = complex_scale(&state, step_phase);
    }
    Ok(state)
}

/// One Clenshaw sweep in register arithmetic, following the floating
/// recursion exactly (including the capture of `y_2` in the `k = 0`
/// iteration and the final exact halving via the shared exponent).
fn clenshaw_pass(
    doubled: &DenseOperator,
    coeffs: &[Complex64],
    x: &DigitalState,
) -> Result<DigitalState> {
    let order = coeffs.len() - 1;
    if order == 0 {
        return Ok(complex_scale(x, coeffs[0]));
    }
    let mut y_next = complex_scale(x, coeffs[order]);
    let mut y_next2: Option<DigitalState> = None;
    let mut y2_at_zero: Option<DigitalState> = None;
    for k in (0..order).rev() {
        let scaled = complex_scale(x, coeffs[k]);
        let advanced = matvec(doubled, &y_next)?;
        let y_k = match &y_next2 {
            Some(prev) => signed_sum(&[&scaled, &advanced, prev], &[1, 1, -1]),
            None => signed_sum(&[&scaled, &advanced], &[1, 1]),
        };
        if k == 0 {
            y2_at_zero = y_next2.take();
        }
        y_next2 = Some(y_next);
        y_next = y_k;
    }
    let head = complex_scale(x, coeffs[0]);
    let mut combined = match &y2_at_zero {
        Some(y2) => signed_sum(&[&head, &y_next, y2], &[1, 1, -1]),
        None => signed_sum(&[&head, &y_next], &[1, 1]),
    };
    // Halving is a pure exponent shift: exact.
    combined.scale_exp -= 1;
    Ok(combined)
}

// ---------------------------------------------------------------------------
// Round-off scans
// ---------------------------------------------------------------------------

/// One row of a precision scan.
#[derive(Debug, Clone, Copy)]
pub struct RoundoffRow {
    pub bits: u32,
    /// Euclidean distance between the decoded fixed-point result and the
    /// floating reference.
    pub error: f64,
    /// Overflow rescales logged during the run.
    pub scale_bumps: u32,
}

/// Runs the fixed-point Clenshaw propagation across a grid of register
/// widths and reports the quantisation error against a floating reference.
pub fn roundoff_scan(
    h: &DenseOperator,
    plan: &ChebyshevPlan,
    x: &StateVector,
    reference: &StateVector,
    bits_grid: &[u32],
    rounding: Rounding,
) -> Result<Vec<RoundoffRow>> {
    let mut rows = Vec::with_capacity(bits_grid.len());
    for &bits in bits_grid {
        let cfg = FixedPointConfig::new(bits, rounding)?;
        let state = clenshaw_fixed_point(h, plan, cfg, x)?;
        rows.push(RoundoffRow {
            bits,
            error: state_distance(&decode(&state), reference)?,
            scale_bumps: state.scale_bumps(),
        });
    }
    Ok(rows)
}

/// Register width that keeps Clenshaw round-off comfortably below `eps`:
/// `ceil(log2(m p / eps)) + 6`, clamped to the supported range.
pub fn recommended_bits(m: u64, order: usize, eps: f64) -> Result<u32> {
    if m == 0 || order == 0 {
        return Err(HamsimError::invalid(
            "precision recommendation needs at least one step and order one",
        ));
    }
    if !eps.is_finite() || eps <= 0.0 {
        return Err(HamsimError::invalid("error target must be positive"));
    }
    let work = (m as f64) * (order as f64);
    let bits = (work / eps).log2().ceil() as i64 + 6;
    Ok(bits.clamp(MIN_BITS as i64, MAX_BITS as i64) as u32)
}

/// Least-squares slope of `log2(error)` against register width, for scaling
/// checks over a scan table (rows with zero error are skipped).
pub fn log2_error_slope(rows: &[RoundoffRow]) -> Result<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.error > 0.0)
        .map(|r| (r.bits as f64, r.error.log2()))
        .collect();
    if points.len() < 2 {
        return Err(HamsimError::invalid(
            "slope regression needs at least two rows with nonzero error",
        ));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let var: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    Ok(cov / var)
}

// ---------------------------------------------------------------------------
// Observable lift
// ---------------------------------------------------------------------------

/// Dense observable on the `2^bits` register space lifting an N-dimensional
/// observable to digital registers, built in the bitwise-factorised form
/// `O_b = N V (1 + sigma_1)^{tensor b} V` with `V` the place-value operator.
#[derive(Debug, Clone)]
pub struct ObservableLift {
    o_a: DenseOperator,
    bits: u32,
    o_b: DenseOperator,
}

/// Value encoded by register basis index `idx`: the most significant bit has
/// weight one, so `value(idx) = idx * 2^(1-b)` covers `[0, 2)` and the
/// single-bit register encodes exactly `{0, 1}`.
pub fn register_place_value(idx: usize, bits: u32) -> f64 {
    idx as f64 * (2.0f64).powi(1 - bits as i32)
}

impl ObservableLift {
    /// Builds the lift for a Hermitian observable of dimension at most
    /// [`LIFT_DIM_CAP`] with at most [`LIFT_BITS_CAP`] register bits (the
    /// register operator is materialised densely).
    pub fn new(o_a: DenseOperator, bits: u32) -> Result<Self> {
        if o_a.dim() > LIFT_DIM_CAP {
            return Err(HamsimError::DimensionCap { cap: LIFT_DIM_CAP, got: o_a.dim() });
        }
        if bits == 0 || bits > LIFT_BITS_CAP {
            return Err(HamsimError::invalid(format!(
                "observable lift supports 1..={LIFT_BITS_CAP} register bits, got {bits}"
            )));
        }
        let n = o_a.dim() as f64;
        let reg_dim = 1usize << bits;
        // (1 + sigma_1)^{tensor b} is the all-ones matrix, so the lift
        // collapses to N * value(r) * value(c).
        let o_b = DenseOperator::from_fn(reg_dim, |r, c| {
            Complex64::new(n * register_place_value(r, bits) * register_place_value(c, bits), 0.0)
        });
        Ok(ObservableLift { o_a, bits, o_b })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn register_operator(&self) -> &DenseOperator {
        &self.o_b
    }

    /// Register basis index encoding a real amplitude in `[0, 1]` with
    /// nearest rounding at `bits - 1` fractional bits.
    pub fn encode_amplitude(&self, value: f64) -> usize {
        let levels = 1i64 << self.bits;
        let idx = (value * (2.0f64).powi(self.bits as i32 - 1)).round() as i64;
        idx.clamp(0, levels - 1) as usize
    }

    /// Expectation both ways: `direct = <x|O_a|x>` in floating point, and
    /// `lifted` contracting `O_a tensor O_b` over the encoded register basis
    /// states, `(1/N) sum_{j,l} (O_a)_{jl} <x_j|O_b|x_l>`.
    pub fn expectation_check(&self, x: &StateVector) -> Result<(f64, f64)> {
        let dim = self.o_a.dim();
        if x.dim() != dim {
            return Err(HamsimError::DimensionMismatch { expected: dim, got: x.dim() });
        }
        for a in &x.amps {
            if a.im.abs() > 1e-12 || a.re < 0.0 || a.re > 1.0 {
                return Err(HamsimError::invalid(
                    "observable lift check expects real amplitudes in [0, 1] \
                     (complex values are handled as real pairs upstream)",
                ));
            }
        }
        let direct = x.inner(&self.o_a.apply(x)?).re;
        let indices: Vec<usize> = x.amps.iter().map(|a| self.encode_amplitude(a.re)).collect();
        let mut lifted = Complex64::ZERO;
        for (j, &idx_j) in indices.iter().enumerate() {
            for (l, &idx_l) in indices.iter().enumerate() {
                lifted += self.o_a.get(j, l) * self.o_b.get(idx_j, idx_l);
            }
        }
        Ok((direct, lifted.re / dim as f64))
    }
}
