//! Dense complex linear algebra: state vectors, operators, a Jacobi
//! eigensolver for Hermitian matrices, and the exact reference propagator.
//!
//! Everything here is sized for state dimensions N ≤ 256, where dense O(N³)
//! decompositions stay interactive. The eigensolver is a cyclic-by-row
//! complex Jacobi iteration — simple, dependency-free, and accurate to the
//! off-diagonal threshold; `exp(-iHt)` built on top of it is the oracle every
//! approximate propagator in the crate is measured against.
//!
//! Operator distances use the spectral norm (largest singular value, via
//! power iteration on `D†D`); the Frobenius norm is offered as a cheap
//! monitoring alternative. Distances can optionally be taken modulo a global
//! phase, with the phase fixed by `arg tr(V†U)`.

use num_complex::Complex64;

use crate::error::{HamsimError, Result};

/// Largest dimension accepted by the dense O(N³) routines.
pub const DENSE_DIM_CAP: usize = 256;

/// Hermiticity validation threshold: max |A - A†| entrywise.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Jacobi sweep convergence: off-diagonal Frobenius mass relative to ‖H‖_F.
const JACOBI_OFF_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 60;

/// Which operator norm a distance or estimator used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// Largest singular value.
    Spectral,
    /// Square root of the sum of squared entry magnitudes.
    Frobenius,
}

impl NormKind {
    /// Canonical lower-case name, as reported in benchmark records.
    pub fn name(self) -> &'static str {
        match self {
            NormKind::Spectral => "spectral",
            NormKind::Frobenius => "frobenius",
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = HamsimError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(NormKind::Spectral),
            "frobenius" => Ok(NormKind::Frobenius),
            other => Err(HamsimError::invalid(format!(
                "unknown norm '{other}' (expected 'spectral' or 'frobenius')"
            ))),
        }
    }
}

// ---------------------------------------------------------------------------
// State vectors
// ---------------------------------------------------------------------------

/// Complex amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    /// Amplitudes, indexed by site/basis label.
    pub amps: Vec<Complex64>,
}

impl StateVector {
    /// Wraps raw amplitudes.
    pub fn new(amps: Vec<Complex64>) -> Self {
        StateVector { amps }
    }

    /// All-zero state of the given dimension.
    pub fn zeros(dim: usize) -> Self {
        StateVector { amps: vec![Complex64::ZERO; dim] }
    }

    /// Computational basis state `e_index`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut s = Self::zeros(dim);
        s.amps[index] = Complex64::ONE;
        s
    }

    /// Dimension of the vector.
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Scales the vector to unit norm (no-op on the zero vector).
    pub fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    /// Inner product `⟨self|other⟩` (conjugate-linear in `self`).
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &StateVector) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
    }

    /// `c * self`, componentwise.
    pub fn scaled(&self, c: Complex64) -> StateVector {
        StateVector::new(self.amps.iter().map(|a| c * a).collect())
    }
}

/// Euclidean distance `‖x - y‖` between two states.
pub fn state_distance(x: &StateVector, y: &StateVector) -> Result<f64> {
    check_same_dim(x.dim(), y.dim())?;
    Ok(x
        .amps
        .iter()
        .zip(&y.amps)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

fn check_same_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(HamsimError::DimensionMismatch { expected, got });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Dense operators
// ---------------------------------------------------------------------------

/// Dense complex matrix in row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    data: Vec<Complex64>,
}

impl DenseOperator {
    /// Zero matrix.
    pub fn zeros(dim: usize) -> Self {
        DenseOperator { dim, data: vec![Complex64::ZERO; dim * dim] }
    }

    /// Identity matrix.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, Complex64::ONE);
        }
        m
    }

    /// Builds a matrix entrywise from `f(row, col)`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Rank-one projector `v v† / ‖v‖²`.
    pub fn projector_onto(v: &StateVector) -> Self {
        let n2: f64 = v.amps.iter().map(|a| a.norm_sqr()).sum();
        Self::from_fn(v.dim(), |r, c| v.amps[r] * v.amps[c].conj() / n2)
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry accessor.
    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.dim + c]
    }

    /// Entry mutator.
    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        self.data[r * self.dim + c] = v;
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> DenseOperator {
        DenseOperator::from_fn(self.dim, |r, c| self.get(c, r).conj())
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &StateVector) -> Result<StateVector> {
        check_same_dim(self.dim, x.dim())?;
        let mut out = StateVector::zeros(self.dim);
        for r in 0..self.dim {
            let row = &self.data[r * self.dim..(r + 1) * self.dim];
            let mut acc = Complex64::ZERO;
            for (m, a) in row.iter().zip(&x.amps) {
                acc += m * a;
            }
            out.amps[r] = acc;
        }
        Ok(out)
    }

    /// Matrix product `self · rhs`.
    pub fn matmul(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        check_same_dim(self.dim, rhs.dim)?;
        let n = self.dim;
        let mut out = DenseOperator::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.get(r, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for c in 0..n {
                    let v = out.get(r, c) + a * rhs.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Entrywise sum.
    pub fn add(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        check_same_dim(self.dim, rhs.dim)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
        Ok(out)
    }

    /// Entrywise difference.
    pub fn sub(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        check_same_dim(self.dim, rhs.dim)?;
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
        Ok(out)
    }

    /// Scalar multiple.
    pub fn scaled(&self, c: Complex64) -> DenseOperator {
        let mut out = self.clone();
        for a in &mut out.data {
            *a *= c;
        }
        out
    }

    /// Commutator `[self, rhs]`.
    pub fn commutator(&self, rhs: &DenseOperator) -> Result<DenseOperator> {
        self.matmul(rhs)?.sub(&rhs.matmul(self)?)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max entrywise deviation from Hermiticity, `max |A - A†|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for r in 0..self.dim {
            for c in r..self.dim {
                dev = dev.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        dev
    }

    fn require_hermitian(&self) -> Result<()> {
        let dev = self.hermiticity_deviation();
        if dev > HERMITICITY_TOL {
            return Err(HamsimError::NotHermitian { deviation: dev });
        }
        Ok(())
    }

    pub fn require_within_cap(&self) -> Result<()> {
        if self.dim > DENSE_DIM_CAP {
            return Err(HamsimError::DimensionCap { cap: DENSE_DIM_CAP, got: self.dim });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Jacobi eigendecomposition
// ---------------------------------------------------------------------------

/// Result of a Hermitian eigendecomposition: `H = V diag(values) V†`.
#[derive(Debug, Clone)]
pub struct Eigendecomposition {
    /// Real eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: DenseOperator,
}

/// Cyclic-by-row complex Jacobi diagonalization of a Hermitian matrix.
///
/// Each rotation zeroes one off-diagonal pair `(p, q)` by a phase-adjusted
/// real rotation; sweeps repeat until the off-diagonal Frobenius mass drops
/// below `1e-14 · ‖H‖_F`.
pub fn eigh_jacobi(h: &DenseOperator) -> Result<Eigendecomposition> {
    h.require_within_cap()?;
    h.require_hermitian()?;
    let n = h.dim();
    let mut a = h.clone();
    let mut v = DenseOperator::identity(n);
    let norm_f = a.frobenius_norm();
    if norm_f == 0.0 {
        return Ok(Eigendecomposition { values: vec![0.0; n], vectors: v });
    }

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off2 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off2 += 2.0 * a.get(p, q).norm_sqr();
            }
        }
        if off2.sqrt() <= JACOBI_OFF_TOL * norm_f {
            return Ok(finish_eigh(a, v));
        }

        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let beta = apq.norm();
                if beta == 0.0 {
                    continue;
                }
                let phase = apq / beta; // e^{i φ}
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                // Real-symmetric rotation angle for [[app, β], [β, aqq]]:
                // cot(2θ) = (aqq - app) / (2β), stable small-angle root.
                let tau = (aqq - app) / (2.0 * beta);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let s_ph = phase.scale(s); // s e^{iφ}

                // Columns p, q of A and V: A ← A·J, with
                // J[p][p]=c, J[p][q]=s e^{iφ}, J[q][p]=-s e^{-iφ}, J[q][q]=c.
                for r in 0..n {
                    let arp = a.get(r, p);
                    let arq = a.get(r, q);
                    a.set(r, p, arp * c - arq * s_ph.conj());
                    a.set(r, q, arp * s_ph + arq * c);
                    let vrp = v.get(r, p);
                    let vrq = v.get(r, q);
                    v.set(r, p, vrp * c - vrq * s_ph.conj());
                    v.set(r, q, vrp * s_ph + vrq * c);
                }
                // Rows p, q: A ← J†·A.
                for col in 0..n {
                    let apc = a.get(p, col);
                    let aqc = a.get(q, col);
                    a.set(p, col, apc * c - aqc * s_ph);
                    a.set(q, col, apc * s_ph.conj() + aqc * c);
                }
                // Clean the eliminated pair and enforce real diagonal.
                a.set(p, q, Complex64::ZERO);
                a.set(q, p, Complex64::ZERO);
                let dp = a.get(p, p).re;
                let dq = a.get(q, q).re;
                a.set(p, p, Complex64::new(dp, 0.0));
                a.set(q, q, Complex64::new(dq, 0.0));
            }
        }
    }
    Err(HamsimError::NoConvergence {
        what: format!("Jacobi sweeps exhausted at dimension {n}"),
    })
}

fn finish_eigh(a: DenseOperator, v: DenseOperator) -> Eigendecomposition {
    let n = a.dim();
    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = DenseOperator::from_fn(n, |r, c| v.get(r, order[c]));
    Eigendecomposition { values, vectors }
}

// ---------------------------------------------------------------------------
// Exact propagator
// ---------------------------------------------------------------------------

/// Reference propagation `exp(-iHt)·x` through the eigendecomposition.
pub fn exact_evolve(h: &DenseOperator, t: f64, x: &StateVector) -> Result<StateVector> {
    check_same_dim(h.dim(), x.dim())?;
    let eig = eigh_jacobi(h)?;
    Ok(evolve_in_eigenbasis(&eig, t, x))
}

/// Propagates with an already-computed eigendecomposition (cheap per call).
pub fn evolve_in_eigenbasis(eig: &Eigendecomposition, t: f64, x: &StateVector) -> StateVector {
    let n = eig.vectors.dim();
    // y = V e^{-iΛt} V† x
    let coeffs: Vec<Complex64> = (0..n)
        .map(|k| {
            let mut acc = Complex64::ZERO;
            for r in 0..n {
                acc += eig.vectors.get(r, k).conj() * x.amps[r];
            }
            acc * Complex64::from_polar(1.0, -eig.values[k] * t)
        })
        .collect();
    let mut out = StateVector::zeros(n);
    for (r, amp) in out.amps.iter_mut().enumerate() {
        let mut acc = Complex64::ZERO;
        for (k, coeff) in coeffs.iter().enumerate() {
            acc += eig.vectors.get(r, k) * coeff;
        }
        *amp = acc;
    }
    out
}

/// Dense matrix of the reference propagator `exp(-iHt)`.
pub fn exact_evolve_operator(h: &DenseOperator, t: f64) -> Result<DenseOperator> {
    let eig = eigh_jacobi(h)?;
    let n = h.dim();
    let mut out = DenseOperator::zeros(n);
    for r in 0..n {
        for c in 0..n {
            let mut acc = Complex64::ZERO;
            for k in 0..n {
                acc += eig.vectors.get(r, k)
                    * Complex64::from_polar(1.0, -eig.values[k] * t)
                    * eig.vectors.get(c, k).conj();
            }
            out.set(r, c, acc);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Norms and distances
// ---------------------------------------------------------------------------

/// Spectral norm (largest singular value): `√λ_max(M†M)` via the Jacobi
/// eigendecomposition of the Hermitian product.  Degenerate or clustered
/// singular values pose no difficulty for Jacobi, unlike power iteration.
pub fn spectral_norm(m: &DenseOperator) -> Result<f64> {
    m.require_within_cap()?;
    if m.dim() == 0 || m.data.iter().all(|z| *z == Complex64::ZERO) {
        return Ok(0.0);
    }
    let gram = m.adjoint().matmul(m)?;
    let eig = eigh_jacobi(&gram)?;
    let top = eig.values.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Distance `‖U - V‖` in the requested norm.
pub fn operator_distance(u: &DenseOperator, v: &DenseOperator, norm: NormKind) -> Result<f64> {
    let d = u.sub(v)?;
    match norm {
        NormKind::Spectral => spectral_norm(&d),
        NormKind::Frobenius => Ok(d.frobenius_norm()),
    }
}

/// Distance `‖U - e^{iφ}V‖` minimized over a global phase, with the phase
/// fixed by `φ = arg tr(V†U)` (the Frobenius-optimal choice; `φ = 0` when
/// the trace vanishes).
pub fn operator_distance_mod_phase(
    u: &DenseOperator,
    v: &DenseOperator,
    norm: NormKind,
) -> Result<f64> {
    check_same_dim(u.dim(), v.dim())?;
    let n = u.dim();
    let mut tr = Complex64::ZERO;
    for r in 0..n {
        for k in 0..n {
            tr += v.get(k, r).conj() * u.get(k, r);
        }
    }
    let phase = if tr.norm() == 0.0 {
        Complex64::ONE
    } else {
        tr / tr.norm()
    };
    operator_distance(u, &v.scaled(phase), norm)
}

/// Distance between two states minimized over a global phase, with the phase
/// fixed by `arg ⟨y|x⟩`.
pub fn state_distance_mod_phase(x: &StateVector, y: &StateVector) -> Result<f64> {
    check_same_dim(x.dim(), y.dim())?;
    let ip = y.inner(x);
    let phase = if ip.norm() == 0.0 { Complex64::ONE } else { ip / ip.norm() };
    state_distance(x, &y.scaled(phase))
}
