//! Property checks for the rank-one projector algebra: products of
//! reflections, projector-generated state transfer, conjugation by projector
//! exponentials, derivative identities of parametrised projectors, and
//! closed-path word reduction. Each check returns a residual so callers can
//! compare against the pinned tolerances.

use num_complex::Complex64;

use crate::error::{HamsimError, Result};
use crate::linalg::{
    exact_evolve, exact_evolve_operator, operator_distance, state_distance, DenseOperator,
    NormKind, StateVector,
};
use crate::rng::SeededGenerator;

/// Residual ceiling for the exactly-held algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-11;
/// Residual ceiling for the two-dimensional subspace restrictions.
pub const SUBSPACE_TOL: f64 = 1e-12;
/// Residual ceiling for finite-difference derivative checks (step-limited).
pub const FD_TOL: f64 = 1e-7;
/// Central-difference step for the derivative identities.
pub const FD_STEP: f64 = 1e-5;

// ---------------------------------------------------------------------------
// Projector pairs and subspace restriction
// ---------------------------------------------------------------------------

/// Two rank-one projectors with their generating unit vectors and overlap.
#[derive(Debug, Clone)]
pub struct ProjectorPair {
    pub e_i: StateVector,
    pub e_j: StateVector,
    pub p_i: DenseOperator,
    pub p_j: DenseOperator,
    /// Overlap `lambda = <e_i|e_j>`.
    pub lambda: Complex64,
}

impl ProjectorPair {
    /// Builds the pair from two nonzero vectors (normalised internally).
    pub fn new(e_i: StateVector, e_j: StateVector) -> Result<Self> {
        if e_i.dim() != e_j.dim() {
            return Err(HamsimError::DimensionMismatch {
                expected: e_i.dim(),
                got: e_j.dim(),
            });
        }
        if e_i.norm() == 0.0 || e_j.norm() == 0.0 {
            return Err(HamsimError::invalid("projector pair needs nonzero vectors"));
        }
        let mut e_i = e_i;
        let mut e_j = e_j;
        e_i.normalize();
        e_j.normalize();
        let p_i = DenseOperator::projector_onto(&e_i);
        let p_j = DenseOperator::projector_onto(&e_j);
        let lambda = e_i.inner(&e_j);
        Ok(ProjectorPair { e_i, e_j, p_i, p_j, lambda })
    }

    /// Random pair drawn from the seeded generator.
    pub fn random(dim: usize, gen: &mut SeededGenerator) -> Result<Self> {
        let draw = |gen: &mut SeededGenerator| {
            StateVector::new((0..dim).map(|_| gen.next_complex_sum4()).collect())
        };
        ProjectorPair::new(draw(gen), draw(gen))
    }

    pub fn dim(&self) -> usize {
        self.e_i.dim()
    }

    pub fn overlap_magnitude(&self) -> f64 {
        self.lambda.norm()
    }

    /// Orthonormal basis of `span{e_i, e_j}`; a single vector when the pair
    /// is (numerically) parallel.
    pub fn span_basis(&self) -> Vec<StateVector> {
        let u1 = self.e_i.clone();
        let mut rem = self.e_j.clone();
        rem.axpy(-u1.inner(&self.e_j), &u1);
        if rem.norm() < 1e-9 {
            return vec![u1];
        }
        rem.normalize();
        vec![u1, rem]
    }
}

/// Compression of an operator to the given orthonormal vectors:
/// `M_ab = <u_a| M |u_b>`.
pub fn restrict_to_span(m: &DenseOperator, basis: &[StateVector]) -> Result<DenseOperator> {
    let mut columns = Vec::with_capacity(basis.len());
    for u in basis {
        columns.push(m.apply(u)?);
    }
    Ok(DenseOperator::from_fn(basis.len(), |a, b| basis[a].inner(&columns[b])))
}

/// `exp(i phi P)` for a projector, via the exact closed form
/// `I + (e^{i phi} - 1) P`.
pub fn projector_phase(p: &DenseOperator, phi: f64) -> Result<DenseOperator> {
    let shift = Complex64::from_polar(1.0, phi) - Complex64::ONE;
    DenseOperator::identity(p.dim()).add(&p.scaled(shift))
}

// ---------------------------------------------------------------------------
// (A) Product of two reflections
// ---------------------------------------------------------------------------

/// Residuals of the reflection-product identities on `span{e_i, e_j}`.
#[derive(Debug, Clone, Copy)]
pub struct ReflectionProductCheck {
    /// `(1-2P_i)(1-2P_j) = (-1 + 2|lambda|^2) I + 2 [P_i, P_j]` restricted
    /// to the span.
    pub algebraic_residual: f64,
    /// Distance to the rotation form
    /// `-exp(-2 asin(|lambda|) [P_i,P_j] / sqrt(|lambda|^2 - |lambda|^4))`;
    /// `None` when `|lambda|` is 0 or 1 and the normalisation degenerates.
    pub exponential_residual: Option<f64>,
}

/// Checks that the product of the two reflections acts on the pair's span as
/// the stated polynomial in the projectors, and (away from degenerate
/// overlaps) as the rotation generated by their commutator.
pub fn check_reflection_product(pair: &ProjectorPair) -> Result<ReflectionProductCheck> {
    let dim = pair.dim();
    let identity = DenseOperator::identity(dim);
    let reflect = |p: &DenseOperator| identity.sub(&p.scaled(Complex64::new(2.0, 0.0)));
    let product = reflect(&pair.p_i)?.matmul(&reflect(&pair.p_j)?)?;
    let commutator = pair.p_i.commutator(&pair.p_j)?;

    let basis = pair.span_basis();
    let product_res = restrict_to_span(&product, &basis)?;
    let commutator_res = restrict_to_span(&commutator, &basis)?;

    let ll = pair.overlap_magnitude();
    let algebraic = DenseOperator::identity(basis.len())
        .scaled(Complex64::new(2.0 * ll * ll - 1.0, 0.0))
        .add(&commutator_res.scaled(Complex64::new(2.0, 0.0)))?;
    let algebraic_residual = operator_distance(&product_res, &algebraic, NormKind::Frobenius)?;

    // sqrt(|l|^2 - |l|^4) vanishes at |l| in {0, 1}; the rotation form is
    // reported only on the nondegenerate branch.
    let gap = (ll * ll - ll * ll * ll * ll).sqrt();
    let exponential_residual = if gap < 1e-9 || basis.len() < 2 {
        None
    } else {
        // exp(A) with A = -2 asin(|l|)/gap * [P_i,P_j] restricted; A is
        // anti-Hermitian, so exp(A) = exp(-i H) with H = iA Hermitian.
        let a = commutator_res.scaled(Complex64::new(-2.0 * ll.asin() / gap, 0.0));
        let h = a.scaled(Complex64::new(0.0, 1.0));
        let rotation = exact_evolve_operator(&h, 1.0)?.scaled(-Complex64::ONE);
        Some(operator_distance(&product_res, &rotation, NormKind::Frobenius)?)
    };

    Ok(ReflectionProductCheck { algebraic_residual, exponential_residual })
}

// ---------------------------------------------------------------------------
// (B) Projector-sum state transfer
// ---------------------------------------------------------------------------

/// Evolves `e_i` under `P_i + P_j` for a quarter period `T = pi/(2 lambda)`
/// and measures the distance to `-i e^{-iT} e_j`, after rotating `e_j` by a
/// phase that makes the overlap real positive. Rejects orthogonal pairs
/// (`lambda = 0`), for which no finite transfer time exists.
pub fn check_state_transfer(pair: &ProjectorPair) -> Result<f64> {
    let ll = pair.overlap_magnitude();
    if ll < 1e-12 {
        return Err(HamsimError::invalid(
            "state transfer needs a nonzero overlap between the projectors",
        ));
    }
    // Phase convention: e_j <- e_j * conj(lambda)/|lambda| makes the overlap
    // real positive without changing P_j.
    let e_j_fixed = pair.e_j.scaled(pair.lambda.conj() / ll);
    let t = std::f64::consts::FRAC_PI_2 / ll;
    let h = pair.p_i.add(&pair.p_j)?;
    let evolved = exact_evolve(&h, t, &pair.e_i)?;
    let target = e_j_fixed.scaled(Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, -t));
    state_distance(&evolved, &target)
}

// ---------------------------------------------------------------------------
// (C) Conjugation by projector exponentials
// ---------------------------------------------------------------------------

/// Largest residual over the angle grid of the quadratic polynomial form of
/// the adjoint-action exponential,
/// `e^{i phi P} X e^{-i phi P} = X + i sin(phi) [P, X] + (cos(phi) - 1) [P, [P, X]]`.
pub fn check_conjugation(p: &DenseOperator, x: &DenseOperator, phis: &[f64]) -> Result<f64> {
    let bracket = p.commutator(x)?;
    let double = p.commutator(&bracket)?;
    let mut worst = 0.0f64;
    for &phi in phis {
        let left = projector_phase(p, phi)?;
        let right = projector_phase(p, -phi)?;
        let conjugated = left.matmul(x)?.matmul(&right)?;
        let polynomial = x
            .add(&bracket.scaled(Complex64::new(0.0, phi.sin())))?
            .add(&double.scaled(Complex64::new(phi.cos() - 1.0, 0.0)))?;
        worst = worst.max(operator_distance(&conjugated, &polynomial, NormKind::Frobenius)?);
    }
    Ok(worst)
}

/// Residual of the cubed adjoint action collapsing back onto itself:
/// `[P, [P, [P, X]]] = [P, X]` for projectors, and
/// `[R, [R, [R, X]]] = 4 [R, X]` for the associated reflections.
pub fn check_adjoint_cube(p: &DenseOperator, x: &DenseOperator) -> Result<(f64, f64)> {
    let ad1 = p.commutator(x)?;
    let ad3 = p.commutator(&p.commutator(&ad1)?)?;
    let projector_residual = operator_distance(&ad3, &ad1, NormKind::Frobenius)?;

    let reflect = DenseOperator::identity(p.dim()).sub(&p.scaled(Complex64::new(2.0, 0.0)))?;
    let rd1 = reflect.commutator(x)?;
    let rd3 = reflect.commutator(&reflect.commutator(&rd1)?)?;
    let reflection_residual =
        operator_distance(&rd3, &rd1.scaled(Complex64::new(4.0, 0.0)), NormKind::Frobenius)?;
    Ok((projector_residual, reflection_residual))
}

// ---------------------------------------------------------------------------
// (D) Derivative identities of a parametrised projector
// ---------------------------------------------------------------------------

/// Differentiable unit-vector family `e(x) = normalize(v0 + x v1)`.
#[derive(Debug, Clone)]
pub struct VectorFamily {
    v0: StateVector,
    v1: StateVector,
}

impl VectorFamily {
    pub fn new(v0: StateVector, v1: StateVector) -> Result<Self> {
        if v0.dim() != v1.dim() {
            return Err(HamsimError::DimensionMismatch { expected: v0.dim(), got: v1.dim() });
        }
        if v0.norm() == 0.0 {
            return Err(HamsimError::invalid("vector family needs a nonzero base vector"));
        }
        Ok(VectorFamily { v0, v1 })
    }

    pub fn random(dim: usize, gen: &mut SeededGenerator) -> Result<Self> {
        let draw = |gen: &mut SeededGenerator| {
            StateVector::new((0..dim).map(|_| gen.next_complex_sum4()).collect())
        };
        VectorFamily::new(draw(gen), draw(gen))
    }

    pub fn unit_vector(&self, x: f64) -> StateVector {
        let mut v = self.v0.clone();
        v.axpy(Complex64::new(x, 0.0), &self.v1);
        v.normalize();
        v
    }

    pub fn projector(&self, x: f64) -> DenseOperator {
        DenseOperator::projector_onto(&self.unit_vector(x))
    }
}

/// Largest residual of the two derivative identities at `x0`, with the
/// derivative taken by a central difference of step `h`:
/// `P dP + dP P = dP` (equivalently `{P, dP} - dP = 0`) and
/// `[P, [P, dP]] = dP`. Residuals are finite-difference limited, `O(h^2)`.
pub fn check_derivative_identities(family: &VectorFamily, x0: f64, h: f64) -> Result<f64> {
    if h <= 0.0 {
        return Err(HamsimError::invalid("finite-difference step must be positive"));
    }
    let p = family.projector(x0);
    let dp = family
        .projector(x0 + h)
        .sub(&family.projector(x0 - h))?
        .scaled(Complex64::new(0.5 / h, 0.0));
    let anticom = p.matmul(&dp)?.add(&dp.matmul(&p)?)?;
    let r1 = operator_distance(&anticom, &dp, NormKind::Frobenius)?;
    let nested = p.commutator(&p.commutator(&dp)?)?;
    let r2 = operator_distance(&nested, &dp, NormKind::Frobenius)?;
    Ok(r1.max(r2))
}

// ---------------------------------------------------------------------------
// Word reduction
// ---------------------------------------------------------------------------

/// Residual of the closed-word reduction
/// `P_{w1} P_{w2} ... P_{wn} P_{w1} = lambda_{w1 w2} ... lambda_{w(n-1) wn}
///  lambda_{wn w1} P_{w1}`: a product of projectors that returns to its
/// starting index collapses to that projector scaled by the chain of
/// overlaps around the loop (including the closing factor).
pub fn check_word_reduction(vectors: &[StateVector], word: &[usize]) -> Result<f64> {
    if word.is_empty() {
        return Err(HamsimError::invalid("projector word must be nonempty"));
    }
    if vectors.is_empty() {
        return Err(HamsimError::invalid("projector word needs at least one vector"));
    }
    let dim = vectors[0].dim();
    let mut units: Vec<StateVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.dim() != dim {
            return Err(HamsimError::DimensionMismatch { expected: dim, got: v.dim() });
        }
        let mut u = v.clone();
        if u.norm() == 0.0 {
            return Err(HamsimError::invalid("projector word needs nonzero vectors"));
        }
        u.normalize();
        units.push(u);
    }
    for &idx in word {
        if idx >= units.len() {
            return Err(HamsimError::invalid(format!(
                "word index {idx} out of range for {} projectors",
                units.len()
            )));
        }
    }
    let projectors: Vec<DenseOperator> =
        units.iter().map(DenseOperator::projector_onto).collect();
    // Close the loop back to the starting index.
    let mut product = projectors[word[0]].clone();
    let mut coeff = Complex64::ONE;
    let mut prev = word[0];
    for &idx in word.iter().skip(1).chain(std::iter::once(&word[0])) {
        product = product.matmul(&projectors[idx])?;
        coeff *= units[prev].inner(&units[idx]);
        prev = idx;
    }
    let reduced = projectors[word[0]].scaled(coeff);
    operator_distance(&product, &reduced, NormKind::Frobenius)
}

// ---------------------------------------------------------------------------
// Subspace spectra of differences and commutators
// ---------------------------------------------------------------------------

/// Residuals of the two scalar identities on `span{e_i, e_j}`:
/// `(P_i - P_j)^2 = (1 - |lambda|^2) I` and
/// `[P_i, P_j]^2 = (|lambda|^4 - |lambda|^2) I`.
pub fn check_span_squares(pair: &ProjectorPair) -> Result<(f64, f64)> {
    let basis = pair.span_basis();
    let ll = pair.overlap_magnitude();
    let eye = DenseOperator::identity(basis.len());

    let diff = pair.p_i.sub(&pair.p_j)?;
    let diff_sq = restrict_to_span(&diff.matmul(&diff)?, &basis)?;
    let r1 = operator_distance(
        &diff_sq,
        &eye.scaled(Complex64::new(1.0 - ll * ll, 0.0)),
        NormKind::Frobenius,
    )?;

    let comm = pair.p_i.commutator(&pair.p_j)?;
    let comm_sq = restrict_to_span(&comm.matmul(&comm)?, &basis)?;
    let r2 = operator_distance(
        &comm_sq,
        &eye.scaled(Complex64::new(ll.powi(4) - ll * ll, 0.0)),
        NormKind::Frobenius,
    )?;
    Ok((r1, r2))
}

// ---------------------------------------------------------------------------
// Suite runner
// ---------------------------------------------------------------------------

/// One line of the identity suite: worst residual observed for a check.
#[derive(Debug, Clone)]
pub struct IdentityCheckRow {
    pub name: &'static str,
    pub max_residual: f64,
    pub tolerance: f64,
    /// Seed that produced the worst residual, for replay.
    pub worst_seed: u64,
}

impl IdentityCheckRow {
    pub fn passed(&self) -> bool {
        self.max_residual < self.tolerance
    }
}

/// Aggregate result of the randomized identity suite.
#[derive(Debug, Clone)]
pub struct IdentitySuiteReport {
    pub seeds: usize,
    pub rows: Vec<IdentityCheckRow>,
}

impl IdentitySuiteReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(IdentityCheckRow::passed)
    }
}

/// Runs every identity check across `seed_count` seeded draws (dimensions
/// cycling through 2, 4 and 8) and reports the worst residual per check.
pub fn run_identity_suite(seed_count: usize, base_seed: u64) -> Result<IdentitySuiteReport> {
    const DIMS: [usize; 3] = [2, 4, 8];
    let mut rows = vec![
        IdentityCheckRow {
            name: "reflection-product (algebraic)",
            max_residual: 0.0,
            tolerance: IDENTITY_TOL,
            worst_seed: 0,
        },
        IdentityCheckRow {
            name: "reflection-product (rotation form)",
            max_residual: 0.0,
            tolerance: IDENTITY_TOL,
            worst_seed: 0,
        },
        IdentityCheckRow {
            name: "projector-sum state transfer",
            max_residual: 0.0,
            tolerance: IDENTITY_TOL,
            worst_seed: 0,
        },
        IdentityCheckRow {
            name: "conjugation polynomial",
            max_residual: 0.0,
            tolerance: IDENTITY_TOL,
            worst_seed: 0,
        },
        IdentityCheckRow {
            name: "adjoint cube (projector)",
            max_residual: 0.0,
            tolerance: SUBSPACE_TOL,
            worst_seed: 0,
        },
        IdentityCheckRow {
            name: "adjoint cube (reflection)",
            max_residual: 0.0,
            tolerance: IDENTITY_TOL,
            worst_seed: 0,
        },
        IdentityCheckRow {
            name: "difference squared on span",
            max_residual: 0.0,
            tolerance: SUBSPACE_TOL,
            worst_seed: 0,
        },
        IdentityCheckRow {
            name: "commutator squared on span",
            max_residual: 0.0,
            tolerance: SUBSPACE_TOL,
            worst_seed: 0,
        },
        IdentityCheckRow {
            name: "derivative identities (central difference)",
            max_residual: 0.0,
            tolerance: FD_TOL,
            worst_seed: 0,
        },
        IdentityCheckRow {
            name: "closed-word reduction",
            max_residual: 0.0,
            tolerance: IDENTITY_TOL,
            worst_seed: 0,
        },
    ];
    let phis = [0.0, std::f64::consts::PI / 7.0, -std::f64::consts::PI / 7.0,
        std::f64::consts::FRAC_PI_2, std::f64::consts::PI];
    let record = |rows: &mut Vec<IdentityCheckRow>, idx: usize, residual: f64, seed: u64| {
        if residual > rows[idx].max_residual {
            rows[idx].max_residual = residual;
            rows[idx].worst_seed = seed;
        }
    };
    for s in 0..seed_count {
        let seed = base_seed.wrapping_add(s as u64);
        let dim = DIMS[s % DIMS.len()];
        let mut gen = SeededGenerator::new(seed);
        let pair = ProjectorPair::random(dim, &mut gen)?;

        let product = check_reflection_product(&pair)?;
        record(&mut rows, 0, product.algebraic_residual, seed);
        if let Some(rot) = product.exponential_residual {
            record(&mut rows, 1, rot, seed);
        }
        if pair.overlap_magnitude() > 1e-12 {
            record(&mut rows, 2, check_state_transfer(&pair)?, seed);
        }

        let x = crate::rng::random_hermitian(dim, &mut gen);
        record(&mut rows, 3, check_conjugation(&pair.p_i, &x, &phis)?, seed);
        let (ad_p, ad_r) = check_adjoint_cube(&pair.p_i, &x)?;
        record(&mut rows, 4, ad_p, seed);
        record(&mut rows, 5, ad_r, seed);

        let (diff_sq, comm_sq) = check_span_squares(&pair)?;
        record(&mut rows, 6, diff_sq, seed);
        record(&mut rows, 7, comm_sq, seed);

        let family = VectorFamily::random(dim, &mut gen)?;
        let x0 = gen.next_symmetric();
        record(&mut rows, 8, check_derivative_identities(&family, x0, FD_STEP)?, seed);

        // Random closed word over three projectors (length 2..=6 before the
        // closing index).
        let vectors: Vec<StateVector> = (0..3)
            .map(|_| StateVector::new((0..dim).map(|_| gen.next_complex_sum4()).collect()))
            .collect();
        let len = 2 + (gen.next_u64() % 5) as usize;
        let word: Vec<usize> = (0..len).map(|_| (gen.next_u64() % 3) as usize).collect();
        record(&mut rows, 9, check_word_reduction(&vectors, &word)?, seed);
    }
    Ok(IdentitySuiteReport { seeds: seed_count, rows })
}
