//! Operator-space structures on C^d and evaluation of the matrix-level norm
//! ‖X‖_{M_n(E)} — exact where a formula exists (row, column, min-ℓ∞, concrete
//! pencil) and as certified lower/upper bounds for max-ℓ1, whose value lives
//! in a universal C*-algebra and is only approachable by substitution.

use num_complex::Complex64;

use crate::matcore::{apply_pencil, cr, operator_norm, CMat, MatTuple};
use crate::sampling::{haar_unitary, rng_stream};
use crate::{Error, Result};

/// Tolerance band around strict inclusions; inequalities tighter than this
/// are not numerically meaningful.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Rank threshold for the pencil-basis independence check.
const PENCIL_RANK_TOL: f64 = 1e-10;

/// An operator-space structure on C^d.
#[derive(Debug, Clone, PartialEq)]
pub enum OpSpaceSpec {
    /// Row structure: ‖X‖ = ‖Σ X_j X_j*‖^{1/2}.
    Row { d: usize },
    /// Column structure: ‖X‖ = ‖Σ X_j* X_j‖^{1/2}.
    Column { d: usize },
    /// min(ℓ∞_d): ‖X‖ = max_j ‖X_j‖ (the nc polydisc structure).
    MinLinf { d: usize },
    /// max(ℓ1_d): the nc diamond structure, dual to min(ℓ∞_d).
    MaxL1 { d: usize },
    /// Concrete span of Q_1,…,Q_d: ‖X‖ = ‖Σ X_j ⊗ Q_j‖.
    ConcretePencil { q: MatTuple },
}

impl OpSpaceSpec {
    pub fn row(d: usize) -> Self {
        Self::Row { d }
    }

    pub fn column(d: usize) -> Self {
        Self::Column { d }
    }

    pub fn min_linf(d: usize) -> Self {
        Self::MinLinf { d }
    }

    pub fn max_l1(d: usize) -> Self {
        Self::MaxL1 { d }
    }

    /// Concrete pencil structure; the Q_j must be linearly independent
    /// (checked via the rank of their stacked vectorizations).
    pub fn concrete_pencil(q: MatTuple) -> Result<Self> {
        let h = q.n();
        let d = q.d();
        if d > h * h {
            return Err(Error::InvalidInput(format!(
                "{d} matrices of size {h}x{h} cannot be linearly independent"
            )));
        }
        let mut stacked = CMat::zeros(h * h, d);
        for j in 0..d {
            for (idx, z) in q.mat(j).iter().enumerate() {
                stacked[(idx, j)] = *z;
            }
        }
        let sv = stacked
            .svd(false, false)
            .singular_values;
        let top = sv.iter().fold(0.0f64, |a, &s| a.max(s));
        let rank = sv.iter().filter(|&&s| s > PENCIL_RANK_TOL * top.max(1.0)).count();
        if rank < d {
            return Err(Error::InvalidInput(format!(
                "pencil members are linearly dependent (rank {rank} < {d})"
            )));
        }
        Ok(Self::ConcretePencil { q })
    }

    pub fn d(&self) -> usize {
        match self {
            Self::Row { d } | Self::Column { d } | Self::MinLinf { d } | Self::MaxL1 { d } => *d,
            Self::ConcretePencil { q } => q.d(),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Self::Row { .. } => "row",
            Self::Column { .. } => "column",
            Self::MinLinf { .. } => "minlinf",
            Self::MaxL1 { .. } => "maxl1",
            Self::ConcretePencil { .. } => "pencil",
        }
    }

    fn check_d(&self, x: &MatTuple) -> Result<()> {
        if self.d() != x.d() {
            return Err(Error::DimensionMismatch(format!(
                "space has d = {}, tuple has d = {}",
                self.d(),
                x.d()
            )));
        }
        Ok(())
    }
}

/// A certified interval for a norm value, with the method that produced it.
#[derive(Debug, Clone)]
pub struct NormEstimate {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub method: String,
    pub seed: Option<u64>,
}

impl NormEstimate {
    fn exact(value: f64, method: &str) -> Self {
        Self { lower: value, upper: value, exact: true, method: method.into(), seed: None }
    }
}

/// Options for the max-ℓ1 substitution sampler.
#[derive(Debug, Clone)]
pub struct NormOpts {
    /// Number of random unitary tuples per dimension lane.
    pub samples: usize,
    /// Largest substitution dimension; every dimension 1..=unitary_dim is
    /// sampled so enlarging it only adds candidates.
    pub unitary_dim: usize,
    pub seed: u64,
}

impl Default for NormOpts {
    fn default() -> Self {
        Self { samples: 16, unitary_dim: 8, seed: 0 }
    }
}

/// The matrix-level norm of X in the given structure.
pub fn space_norm(spec: &OpSpaceSpec, x: &MatTuple, opts: &NormOpts) -> Result<NormEstimate> {
    spec.check_d(x)?;
    match spec {
        OpSpaceSpec::Row { .. } => {
            let mut acc = CMat::zeros(x.n(), x.n());
            for m in x.mats() {
                acc += m * m.adjoint();
            }
            Ok(NormEstimate::exact(operator_norm(&acc)?.sqrt(), "row-gram"))
        }
        OpSpaceSpec::Column { .. } => {
            let mut acc = CMat::zeros(x.n(), x.n());
            for m in x.mats() {
                acc += m.adjoint() * m;
            }
            Ok(NormEstimate::exact(operator_norm(&acc)?.sqrt(), "column-gram"))
        }
        OpSpaceSpec::MinLinf { .. } => {
            let mut v: f64 = 0.0;
            for m in x.mats() {
                v = v.max(operator_norm(m)?);
            }
            Ok(NormEstimate::exact(v, "max-member-norm"))
        }
        OpSpaceSpec::ConcretePencil { q } => {
            Ok(NormEstimate::exact(operator_norm(&apply_pencil(x, q)?)?, "pencil-norm"))
        }
        OpSpaceSpec::MaxL1 { .. } => {
            if opts.samples < 1 {
                return Err(Error::Config("maxl1 sampler needs samples >= 1".into()));
            }
            let lower = max_l1_lower(x, opts)?;
            let upper = max_l1_upper(x)?;
            Ok(NormEstimate {
                lower: lower.min(upper),
                upper,
                exact: false,
                method: format!(
                    "maxl1-unitary-sampler(samples={},dim<={})",
                    opts.samples, opts.unitary_dim
                ),
                seed: Some(opts.seed),
            })
        }
    }
}

/// Triangle-inequality upper bound Σ_j ‖X_j‖ for the max-ℓ1 norm.
pub fn max_l1_upper(x: &MatTuple) -> Result<f64> {
    let mut s = 0.0;
    for m in x.mats() {
        s += operator_norm(m)?;
    }
    Ok(s)
}

/// Lower bound by substituting unitary tuples into Σ X_j ⊗ U_j. The scalar
/// tuple U_j = 1 is always included; sampled lanes are nested under a fixed
/// seed, so enlarging `samples` or `unitary_dim` never lowers the bound.
fn max_l1_lower(x: &MatTuple, opts: &NormOpts) -> Result<f64> {
    let d = x.d();
    let ones = MatTuple::from_scalars(&vec![cr(1.0); d])?;
    let mut best = operator_norm(&apply_pencil(x, &ones)?)?;
    for dim in 1..=opts.unitary_dim {
        for i in 0..opts.samples {
            let mut rng = rng_stream(opts.seed, dim as u64, i as u64);
            let us = MatTuple::new((0..d).map(|_| haar_unitary(&mut rng, dim)).collect())?;
            best = best.max(operator_norm(&apply_pencil(x, &us)?)?);
        }
    }
    Ok(best)
}

/// Exact first-level norm of a scalar tuple x ∈ C^d.
pub fn scalar_level_norm(spec: &OpSpaceSpec, xs: &[Complex64]) -> Result<f64> {
    if spec.d() != xs.len() {
        return Err(Error::DimensionMismatch(format!(
            "space has d = {}, scalar tuple has d = {}",
            spec.d(),
            xs.len()
        )));
    }
    match spec {
        OpSpaceSpec::Row { .. } | OpSpaceSpec::Column { .. } => {
            Ok(xs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        }
        OpSpaceSpec::MinLinf { .. } => Ok(xs.iter().fold(0.0f64, |a, z| a.max(z.norm()))),
        OpSpaceSpec::MaxL1 { .. } => Ok(xs.iter().map(|z| z.norm()).sum()),
        OpSpaceSpec::ConcretePencil { q } => {
            let x = MatTuple::from_scalars(xs)?;
            operator_norm(&apply_pencil(&x, q)?)
        }
    }
}

/// Verdict of a strict ball-membership test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallPosition {
    Inside,
    Outside,
    Unknown,
}

/// Whether X lies strictly inside the ball of radius r, outside it, or too
/// close to the boundary (or too loosely bounded) to tell.
pub fn ball_contains(
    spec: &OpSpaceSpec,
    x: &MatTuple,
    r: f64,
    opts: &NormOpts,
) -> Result<BallPosition> {
    if r <= 0.0 {
        return Err(Error::Config(format!("ball radius must be positive, got {r}")));
    }
    let est = space_norm(spec, x, opts)?;
    if est.upper < r - BOUNDARY_TOL {
        Ok(BallPosition::Inside)
    } else if est.lower > r + BOUNDARY_TOL {
        Ok(BallPosition::Outside)
    } else {
        Ok(BallPosition::Unknown)
    }
}

/// Operator-space dual: row ↔ column, min-ℓ∞ ↔ max-ℓ1. Concrete pencils have
/// no finite dual pencil available here.
pub fn dual_spec(spec: &OpSpaceSpec) -> Result<OpSpaceSpec> {
    match spec {
        OpSpaceSpec::Row { d } => Ok(OpSpaceSpec::Column { d: *d }),
        OpSpaceSpec::Column { d } => Ok(OpSpaceSpec::Row { d: *d }),
        OpSpaceSpec::MinLinf { d } => Ok(OpSpaceSpec::MaxL1 { d: *d }),
        OpSpaceSpec::MaxL1 { d } => Ok(OpSpaceSpec::MinLinf { d: *d }),
        OpSpaceSpec::ConcretePencil { .. } => Err(Error::UnsupportedDual(
            "no finite dual pencil for a concrete pencil structure".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c64;
    use crate::sampling::{haar_unitary, random_tuple, rng_from};

    fn diag2(a: f64, b: f64) -> CMat {
        CMat::from_diagonal(&crate::matcore::CVec::from_vec(vec![cr(a), cr(b)]))
    }

    #[test]
    fn min_linf_diagonal_max() {
        let x = MatTuple::new(vec![diag2(0.6, 0.0), diag2(0.0, 0.8)]).unwrap();
        let est = space_norm(&OpSpaceSpec::min_linf(2), &x, &NormOpts::default()).unwrap();
        assert!(est.exact);
        assert!((est.upper - 0.8).abs() < 1e-12);
    }

    #[test]
    fn row_norm_of_matrix_unit() {
        let mut e12 = CMat::zeros(2, 2);
        e12[(0, 1)] = cr(1.0);
        let x = MatTuple::new(vec![e12, CMat::zeros(2, 2)]).unwrap();
        let est = space_norm(&OpSpaceSpec::row(2), &x, &NormOpts::default()).unwrap();
        assert!((est.upper - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_l1_scalars_tight() {
        let x = MatTuple::from_scalars(&[cr(0.5), cr(0.5)]).unwrap();
        let est = space_norm(&OpSpaceSpec::max_l1(2), &x, &NormOpts::default()).unwrap();
        assert!(!est.exact);
        assert!((est.upper - 1.0).abs() < 1e-12);
        // the all-ones scalar substitution already attains the upper bound
        assert!((est.lower - 1.0).abs() < 1e-12);
    }

    #[test]
    fn max_l1_lower_never_exceeds_upper_and_nests() {
        let mut rng = rng_from(21);
        for _ in 0..5 {
            let x = random_tuple(&mut rng, 2, 2, 1.0);
            let small = NormOpts { samples: 2, unitary_dim: 2, seed: 7 };
            let big = NormOpts { samples: 5, unitary_dim: 4, seed: 7 };
            let e0 = space_norm(&OpSpaceSpec::max_l1(2), &x, &small).unwrap();
            let e1 = space_norm(&OpSpaceSpec::max_l1(2), &x, &big).unwrap();
            assert!(e0.lower <= e0.upper + 1e-12);
            assert!(e1.lower + 1e-12 >= e0.lower, "nested sampling must not lose candidates");
        }
    }

    #[test]
    fn ball_contains_examples() {
        let opts = NormOpts::default();
        let zero = MatTuple::zeros(2, 2);
        assert_eq!(
            ball_contains(&OpSpaceSpec::row(2), &zero, 1.0, &opts).unwrap(),
            BallPosition::Inside
        );

        // boundary: norm exactly 1 at r = 1 falls in the tolerance band
        let x = MatTuple::new(vec![CMat::identity(2, 2), CMat::identity(2, 2)]).unwrap();
        assert_eq!(
            ball_contains(&OpSpaceSpec::min_linf(2), &x, 1.0, &opts).unwrap(),
            BallPosition::Unknown
        );

        let y = MatTuple::from_scalars(&[cr(0.4), cr(0.4)]).unwrap();
        assert_eq!(
            ball_contains(&OpSpaceSpec::max_l1(2), &y, 1.0, &opts).unwrap(),
            BallPosition::Inside
        );

        assert!(ball_contains(&OpSpaceSpec::row(2), &zero, 0.0, &opts).is_err());
    }

    #[test]
    fn dual_pairs() {
        assert_eq!(dual_spec(&OpSpaceSpec::row(2)).unwrap(), OpSpaceSpec::column(2));
        assert_eq!(dual_spec(&OpSpaceSpec::min_linf(2)).unwrap(), OpSpaceSpec::max_l1(2));
        let back = dual_spec(&dual_spec(&OpSpaceSpec::row(3)).unwrap()).unwrap();
        assert_eq!(back, OpSpaceSpec::row(3));
        let q = MatTuple::from_scalars(&[cr(1.0)]).unwrap();
        assert!(matches!(
            dual_spec(&OpSpaceSpec::concrete_pencil(q).unwrap()),
            Err(Error::UnsupportedDual(_))
        ));
    }

    #[test]
    fn pencil_independence_check() {
        let q1 = CMat::identity(2, 2);
        let q2 = CMat::identity(2, 2) * cr(2.0);
        let dep = MatTuple::new(vec![q1.clone(), q2]).unwrap();
        assert!(OpSpaceSpec::concrete_pencil(dep).is_err());
        let mut e12 = CMat::zeros(2, 2);
        e12[(0, 1)] = cr(1.0);
        let indep = MatTuple::new(vec![q1, e12]).unwrap();
        assert!(OpSpaceSpec::concrete_pencil(indep).is_ok());
    }

    #[test]
    fn norms_absolutely_homogeneous() {
        let mut rng = rng_from(22);
        let lambda = c64(-0.7, 1.3);
        for spec in [
            OpSpaceSpec::row(2),
            OpSpaceSpec::column(2),
            OpSpaceSpec::min_linf(2),
            OpSpaceSpec::max_l1(2),
        ] {
            for _ in 0..10 {
                let x = random_tuple(&mut rng, 2, 2, 1.0);
                let opts = NormOpts { samples: 4, unitary_dim: 3, seed: 5 };
                let e0 = space_norm(&spec, &x, &opts).unwrap();
                let e1 = space_norm(&spec, &x.scale(lambda), &opts).unwrap();
                let s = lambda.norm();
                assert!((e1.upper - s * e0.upper).abs() < 1e-10 * (1.0 + s * e0.upper));
                assert!((e1.lower - s * e0.lower).abs() < 1e-10 * (1.0 + s * e0.lower));
            }
        }
    }

    #[test]
    fn row_column_unitarily_invariant() {
        let mut rng = rng_from(23);
        for spec in [OpSpaceSpec::row(2), OpSpaceSpec::column(2)] {
            for _ in 0..10 {
                let x = random_tuple(&mut rng, 2, 3, 1.0);
                let u = haar_unitary(&mut rng, 3);
                let v = haar_unitary(&mut rng, 3);
                let moved =
                    MatTuple::new(x.mats().iter().map(|m| &u * m * &v).collect()).unwrap();
                let e0 = space_norm(&spec, &x, &NormOpts::default()).unwrap();
                let e1 = space_norm(&spec, &moved, &NormOpts::default()).unwrap();
                assert!((e0.upper - e1.upper).abs() < 1e-9 * (1.0 + e0.upper));
            }
        }
    }

    #[test]
    fn d1_variants_agree_with_operator_norm() {
        let mut rng = rng_from(24);
        for _ in 0..10 {
            let x = random_tuple(&mut rng, 1, 3, 1.0);
            let expected = operator_norm(x.mat(0)).unwrap();
            for spec in [
                OpSpaceSpec::row(1),
                OpSpaceSpec::column(1),
                OpSpaceSpec::min_linf(1),
                OpSpaceSpec::max_l1(1),
            ] {
                let est = space_norm(&spec, &x, &NormOpts::default()).unwrap();
                assert!(
                    (est.upper - expected).abs() < 1e-10 * (1.0 + expected),
                    "variant {} upper {} vs {}",
                    est.method,
                    est.upper,
                    expected
                );
                assert!((est.lower - expected).abs() < 1e-10 * (1.0 + expected));
            }
        }
    }

    #[test]
    fn scalar_level_norms() {
        let xs = [c64(0.3, 0.4), cr(-1.0)];
        assert!((scalar_level_norm(&OpSpaceSpec::row(2), &xs).unwrap() - 1.25f64.sqrt()).abs() < 1e-12);
        assert!((scalar_level_norm(&OpSpaceSpec::min_linf(2), &xs).unwrap() - 1.0).abs() < 1e-12);
        assert!((scalar_level_norm(&OpSpaceSpec::max_l1(2), &xs).unwrap() - 1.5).abs() < 1e-12);
    }
}
