//! Dense complex matrix and tuple arithmetic: operator norms, eigenvalues,
//! Kronecker products, and linear-pencil assembly used by every other module.
//!
//! Matrices are plain `nalgebra` dynamic matrices over `Complex<f64>`; a
//! [`MatTuple`] is a d-tuple of square matrices sharing one dimension.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Relative floor below which a pencil counts as singular.
pub const PENCIL_SINGULAR_TOL: f64 = 1e-12;

/// Requested accuracy for eigenvalue computations surfaced to callers.
pub const EIG_TOL: f64 = 1e-12;

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A d-tuple of n×n complex matrices, the basic object everything else
/// consumes. All members share the same square dimension and d ≥ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MatTuple {
    mats: Vec<CMat>,
}

impl MatTuple {
    pub fn new(mats: Vec<CMat>) -> Result<Self> {
        if mats.is_empty() {
            return Err(Error::InvalidInput("tuple needs at least one matrix".into()));
        }
        let n = mats[0].nrows();
        if n == 0 {
            return Err(Error::InvalidInput("tuple matrices must be nonempty".into()));
        }
        for (j, m) in mats.iter().enumerate() {
            if m.nrows() != n || m.ncols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "member {j} is {}x{}, expected {n}x{n}",
                    m.nrows(),
                    m.ncols()
                )));
            }
            ensure_finite(m)?;
        }
        Ok(Self { mats })
    }

    /// Number of variables d.
    pub fn d(&self) -> usize {
        self.mats.len()
    }

    /// Matrix size n (the level).
    pub fn n(&self) -> usize {
        self.mats[0].nrows()
    }

    pub fn mats(&self) -> &[CMat] {
        &self.mats
    }

    pub fn mat(&self, j: usize) -> &CMat {
        &self.mats[j]
    }

    pub fn zeros(d: usize, n: usize) -> Self {
        Self { mats: vec![CMat::zeros(n, n); d] }
    }

    /// Tuple of scalars (level 1).
    pub fn from_scalars(xs: &[Complex64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| CMat::from_element(1, 1, x)).collect())
    }

    pub fn scale(&self, lambda: Complex64) -> Self {
        Self { mats: self.mats.iter().map(|m| m * lambda).collect() }
    }

    /// Entrywise adjoint tuple (X_1*, …, X_d*).
    pub fn adjoint(&self) -> Self {
        Self { mats: self.mats.iter().map(|m| m.adjoint()).collect() }
    }

    /// Joint conjugation (S⁻¹X_1S, …, S⁻¹X_dS) given S and S⁻¹.
    pub fn conjugate_with(&self, s: &CMat, s_inv: &CMat) -> Self {
        Self { mats: self.mats.iter().map(|m| s_inv * m * s).collect() }
    }

    /// Direct sum with another tuple of the same d.
    pub fn direct_sum(&self, other: &MatTuple) -> Result<Self> {
        if self.d() != other.d() {
            return Err(Error::DimensionMismatch(format!(
                "direct sum needs equal d ({} vs {})",
                self.d(),
                other.d()
            )));
        }
        let (n, m) = (self.n(), other.n());
        let mats = self
            .mats
            .iter()
            .zip(&other.mats)
            .map(|(a, b)| {
                let mut s = CMat::zeros(n + m, n + m);
                s.view_mut((0, 0), (n, n)).copy_from(a);
                s.view_mut((n, n), (m, m)).copy_from(b);
                s
            })
            .collect();
        Ok(Self { mats })
    }

    /// Product X^w = X_{w_1} ⋯ X_{w_k} for a word over 0..d (empty word → I).
    pub fn word_product(&self, word: &[usize]) -> CMat {
        let mut p = CMat::identity(self.n(), self.n());
        for &j in word {
            p *= &self.mats[j];
        }
        p
    }
}

pub fn ensure_finite(m: &CMat) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

/// Largest singular value σ_max(M), the operator norm used throughout.
pub fn operator_norm(m: &CMat) -> Result<f64> {
    ensure_finite(m)?;
    if m.iter().all(|z| z.norm_sqr() == 0.0) {
        return Ok(0.0);
    }
    let sv = m
        .clone()
        .try_svd(false, false, 1e-15, 10_000)
        .ok_or_else(|| Error::NumericalDegeneracy("SVD did not converge".into()))?
        .singular_values;
    Ok(sv.iter().fold(0.0f64, |a, &s| a.max(s)))
}

/// Smallest singular value of M.
pub fn sigma_min(m: &CMat) -> Result<f64> {
    ensure_finite(m)?;
    let sv = m
        .clone()
        .try_svd(false, false, 1e-15, 10_000)
        .ok_or_else(|| Error::NumericalDegeneracy("SVD did not converge".into()))?
        .singular_values;
    Ok(sv.iter().fold(f64::INFINITY, |a, &s| a.min(s)))
}

/// All eigenvalues of a square complex matrix via its Schur form.
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    ensure_finite(m)?;
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "eigenvalues need a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), EIG_TOL, 100_000)
        .ok_or_else(|| Error::NumericalDegeneracy("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

/// Max |λ| over the spectrum, absolute accuracy ~1e-10 at desk scale.
pub fn spectral_radius_classical(m: &CMat) -> Result<f64> {
    Ok(eigenvalues(m)?
        .iter()
        .fold(0.0f64, |a, z| a.max(z.norm())))
}

/// Eigenvalue/eigenvector pairs extracted from the Schur form by
/// back-substitution on the triangular factor. Defective clusters yield
/// approximate repeats, which is what the orbit searches need.
pub fn eigen_pairs(m: &CMat) -> Result<Vec<(Complex64, CVec)>> {
    ensure_finite(m)?;
    let n = m.nrows();
    if n == 1 {
        return Ok(vec![(m[(0, 0)], CVec::from_element(1, cr(1.0)))]);
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), EIG_TOL, 100_000)
        .ok_or_else(|| Error::NumericalDegeneracy("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let scale = t.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let floor = (scale.max(1.0)) * 1e-300f64.max(f64::EPSILON * scale.max(1.0));
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = CVec::zeros(n);
        y[k] = cr(1.0);
        for i in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                s += t[(i, j)] * y[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < floor {
                denom = cr(floor);
            }
            y[i] = -s / denom;
        }
        let mut x = &q * y;
        let nrm = x.norm();
        if nrm > 0.0 {
            x /= cr(nrm);
        }
        out.push((lambda, x));
    }
    Ok(out)
}

/// Kronecker product with the left factor indexing blocks.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Evaluates the pencil Q at X: the (n·h)×(n·h) matrix Σ_j X_j ⊗ Q_j.
pub fn apply_pencil(x: &MatTuple, q: &MatTuple) -> Result<CMat> {
    if x.d() != q.d() {
        return Err(Error::DimensionMismatch(format!(
            "pencil evaluation needs matching d (X has {}, Q has {})",
            x.d(),
            q.d()
        )));
    }
    let dim = x.n() * q.n();
    let mut acc = CMat::zeros(dim, dim);
    for j in 0..x.d() {
        acc += kron(x.mat(j), q.mat(j));
    }
    Ok(acc)
}

/// I − Σ_j X_j ⊗ A_j, the resolvent pencil of a realization at X.
pub fn pencil_matrix(x: &MatTuple, a: &MatTuple) -> Result<CMat> {
    let dim = x.n() * a.n();
    Ok(CMat::identity(dim, dim) - apply_pencil(x, a)?)
}

/// Outcome of inverting the pencil I − Σ X_j ⊗ A_j.
#[derive(Debug, Clone)]
pub enum Resolvent {
    Inverse(CMat),
    /// The pencil's smallest singular value fell below the singularity floor.
    Singular { sigma_min: f64 },
}

/// (I − Σ X_j ⊗ A_j)⁻¹, or a singular flag carrying σ_min when the pencil
/// is numerically singular (σ_min ≤ 1e-12·(1+‖pencil‖)).
pub fn pencil_resolvent(x: &MatTuple, a: &MatTuple) -> Result<Resolvent> {
    let pencil = pencil_matrix(x, a)?;
    let smin = sigma_min(&pencil)?;
    let threshold = PENCIL_SINGULAR_TOL * (1.0 + operator_norm(&pencil)?);
    if smin <= threshold {
        return Ok(Resolvent::Singular { sigma_min: smin });
    }
    let inv = pencil
        .lu()
        .try_inverse()
        .ok_or(Error::NumericalDegeneracy("pencil LU inversion failed".into()))?;
    Ok(Resolvent::Inverse(inv))
}

/// Solve M y = rhs by LU.
pub fn solve(m: &CMat, rhs: &CMat) -> Result<CMat> {
    m.clone()
        .lu()
        .solve(rhs)
        .ok_or_else(|| Error::NumericalDegeneracy("linear solve on singular matrix".into()))
}

pub fn try_inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::NumericalDegeneracy("matrix is not invertible".into()))
}

/// Matrix exponential (scaling-and-squaring Padé).
pub fn expm(m: &CMat) -> CMat {
    m.exp()
}

/// condition number σ_max/σ_min.
pub fn condition_number(m: &CMat) -> Result<f64> {
    let hi = operator_norm(m)?;
    let lo = sigma_min(m)?;
    if lo == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(hi / lo)
}

/// Orthonormal basis of span{A^w s : words w over the tuple, seeds s}.
///
/// Breadth-first orbit expansion with Gram–Schmidt rank tracking. A new
/// direction is accepted when its orthogonal residual exceeds `hi` relative
/// to its size and rejected below `lo`; residuals in between mean the rank
/// decision is not trustworthy and abort with a degeneracy error.
pub fn invariant_orbit(mats: &[CMat], seeds: &[CVec], lo: f64, hi: f64) -> Result<CMat> {
    let n = mats.first().map_or_else(|| seeds[0].len(), |m| m.nrows());
    let mut basis: Vec<CVec> = Vec::new();
    let mut queue: std::collections::VecDeque<CVec> = seeds.iter().cloned().collect();
    while let Some(w) = queue.pop_front() {
        if basis.len() == n {
            break;
        }
        let wn = w.norm();
        if !wn.is_finite() {
            return Err(Error::InvalidInput("orbit vector is non-finite".into()));
        }
        if wn <= lo {
            continue;
        }
        let mut r = w.clone();
        // two Gram-Schmidt passes for orthogonality at the tolerance scale
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&r);
                r -= b * coeff;
            }
        }
        let ratio = r.norm() / wn;
        if ratio <= lo {
            continue;
        }
        if ratio < hi {
            return Err(Error::NumericalDegeneracy(format!(
                "orbit rank decision ambiguous: residual ratio {ratio:e} lies between {lo:e} and {hi:e}"
            )));
        }
        let v = &r / cr(r.norm());
        for m in mats {
            queue.push_back(m * &v);
        }
        basis.push(v);
    }
    let mut out = CMat::zeros(n, basis.len());
    for (k, b) in basis.iter().enumerate() {
        out.set_column(k, b);
    }
    Ok(out)
}

/// Extend orthonormal columns to a full unitary by appending coordinate
/// directions that survive Gram–Schmidt.
pub fn complete_unitary(cols: &CMat) -> CMat {
    let n = cols.nrows();
    let mut basis: Vec<CVec> = (0..cols.ncols()).map(|k| cols.column(k).into_owned()).collect();
    for i in 0..n {
        if basis.len() == n {
            break;
        }
        let mut r = CVec::zeros(n);
        r[i] = cr(1.0);
        for _ in 0..2 {
            for b in &basis {
                let coeff = b.dotc(&r);
                r -= b * coeff;
            }
        }
        if r.norm() > 1e-8 {
            let v = &r / cr(r.norm());
            basis.push(v);
        }
    }
    let mut out = CMat::zeros(n, n);
    for (k, b) in basis.iter().enumerate() {
        out.set_column(k, b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{random_tuple, random_well_conditioned, rng_from};

    fn mat(rows: usize, cols: usize, re: &[f64]) -> CMat {
        CMat::from_row_slice(rows, cols, &re.iter().map(|&x| cr(x)).collect::<Vec<_>>())
    }

    #[test]
    fn operator_norm_zero_and_identity() {
        assert_eq!(operator_norm(&CMat::zeros(2, 2)).unwrap(), 0.0);
        let id = CMat::identity(3, 3);
        assert!((operator_norm(&id).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_shear() {
        // eigenvalues of M*M are (3±√5)/2
        let m = mat(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let expected = ((3.0 + 5.0f64.sqrt()) / 2.0).sqrt();
        assert!((operator_norm(&m).unwrap() - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn operator_norm_rejects_non_finite() {
        let mut m = CMat::zeros(2, 2);
        m[(0, 1)] = c64(f64::NAN, 0.0);
        assert!(matches!(operator_norm(&m), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn spectral_radius_examples() {
        let jordan = mat(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!((spectral_radius_classical(&jordan).unwrap() - 1.0).abs() < 1e-10);

        let diag = mat(2, 2, &[0.3, 0.0, 0.0, -0.7]);
        assert!((spectral_radius_classical(&diag).unwrap() - 0.7).abs() < 1e-10);

        let nil = mat(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(spectral_radius_classical(&nil).unwrap() < 1e-10);
    }

    #[test]
    fn spectral_radius_rejects_non_square() {
        let m = CMat::zeros(2, 3);
        assert!(matches!(eigenvalues(&m), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn apply_pencil_scalar_case() {
        let x = MatTuple::from_scalars(&[cr(1.0)]).unwrap();
        let q = MatTuple::from_scalars(&[cr(1.0)]).unwrap();
        let p = apply_pencil(&x, &q).unwrap();
        assert_eq!(p.nrows(), 1);
        assert!((p[(0, 0)] - cr(1.0)).norm() < 1e-15);
    }

    #[test]
    fn apply_pencil_kron_expansion() {
        let x = MatTuple::new(vec![CMat::identity(2, 2), CMat::zeros(2, 2)]).unwrap();
        let e11 = mat(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let e22 = mat(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let q = MatTuple::new(vec![e11, e22]).unwrap();
        let p = apply_pencil(&x, &q).unwrap();
        let expected = CMat::from_diagonal(&CVec::from_vec(vec![cr(1.0), cr(0.0), cr(1.0), cr(0.0)]));
        assert!((p - expected).norm() < 1e-15);
    }

    #[test]
    fn apply_pencil_mismatched_d() {
        let x = MatTuple::from_scalars(&[cr(1.0)]).unwrap();
        let q = MatTuple::from_scalars(&[cr(1.0), cr(2.0)]).unwrap();
        assert!(matches!(apply_pencil(&x, &q), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn pencil_resolvent_zero_tuple_is_identity() {
        let x = MatTuple::zeros(2, 2);
        let a = MatTuple::new(vec![mat(3, 3, &[0.1; 9]), mat(3, 3, &[0.2; 9])]).unwrap();
        match pencil_resolvent(&x, &a).unwrap() {
            Resolvent::Inverse(inv) => {
                assert!((inv - CMat::identity(6, 6)).norm() < 1e-12);
            }
            Resolvent::Singular { .. } => panic!("zero tuple must give the identity pencil"),
        }
    }

    #[test]
    fn famous_pencil_at_ones_is_singular() {
        let fam = crate::casestudy::build_famous();
        let ones = MatTuple::from_scalars(&[cr(1.0), cr(1.0)]).unwrap();
        // rows 1 and 2 of I − (A₁ + A₂) coincide, so the pencil degenerates
        let pencil = pencil_matrix(&ones, &fam.descriptor.a).unwrap();
        let row_gap = (pencil.row(0) - pencil.row(1)).norm();
        assert!(row_gap < 1e-15);
        match pencil_resolvent(&ones, &fam.descriptor.a).unwrap() {
            Resolvent::Singular { sigma_min } => assert!(sigma_min <= 1e-12),
            Resolvent::Inverse(_) => panic!("pencil at (1,1) must be singular"),
        }
        let half = MatTuple::from_scalars(&[cr(0.5), cr(0.5)]).unwrap();
        assert!(matches!(
            pencil_resolvent(&half, &fam.descriptor.a).unwrap(),
            Resolvent::Inverse(_)
        ));
    }

    #[test]
    fn kron_norm_is_multiplicative() {
        let mut rng = rng_from(11);
        for _ in 0..20 {
            let a = random_well_conditioned(&mut rng, 2);
            let b = random_well_conditioned(&mut rng, 3);
            let lhs = operator_norm(&kron(&a, &b)).unwrap();
            let rhs = operator_norm(&a).unwrap() * operator_norm(&b).unwrap();
            assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs));
        }
    }

    #[test]
    fn spectral_radius_similarity_invariant() {
        let mut rng = rng_from(12);
        for _ in 0..20 {
            let m = random_well_conditioned(&mut rng, 3);
            let s = random_well_conditioned(&mut rng, 3);
            let s_inv = try_inverse(&s).unwrap();
            let conj = &s_inv * &m * &s;
            let r0 = spectral_radius_classical(&m).unwrap();
            let r1 = spectral_radius_classical(&conj).unwrap();
            assert!((r0 - r1).abs() < 1e-8 * (1.0 + r0));
        }
    }

    #[test]
    fn spectral_radius_below_norm() {
        let mut rng = rng_from(13);
        for _ in 0..20 {
            let m = random_well_conditioned(&mut rng, 3);
            let r = spectral_radius_classical(&m).unwrap();
            let nn = operator_norm(&m).unwrap();
            assert!(r <= nn + 1e-10);
        }
    }

    #[test]
    fn eigen_pairs_reproduce_action() {
        let mut rng = rng_from(14);
        for _ in 0..10 {
            let m = random_well_conditioned(&mut rng, 4);
            for (lambda, v) in eigen_pairs(&m).unwrap() {
                let res = (&m * &v - &v * lambda).norm();
                assert!(res < 1e-8, "eigenresidual {res}");
            }
        }
    }

    #[test]
    fn invariant_orbit_spans_reachable_space() {
        // E12, E21 generate all of C^2 from any nonzero start
        let e12 = mat(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let e21 = mat(2, 2, &[0.0, 0.0, 1.0, 0.0]);
        let seed = CVec::from_vec(vec![cr(1.0), cr(0.0)]);
        let orbit = invariant_orbit(&[e12, e21], &[seed], 1e-9, 1e-8).unwrap();
        assert_eq!(orbit.ncols(), 2);
    }

    #[test]
    fn tuple_validation() {
        assert!(MatTuple::new(vec![]).is_err());
        let bad = MatTuple::new(vec![CMat::zeros(2, 2), CMat::zeros(3, 3)]);
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn random_tuple_shapes() {
        let mut rng = rng_from(15);
        let x = random_tuple(&mut rng, 2, 3, 1.0);
        assert_eq!(x.d(), 2);
        assert_eq!(x.n(), 3);
    }
}
