//! Noncommutative rational expressions, realization calculus, evaluation,
//! and domain analysis.
//!
//! An expression regular at the origin is compiled to a descriptor
//! realization f(X) = (I⊗c)* (I − Σ X_j⊗A_j)⁻¹ (I⊗b) by structural recursion
//! (block-diagonal sums, series-coupled products, rank-one-perturbed
//! inverses). Minimal realizations make the pencil singularities exactly the
//! complement of the function's domain, which turns domain questions into
//! spectral-radius questions about the coefficient tuple in the dual
//! structure.

mod parser;

pub use parser::{parse_expr, parse_expr_with_vars};

use num_complex::Complex64;

use crate::matcore::{
    cr, invariant_orbit, kron, operator_norm, pencil_resolvent, sigma_min, CMat, CVec, MatTuple,
    Resolvent,
};
use crate::opspace::{dual_spec, OpSpaceSpec};
use crate::specrad::{rho_estimate, RadiusEstimate, RadiusOpts};
use crate::{Error, Result};

/// Value below which an inverted subexpression at 0 counts as singular.
const ADMISSIBLE_TOL: f64 = 1e-12;

/// Rank tolerance for the controllability/observability reductions.
const MIN_REAL_ORBIT_LO: f64 = 1e-10;
const MIN_REAL_ORBIT_HI: f64 = 1e-9;

/// Syntax tree of a noncommutative rational expression. Variable indices are
/// 1-based; `Mul` preserves operand order.
#[derive(Debug, Clone, PartialEq)]
pub enum NcExpr {
    Const(Complex64),
    Var(usize),
    Neg(Box<NcExpr>),
    Add(Box<NcExpr>, Box<NcExpr>),
    Mul(Box<NcExpr>, Box<NcExpr>),
    Inv(Box<NcExpr>),
    Scale(Complex64, Box<NcExpr>),
}

impl NcExpr {
    /// Largest variable index appearing in the tree (0 for constants).
    pub fn max_var(&self) -> usize {
        match self {
            NcExpr::Const(_) => 0,
            NcExpr::Var(j) => *j,
            NcExpr::Neg(e) | NcExpr::Inv(e) | NcExpr::Scale(_, e) => e.max_var(),
            NcExpr::Add(a, b) | NcExpr::Mul(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// Direct evaluation on a matrix tuple; inverses that hit a singular
    /// matrix surface an outside-domain error.
    pub fn eval(&self, x: &MatTuple) -> Result<CMat> {
        let n = x.n();
        match self {
            NcExpr::Const(alpha) => Ok(CMat::identity(n, n) * *alpha),
            NcExpr::Var(j) => {
                if *j == 0 || *j > x.d() {
                    return Err(Error::InvalidInput(format!(
                        "variable x{j} out of range for a {}-variable point",
                        x.d()
                    )));
                }
                Ok(x.mat(*j - 1).clone())
            }
            NcExpr::Neg(e) => Ok(-e.eval(x)?),
            NcExpr::Add(a, b) => Ok(a.eval(x)? + b.eval(x)?),
            NcExpr::Mul(a, b) => Ok(a.eval(x)? * b.eval(x)?),
            NcExpr::Scale(alpha, e) => Ok(e.eval(x)? * *alpha),
            NcExpr::Inv(e) => {
                let v = e.eval(x)?;
                let smin = sigma_min(&v)?;
                if smin <= ADMISSIBLE_TOL * (1.0 + operator_norm(&v)?) {
                    return Err(Error::OutsideDomain { sigma_min: smin });
                }
                crate::matcore::try_inverse(&v)
            }
        }
    }
}

impl std::fmt::Display for NcExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NcExpr::Const(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", z.re)
                } else if z.re == 0.0 {
                    write!(f, "{}i", z.im)
                } else {
                    write!(f, "({}+{}i)", z.re, z.im)
                }
            }
            NcExpr::Var(j) => write!(f, "x{j}"),
            NcExpr::Neg(e) => write!(f, "(-{e})"),
            NcExpr::Add(a, b) => write!(f, "({a} + {b})"),
            NcExpr::Mul(a, b) => write!(f, "({a} * {b})"),
            NcExpr::Inv(e) => write!(f, "inv({e})"),
            NcExpr::Scale(z, e) => write!(f, "({} * {e})", NcExpr::Const(*z)),
        }
    }
}

/// Descriptor realization data (A, b, c) with
/// f(X) = (I⊗c)* (I − Σ X_j⊗A_j)⁻¹ (I⊗b).
#[derive(Debug, Clone)]
pub struct DescriptorRealization {
    pub a: MatTuple,
    pub b: CVec,
    pub c: CVec,
}

fn ensure_finite_vec(v: &CVec, what: &str) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("{what} has non-finite entries")))
    }
}

impl DescriptorRealization {
    pub fn new(a: MatTuple, b: CVec, c: CVec) -> Result<Self> {
        if b.len() != a.n() || c.len() != a.n() {
            return Err(Error::DimensionMismatch(format!(
                "state dimension {} does not match vector lengths {} / {}",
                a.n(),
                b.len(),
                c.len()
            )));
        }
        ensure_finite_vec(&b, "b")?;
        ensure_finite_vec(&c, "c")?;
        Ok(Self { a, b, c })
    }

    pub fn state_dim(&self) -> usize {
        self.a.n()
    }

    pub fn d(&self) -> usize {
        self.a.d()
    }

    /// f(0) = c*b.
    pub fn value_at_zero(&self) -> Complex64 {
        self.c.dotc(&self.b)
    }
}

/// Fornasini–Marchesini realization data (A, b_1..b_d, c, d0) with
/// f(X) = d0·I + (I⊗c)* (I − Σ X_j⊗A_j)⁻¹ (Σ X_j⊗b_j).
#[derive(Debug, Clone)]
pub struct FmRealization {
    pub a: MatTuple,
    pub bs: Vec<CVec>,
    pub c: CVec,
    pub d0: Complex64,
}

impl FmRealization {
    pub fn new(a: MatTuple, bs: Vec<CVec>, c: CVec, d0: Complex64) -> Result<Self> {
        if bs.len() != a.d() {
            return Err(Error::DimensionMismatch(format!(
                "need one input vector per variable: {} vs {}",
                bs.len(),
                a.d()
            )));
        }
        if c.len() != a.n() || bs.iter().any(|b| b.len() != a.n()) {
            return Err(Error::DimensionMismatch("FM vector lengths must equal the state dimension".into()));
        }
        ensure_finite_vec(&c, "c")?;
        for (j, b) in bs.iter().enumerate() {
            ensure_finite_vec(b, &format!("B[{j}]"))?;
        }
        if !d0.re.is_finite() || !d0.im.is_finite() {
            return Err(Error::InvalidInput("d0 is not finite".into()));
        }
        Ok(Self { a, bs, c, d0 })
    }

    pub fn state_dim(&self) -> usize {
        self.a.n()
    }

    pub fn d(&self) -> usize {
        self.a.d()
    }
}

// ---------------------------------------------------------------------------
// realization arithmetic

fn const_realization(alpha: Complex64, d: usize) -> DescriptorRealization {
    DescriptorRealization {
        a: MatTuple::zeros(d, 1),
        b: CVec::from_element(1, alpha),
        c: CVec::from_element(1, cr(1.0)),
    }
}

fn var_realization(j: usize, d: usize) -> DescriptorRealization {
    // nilpotent pencil: (I − X_j⊗E12)⁻¹ = I + X_j⊗E12
    let mut mats = vec![CMat::zeros(2, 2); d];
    mats[j - 1][(0, 1)] = cr(1.0);
    DescriptorRealization {
        a: MatTuple::new(mats).expect("2x2 tuple"),
        b: CVec::from_vec(vec![cr(0.0), cr(1.0)]),
        c: CVec::from_vec(vec![cr(1.0), cr(0.0)]),
    }
}

fn scale_realization(alpha: Complex64, r: DescriptorRealization) -> DescriptorRealization {
    DescriptorRealization { a: r.a, b: r.b * alpha, c: r.c }
}

fn add_realizations(
    f: DescriptorRealization,
    g: DescriptorRealization,
) -> DescriptorRealization {
    let (mf, mg) = (f.state_dim(), g.state_dim());
    let d = f.d();
    let mats = (0..d)
        .map(|j| {
            let mut m = CMat::zeros(mf + mg, mf + mg);
            m.view_mut((0, 0), (mf, mf)).copy_from(f.a.mat(j));
            m.view_mut((mf, mf), (mg, mg)).copy_from(g.a.mat(j));
            m
        })
        .collect();
    let mut b = CVec::zeros(mf + mg);
    b.rows_mut(0, mf).copy_from(&f.b);
    b.rows_mut(mf, mg).copy_from(&g.b);
    let mut c = CVec::zeros(mf + mg);
    c.rows_mut(0, mf).copy_from(&f.c);
    c.rows_mut(mf, mg).copy_from(&g.c);
    DescriptorRealization { a: MatTuple::new(mats).expect("sum tuple"), b, c }
}

/// Series coupling: the product state feeds g's dynamics from f's output.
fn mul_realizations(
    f: DescriptorRealization,
    g: DescriptorRealization,
) -> DescriptorRealization {
    let (mf, mg) = (f.state_dim(), g.state_dim());
    let d = f.d();
    let gamma_g = g.value_at_zero();
    let coupling_base = &f.b * g.c.adjoint(); // mf×mg
    let mats = (0..d)
        .map(|j| {
            let mut m = CMat::zeros(mf + mg, mf + mg);
            m.view_mut((0, 0), (mf, mf)).copy_from(f.a.mat(j));
            m.view_mut((mf, mf), (mg, mg)).copy_from(g.a.mat(j));
            let coupled = &coupling_base * g.a.mat(j);
            m.view_mut((0, mf), (mf, mg)).copy_from(&coupled);
            m
        })
        .collect();
    let mut b = CVec::zeros(mf + mg);
    b.rows_mut(0, mf).copy_from(&(&f.b * gamma_g));
    b.rows_mut(mf, mg).copy_from(&g.b);
    let mut c = CVec::zeros(mf + mg);
    c.rows_mut(0, mf).copy_from(&f.c);
    DescriptorRealization { a: MatTuple::new(mats).expect("product tuple"), b, c }
}

/// Inverse through the FM form: the pencil coefficients pick up the rank-one
/// perturbation A_j − (A_j b) γ⁻¹ c*, then the FM data folds back into a
/// descriptor with one extra state.
fn inv_realization(r: DescriptorRealization, subtree: &NcExpr) -> Result<DescriptorRealization> {
    let gamma = r.value_at_zero();
    if gamma.norm() < ADMISSIBLE_TOL {
        return Err(Error::NotAdmissibleAtOrigin {
            subtree: subtree.to_string(),
            value: gamma.norm(),
        });
    }
    let d = r.d();
    let inv_gamma = cr(1.0) / gamma;
    let mut perturbed = Vec::with_capacity(d);
    let mut inputs = Vec::with_capacity(d);
    for j in 0..d {
        let aj_b = r.a.mat(j) * &r.b;
        perturbed.push(r.a.mat(j) - &aj_b * inv_gamma * r.c.adjoint());
        inputs.push(&aj_b * inv_gamma);
    }
    let fm = FmRealization {
        a: MatTuple::new(perturbed)?,
        bs: inputs,
        c: &r.c * (-inv_gamma.conj()),
        d0: inv_gamma,
    };
    Ok(fm_to_descriptor(&fm))
}

/// Compile an expression into a descriptor realization valid on a
/// neighborhood of 0. Every inverted subexpression must be invertible at the
/// zero tuple.
pub fn realize(e: &NcExpr, d: usize) -> Result<DescriptorRealization> {
    if e.max_var() > d {
        return Err(Error::InvalidInput(format!(
            "expression uses x{} but only {d} variables are available",
            e.max_var()
        )));
    }
    if d == 0 {
        return Err(Error::InvalidInput("need at least one variable".into()));
    }
    realize_node(e, d)
}

fn realize_node(e: &NcExpr, d: usize) -> Result<DescriptorRealization> {
    match e {
        NcExpr::Const(alpha) => Ok(const_realization(*alpha, d)),
        NcExpr::Var(j) => Ok(var_realization(*j, d)),
        NcExpr::Neg(inner) => Ok(scale_realization(cr(-1.0), realize_node(inner, d)?)),
        NcExpr::Scale(alpha, inner) => Ok(scale_realization(*alpha, realize_node(inner, d)?)),
        NcExpr::Add(a, b) => Ok(add_realizations(realize_node(a, d)?, realize_node(b, d)?)),
        NcExpr::Mul(a, b) => Ok(mul_realizations(realize_node(a, d)?, realize_node(b, d)?)),
        NcExpr::Inv(inner) => inv_realization(realize_node(inner, d)?, inner),
    }
}

/// Descriptor → FM without growing the state: d0 = c*b, input vectors A_j b.
pub fn descriptor_to_fm(r: &DescriptorRealization) -> FmRealization {
    FmRealization {
        a: r.a.clone(),
        bs: (0..r.d()).map(|j| r.a.mat(j) * &r.b).collect(),
        c: r.c.clone(),
        d0: r.value_at_zero(),
    }
}

/// FM → descriptor with one extra state absorbing the constant term.
pub fn fm_to_descriptor(f: &FmRealization) -> DescriptorRealization {
    let m = f.state_dim();
    let d = f.d();
    let mats = (0..d)
        .map(|j| {
            let mut a = CMat::zeros(m + 1, m + 1);
            a.view_mut((0, 0), (m, m)).copy_from(f.a.mat(j));
            a.view_mut((0, m), (m, 1)).copy_from(&f.bs[j]);
            a
        })
        .collect();
    let mut b = CVec::zeros(m + 1);
    b[m] = cr(1.0);
    let mut c = CVec::zeros(m + 1);
    c.rows_mut(0, m).copy_from(&f.c);
    c[m] = f.d0.conj();
    DescriptorRealization { a: MatTuple::new(mats).expect("descriptor tuple"), b, c }
}

// ---------------------------------------------------------------------------
// evaluation

fn lift_vector(n: usize, v: &CVec) -> CMat {
    kron(&CMat::identity(n, n), &CMat::from_column_slice(v.len(), 1, v.as_slice()))
}

/// Evaluate a descriptor realization at X; the pencil must be invertible.
pub fn eval_descriptor(r: &DescriptorRealization, x: &MatTuple) -> Result<CMat> {
    let inv = match pencil_resolvent(x, &r.a)? {
        Resolvent::Inverse(inv) => inv,
        Resolvent::Singular { sigma_min } => return Err(Error::OutsideDomain { sigma_min }),
    };
    let n = x.n();
    let bl = lift_vector(n, &r.b);
    let cl = lift_vector(n, &r.c);
    Ok(cl.adjoint() * inv * bl)
}

/// Evaluate an FM realization at X.
pub fn eval_fm(f: &FmRealization, x: &MatTuple) -> Result<CMat> {
    let inv = match pencil_resolvent(x, &f.a)? {
        Resolvent::Inverse(inv) => inv,
        Resolvent::Singular { sigma_min } => return Err(Error::OutsideDomain { sigma_min }),
    };
    let n = x.n();
    let m = f.state_dim();
    let mut rhs = CMat::zeros(n * m, n);
    for j in 0..f.d() {
        rhs += kron(x.mat(j), &CMat::from_column_slice(m, 1, f.bs[j].as_slice()));
    }
    let cl = lift_vector(n, &f.c);
    Ok(CMat::identity(n, n) * f.d0 + cl.adjoint() * inv * rhs)
}

/// Assemble the colligation [[d0, −c*],[Σ b_j, Σ A_j]] and measure how far it
/// is from unitary. Returns (defect ≤ 1e-12, defect).
pub fn fm_colligation_check(f: &FmRealization) -> (bool, f64) {
    let m = f.state_dim();
    let mut v = CMat::zeros(m + 1, m + 1);
    v[(0, 0)] = f.d0;
    for j in 0..m {
        v[(0, 1 + j)] = -f.c[j].conj();
    }
    let mut col = CVec::zeros(m);
    for b in &f.bs {
        col += b;
    }
    for i in 0..m {
        v[(1 + i, 0)] = col[i];
    }
    let mut diag = CMat::zeros(m, m);
    for a in f.a.mats() {
        diag += a;
    }
    v.view_mut((1, 1), (m, m)).copy_from(&diag);
    let defect = operator_norm(&(v.adjoint() * &v - CMat::identity(m + 1, m + 1))).unwrap_or(f64::INFINITY);
    (defect <= 1e-12, defect)
}

// ---------------------------------------------------------------------------
// minimality

fn restrict(r: &DescriptorRealization, basis: &CMat) -> DescriptorRealization {
    let mats = r.a.mats().iter().map(|m| basis.adjoint() * m * basis).collect();
    DescriptorRealization {
        a: MatTuple::new(mats).expect("restricted tuple"),
        b: basis.adjoint() * &r.b,
        c: basis.adjoint() * &r.c,
    }
}

/// Cut the realization to the controllability space (smallest invariant
/// subspace containing b), then co-restrict through the observability space
/// of c. Idempotent; evaluations are preserved.
pub fn minimize_realization(r: &DescriptorRealization) -> Result<DescriptorRealization> {
    // controllability: orbit of b under the A_j
    let ctrl = invariant_orbit(
        r.a.mats(),
        std::slice::from_ref(&r.b),
        MIN_REAL_ORBIT_LO,
        MIN_REAL_ORBIT_HI,
    )?;
    if ctrl.ncols() == 0 {
        // the zero function
        return Ok(const_realization(cr(0.0), r.d()));
    }
    let stage1 = restrict(r, &ctrl);
    // observability: orbit of c under the adjoints
    let adj: Vec<CMat> = stage1.a.mats().iter().map(|m| m.adjoint()).collect();
    let obs = invariant_orbit(
        &adj,
        std::slice::from_ref(&stage1.c),
        MIN_REAL_ORBIT_LO,
        MIN_REAL_ORBIT_HI,
    )?;
    if obs.ncols() == 0 {
        return Ok(const_realization(cr(0.0), r.d()));
    }
    Ok(restrict(&stage1, &obs))
}

// ---------------------------------------------------------------------------
// domain analysis

/// Whether X lies in the domain cut out by the realization's pencil. Exact
/// for minimal realizations, whose pencil singularities are precisely the
/// domain complement.
pub fn domain_contains(r: &DescriptorRealization, x: &MatTuple) -> Result<bool> {
    Ok(matches!(pencil_resolvent(x, &r.a)?, Resolvent::Inverse(_)))
}

/// σ_min of the pencil at X, for reporting near-singularity.
pub fn domain_margin(r: &DescriptorRealization, x: &MatTuple) -> Result<f64> {
    sigma_min(&crate::matcore::pencil_matrix(x, &r.a)?)
}

/// Certified radii for operator-ball inclusion in the domain.
#[derive(Debug, Clone)]
pub struct DomainBallCertificate {
    /// Every ball of this radius (in the reference structure) lies inside the
    /// domain; `None` means unbounded (every radius works).
    pub inclusion_radius: Option<f64>,
    /// No ball strictly larger than this can lie inside the domain; `None`
    /// means no finite exclusion bound was certified.
    pub exclusion_radius: Option<f64>,
    /// The dual-structure radius interval the radii came from.
    pub dual_estimate: RadiusEstimate,
}

/// Ball certification: with ρ the coefficient tuple's radius in the dual
/// structure, the ball of radius 1/ρ lies inside the domain, and no larger
/// ball can. Returns the reciprocal interval endpoints.
pub fn domain_ball_certificate(
    r: &DescriptorRealization,
    spec_e: &OpSpaceSpec,
    opts: &RadiusOpts,
) -> Result<DomainBallCertificate> {
    let dual = dual_spec(spec_e)?;
    let est = rho_estimate(&dual, &r.a, opts)?;
    let inclusion_radius = (est.upper > 1e-14).then(|| 1.0 / est.upper);
    let exclusion_radius = (est.lower > 1e-14).then(|| 1.0 / est.lower);
    Ok(DomainBallCertificate { inclusion_radius, exclusion_radius, dual_estimate: est })
}

// ---------------------------------------------------------------------------
// series evaluation

/// Homogeneous degree-m term of the realization's expansion at X.
pub fn homogeneous_component(r: &DescriptorRealization, x: &MatTuple, degree: usize) -> Result<CMat> {
    let n = x.n();
    let m = r.state_dim();
    let mut p = CMat::identity(n * m, n * m);
    for _ in 0..degree {
        let mut next = CMat::zeros(n * m, n * m);
        for j in 0..x.d() {
            next += kron(x.mat(j), r.a.mat(j)) * &p;
        }
        p = next;
    }
    let bl = lift_vector(n, &r.b);
    let cl = lift_vector(n, &r.c);
    Ok(cl.adjoint() * p * bl)
}

/// Partial Neumann sum Σ_{m≤N} Σ_{|w|=m} X^w (c*A^w b), accumulated degree by
/// degree. Converges to [`eval_descriptor`] when X sits strictly inside a
/// certified inclusion ball; may diverge outside.
pub fn truncated_series_eval(r: &DescriptorRealization, x: &MatTuple, order: usize) -> Result<CMat> {
    let n = x.n();
    let m = r.state_dim();
    let mut p = CMat::identity(n * m, n * m);
    let mut total = p.clone();
    for _ in 1..=order {
        let mut next = CMat::zeros(n * m, n * m);
        for j in 0..x.d() {
            next += kron(x.mat(j), r.a.mat(j)) * &p;
        }
        p = next;
        total += &p;
    }
    let bl = lift_vector(n, &r.b);
    let cl = lift_vector(n, &r.c);
    Ok(cl.adjoint() * total * bl)
}
