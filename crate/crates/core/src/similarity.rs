//! Optimization over invertible matrices S to minimize ‖S⁻¹XS‖ in a chosen
//! operator-space norm. Witnesses produced here certify upper bounds on the
//! corresponding spectral radius and drive the similarity-to-ball decision.
//!
//! S is parameterized as S₀·exp(G) with G an unconstrained complex matrix, so
//! every iterate is invertible by construction. The objective is a maximum of
//! singular values and therefore nonsmooth; a multi-start compass (pattern)
//! search with shrinking steps is used instead of gradients.

use num_complex::Complex64;

use crate::matcore::{condition_number, cr, expm, CMat, MatTuple};
use crate::opspace::{space_norm, NormOpts, OpSpaceSpec};
use crate::sampling::{complex_gaussian, rng_stream};
use crate::specrad::holder_jordan;
use crate::{Error, Result};

/// Grading ratio for the triangular warm start.
const WARMSTART_EPS: f64 = 0.1;

/// An invertible S with the conjugated norm it achieves.
#[derive(Debug, Clone)]
pub struct SimilarityWitness {
    pub s: CMat,
    pub achieved_norm: f64,
    pub condition_number: f64,
    pub iterations: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct OptimConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub step_init: f64,
    pub tol: f64,
    pub seed: u64,
    pub warm_start: bool,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self { restarts: 8, max_iters: 2000, step_init: 0.5, tol: 1e-7, seed: 0, warm_start: true }
    }
}

impl OptimConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(Error::Config("optimizer needs restarts >= 1".into()));
        }
        if self.tol <= 0.0 {
            return Err(Error::Config("optimizer tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Objective value: the exact structure norm, or for max-ℓ1 the
/// triangle-inequality upper bound Σ_j ‖X_j‖ (the quantity a similarity can
/// actually certify there).
pub(crate) fn objective_norm(spec: &OpSpaceSpec, x: &MatTuple) -> Result<f64> {
    match spec {
        OpSpaceSpec::MaxL1 { .. } => crate::opspace::max_l1_upper(x),
        _ => Ok(space_norm(spec, x, &NormOpts::default())?.upper),
    }
}

/// Warm start from the simultaneous triangularization: the Hölder–Jordan
/// basis composed with the graded scaling diag(1, ε, ε², …), which suppresses
/// strictly-upper-triangular mass.
pub fn schur_scaling_warmstart(x: &MatTuple) -> Result<CMat> {
    let hj = holder_jordan(x)?;
    let n = x.n();
    let mut scale = CMat::zeros(n, n);
    for i in 0..n {
        scale[(i, i)] = cr(WARMSTART_EPS.powi(i as i32));
    }
    Ok(hj.basis * scale)
}

struct RestartOutcome {
    params: Vec<f64>,
    objective: f64,
    sweeps: usize,
}

fn params_to_matrix(p: &[f64], m: usize) -> CMat {
    CMat::from_fn(m, m, |i, j| {
        let k = 2 * (i * m + j);
        Complex64::new(p[k], p[k + 1])
    })
}

/// One compass-search run: poll ±h along every coordinate, move to the best
/// improvement, halve h when stuck. Accept-only-improvement keeps the
/// objective monotone within the restart.
fn pattern_search(
    obj: &impl Fn(&[f64]) -> f64,
    start: Vec<f64>,
    cfg: &OptimConfig,
) -> RestartOutcome {
    let mut p = start;
    let mut f = obj(&p);
    let mut h = cfg.step_init;
    let mut sweeps = 0;
    while h >= cfg.tol && sweeps < cfg.max_iters {
        sweeps += 1;
        let mut best: Option<(usize, f64, f64)> = None;
        for i in 0..p.len() {
            let orig = p[i];
            for sgn in [1.0, -1.0] {
                p[i] = orig + sgn * h;
                let ft = obj(&p);
                p[i] = orig;
                if ft.is_finite() && ft < best.map_or(f, |(_, _, bf)| bf) {
                    best = Some((i, sgn * h, ft));
                }
            }
        }
        match best {
            Some((i, delta, ft)) => {
                p[i] += delta;
                f = ft;
            }
            None => h *= 0.5,
        }
    }
    RestartOutcome { params: p, objective: f, sweeps }
}

/// Minimize ‖(S₀e^G)⁻¹ X (S₀e^G)‖ over G by multi-start pattern search and
/// return the best witness across restarts (ties broken by restart index).
pub fn minimize_conjugated_norm(
    spec: &OpSpaceSpec,
    x: &MatTuple,
    cfg: &OptimConfig,
) -> Result<SimilarityWitness> {
    cfg.validate()?;
    if spec.d() != x.d() {
        return Err(Error::DimensionMismatch(format!(
            "space has d = {}, tuple has d = {}",
            spec.d(),
            x.d()
        )));
    }
    let n = x.n();
    let warm = if cfg.warm_start { schur_scaling_warmstart(x).ok() } else { None };

    let mut best: Option<(f64, usize, CMat, Vec<f64>, usize)> = None;
    let mut total_sweeps = 0usize;
    for r in 0..cfg.restarts {
        // restart 0: identity; restart 1: triangular warm start; later
        // restarts perturb the warm start (or identity) randomly.
        let s0 = match (r, &warm) {
            (0, _) | (_, None) => CMat::identity(n, n),
            (_, Some(w)) => w.clone(),
        };
        let s0_inv = match crate::matcore::try_inverse(&s0) {
            Ok(inv) => inv,
            Err(_) => continue,
        };
        let mut g0 = vec![0.0; 2 * n * n];
        if r >= 2 {
            let mut rng = rng_stream(cfg.seed, 0x5157, r as u64);
            let sigma = 0.3 * (r as f64) / (cfg.restarts as f64);
            for slot in g0.chunks_exact_mut(2) {
                let z = complex_gaussian(&mut rng) * cr(sigma);
                slot[0] = z.re;
                slot[1] = z.im;
            }
        }
        let obj = |p: &[f64]| -> f64 {
            let g = params_to_matrix(p, n);
            let e = expm(&g);
            let e_inv = expm(&(-&g));
            let s = &s0 * &e;
            let s_inv = &e_inv * &s0_inv;
            let conj = x.conjugate_with(&s, &s_inv);
            objective_norm(spec, &conj).unwrap_or(f64::INFINITY)
        };
        // scale a random start back toward zero until the objective is finite
        let mut tries = 0;
        while !obj(&g0).is_finite() && tries < 60 {
            for v in g0.iter_mut() {
                *v *= 0.5;
            }
            tries += 1;
        }
        if !obj(&g0).is_finite() {
            continue;
        }
        let out = pattern_search(&obj, g0, cfg);
        total_sweeps += out.sweeps;
        let better = match &best {
            None => true,
            Some((bf, _, _, _, _)) => out.objective < *bf,
        };
        if better {
            best = Some((out.objective, r, s0.clone(), out.params, out.sweeps));
        }
    }

    let (_, _, s0, params, _) =
        best.ok_or_else(|| Error::OptimizationFailed("every restart overflowed".into()))?;
    let g = params_to_matrix(&params, n);
    let s = &s0 * expm(&g);
    let s_inv = expm(&(-&g)) * crate::matcore::try_inverse(&s0)?;
    let conj = x.conjugate_with(&s, &s_inv);
    let achieved = objective_norm(spec, &conj)?;
    Ok(SimilarityWitness {
        condition_number: condition_number(&s)?,
        s,
        achieved_norm: achieved,
        iterations: total_sweeps,
        seed: cfg.seed,
    })
}

/// Recompute ‖S⁻¹XS‖ in the given structure from a stored witness matrix.
pub fn conjugated_norm(spec: &OpSpaceSpec, x: &MatTuple, s: &CMat) -> Result<f64> {
    let s_inv = crate::matcore::try_inverse(s)?;
    objective_norm(spec, &x.conjugate_with(s, &s_inv))
}
