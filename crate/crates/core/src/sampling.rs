//! Seeded random generators shared by the sampling-based estimators.
//! Randomness is always an explicit seed, never hidden state.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matcore::{c64, cr, CMat, MatTuple};

pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for sample `index` in lane `lane` of a seeded family.
/// Enlarging a sample budget keeps the earlier streams unchanged.
pub fn rng_stream(seed: u64, lane: u64, index: u64) -> ChaCha8Rng {
    let mixed = seed
        ^ lane.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        ^ index.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Standard complex Gaussian via Box-Muller.
pub fn complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    // each component N(0, 1/2) so that E|z|^2 = 1
    c64(r * theta.cos(), r * theta.sin()) / cr(2.0f64.sqrt())
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the R-diagonal
/// phases absorbed into Q.
pub fn haar_unitary(rng: &mut ChaCha8Rng, dim: usize) -> CMat {
    let g = gaussian_matrix(rng, dim, dim);
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / cr(rjj.norm()) } else { cr(1.0) };
        let col = q.column(j) * phase;
        q.set_column(j, &col);
    }
    q
}

/// Random contraction: Ginibre scaled to operator norm ≤ `target` < 1.
pub fn random_contraction(rng: &mut ChaCha8Rng, dim: usize, target: f64) -> CMat {
    let g = gaussian_matrix(rng, dim, dim);
    let nn = crate::matcore::operator_norm(&g).unwrap_or(1.0);
    if nn == 0.0 {
        return g;
    }
    g * cr(target / nn)
}

/// Random tuple with each member a Ginibre matrix scaled by `scale`.
#[cfg_attr(not(test), allow(dead_code))]
pub fn random_tuple(rng: &mut ChaCha8Rng, d: usize, n: usize, scale: f64) -> MatTuple {
    MatTuple::new((0..d).map(|_| gaussian_matrix(rng, n, n) * cr(scale)).collect())
        .expect("generated tuple is well-formed")
}

/// Random invertible matrix with moderate condition number: U diag(s) V* with
/// singular values log-uniform in [0.5, 2].
#[cfg_attr(not(test), allow(dead_code))]
pub fn random_well_conditioned(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let u = haar_unitary(rng, n);
    let v = haar_unitary(rng, n);
    let mut s = CMat::zeros(n, n);
    for i in 0..n {
        let t: f64 = rng.gen_range(-1.0f64..1.0);
        s[(i, i)] = cr(2.0f64.powf(t));
    }
    u * s * v.adjoint()
}
