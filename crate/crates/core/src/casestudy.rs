//! A fully worked 3×3 rational-function example: exact realization matrices,
//! rank-one word-power structure, word-sum norms, two-sided radius bounds for
//! the diamond and polydisc structures, and the substitution norm estimates
//! behind them. Doubles as the regression suite for the whole stack.

use num_complex::Complex64;
use rand::Rng;

use crate::matcore::{cr, operator_norm, CMat, CVec, MatTuple};
use crate::ncrat::{DescriptorRealization, FmRealization};
use crate::opspace::OpSpaceSpec;
use crate::sampling::{haar_unitary, rng_stream};
use crate::specrad::{rho_estimate, rho_haagerup_lower_sampled, RadiusEstimate, RadiusOpts};
use crate::{Error, Result};

const SQRT2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// The example's realization data: the 3×3 descriptor (A, b, c), the 2×2 FM
/// form, and the orthonormal pair v₁, v₂ with A_j = v_j e_j*.
#[derive(Debug, Clone)]
pub struct FamousExample {
    pub descriptor: DescriptorRealization,
    pub fm: FmRealization,
    pub v1: CVec,
    pub v2: CVec,
}

impl FamousExample {
    pub fn tuple(&self) -> &MatTuple {
        &self.descriptor.a
    }
}

/// Exact entries of the example: A₁ = v₁e₁*, A₂ = v₂e₂* with
/// v₁ = (1/2, −1/2, 1/√2), v₂ = (−1/2, 1/2, 1/√2), b = (−1/√2, −1/√2, 0),
/// c = (0, 0, 1); FM blocks from the 2×2 colligation.
pub fn build_famous() -> FamousExample {
    let v1 = CVec::from_vec(vec![cr(0.5), cr(-0.5), cr(SQRT2_INV)]);
    let v2 = CVec::from_vec(vec![cr(-0.5), cr(0.5), cr(SQRT2_INV)]);
    let mut a1 = CMat::zeros(3, 3);
    let mut a2 = CMat::zeros(3, 3);
    for i in 0..3 {
        a1[(i, 0)] = v1[i];
        a2[(i, 1)] = v2[i];
    }
    let descriptor = DescriptorRealization::new(
        MatTuple::new(vec![a1, a2]).expect("3x3 pair"),
        CVec::from_vec(vec![cr(-SQRT2_INV), cr(-SQRT2_INV), cr(0.0)]),
        CVec::from_vec(vec![cr(0.0), cr(0.0), cr(1.0)]),
    )
    .expect("descriptor dims");

    // FM data carrying the colligation blocks B = [1/√2 1/√2],
    // C = [1/√2; 1/√2], D = [[1/2,−1/2],[−1/2,1/2]] sliced along the two
    // diagonal variable slots.
    let d_block = CMat::from_row_slice(2, 2, &[cr(0.5), cr(-0.5), cr(-0.5), cr(0.5)]);
    let mut fm_a1 = CMat::zeros(2, 2);
    fm_a1.view_mut((0, 0), (1, 2)).copy_from(&d_block.view((0, 0), (1, 2)).into_owned());
    let mut fm_a2 = CMat::zeros(2, 2);
    fm_a2.view_mut((1, 0), (1, 2)).copy_from(&d_block.view((1, 0), (1, 2)).into_owned());
    let fm = FmRealization::new(
        MatTuple::new(vec![fm_a1, fm_a2]).expect("2x2 pair"),
        vec![
            CVec::from_vec(vec![cr(SQRT2_INV), cr(0.0)]),
            CVec::from_vec(vec![cr(0.0), cr(SQRT2_INV)]),
        ],
        CVec::from_vec(vec![cr(-SQRT2_INV), cr(-SQRT2_INV)]),
        cr(0.0),
    )
    .expect("fm dims");

    FamousExample { descriptor, fm, v1, v2 }
}

/// Number of adjacent letter changes in a word.
fn sign_changes(word: &[usize]) -> usize {
    word.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Compare every length-n word product A^w against the closed rank-one form
/// 2^{−(n−1)}(−1)^{m(w)} v_{w₁} e_{wₙ}*; returns the max entrywise defect.
pub fn word_power_check(n: usize) -> Result<f64> {
    if !(1..=20).contains(&n) {
        return Err(Error::Config(format!("word length must lie in 1..=20, got {n}")));
    }
    let fam = build_famous();
    let vs = [fam.v1.clone(), fam.v2.clone()];
    let scale = 0.5f64.powi(n as i32 - 1);
    let mut defect = 0.0f64;
    crate::specrad::for_each_word(fam.tuple(), n, &mut |word, prod| {
        if word.len() != n {
            return;
        }
        let sign = if sign_changes(word).is_multiple_of(2) { 1.0 } else { -1.0 };
        let v = &vs[word[0]];
        let col = word[n - 1];
        for i in 0..3 {
            for j in 0..3 {
                let expected = if j == col { v[i] * cr(sign * scale) } else { cr(0.0) };
                defect = defect.max((prod[(i, j)] - expected).norm());
            }
        }
    });
    Ok(defect)
}

/// ‖Σ_{|w|=n} A^w‖, which collapses to four rank-one summands of equal weight
/// and equals 1 for every n ≥ 2.
pub fn word_sum_norm(n: usize) -> Result<f64> {
    if !(2..=20).contains(&n) {
        return Err(Error::Config(format!("word length must lie in 2..=20, got {n}")));
    }
    let fam = build_famous();
    let mut sum = CMat::zeros(3, 3);
    crate::specrad::for_each_word(fam.tuple(), n, &mut |word, prod| {
        if word.len() == n {
            sum += prod;
        }
    });
    operator_norm(&sum)
}

/// Two-sided bracket for the diamond radius of the example's tuple at word
/// length n: the word-sum and substitution lower values against the
/// triangle-inequality upper (Σ_{|w|=n} ‖A^w‖)^{1/n} = 2^{1/n}.
pub fn diamond_radius_bounds(n: usize, opts: &RadiusOpts) -> Result<RadiusEstimate> {
    if !(2..=20).contains(&n) {
        return Err(Error::Config(format!("word length must lie in 2..=20, got {n}")));
    }
    let fam = build_famous();
    let mut norm_sum = 0.0f64;
    crate::specrad::for_each_word(fam.tuple(), n, &mut |word, prod| {
        if word.len() == n {
            norm_sum += operator_norm(prod).unwrap_or(f64::INFINITY);
        }
    });
    let upper = norm_sum.powf(1.0 / n as f64);
    let mut lower = word_sum_norm(n)?.powf(1.0 / n as f64);
    let sampled =
        rho_haagerup_lower_sampled(&OpSpaceSpec::max_l1(2), fam.tuple(), n.min(12), opts)?;
    lower = lower.max(sampled);
    Ok(RadiusEstimate {
        lower: lower.min(upper),
        upper,
        method: "diamond-word-bounds".into(),
        truncation_order: Some(n),
        witness: None,
    })
}

/// Polydisc radius of the example's tuple, which the simultaneous
/// triangularization resolves exactly through scalar components.
pub fn polydisc_radius_value(opts: &RadiusOpts) -> Result<RadiusEstimate> {
    let fam = build_famous();
    let est = rho_estimate(&OpSpaceSpec::min_linf(2), fam.tuple(), opts)?;
    if est.lower > 0.5 + 1e-9 || est.upper < 0.5 - 1e-9 || est.width() > 1e-6 {
        return Err(Error::NumericalDegeneracy(format!(
            "polydisc radius interval [{}, {}] missed the expected value 1/2",
            est.lower, est.upper
        )));
    }
    Ok(est)
}

/// One sampled substitution pair (C₁, C₂) for the alternating-sum norm
/// recursion, together with the explicit validity test ‖C₁ ± C₂‖ ≤ 1.
/// Kinds: 0 — simultaneously diagonalizable with slot-wise |c₁| + |c₂| ≤ 1;
/// 1 — general contractions with norms summing below one; 2 — extremal
/// diagonal pairs with c₁ + c₂ = 1 slot-wise, which drive the norms to 1.
fn sample_pair(rng: &mut rand_chacha::ChaCha8Rng, dim: usize, kind: usize) -> (CMat, CMat) {
    match kind {
        0 => {
            let v = haar_unitary(rng, dim);
            let mut d1 = CVec::zeros(dim);
            let mut d2 = CVec::zeros(dim);
            for s in 0..dim {
                let total: f64 = rng.gen_range(0.0..1.0);
                let split: f64 = rng.gen_range(0.0..1.0);
                for (target, weight) in [(&mut d1, split), (&mut d2, 1.0 - split)] {
                    let th = rng.gen_range(0.0..std::f64::consts::TAU);
                    target[s] = Complex64::new(th.cos(), th.sin()) * cr(total * weight);
                }
            }
            (
                &v * CMat::from_diagonal(&d1) * v.adjoint(),
                &v * CMat::from_diagonal(&d2) * v.adjoint(),
            )
        }
        1 => {
            let total: f64 = rng.gen_range(0.0..1.0);
            let split: f64 = rng.gen_range(0.0..1.0);
            (
                crate::sampling::random_contraction(rng, dim, total * split),
                crate::sampling::random_contraction(rng, dim, total * (1.0 - split)),
            )
        }
        _ => {
            let v = haar_unitary(rng, dim);
            let mut d1 = CVec::zeros(dim);
            let mut d2 = CVec::zeros(dim);
            for s in 0..dim {
                let t: f64 = rng.gen_range(0.0..1.0);
                d1[s] = cr(t);
                d2[s] = cr(1.0 - t);
            }
            (
                &v * CMat::from_diagonal(&d1) * v.adjoint(),
                &v * CMat::from_diagonal(&d2) * v.adjoint(),
            )
        }
    }
}

fn pair_is_valid(c1: &CMat, c2: &CMat) -> bool {
    let plus = operator_norm(&(c1 + c2)).unwrap_or(f64::INFINITY);
    let minus = operator_norm(&(c1 - c2)).unwrap_or(f64::INFINITY);
    plus <= 1.0 + 1e-12 && minus <= 1.0 + 1e-12
}

/// Check the alternating-sum norm estimates over sampled substitution
/// families: with T_{j,n} the sum over words ending in j of
/// σ₁(f_{w₁})⋯σₙ(f_{wₙ}) and T_{i,j,n} additionally fixing the first letter,
/// both ‖T_{j,n}‖ ≤ 1 and ‖T_{1,j,n} ± T_{2,j,n}‖ ≤ 1 for every family whose
/// pairs pass the validity test. Returns the max violation over trials.
pub fn lemma_t_check(n: usize, trials: usize, dim: usize, seed: u64) -> Result<f64> {
    if !(1..=12).contains(&n) {
        return Err(Error::Config(format!("word length must lie in 1..=12, got {n}")));
    }
    if dim < 1 {
        return Err(Error::Config("substitution dimension must be >= 1".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..trials {
        let mut rng = rng_stream(seed, 0x4c45_4d41, trial as u64);
        let kind = trial % 3;
        let mut pairs: Vec<(CMat, CMat)> = Vec::with_capacity(n);
        while pairs.len() < n {
            let (c1, c2) = sample_pair(&mut rng, dim, kind);
            // the validity test is the sampler's precondition: pairs like
            // (1, 1) are contraction tuples yet fail it and never enter
            if pair_is_valid(&c1, &c2) {
                pairs.push((c1, c2));
            }
        }
        // suffix sums: S_j over positions k..n of words ending in letter j
        let mut s1 = pairs[n - 1].0.clone();
        let mut s2 = pairs[n - 1].1.clone();
        for k in (0..n - 1).rev() {
            let all = &pairs[k].0 + &pairs[k].1;
            s1 = &all * s1;
            s2 = &all * s2;
        }
        for t in [&s1, &s2] {
            worst = worst.max(operator_norm(t)? - 1.0);
        }
        if n >= 2 {
            // first letter fixed: T_{i,j,n} = σ₁(f_i)·(suffix from position 2)
            let mut r1 = pairs[n - 1].0.clone();
            let mut r2 = pairs[n - 1].1.clone();
            for k in (1..n - 1).rev() {
                let all = &pairs[k].0 + &pairs[k].1;
                r1 = &all * r1;
                r2 = &all * r2;
            }
            for suffix in [&r1, &r2] {
                let t1 = &pairs[0].0 * suffix;
                let t2 = &pairs[0].1 * suffix;
                worst = worst.max(operator_norm(&(&t1 + &t2))? - 1.0);
                worst = worst.max(operator_norm(&(&t1 - &t2))? - 1.0);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::c64;
    use crate::ncrat::{
        eval_descriptor, eval_fm, fm_colligation_check, minimize_realization,
    };
    use crate::sampling::rng_from;

    fn scalar_point(z: Complex64, w: Complex64) -> MatTuple {
        MatTuple::from_scalars(&[z, w]).unwrap()
    }

    fn famous_scalar(z: Complex64, w: Complex64) -> Complex64 {
        (cr(2.0) * z * w - z - w) / (cr(2.0) - z - w)
    }

    #[test]
    fn rank_one_structure_is_exact() {
        let fam = build_famous();
        for i in 0..3 {
            assert!((fam.descriptor.a.mat(0)[(i, 0)] - fam.v1[i]).norm() < 1e-15);
            assert!((fam.descriptor.a.mat(1)[(i, 1)] - fam.v2[i]).norm() < 1e-15);
        }
        assert!(fam.v1.dotc(&fam.v2).norm() < 1e-15);
        assert!((fam.v1.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn descriptor_is_minimal_at_three_states() {
        let fam = build_famous();
        let min = minimize_realization(&fam.descriptor).unwrap();
        assert_eq!(min.state_dim(), 3);
    }

    #[test]
    fn colligation_is_unitary() {
        let fam = build_famous();
        let (ok, defect) = fm_colligation_check(&fam.fm);
        assert!(ok, "defect {defect}");
        assert!(defect <= 1e-12);
    }

    #[test]
    fn evaluations_match_the_scalar_formula() {
        let fam = build_famous();
        let p = scalar_point(cr(0.5), cr(0.5));
        let v = eval_descriptor(&fam.descriptor, &p).unwrap()[(0, 0)];
        assert!((v - cr(-0.5)).norm() < 1e-12);
        let vf = eval_fm(&fam.fm, &p).unwrap()[(0, 0)];
        assert!((vf - cr(-0.5)).norm() < 1e-12);
        let zero = scalar_point(cr(0.0), cr(0.0));
        assert!(eval_descriptor(&fam.descriptor, &zero).unwrap()[(0, 0)].norm() < 1e-15);
        assert!(eval_fm(&fam.fm, &zero).unwrap()[(0, 0)].norm() < 1e-15);

        let mut rng = rng_from(81);
        use rand::Rng;
        for _ in 0..50 {
            let z = c64(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let w = c64(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
            let p = scalar_point(z, w);
            let expected = famous_scalar(z, w);
            let v = eval_descriptor(&fam.descriptor, &p).unwrap()[(0, 0)];
            assert!((v - expected).norm() < 1e-9 * (1.0 + expected.norm()));
        }
    }

    #[test]
    fn word_powers_match_rank_one_form() {
        assert!(word_power_check(1).unwrap() <= 1e-15);
        assert!(word_power_check(2).unwrap() <= 1e-15);
        assert!(word_power_check(10).unwrap() <= 1e-12);
        assert!(word_power_check(0).is_err());
    }

    #[test]
    fn single_word_identity_a1a2() {
        // A₁A₂ = −½ v₁ e₂*
        let fam = build_famous();
        let prod = fam.tuple().mat(0) * fam.tuple().mat(1);
        for i in 0..3 {
            for j in 0..3 {
                let expected = if j == 1 { fam.v1[i] * cr(-0.5) } else { cr(0.0) };
                assert!((prod[(i, j)] - expected).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn word_sums_have_norm_one() {
        for n in [2usize, 5, 14] {
            let v = word_sum_norm(n).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "n = {n}: {v}");
        }
        // closed form: 2^{n-2} copies of each of four rank-one summands
        let fam = build_famous();
        let n = 6;
        let mut sum = CMat::zeros(3, 3);
        crate::specrad::for_each_word(fam.tuple(), n, &mut |word, prod| {
            if word.len() == n {
                sum += prod;
            }
        });
        let diff = fam.v1.clone() - fam.v2.clone();
        let mut e12 = CVec::zeros(3);
        e12[0] = cr(1.0);
        e12[1] = cr(-1.0);
        let closed = (&diff * e12.adjoint()) * cr(2.0f64.powi(n as i32 - 2) * 0.5f64.powi(n as i32 - 1));
        assert!((sum - closed).norm() < 1e-12);
    }

    #[test]
    fn diamond_bounds_bracket_one() {
        let opts = RadiusOpts { samples: 4, ..RadiusOpts::default() };
        let est = diamond_radius_bounds(2, &opts).unwrap();
        assert!((est.lower - 1.0).abs() < 1e-9);
        assert!((est.upper - 2.0f64.sqrt()).abs() < 1e-9);
        let est16 = diamond_radius_bounds(16, &opts).unwrap();
        assert!(est16.lower >= 1.0 - 1e-9);
        assert!(est16.upper <= 1.045);
        // the upper endpoint strictly decreases with the word length
        let est8 = diamond_radius_bounds(8, &opts).unwrap();
        assert!(est16.upper < est8.upper);
    }

    #[test]
    fn polydisc_value_is_half() {
        let est = polydisc_radius_value(&RadiusOpts::default()).unwrap();
        assert!((est.lower - 0.5).abs() < 1e-7);
        assert!((est.upper - 0.5).abs() < 1e-7);
    }

    #[test]
    fn triangularization_yields_expected_scalar_pairs() {
        let fam = build_famous();
        let hj = crate::specrad::holder_jordan(fam.tuple()).unwrap();
        assert_eq!(hj.block_sizes, vec![1, 1, 1]);
        let mut pairs: Vec<(f64, f64)> = hj
            .components
            .iter()
            .map(|c| (c.mat(0)[(0, 0)].re, c.mat(1)[(0, 0)].re))
            .collect();
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let imag_mass: f64 = hj
            .components
            .iter()
            .map(|c| c.mat(0)[(0, 0)].im.abs() + c.mat(1)[(0, 0)].im.abs())
            .sum();
        assert!(imag_mass < 1e-9);
        assert!((pairs[0].0).abs() < 1e-9 && (pairs[0].1).abs() < 1e-9);
        assert!((pairs[1].0).abs() < 1e-9 && (pairs[1].1).abs() < 1e-9);
        assert!((pairs[2].0 - 0.5).abs() < 1e-9 && (pairs[2].1 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn rs_lower_path_sanity() {
        // the word eigenvalue bound reaches 1/2, matching the exact polydisc value
        let fam = build_famous();
        let est = crate::specrad::rho_rs_bounds(fam.tuple(), 12).unwrap();
        assert!((est.lower - 0.5).abs() < 1e-9);
        assert!(est.upper <= 0.531);
    }

    #[test]
    fn lemma_check_base_case_and_diagonal_recursion() {
        let v = lemma_t_check(1, 50, 3, 0).unwrap();
        assert!(v <= 1e-9, "violation {v}");
        let v8 = lemma_t_check(8, 40, 3, 1).unwrap();
        assert!(v8 <= 1e-9, "violation {v8}");
        assert!(lemma_t_check(0, 1, 2, 0).is_err());
        assert!(lemma_t_check(13, 1, 2, 0).is_err());
    }

    #[test]
    fn scalar_ones_pair_is_rejected_by_validity_test() {
        let ones = CMat::from_element(1, 1, cr(1.0));
        assert!(!pair_is_valid(&ones, &ones));
        // yet each member alone is a perfectly fine contraction
        assert!(operator_norm(&ones).unwrap() <= 1.0);
    }

    #[test]
    fn diamond_scalar_substitution_reaches_one() {
        // ‖Σ_{|w|=10} A^w‖^{1/10} = 1 is attained by the scalar family
        let fam = build_famous();
        let opts = RadiusOpts { samples: 2, ..RadiusOpts::default() };
        let v = rho_haagerup_lower_sampled(&OpSpaceSpec::max_l1(2), fam.tuple(), 10, &opts).unwrap();
        assert!(v >= 1.0 - 1e-9);
    }

    #[test]
    fn diamond_estimate_is_exactly_one() {
        // scalar components give ℓ1 values {0, 0, 1}, so the interval pins 1
        let fam = build_famous();
        let est = rho_estimate(&OpSpaceSpec::max_l1(2), fam.tuple(), &RadiusOpts::default()).unwrap();
        assert!((est.lower - 1.0).abs() < 1e-9);
        assert!((est.upper - 1.0).abs() < 1e-9);
    }

    #[test]
    fn polydisc_ball_certificate_pins_radius_one() {
        let fam = build_famous();
        let rmin = minimize_realization(&fam.descriptor).unwrap();
        let cert = crate::ncrat::domain_ball_certificate(
            &rmin,
            &OpSpaceSpec::min_linf(2),
            &RadiusOpts::default(),
        )
        .unwrap();
        let incl = cert.inclusion_radius.unwrap();
        let excl = cert.exclusion_radius.unwrap();
        assert!((incl - 1.0).abs() < 1e-9, "inclusion {incl}");
        assert!((excl - 1.0).abs() < 1e-9, "exclusion {excl}");
    }

    #[test]
    fn parsed_formula_realization_matches_builtin() {
        let fam = build_famous();
        let e = crate::ncrat::parse_expr("(2*x1*x2 - x1 - x2) * inv(2 - x1 - x2)").unwrap();
        let r = crate::ncrat::realize(&e, 2).unwrap();
        let mut rng = rng_from(82);
        use rand::Rng;
        for _ in 0..100 {
            let z = c64(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let w = c64(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let p = scalar_point(z, w);
            let built_in = eval_descriptor(&fam.descriptor, &p).unwrap()[(0, 0)];
            let compiled = eval_descriptor(&r, &p).unwrap()[(0, 0)];
            assert!((built_in - compiled).norm() < 1e-9 * (1.0 + built_in.norm()));
        }
    }

    #[test]
    fn eval_outside_domain_errors_with_margin() {
        let fam = build_famous();
        let ones = scalar_point(cr(1.0), cr(1.0));
        match eval_descriptor(&fam.descriptor, &ones) {
            Err(crate::Error::OutsideDomain { sigma_min }) => assert!(sigma_min <= 1e-12),
            other => panic!("expected outside-domain error, got {other:?}"),
        }
    }

    #[test]
    fn homogeneous_components_stay_contractive() {
        // components of a function bounded by one on the polydisc are
        // themselves bounded by one there
        let fam = build_famous();
        let desc = crate::ncrat::fm_to_descriptor(&fam.fm);
        let mut rng = rng_from(83);
        use rand::Rng;
        for _ in 0..20 {
            let raw = crate::sampling::random_tuple(&mut rng, 2, 2, 1.0);
            let mats: Vec<CMat> = raw
                .mats()
                .iter()
                .map(|m| {
                    let nn = operator_norm(m).unwrap();
                    let target: f64 = rng.gen_range(0.05..0.95);
                    m * cr(target / nn.max(1e-12))
                })
                .collect();
            let x = MatTuple::new(mats).unwrap();
            for degree in 0..=8 {
                let comp = crate::ncrat::homogeneous_component(&desc, &x, degree).unwrap();
                let nn = operator_norm(&comp).unwrap();
                assert!(nn <= 1.0 + 1e-9, "degree {degree} component norm {nn}");
            }
        }
    }

    #[test]
    fn min_tensor_polydisc_matches_word_norm_maximum() {
        // block-diagonal structure: the level norm is max_{|w|=10} ‖A^w‖
        let fam = build_famous();
        let v = crate::specrad::rho_min_truncated(
            &crate::specrad::polydisc_pencil(2),
            fam.tuple(),
            10,
        )
        .unwrap();
        let expected = 2.0f64.powf(-9.0 / 10.0);
        assert!((v - expected).abs() < 1e-9, "{v} vs {expected}");
    }
}
