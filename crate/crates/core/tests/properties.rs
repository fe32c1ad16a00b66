//! Cross-module property tests: expression/realization consistency under
//! randomized trees, analytic behaviour of the radius along holomorphic
//! families, and ordering between the tensor-norm estimators.

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use opball::matcore::{cr, operator_norm, CMat, MatTuple};
use opball::ncrat::{eval_descriptor, parse_expr, realize, NcExpr};
use opball::opspace::{ball_contains, space_norm, BallPosition, NormOpts, OpSpaceSpec};
use opball::specrad::{
    polydisc_pencil, rho_estimate, rho_min_truncated, rho_row_exact, RadiusOpts,
};

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    c64(r * (std::f64::consts::TAU * u2).cos(), r * (std::f64::consts::TAU * u2).sin())
        / cr(2.0f64.sqrt())
}

fn gaussian_mat(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    DMatrix::from_fn(n, n, |_, _| gaussian(rng))
}

fn random_tuple(rng: &mut ChaCha8Rng, d: usize, n: usize, scale: f64) -> MatTuple {
    MatTuple::new((0..d).map(|_| gaussian_mat(rng, n) * cr(scale)).collect()).unwrap()
}

// ---------------------------------------------------------------------------
// proptest: inverse-free expression trees

fn leaf() -> impl Strategy<Value = NcExpr> {
    prop_oneof![
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| NcExpr::Const(c64(re, im))),
        (1usize..=2).prop_map(NcExpr::Var),
    ]
}

fn poly_expr() -> impl Strategy<Value = NcExpr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| NcExpr::Add(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| NcExpr::Mul(Box::new(a), Box::new(b))),
            inner.clone().prop_map(|a| NcExpr::Neg(Box::new(a))),
            ((-2.0..2.0f64), inner).prop_map(|(s, a)| NcExpr::Scale(c64(s, 0.5), Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Printing and re-parsing an inverse-free expression preserves its
    /// values (the tree may normalize, the function may not).
    #[test]
    fn display_parse_round_trip(e in poly_expr(), sx in 0u64..1000) {
        let text = e.to_string();
        let reparsed = parse_expr(&text).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(sx);
        let x = random_tuple(&mut rng, 2, 2, 0.5);
        let v0 = e.eval(&x).unwrap();
        let v1 = reparsed.eval(&x).unwrap();
        prop_assert!((v0.clone() - v1).norm() <= 1e-10 * (1.0 + v0.norm()));
    }

    /// The compiled realization of an inverse-free expression agrees with
    /// direct evaluation wherever both are defined.
    #[test]
    fn realization_matches_ast(e in poly_expr(), sx in 0u64..1000) {
        let r = realize(&e, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(sx.wrapping_add(17));
        let x = random_tuple(&mut rng, 2, 1, 0.5);
        let v0 = e.eval(&x).unwrap()[(0, 0)];
        let v1 = eval_descriptor(&r, &x).unwrap()[(0, 0)];
        prop_assert!((v0 - v1).norm() <= 1e-8 * (1.0 + v0.norm()));
    }

    /// Structure norms are absolutely homogeneous.
    #[test]
    fn space_norm_homogeneous(sx in 0u64..1000, lre in -2.0..2.0f64, lim in -2.0..2.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(sx.wrapping_add(99));
        let x = random_tuple(&mut rng, 2, 2, 1.0);
        let lambda = c64(lre, lim);
        let opts = NormOpts { samples: 3, unitary_dim: 2, seed: 4 };
        for spec in [OpSpaceSpec::row(2), OpSpaceSpec::min_linf(2), OpSpaceSpec::max_l1(2)] {
            let e0 = space_norm(&spec, &x, &opts).unwrap();
            let e1 = space_norm(&spec, &x.scale(lambda), &opts).unwrap();
            let s = lambda.norm();
            prop_assert!((e1.upper - s * e0.upper).abs() <= 1e-10 * (1.0 + s * e0.upper));
            prop_assert!((e1.lower - s * e0.lower).abs() <= 1e-10 * (1.0 + s * e0.lower));
        }
    }
}

// ---------------------------------------------------------------------------
// analytic families

/// Polynomial family z ↦ C0 + C1 z + C2 z²; the radius at the center is
/// dominated by its maximum on any circle around it.
#[test]
fn log_subharmonicity_circle_maximum() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x10f);
    for _ in 0..20 {
        let coeffs: Vec<MatTuple> = (0..3).map(|_| random_tuple(&mut rng, 2, 2, 0.8)).collect();
        let at = |z: Complex64| -> MatTuple {
            MatTuple::new(
                (0..2)
                    .map(|j| {
                        coeffs[0].mat(j)
                            + coeffs[1].mat(j) * z
                            + coeffs[2].mat(j) * (z * z)
                    })
                    .collect(),
            )
            .unwrap()
        };
        let center = rho_row_exact(&at(c64(0.0, 0.0))).unwrap().upper;
        let radius = 0.7;
        let mut circle_max: f64 = 0.0;
        for k in 0..64 {
            let th = std::f64::consts::TAU * (k as f64) / 64.0;
            let z = c64(radius * th.cos(), radius * th.sin());
            circle_max = circle_max.max(rho_row_exact(&at(z)).unwrap().upper);
        }
        assert!(
            center <= circle_max + 1e-8,
            "center {center} above circle maximum {circle_max}"
        );
    }
}

/// Disc-to-ball families vanishing at 0: the radius grows at most linearly
/// in |z|, certified pointwise on the evaluation grid.
#[test]
fn schwarz_bound_on_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x511);
    let opts = NormOpts::default();
    for _ in 0..20 {
        let c0 = random_tuple(&mut rng, 2, 2, 1.0);
        let c1 = random_tuple(&mut rng, 2, 2, 1.0);
        // normalize g(z) = C0 + C1 z so that z·g(z) maps the disc into the ball
        let mut sup: f64 = 0.0;
        for k in 0..128 {
            let th = std::f64::consts::TAU * (k as f64) / 128.0;
            let z = c64(th.cos(), th.sin());
            let g = MatTuple::new(
                (0..2).map(|j| c0.mat(j) + c1.mat(j) * z).collect(),
            )
            .unwrap();
            sup = sup.max(space_norm(&OpSpaceSpec::row(2), &g, &opts).unwrap().upper);
        }
        let scale = cr(1.0 / (sup * 1.05));
        for k in 0..16 {
            let r = 0.1 + 0.05 * k as f64;
            let th = std::f64::consts::TAU * (k as f64) / 16.0;
            let z = c64(r * th.cos(), r * th.sin());
            let fz = MatTuple::new(
                (0..2)
                    .map(|j| (c0.mat(j) + c1.mat(j) * z) * (z * scale))
                    .collect(),
            )
            .unwrap();
            assert_eq!(
                ball_contains(&OpSpaceSpec::row(2), &fz, 1.0, &opts).unwrap(),
                BallPosition::Inside,
                "grid point must certify as inside the ball"
            );
            let rho = rho_row_exact(&fz).unwrap().upper;
            assert!(rho <= z.norm() + 1e-6, "rho {rho} exceeds |z| {}", z.norm());
        }
    }
}

// ---------------------------------------------------------------------------
// tensor-norm ordering

/// For commuting normal tuples the truncated minimal tensor value sits below
/// any certified upper bound for the polydisc radius.
#[test]
fn min_tensor_value_below_estimate_upper() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0d0);
    let opts = RadiusOpts { samples: 6, ..RadiusOpts::default() };
    for _ in 0..10 {
        // commuting normal pair: common unitary frame, random diagonals
        let q = {
            let g = gaussian_mat(&mut rng, 3);
            g.qr().q()
        };
        let tuple = MatTuple::new(
            (0..2)
                .map(|_| {
                    let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(3, |_, _| {
                        gaussian(&mut rng)
                    }));
                    &q * diag * q.adjoint()
                })
                .collect(),
        )
        .unwrap();
        let level = rho_min_truncated(&polydisc_pencil(2), &tuple, 8).unwrap();
        let est = rho_estimate(&OpSpaceSpec::min_linf(2), &tuple, &opts).unwrap();
        assert!(
            level <= est.upper + 1e-9,
            "min-tensor value {level} above certified upper {}",
            est.upper
        );
        assert!(est.lower <= est.upper + 1e-12);
    }
}

/// Sampled lower values never cross the triangle-inequality upper bound for
/// the max-ℓ1 norm, and both scale exactly.
#[test]
fn max_l1_bounds_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a1);
    let opts = NormOpts { samples: 8, unitary_dim: 4, seed: 3 };
    for _ in 0..20 {
        let x = random_tuple(&mut rng, 3, 2, 1.0);
        let est = space_norm(&OpSpaceSpec::max_l1(3), &x, &opts).unwrap();
        assert!(est.lower <= est.upper + 1e-12);
        assert!(!est.exact);
        let sum: f64 = x.mats().iter().map(|m| operator_norm(m).unwrap()).sum();
        assert!((est.upper - sum).abs() <= 1e-12 * (1.0 + sum));
    }
}
