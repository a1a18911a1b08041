//! Randomized invariants across the library.

use isqrt_cov::cov_pool::{covariance_backward, covariance_forward, FeatureMatrix};
use isqrt_cov::isqrt::{forward, ns_forward, pre_normalize, MetaLayerConfig, NormMode};
use isqrt_cov::matrix::io::{format_matrix, read_matrix};
use isqrt_cov::matrix::{symmetrize, Matrix, SymMatrix};
use isqrt_cov::oracle::exact_sqrt;
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-2.0..2.0f64, rows * cols).prop_map(move |v| Matrix::new(rows, cols, v).unwrap())
}

fn shape_pair() -> impl Strategy<Value = (usize, usize, usize)> {
    (1..6usize, 1..6usize, 1..6usize)
}

/// `n × d` features with `n ≥ 2d`, so the covariance is almost surely SPD.
fn features() -> impl Strategy<Value = FeatureMatrix> {
    (1..7usize)
        .prop_flat_map(|d| (Just(d), 2 * d + 1..3 * d + 4))
        .prop_flat_map(|(d, n)| matrix(n, d))
        .prop_map(|m| FeatureMatrix::new(m).unwrap())
}

fn mode() -> impl Strategy<Value = NormMode> {
    prop_oneof![Just(NormMode::Trace), Just(NormMode::Frobenius)]
}

fn rel(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().frobenius_norm() / b.frobenius_norm().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matmul_is_associative(
        (a, b, c) in shape_pair().prop_flat_map(|(r, k, m)| (matrix(r, k), matrix(k, m), (1..5usize).prop_flat_map(move |c| matrix(m, c))))
    ) {
        let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
        let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
        prop_assert!(left.sub(&right).unwrap().max_abs() <= 1e-12 * (1.0 + left.max_abs()));
    }

    #[test]
    fn trace_of_product_commutes((a, b) in (1..6usize, 1..6usize).prop_flat_map(|(r, c)| (matrix(r, c), matrix(c, r)))) {
        let ab = a.matmul(&b).unwrap().trace();
        let ba = b.matmul(&a).unwrap().trace();
        prop_assert!((ab - ba).abs() <= 1e-12 * (1.0 + ab.abs()));
    }

    #[test]
    fn symmetrize_is_idempotent_and_keeps_symmetric_input(m in (1..7usize).prop_flat_map(|d| matrix(d, d))) {
        let s = symmetrize(&m).unwrap();
        prop_assert_eq!(s.max_asymmetry(), 0.0);
        let again = symmetrize(s.as_matrix()).unwrap();
        prop_assert_eq!(&again, &s);
    }

    #[test]
    fn upper_triangle_round_trips(m in (1..7usize).prop_flat_map(|d| matrix(d, d))) {
        let s = symmetrize(&m).unwrap();
        let v = s.upper_triangle();
        prop_assert_eq!(v.len(), s.dim() * (s.dim() + 1) / 2);
        prop_assert_eq!(SymMatrix::from_upper_triangle(s.dim(), &v).unwrap(), s);
    }

    #[test]
    fn covariance_ignores_translation(x in features(), shift in -5.0..5.0f64) {
        let moved = FeatureMatrix::new(Matrix::from_fn(x.n(), x.d(), |i, j| x.values().get(i, j) + shift * (j as f64 + 1.0))).unwrap();
        let a = covariance_forward(&x);
        let b = covariance_forward(&moved);
        prop_assert!(a.sub(&b).unwrap().max_abs() <= 1e-10 * (1.0 + a.max_abs()));
    }

    #[test]
    fn covariance_is_quadratic_in_scale(x in features(), c in 0.1..10.0f64) {
        let scaled = FeatureMatrix::new(x.values().scale(c)).unwrap();
        let a = covariance_forward(&x).scale(c * c);
        let b = covariance_forward(&scaled);
        prop_assert!(rel(&b, &a) <= 1e-12);
    }

    #[test]
    fn covariance_gradient_columns_sum_to_zero(x in features(), seed in any::<u64>()) {
        let mut rng = isqrt_cov::seeded_rng(seed);
        let g = isqrt_cov::oracle::random_symmetric(x.d(), &mut rng);
        let dx = covariance_backward(&x, &g).unwrap();
        for j in 0..x.d() {
            let col: f64 = (0..x.n()).map(|i| dx.get(i, j)).sum();
            prop_assert!(col.abs() <= 1e-12);
        }
    }

    #[test]
    fn layer_is_scale_equivariant(x in features(), c in 0.1..10.0f64, mode in mode()) {
        let sigma = covariance_forward(&x);
        let cfg = MetaLayerConfig::new(mode, 5);
        let base = forward(&sigma, &cfg).unwrap().0.c;
        let scaled = forward(&sigma.scale(c * c), &cfg).unwrap().0.c;
        prop_assert!(rel(&scaled, &base.scale(c)) <= 1e-10);
    }

    #[test]
    fn iterates_stay_coupled_inverses(x in features(), mode in mode()) {
        // Y_k = A Z_k holds exactly in exact arithmetic for every k.
        let sigma = covariance_forward(&x);
        let (a, _) = pre_normalize(&sigma, mode, 1e-12).unwrap();
        let it = ns_forward(&a, 8).unwrap();
        for (y, z) in it.ys.iter().zip(&it.zs) {
            let az = a.matmul(z).unwrap();
            prop_assert!(y.as_matrix().sub(&az).unwrap().max_abs() <= 1e-12 * (1.0 + y.max_abs()));
        }
    }

    #[test]
    fn residual_is_nonincreasing(x in features(), mode in mode()) {
        let sigma = covariance_forward(&x);
        let norm = sigma.frobenius_norm();
        let (_, tape) = forward(&sigma, &MetaLayerConfig::new(mode, 12)).unwrap();
        let s = tape.normalizer.sqrt();
        let res: Vec<f64> = tape.iterates.ys.iter().skip(1).map(|y| {
            let c = y.scale(s);
            c.matmul(&c).unwrap().sub(&sigma).unwrap().frobenius_norm()
        }).collect();
        for w in res.windows(2) {
            prop_assert!(w[1] <= w[0].max(1e-10 * norm), "{:?}", res);
        }
    }

    #[test]
    fn exact_sqrt_scales_with_root(x in features(), c in 0.1..10.0f64) {
        let sigma = covariance_forward(&x);
        let r = exact_sqrt(&sigma).unwrap();
        let rc = exact_sqrt(&sigma.scale(c * c)).unwrap();
        prop_assert!(rel(&rc, &r.scale(c)) <= 1e-9);
    }

    #[test]
    fn text_format_round_trips(m in (1..5usize, 1..5usize).prop_flat_map(|(r, c)| matrix(r, c))) {
        let text = format_matrix(&m);
        prop_assert_eq!(read_matrix(text.as_bytes()).unwrap(), m);
    }
}
