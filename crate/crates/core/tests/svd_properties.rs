use proptest::prelude::*;
use rmrk_core::svd::*;
use rmrk_core::DenseMatrix;

fn matrix(max_dim: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_dim, 1..=max_dim).prop_flat_map(|(m, n)| {
        prop::collection::vec(-3.0f64..3.0, m * n).prop_map(move |v| DenseMatrix::new(m, n, v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn full_svd_is_orthonormal_and_exact(a in matrix(9)) {
        let s = full_svd(&a).unwrap();
        prop_assert!(s.orthonormality_error() <= 1e-12);
        prop_assert!(s.s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(s.reconstruct().sub(&a).frobenius_norm() <= 1e-12 * (1.0 + a.frobenius_norm()));
    }

    #[test]
    fn truncated_values_prefix_full_values(a in matrix(12), k in 1usize..5, seed in any::<u64>()) {
        let k = k.min(a.rows().min(a.cols()));
        let full = singular_values(&a).unwrap();
        // Subspace iteration converges only across a spectral gap.
        prop_assume!(k == full.len() || full[k] < 0.95 * full[k - 1]);
        let t = truncated_svd(&a, k, DEFAULT_TOL, 2000, seed).unwrap();
        prop_assert!(t.orthonormality_error() <= 1e-10);
        for (x, y) in t.s.iter().zip(&full) {
            prop_assert!((x - y).abs() <= 1e-8 * full[0].max(1e-300));
        }
    }
}

#[test]
fn top_pair_matches_dense_on_random_square() {
    let mut rng = rmrk_core::rng::SeededRng::new(30);
    let a = DenseMatrix::from_fn(30, 30, |_, _| rng.gaussian()).unwrap();
    let (_, sigma, _) = top_singular_pair(&a, DEFAULT_TOL, 5000, 1).unwrap();
    let full = singular_values(&a).unwrap();
    assert!((sigma - full[0]).abs() <= 1e-8 * full[0]);
}
