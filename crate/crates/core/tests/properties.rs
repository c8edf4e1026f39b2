//! Property-based invariants across the public API.

use proptest::prelude::*;

use sympl_core::*;

fn ascending_positive_spectrum() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..10.0, 1..12).prop_map(|mut v| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clusters_partition_the_index_range(spectrum in ascending_positive_spectrum(), tol in 0.0f64..0.1) {
        let c = build_clusters(&spectrum, tol).unwrap();
        let mut seen: Vec<usize> = c.alphas().iter().flat_map(|a| a.iter()).collect();
        seen.sort_unstable();
        prop_assert_eq!(seen, (1..=spectrum.len()).collect::<Vec<_>>());
        for (i, gamma) in c.gammas().iter().enumerate() {
            prop_assert_eq!(gamma.len(), 2 * c.alphas()[i].len());
            let rebuilt = c.alphas()[i].concat_above(&c.alphas()[i].shifted(c.n())).unwrap();
            prop_assert_eq!(gamma.as_slice(), rebuilt.as_slice());
        }
        prop_assert!(c.mus().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn norm_chain_holds(rows in 1usize..8, cols in 1usize..8, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
        let m = Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>() * 4.0 - 2.0);
        let spec = m.spectral_norm();
        let frob = m.frobenius_norm();
        let rank_bound = (rows.min(cols) as f64).sqrt();
        prop_assert!(spec <= frob * (1.0 + 1e-12));
        prop_assert!(frob <= rank_bound * spec * (1.0 + 1e-12));
    }

    #[test]
    fn direct_sum_of_orthosymplectics_is_orthosymplectic(
        k in 1usize..4, l in 1usize..4, s1 in any::<u64>(), s2 in any::<u64>()
    ) {
        let q1 = orthosymplectic_from_unitary(&random_unitary(k, s1)).unwrap();
        let q2 = orthosymplectic_from_unitary(&random_unitary(l, s2)).unwrap();
        let sum = symplectic_direct_sum(&q1, &q2).unwrap();
        prop_assert!(is_orthosymplectic(&sum, 1e-10 * (k + l) as f64).unwrap().pass);

        // gamma-blocks of the direct sum recover the summands exactly
        let first = IndexSet::from_range(1, k);
        let second = IndexSet::from_range(k + 1, k + l);
        prop_assert_eq!(symplectic_diagonal_block(&sum, &first).unwrap(), q1.into_matrix());
        prop_assert_eq!(symplectic_diagonal_block(&sum, &second).unwrap(), q2.into_matrix());
    }

    #[test]
    fn concat_symplectic_iff_compatible(n in 2usize..5, seed in any::<u64>()) {
        let s = random_symplectic(n, seed, 3.0).unwrap();
        let all = IndexSet::from_range(1, 2 * n);
        let m = s.submatrix(&all, &IndexSet::new(vec![1, n + 1]).unwrap()).unwrap();
        let n2 = s.submatrix(&all, &IndexSet::new(vec![2, n + 2]).unwrap()).unwrap();
        let tol = default_predicate_tol(2 * n);

        let res = concat_compatibility(&m, &n2).unwrap();
        let cat = symplectic_concat(&m, &n2).unwrap();
        prop_assert_eq!(res <= tol, is_symplectic(&cat, tol).unwrap().pass);

        let res_self = concat_compatibility(&m, &m).unwrap();
        let cat_self = symplectic_concat(&m, &m).unwrap();
        prop_assert_eq!(res_self <= tol, is_symplectic(&cat_self, tol).unwrap().pass);
        prop_assert!(res_self > tol);
    }

    #[test]
    fn oracle_is_congruence_invariant(seed in any::<u64>(), gseed in any::<u64>()) {
        let spectrum = vec![0.5, 1.0, 1.0, 2.5];
        let spec = InstanceSpec { n: 4, spectrum, seed, conditioning: 3.0 };
        let (a, _) = make_instance(&spec).unwrap();
        let base = symplectic_spectrum_oracle(&a).unwrap();
        let g = random_symplectic(4, gseed, 3.0).unwrap();
        let moved = SquareMatrix::from_matrix(
            g.transpose().matmul(a.as_matrix()).matmul(&g).symmetrized(),
        ).unwrap();
        let oracle = symplectic_spectrum_oracle(&moved).unwrap();
        for (x, y) in base.iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-8 * x, "{} vs {}", x, y);
        }
    }

    #[test]
    fn decomposition_agrees_with_oracle(seed in any::<u64>(), n in 1usize..6) {
        let mut spectrum: Vec<f64> = (0..n).map(|i| 0.5 + (seed >> i) as f64 % 3.0).collect();
        spectrum.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let spec = InstanceSpec { n, spectrum, seed, conditioning: 2.0 };
        let (a, _) = make_instance(&spec).unwrap();
        let w = williamson_decompose(&a, DEFAULT_CLUSTER_TOL).unwrap();
        let oracle = symplectic_spectrum_oracle(&a).unwrap();
        for (x, y) in w.d.iter().zip(&oracle) {
            prop_assert!((x - y).abs() <= 1e-9 * x.max(1.0));
        }
        prop_assert!(is_symplectic(&w.s, 1e-8 * n as f64).unwrap().pass);
    }
}
