use causal_switch::linalg::{hermitian_eigen, kron, partial_trace, permute_subsystems, ComplexMatrix, SubsystemDims};
use causal_switch::random;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kron_is_associative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..4) {
        let mut r = rng(seed);
        let a = random::ginibre(&mut r, da, da);
        let b = random::ginibre(&mut r, db, db + 1);
        let c = random::ginibre(&mut r, dc, dc);
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn trace_of_kron_factorizes(seed in any::<u64>(), da in 1usize..5, db in 1usize..5) {
        let mut r = rng(seed);
        let a = random::ginibre(&mut r, da, da);
        let b = random::ginibre(&mut r, db, db);
        let lhs = kron(&a, &b).trace();
        let rhs = a.trace() * b.trace();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (a, b) = (random::ginibre(&mut r, 2, 3), random::ginibre(&mut r, 3, 2));
        let (c, d) = (random::ginibre(&mut r, 2, 2), random::ginibre(&mut r, 2, 2));
        let lhs = &kron(&a, &c) * &kron(&b, &d);
        let rhs = kron(&(&a * &b), &(&c * &d));
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-10);
    }

    #[test]
    fn partial_trace_is_consistent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let rho = random::density_matrix(&mut r, 12, 3);
        let dims = SubsystemDims::new(&[2, 3, 2]).unwrap();
        // tracing step by step equals tracing at once
        let direct = partial_trace(&rho, &dims, &[0]).unwrap();
        let step = partial_trace(&rho, &dims, &[0, 1]).unwrap();
        let step = partial_trace(&step, &SubsystemDims::new(&[2, 3]).unwrap(), &[0]).unwrap();
        prop_assert!(direct.max_abs_diff(&step) < 1e-12);
        prop_assert!((direct.trace().re - 1.0).abs() < 1e-12);
        // Tr[(X ⊗ 1) ρ] = Tr[X Tr_rest ρ]
        let x = random::hermitian(&mut r, 2);
        let lhs = kron(&x, &ComplexMatrix::identity(6)).trace_product(&rho);
        prop_assert!((lhs - x.trace_product(&direct)).norm() < 1e-10);
    }

    #[test]
    fn permutation_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m = random::ginibre(&mut r, 12, 12);
        let dims = SubsystemDims::new(&[2, 3, 2]).unwrap();
        let (p, pd) = permute_subsystems(&m, &dims, &[2, 0, 1]).unwrap();
        prop_assert_eq!(pd.dims(), &[2, 2, 3]);
        let (back, _) = permute_subsystems(&p, &pd, &[1, 2, 0]).unwrap();
        prop_assert!(back.max_abs_diff(&m) < 1e-15);
    }

    #[test]
    fn eigen_decomposition_reconstructs(seed in any::<u64>(), n in 1usize..12) {
        let mut r = rng(seed);
        let h = random::hermitian(&mut r, n);
        let e = hermitian_eigen(&h).unwrap();
        prop_assert!(e.reconstruct().max_abs_diff(&h) < 1e-9);
        prop_assert!(e.vectors.is_unitary(1e-9));
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let tr: f64 = e.values.iter().sum();
        prop_assert!((tr - h.trace().re).abs() < 1e-9);
    }
}
