use krein_ext::krein::WeylSystem;
use krein_ext::models::{IntervalModel, PointModel};
use krein_ext::numeric::{hermitian_eig, norm2};
use krein_ext::parametrizations::{
    check_pair_conditions, is_selfadjoint_relation, max_principal_angle_sine, pair_from_params, params_from_pair,
    relation_from_pair, relation_from_params, von_neumann_block,
};
use krein_ext::sampling::{corrupted_pair, random_params, random_valid_pair};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn params_survive_the_pair_round_trip(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(&mut rng, n);
        let bp = pair_from_params(&p);
        let back = params_from_pair(&bp).unwrap();
        prop_assert!((back.pi() - p.pi()).norm() <= 1e-10);
        prop_assert!((back.theta() - p.theta()).norm() <= 1e-10 * (1.0 + p.theta().norm()));
    }

    #[test]
    fn generated_pairs_are_admissible(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(&mut rng, n);
        let r = check_pair_conditions(&pair_from_params(&p)).unwrap();
        let t = norm2(p.theta());
        prop_assert!(r.comm_residual <= 1e-12, "{}", r.comm_residual);
        prop_assert!(r.rofe2_sigma >= 1e-8 / (1.0 + t * t));
        prop_assert!(r.all_pass() && r.agree);
    }

    #[test]
    fn relations_agree_across_pictures(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, bp) = random_valid_pair(&mut rng, n);
        let from_params = relation_from_params(&p);
        let from_pair = relation_from_pair(&bp).unwrap();
        prop_assert!(is_selfadjoint_relation(&from_params));
        prop_assert!(is_selfadjoint_relation(&from_pair));
        prop_assert!(max_principal_angle_sine(&from_params, &from_pair).unwrap() <= 1e-8);
        let recovered = relation_from_params(&params_from_pair(&bp).unwrap());
        prop_assert!(max_principal_angle_sine(&recovered, &from_pair).unwrap() <= 1e-8);
    }

    #[test]
    fn nondegeneracy_tests_agree(seed in any::<u64>(), n in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (_, good) = random_valid_pair(&mut rng, n);
        let bad = corrupted_pair(&mut rng, n);
        let g = check_pair_conditions(&good).unwrap();
        let b = check_pair_conditions(&bad).unwrap();
        prop_assert!(g.agree && g.nondeg);
        prop_assert!(b.agree && !b.nondeg);
        prop_assert!(params_from_pair(&bad).is_err());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn von_neumann_block_is_unitary(seed in any::<u64>(), a in 0.5f64..4.0, d in 0.3f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let interval = IntervalModel::new(a).unwrap();
        let points = PointModel::new(vec![[0.0; 3], [d, 0.0, 0.0]]).unwrap();
        for w in [&interval as &dyn WeylSystem, &points] {
            let p = random_params(&mut rng, 2);
            let b = von_neumann_block(w, &p).unwrap();
            prop_assert!(b.unitarity_residual <= 1e-8, "{}", b.unitarity_residual);
            prop_assert!(b.alternative_form_residual <= 1e-12, "{}", b.alternative_form_residual);
            prop_assert!(hermitian_eig(&b.q).unwrap().values[0] > 0.0);
            prop_assert!((b.gamma_hat.adjoint() + &b.gamma_hat).norm() == 0.0);
        }
    }
}
