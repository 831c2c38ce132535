use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qmlab::linalg::{c, hermiticity_defect, max_abs_diff, unitarity_defect, C64};
use qmlab::mollifier::KappaPair;
use qmlab::slh::{
    check_unitarity, coefficient_matrix_from_slh, ito_product, ito_product_opt, random_e_matrix,
    scattering_from_kappa, slh_from_e, solve_stratonovich_to_ito, Differential, EMatrix, ItoMonomial,
};

fn random_e(seed: u64, d: usize, bound: f64) -> EMatrix {
    random_e_matrix(&mut ChaCha8Rng::seed_from_u64(seed), d, bound)
}

fn complex() -> impl Strategy<Value = C64> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| c(re, im))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn coefficients_are_unitary(seed in any::<u64>(), d in 1usize..=4, bound in 0.01..1.99f64) {
        let g = solve_stratonovich_to_ito(&random_e(seed, d, bound)).unwrap();
        let r = check_unitarity(&g);
        prop_assert!(r.isometry <= 1e-12, "isometry {}", r.isometry);
        prop_assert!(r.co_isometry <= 1e-12, "co-isometry {}", r.co_isometry);
    }

    #[test]
    fn triple_round_trips(seed in any::<u64>(), d in 1usize..=4) {
        let e = random_e(seed, d, 1.99);
        let g = solve_stratonovich_to_ito(&e).unwrap();
        let back = coefficient_matrix_from_slh(&slh_from_e(&e).unwrap());
        prop_assert!(g.blocks.max_block_diff(&back.blocks) <= 1e-12);
    }

    #[test]
    fn triple_is_physical(seed in any::<u64>(), d in 1usize..=4) {
        let t = slh_from_e(&random_e(seed, d, 1.99)).unwrap();
        prop_assert!(unitarity_defect(&t.s) <= 1e-12);
        prop_assert!(hermiticity_defect(&t.h) <= 1e-12);
    }

    #[test]
    fn scalar_models_behave(e11 in -1.99..1.99f64, e10 in complex(), e00 in -3.0..3.0f64) {
        let e = EMatrix::scalar(c(e11, 0.0), e10, e10.conj(), c(e00, 0.0)).unwrap();
        let t = slh_from_e(&e).unwrap();
        prop_assert!((t.s[(0, 0)].norm() - 1.0).abs() <= 1e-12);
        prop_assert!(t.h[(0, 0)].im.abs() <= 1e-12);
        prop_assert!(check_unitarity(&solve_stratonovich_to_ito(&e).unwrap()).max() <= 1e-12);
    }

    #[test]
    fn symmetric_kappa_reproduces_the_scattering(seed in any::<u64>(), d in 1usize..=4) {
        let e = random_e(seed, d, 1.99);
        let s = scattering_from_kappa(e.e11(), &KappaPair::from_sigma(0.0)).unwrap();
        prop_assert!(max_abs_diff(&s, &slh_from_e(&e).unwrap().s) <= 1e-12);
    }

    #[test]
    fn modulated_kappa_still_scatters_unitarily(seed in any::<u64>(), d in 1usize..=3, sigma in -2.0..2.0f64) {
        let e = random_e(seed, d, 1.99);
        let s = scattering_from_kappa(e.e11(), &KappaPair::from_sigma(sigma)).unwrap();
        prop_assert!(unitarity_defect(&s) <= 1e-10);
    }

    #[test]
    fn ito_products_associate(a in 0usize..4, b in 0usize..4, m in 0usize..4, za in complex(), zb in complex(), zm in complex()) {
        let mono = |i: usize, z: C64| {
            let (alpha, beta) = Differential::ALL[i].indices();
            ItoMonomial::new(alpha, beta, z).unwrap()
        };
        let (x, y, w) = (mono(a, za), mono(b, zb), mono(m, zm));
        let left = ito_product_opt(ito_product(x, y), Some(w));
        let right = ito_product_opt(Some(x), ito_product(y, w));
        match (left, right) {
            (None, None) => {}
            (Some(l), Some(r)) => {
                prop_assert_eq!((l.alpha, l.beta), (r.alpha, r.beta));
                prop_assert!((l.coeff - r.coeff).norm() <= 1e-12 * (1.0 + l.coeff.norm()));
            }
            _ => prop_assert!(false, "one bracketing vanished and the other did not"),
        }
    }
}
