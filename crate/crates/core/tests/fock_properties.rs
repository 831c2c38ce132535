use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qmlab::first_quantized::DerivativeScheme;
use qmlab::fock::{
    apply_annihilation, apply_creation, build_second_quantized_hk, differential_second_quantization, krylov_propagate,
    second_quantize_contraction, FockVector, KrylovOptions, OneParticleOperator, TruncatedFockSpace,
};
use qmlab::linalg::{c, spectral_norm, CMatrix, C64};
use qmlab::mollifier::{bump_kernel, Grid, GridFunction};
use qmlab::qsde::bump_with_norm;
use qmlab::slh::random_e_matrix;

fn space(n: usize, trunc: usize, d: usize) -> TruncatedFockSpace {
    TruncatedFockSpace::new(Grid::new(2.0, n).unwrap(), trunc, d).unwrap()
}

fn random_samples(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

fn random_dense(n: usize, rng: &mut ChaCha8Rng, norm: f64) -> OneParticleOperator {
    let m = CMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let scale = norm / spectral_norm(&m);
    OneParticleOperator::Dense(m * c(scale, 0.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operators_keep_levels_symmetric(seed in any::<u64>(), d in 1usize..=2) {
        let sp = space(16, 3, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = FockVector::random_symmetric(sp, &mut rng, 4);
        let h = random_samples(16, &mut rng);
        let op = random_dense(16, &mut rng, 0.9);
        let outputs = [
            apply_creation(&h, &psi).unwrap(),
            apply_annihilation(&h, &psi).unwrap(),
            second_quantize_contraction(&op, &psi).unwrap(),
            differential_second_quantization(&op, &psi).unwrap(),
        ];
        for out in &outputs {
            prop_assert!(out.symmetry_defect() <= 1e-12 * (1.0 + out.norm()));
        }
    }

    #[test]
    fn adjoint_pairs_hold(seed in any::<u64>(), d in 1usize..=2) {
        let sp = space(16, 3, d);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phi = FockVector::random_symmetric(sp, &mut rng, 4);
        // below the top level so nothing is created past the truncation
        let psi = FockVector::random_symmetric(sp, &mut rng, 3);
        let h = random_samples(16, &mut rng);
        let op = random_dense(16, &mut rng, 0.9);
        let adj = op.adjoint();
        let creation = phi.inner(&apply_creation(&h, &psi).unwrap()) - apply_annihilation(&h, &phi).unwrap().inner(&psi);
        prop_assert!(creation.norm() <= 1e-10);
        let gamma = phi.inner(&second_quantize_contraction(&op, &phi).unwrap())
            - second_quantize_contraction(&adj, &phi).unwrap().inner(&phi);
        prop_assert!(gamma.norm() <= 1e-10);
        let dgamma = phi.inner(&differential_second_quantization(&op, &psi).unwrap())
            - differential_second_quantization(&adj, &phi).unwrap().inner(&psi);
        prop_assert!(dgamma.norm() <= 1e-10);
    }

    #[test]
    fn annihilation_intertwines_contractions(seed in any::<u64>()) {
        let sp = space(16, 3, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = FockVector::random_symmetric(sp, &mut rng, 4);
        let h = random_samples(16, &mut rng);
        let op = random_dense(16, &mut rng, 0.9);
        let adj_h = op.adjoint().apply_vec(&h);
        let lhs = apply_annihilation(&h, &second_quantize_contraction(&op, &psi).unwrap()).unwrap();
        let rhs = second_quantize_contraction(&op, &apply_annihilation(&adj_h, &psi).unwrap()).unwrap();
        prop_assert!(lhs.sub(&rhs).norm() <= 1e-10);
    }

    #[test]
    fn smoothing_converges_on_exponentials(center in -0.3..0.3f64, hw in 0.3..0.6f64, norm in 0.1..0.5f64) {
        let sp = space(64, 2, 1);
        let phi = GridFunction::sample_scalar(sp.grid, &bump_with_norm(center, hw, norm));
        let e = FockVector::exponential(sp, &phi, &[c(1.0, 0.0)]).unwrap();
        let g = bump_kernel(1.0, 0.0, 0.0).unwrap();
        let dist: Vec<f64> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&k| {
                let conv = OneParticleOperator::convolution(&g.scaled(k), &sp.grid).unwrap();
                second_quantize_contraction(&conv, &e).unwrap().sub(&e).norm()
            })
            .collect();
        prop_assert!(dist.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)), "distances {dist:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn krylov_propagation_is_unitary(seed in any::<u64>(), t in -0.5..0.5f64) {
        let sp = space(32, 2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e = random_e_matrix(&mut rng, 1, 1.99);
        let g = bump_kernel(1.0, 0.0, 0.0).unwrap();
        let h = build_second_quantized_hk(&e, &g, 1.0, &sp, DerivativeScheme::Spectral).unwrap();
        let psi = FockVector::random_symmetric(sp, &mut rng, 2);
        let (out, _) = krylov_propagate(&h, &psi, t, KrylovOptions::default()).unwrap();
        prop_assert!((out.norm() - psi.norm()).abs() <= 1e-9);
    }
}
