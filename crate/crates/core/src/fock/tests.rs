use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::first_quantized::DerivativeScheme;
use crate::linalg::{c, CVector, C64};
use crate::mollifier::{bump_kernel, Grid, GridFunction};
use crate::profile::{Profile, Side};
use crate::slh::{random_e_matrix, slh_from_e, EMatrix};

fn small_space(trunc: usize) -> TruncatedFockSpace {
    TruncatedFockSpace::new(Grid::new(2.0, 32).unwrap(), trunc, 1).unwrap()
}

fn sample(space: &TruncatedFockSpace, p: &Profile) -> Vec<C64> {
    GridFunction::sample_scalar(space.grid, p).values
}

fn weighted_inner(space: &TruncatedFockSpace, f: &[C64], h: &[C64]) -> C64 {
    f.iter().zip(h).map(|(a, b)| a.conj() * b).sum::<C64>() * space.grid.dx()
}

#[test]
fn ccr_below_the_top_level() {
    let space = small_space(3);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let psi = FockVector::random_symmetric(space, &mut rng, 3);
    let f = sample(&space, &Profile::bump(0.2, 1.0, c(1.0, 0.5)));
    let h = sample(&space, &Profile::bump(-0.3, 1.2, c(0.3, -1.0)));
    let af = |x: &FockVector| apply_annihilation(&f, x).unwrap();
    let ah = |x: &FockVector| apply_creation(&h, x).unwrap();
    let comm = af(&ah(&psi)).sub(&ah(&af(&psi)));
    let expected = psi.scaled(weighted_inner(&space, &f, &h));
    assert!(comm.sub(&expected).below(2).norm() < 1e-12);
}

#[test]
fn creation_is_adjoint_to_annihilation() {
    let space = small_space(2);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let phi = FockVector::random_symmetric(space, &mut rng, 3);
    let psi = FockVector::random_symmetric(space, &mut rng, 2);
    let h = sample(&space, &Profile::bump(0.0, 1.5, c(0.7, 0.2)));
    let lhs = phi.inner(&apply_creation(&h, &psi).unwrap());
    let rhs = apply_annihilation(&h, &phi).unwrap().inner(&psi);
    assert!((lhs - rhs).norm() < 1e-12);
}

#[test]
fn exponential_vectors_are_eigenvectors_of_annihilation() {
    let space = small_space(3);
    let phi_p = Profile::bump(0.1, 1.0, c(0.4, 0.3));
    let phi = GridFunction::sample_scalar(space.grid, &phi_p);
    let v = [c(1.0, 0.0)];
    let e = FockVector::exponential(space, &phi, &v).unwrap();
    let h = sample(&space, &Profile::bump(-0.2, 1.3, c(1.0, -0.2)));
    let lhs = apply_annihilation(&h, &e).unwrap();
    let rhs = e.scaled(weighted_inner(&space, &h, &phi.values));
    assert!(lhs.sub(&rhs).below(3).norm() < 1e-12);
    let closed = sample_state(&ExponentialState { phi: phi_p, v: CVector::from_column_slice(&v) }, &space).unwrap();
    assert!(closed.sub(&e).norm() < 1e-14);
}

#[test]
fn second_quantized_contraction_maps_exponentials() {
    let space = small_space(2);
    let g = bump_kernel(0.5, 0.0, 0.0).unwrap();
    let conv = OneParticleOperator::convolution(&g, &space.grid).unwrap();
    let phi = GridFunction::sample_scalar(space.grid, &Profile::bump(0.0, 1.0, c(0.5, 0.0)));
    let image = GridFunction::from_vector(space.grid, 1, &CVector::from_vec(conv.apply_vec(&phi.values)));
    let v = [c(1.0, 0.0)];
    let lhs = second_quantize_contraction(&conv, &FockVector::exponential(space, &phi, &v).unwrap()).unwrap();
    let rhs = FockVector::exponential(space, &image, &v).unwrap();
    assert!(lhs.sub(&rhs).norm() < 1e-13);
}

#[test]
fn truncated_hamiltonian_is_hermitian() {
    let grid = Grid::new(2.0, 32).unwrap();
    let space = TruncatedFockSpace::new(grid, 2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let e = random_e_matrix(&mut rng, 2, 1.5);
    let g = bump_kernel(1.0, 0.0, 0.0).unwrap();
    let h = build_second_quantized_hk(&e, &g, 2.0, &space, DerivativeScheme::Spectral).unwrap();
    let a = FockVector::random_symmetric(space, &mut rng, 3);
    let b = FockVector::random_symmetric(space, &mut rng, 3);
    let lhs = a.inner(&h.apply(&b));
    let rhs = h.apply(&a).inner(&b);
    assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
}

#[test]
fn free_evolution_is_the_grid_shift() {
    let space = small_space(2);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let psi = FockVector::random_symmetric(space, &mut rng, 3);
    let g = bump_kernel(0.5, 0.0, 0.0).unwrap();
    let h = build_second_quantized_hk(&EMatrix::zeros(1), &g, 1.0, &space, DerivativeScheme::Spectral).unwrap();
    let t = 4.0 * space.grid.dx();
    let (out, stats) = krylov_propagate(&h, &psi, t, KrylovOptions::default()).unwrap();
    assert!(stats.substeps >= 1);
    assert!(out.sub(&psi.shifted(t).unwrap()).norm() < 1e-9);
    let (back, _) = krylov_propagate(&h, &out, -t, KrylovOptions::default()).unwrap();
    assert!(back.sub(&psi).norm() < 1e-9);
}

#[test]
fn krylov_preserves_norm_with_interaction() {
    let space = small_space(2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let psi = FockVector::random_symmetric(space, &mut rng, 2);
    let e = EMatrix::scalar(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    let g = bump_kernel(1.0, 0.0, 0.0).unwrap();
    let h = build_second_quantized_hk(&e, &g, 2.0, &space, DerivativeScheme::Spectral).unwrap();
    let (out, stats) = krylov_propagate(&h, &psi, 0.5, KrylovOptions::default()).unwrap();
    assert!((out.norm() - psi.norm()).abs() < 1e-9);
    assert!(stats.leakage_integral > 0.0);
}

fn benchmark_spec() -> PseudoExponentialSpec {
    let e = EMatrix::scalar(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    let triple = slh_from_e(&e).unwrap();
    let v = Profile::bump(0.1, 0.8, c(0.6, 0.0));
    let u = Profile::piecewise(Profile::plateau(-0.5, 0.2, 0.3), Profile::Zero);
    PseudoExponentialSpec::for_triple(v, u, CVector::from_vec(vec![c(1.0, 0.0)]), &triple).unwrap()
}

#[test]
fn pseudo_exponential_satisfies_the_boundary_condition() {
    let space = small_space(2);
    let spec = benchmark_spec();
    let r = boundary_residual(&spec, &spec.s, &spec.l, &space).unwrap();
    assert!(r < 1e-13, "{r}");
    let wrong = crate::linalg::identity(1);
    assert!(boundary_residual(&spec, &wrong, &spec.l, &space).unwrap() > 1e-3);
}

#[test]
fn point_annihilation_at_a_node_reads_the_grid() {
    let space = small_space(2);
    let spec = benchmark_spec();
    let psi = pseudo_exponential(&spec, &space).unwrap();
    let j = space.grid.left_of_origin();
    let x = space.grid.node(j);
    let closed = point_annihilation(&spec, Coord::At(x), &space).unwrap();
    let read = pseudo::point_annihilation_grid(&psi, Side::Minus);
    assert!(closed.sub(&read).below(2).norm() < 1e-14);
}

#[test]
fn pseudo_exponential_rejects_bad_u() {
    let e = EMatrix::scalar(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    let triple = slh_from_e(&e).unwrap();
    let h = CVector::from_vec(vec![c(1.0, 0.0)]);
    let v = Profile::bump(0.0, 1.0, c(1.0, 0.0));
    assert!(PseudoExponentialSpec::for_triple(v.clone(), Profile::plateau(-0.5, 0.5, 0.2), h.clone(), &triple).is_err());
    let half = Profile::piecewise(Profile::constant(c(0.5, 0.0)), Profile::Zero);
    assert!(PseudoExponentialSpec::for_triple(v, half, h, &triple).is_err());
}

/// On levels `≤ M` the form `⟨Φ, HΨ⟩ − ⟨HΦ, Ψ⟩` equals minus the boundary term
/// `i(⟨a(0⁻)Φ, a(0⁻)Ψ⟩ − ⟨a(0⁺)Φ, a(0⁺)Ψ⟩)` restricted to level `M`.
#[test]
fn gregoratti_action_is_symmetric_on_the_domain() {
    let grid = Grid::new(2.0, 256).unwrap();
    let m = 2;
    let space = TruncatedFockSpace::new(grid, m, 1).unwrap();
    let e = EMatrix::scalar(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap();
    let triple = slh_from_e(&e).unwrap();
    let u = Profile::piecewise(Profile::plateau(-0.6, 0.2, 0.3), Profile::Zero);
    let h = CVector::from_vec(vec![c(1.0, 0.0)]);
    let a = PseudoExponentialSpec::for_triple(Profile::bump(0.1, 0.9, c(0.15, 0.0)), u.clone(), h.clone(), &triple).unwrap();
    let b = PseudoExponentialSpec::for_triple(Profile::bump(-0.2, 1.0, c(0.1, 0.05)), u, h.map(|z| z * c(0.0, 1.0)), &triple)
        .unwrap();
    let pa = pseudo_exponential(&a, &space).unwrap();
    let pb = pseudo_exponential(&b, &space).unwrap();
    let ha = gregoratti_apply(&a, &triple, &space).unwrap();
    let hb = gregoratti_apply(&b, &triple, &space).unwrap();
    let sym = pa.inner(&hb) - ha.inner(&pb);
    let top = |x: FockVector| {
        let mut y = FockVector::zeros(space);
        y.levels[m] = x.levels[m].clone();
        y
    };
    let at = |s: &PseudoExponentialSpec, side| top(point_annihilation(s, Coord::Limit(side), &space).unwrap());
    let bdry = (at(&a, Side::Minus).inner(&at(&b, Side::Minus)) - at(&a, Side::Plus).inner(&at(&b, Side::Plus))) * crate::linalg::I;
    assert!(sym.norm() > 1e-2);
    assert!((sym + bdry).norm() < 1e-4, "{sym} {bdry}");
}
