//! Exponential-vector matrix elements of the Hudson–Parthasarathy cocycle
//! from their ODE, and the comparison against truncated-Fock dynamics.

use log::{debug, warn};

use crate::error::{Error, Result};
use crate::first_quantized::DerivativeScheme;
use crate::fock::{build_second_quantized_hk, krylov_propagate, FockVector, KrylovOptions, TruncatedFockSpace};
use crate::linalg::{c, identity, spectral_norm, CMatrix, CVector, C64};
use crate::mollifier::{GridFunction, Kernel};
use crate::profile::{inner_product, norm_sqr, Profile};
use crate::slh::{solve_stratonovich_to_ito, CoefficientMatrix, EMatrix, SLHTriple};

/// Largest test-function norm accepted.
pub const MAX_TEST_NORM: f64 = 0.5;

/// Relative squared tail allowed above the truncation level.
pub const TRUNCATION_BUDGET: f64 = 0.01;

const QUAD_TOL: f64 = 1e-13;

/// Bra and ket one-particle test functions `φ`, `ψ` of `e(φ)`, `e(ψ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunctionPair {
    pub phi: Profile,
    pub psi: Profile,
}

fn profile_norm(p: &Profile) -> f64 {
    let (lo, hi) = p.support();
    if lo > hi {
        return 0.0;
    }
    if !lo.is_finite() || !hi.is_finite() {
        return f64::INFINITY;
    }
    norm_sqr(p, lo, hi, QUAD_TOL).sqrt()
}

/// Peak-normalized bump rescaled to a prescribed `L²` norm.
pub fn bump_with_norm(center: f64, halfwidth: f64, norm: f64) -> Profile {
    let unit = Profile::bump(center, halfwidth, c(1.0, 0.0));
    let n = profile_norm(&unit);
    Profile::bump(center, halfwidth, c(norm / n, 0.0))
}

impl TestFunctionPair {
    pub fn new(phi: Profile, psi: Profile) -> Result<Self> {
        for (name, p) in [("φ", &phi), ("ψ", &psi)] {
            let n = profile_norm(p);
            if n > MAX_TEST_NORM + 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "‖{name}‖ = {n:.4} exceeds {MAX_TEST_NORM} (compactly supported test functions required)"
                )));
            }
        }
        Ok(TestFunctionPair { phi, psi })
    }

    pub fn overlap(&self) -> C64 {
        let (lo, hi) = self.phi.support();
        if lo > hi {
            return c(0.0, 0.0);
        }
        inner_product(&self.phi, &self.psi, lo, hi, QUAD_TOL)
    }

    /// Pair with the bra replaced by `θ_{−t}φ = φ(· − t)`.
    pub fn with_bra_shifted(&self, t: f64) -> TestFunctionPair {
        TestFunctionPair {
            phi: self.phi.clone().shifted(t),
            psi: self.psi.clone(),
        }
    }

    pub fn norms(&self) -> (f64, f64) {
        (profile_norm(&self.phi), profile_norm(&self.psi))
    }
}

/// `K(t) = G₀₀ + conj(φ(t))G₁₀ + G₀₁ψ(t) + conj(φ(t))ψ(t)G₁₁`
pub fn matrix_element_generator(g: &CoefficientMatrix, pair: &TestFunctionPair, t: f64) -> CMatrix {
    let p = pair.phi.value(t).conj();
    let q = pair.psi.value(t);
    g.g00() + g.g10() * p + g.g01() * q + g.g11() * (p * q)
}

/// `⟨u ⊗ e(φ)| V(t) |v ⊗ e(ψ)⟩ = u† M(t) v`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixElementState {
    pub m: CMatrix,
    pub t: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl MatrixElementState {
    pub fn element(&self, u: &CVector, v: &CVector) -> C64 {
        (u.adjoint() * &self.m * v)[(0, 0)]
    }
}

// Dormand–Prince 5(4)
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `M′ = K(t)M` from `M(0) = exp(⟨φ|ψ⟩)I` with embedded error
/// control at `tol` and checks the contraction bound along the way.
pub fn solve_matrix_element_with(
    g: &CoefficientMatrix,
    pair: &TestFunctionPair,
    t_final: f64,
    tol: f64,
) -> Result<MatrixElementState> {
    if !(t_final >= 0.0) {
        return Err(Error::InvalidArgument(format!("t_final must be ≥ 0, got {t_final}")));
    }
    let d = g.dim();
    let m0 = identity(d) * pair.overlap().exp();
    let (np, nq) = pair.norms();
    let bound = (0.5 * np * np + 0.5 * nq * nq).exp() * (1.0 + 1e-8);
    let mut state = MatrixElementState {
        m: m0,
        t: 0.0,
        steps: 0,
        rejected: 0,
    };
    if t_final == 0.0 {
        return Ok(state);
    }
    let rhs = |t: f64, y: &CMatrix| matrix_element_generator(g, pair, t) * y;
    let mut h = (t_final / 16.0).min(0.05);
    let mut k1 = rhs(0.0, &state.m);
    while state.t < t_final {
        let t = state.t;
        let step = h.min(t_final - t);
        let mut ks: Vec<CMatrix> = Vec::with_capacity(7);
        ks.push(k1.clone());
        for s in 0..6 {
            let mut y = state.m.clone();
            for (j, kj) in ks.iter().enumerate() {
                if A[s][j] != 0.0 {
                    y += kj * c(step * A[s][j], 0.0);
                }
            }
            ks.push(rhs(t + C[s + 1] * step, &y));
        }
        let mut y5 = state.m.clone();
        let mut err = CMatrix::zeros(d, d);
        for j in 0..7 {
            y5 += &ks[j] * c(step * B5[j], 0.0);
            err += &ks[j] * c(step * (B5[j] - B4[j]), 0.0);
        }
        let scale = tol * (1.0 + y5.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let ratio = err.iter().map(|z| z.norm()).fold(0.0, f64::max) / scale;
        if ratio <= 1.0 {
            state.t = if t_final - t <= step { t_final } else { t + step };
            state.m = y5;
            state.steps += 1;
            k1 = ks.swap_remove(6);
            let nrm = spectral_norm(&state.m);
            if nrm > bound {
                return Err(Error::Consistency(format!(
                    "matrix element norm {nrm:.6e} exceeds the contraction bound {bound:.6e} at t = {}",
                    state.t
                )));
            }
        } else {
            state.rejected += 1;
        }
        let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
        h = step * factor;
        if h < 1e-14 * (1.0 + t_final) && state.t < t_final {
            return Err(Error::StepUnderflow { t: state.t, h });
        }
    }
    debug!("matrix element solve: {} steps, {} rejected", state.steps, state.rejected);
    Ok(state)
}

pub fn solve_matrix_element(g: &CoefficientMatrix, pair: &TestFunctionPair, t_final: f64) -> Result<MatrixElementState> {
    solve_matrix_element_with(g, pair, t_final, 1e-10)
}

/// Vacuum closed form `exp(t(−½L†L − iH))`.
pub fn vacuum_matrix_element(triple: &SLHTriple, t: f64) -> CMatrix {
    let g00 = triple.l.adjoint() * &triple.l * c(-0.5, 0.0) - &triple.h * c(0.0, 1.0);
    (g00 * c(t, 0.0)).exp()
}

/// `⟨u ⊗ e(φ)| U(t) |v ⊗ e(ψ)⟩` with `U(t) = Θ_t V(t)`, via the bra `φ(· − t)`.
pub fn interaction_picture_element(
    g: &CoefficientMatrix,
    pair: &TestFunctionPair,
    u: &CVector,
    v: &CVector,
    t: f64,
) -> Result<C64> {
    let shifted = pair.with_bra_shifted(t);
    Ok(solve_matrix_element(g, &shifted, t)?.element(u, v))
}

/// One time slice of the weak comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakPoint {
    pub t: f64,
    pub fock: C64,
    pub oracle: C64,
    pub error: f64,
    /// `∫ ‖(1 − P)H^(k)Pψ(s)‖ ds` up to `t`, relative to `‖ψ(0)‖`.
    pub leakage: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakConvergenceReport {
    pub points: Vec<WeakPoint>,
    /// Largest relative squared exponential tail of the bra and ket.
    pub dropped_fraction: f64,
}

fn scalar_grid(space: &TruncatedFockSpace, p: &Profile) -> GridFunction {
    GridFunction::sample_scalar(space.grid, p)
}

fn truncated_exponential(space: &TruncatedFockSpace, p: &Profile, v: &CVector) -> Result<(FockVector, f64)> {
    let e = FockVector::exponential(*space, &scalar_grid(space, p), v.as_slice())?;
    let total = e.norm_sqr() + e.dropped_norm_sqr;
    let frac = if total > 0.0 { e.dropped_norm_sqr / total } else { 0.0 };
    Ok((e, frac))
}

/// `|⟨u⊗e(φ)| e^{−itH^(k)} |v⊗e(ψ)⟩_P − ⟨u⊗e(φ)| U(t) |v⊗e(ψ)⟩|` per time, with
/// `U` built from `G(E)`. Fails if either exponential vector loses more than
/// the truncation budget of its squared norm.
#[allow(clippy::too_many_arguments)]
pub fn weak_convergence_error(
    e: &EMatrix,
    g: &Kernel,
    k: f64,
    pair: &TestFunctionPair,
    u: &CVector,
    v: &CVector,
    times: &[f64],
    space: &TruncatedFockSpace,
) -> Result<WeakConvergenceReport> {
    let coeff = solve_stratonovich_to_ito(e)?;
    let (bra, frac_bra) = truncated_exponential(space, &pair.phi, u)?;
    let (ket, frac_ket) = truncated_exponential(space, &pair.psi, v)?;
    let dropped_fraction = frac_bra.max(frac_ket);
    if dropped_fraction > TRUNCATION_BUDGET {
        return Err(Error::TruncationBudget {
            dropped: dropped_fraction,
            budget: TRUNCATION_BUDGET,
        });
    }
    let h = build_second_quantized_hk(e, g, k, space, DerivativeScheme::Spectral)?;
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut points = vec![None; times.len()];
    let mut state = ket.clone();
    let mut clock = 0.0;
    let mut leak = 0.0;
    let norm0 = ket.norm().max(f64::MIN_POSITIVE);
    for idx in order {
        let t = times[idx];
        if t < 0.0 {
            return Err(Error::InvalidArgument(format!("time {t} must be ≥ 0")));
        }
        space.grid.steps(t)?;
        let (next, stats) = krylov_propagate(&h, &state, t - clock, KrylovOptions::default())?;
        state = next;
        clock = t;
        leak += stats.leakage_integral;
        let fock = bra.inner(&state);
        let oracle = interaction_picture_element(&coeff, pair, u, v, t)?;
        points[idx] = Some(WeakPoint {
            t,
            fock,
            oracle,
            error: (fock - oracle).norm(),
            leakage: leak / norm0,
        });
    }
    if leak / norm0 > 0.1 {
        warn!("dynamic leakage out of the truncated space is {:.3e} (relative)", leak / norm0);
    }
    Ok(WeakConvergenceReport {
        points: points.into_iter().map(|p| p.expect("every time visited")).collect(),
        dropped_fraction,
    })
}

/// `‖[V(t+s) − Θ_s†V(t)Θ_sV(s)]Ψ‖` for `V(t) = Θ_{−t}e^{−itH^(k)}` on the
/// truncated space; every exponential is an independent Krylov run.
pub fn cocycle_residual(
    e: &EMatrix,
    g: &Kernel,
    k: f64,
    s: f64,
    t: f64,
    probe: &FockVector,
) -> Result<f64> {
    let space = probe.space;
    space.grid.steps(s)?;
    space.grid.steps(t)?;
    let h = build_second_quantized_hk(e, g, k, &space, DerivativeScheme::Spectral)?;
    let opts = KrylovOptions::default();
    let cocycle = |tau: f64, psi: &FockVector| -> Result<FockVector> {
        let (out, _) = krylov_propagate(&h, psi, tau, opts)?;
        out.shifted(-tau)
    };
    let lhs = cocycle(t + s, probe)?;
    let vs = cocycle(s, probe)?;
    let rhs = cocycle(t, &vs.shifted(s)?)?.shifted(-s)?;
    Ok(lhs.sub(&rhs).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slh::{coefficient_matrix_from_slh, slh_from_e};

    fn benchmark() -> EMatrix {
        EMatrix::scalar(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)).unwrap()
    }

    fn pair() -> TestFunctionPair {
        TestFunctionPair::new(bump_with_norm(0.3, 0.3, 0.5), bump_with_norm(0.1, 0.35, 0.4)).unwrap()
    }

    #[test]
    fn zero_generator_keeps_the_overlap() {
        let p = pair();
        let st = solve_matrix_element(&CoefficientMatrix::zeros(1), &p, 0.7).unwrap();
        assert_eq!(st.m[(0, 0)], p.overlap().exp());
    }

    #[test]
    fn vacuum_matches_the_matrix_exponential() {
        let triple = slh_from_e(&benchmark()).unwrap();
        let g = coefficient_matrix_from_slh(&triple);
        let vac = TestFunctionPair::new(Profile::Zero, Profile::Zero).unwrap();
        let st = solve_matrix_element(&g, &vac, 0.8).unwrap();
        assert!((st.m[(0, 0)] - vacuum_matrix_element(&triple, 0.8)[(0, 0)]).norm() < 1e-9);
    }

    #[test]
    fn constant_test_functions_give_the_substituted_generator() {
        let g = solve_stratonovich_to_ito(&benchmark()).unwrap();
        let p = TestFunctionPair {
            phi: Profile::constant(c(0.3, 0.0)),
            psi: Profile::constant(c(0.3, 0.0)),
        };
        let kk = matrix_element_generator(&g, &p, 0.1);
        let expected = g.g00() + (g.g01() + g.g10()) * c(0.3, 0.0) + g.g11() * c(0.09, 0.0);
        assert!((kk - expected).norm() < 1e-15);
    }

    #[test]
    fn rejects_large_test_functions() {
        assert!(TestFunctionPair::new(bump_with_norm(0.0, 0.5, 0.8), Profile::Zero).is_err());
    }

    #[test]
    fn free_case_is_a_shift_overlap() {
        let p = pair();
        let u = CVector::from_vec(vec![c(1.0, 0.0)]);
        let z = interaction_picture_element(&CoefficientMatrix::zeros(1), &p, &u, &u, 0.25).unwrap();
        assert!((z - p.with_bra_shifted(0.25).overlap().exp()).norm() < 1e-14);
    }
}
