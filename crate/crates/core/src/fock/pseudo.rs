//! Closed-form product states: exponential vectors `v ⊗ e(φ)` and
//! pseudo-exponential vectors `Ψ(F, h)_m = F_{t₁}⋯F_{t_m} h` with a commuting
//! family `F_t`. Slot values at `0±`, slot derivatives and boundary checks
//! are evaluated from the closed forms, never read off the grid.

use log::warn;

use super::space::{exponential_tail, FockVector, TruncatedFockSpace};
use crate::error::{Error, Result};
use crate::linalg::{c, identity, CMatrix, CVector, I};
use crate::profile::{Profile, Side};
use crate::slh::{SLHTriple, SystemOperator};

/// A slot coordinate: a grid position, or a one-sided limit at 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coord {
    At(f64),
    Limit(Side),
}

/// `Ψ_m(t₁…t_m) = F_{t₁}⋯F_{t_m} h` for a pairwise commuting family `F`.
pub trait ProductState {
    fn dim(&self) -> usize;
    fn seed(&self) -> CVector;
    fn factor(&self, at: Coord) -> CMatrix;
    /// `d F_t / dt` away from 0.
    fn factor_derivative(&self, x: f64) -> CMatrix;
}

/// `v ⊗ e(φ)`: `F_t = φ(t) I`, `h = v`.
#[derive(Clone, Debug)]
pub struct ExponentialState {
    pub phi: Profile,
    pub v: CVector,
}

impl ProductState for ExponentialState {
    fn dim(&self) -> usize {
        self.v.len()
    }
    fn seed(&self) -> CVector {
        self.v.clone()
    }
    fn factor(&self, at: Coord) -> CMatrix {
        let z = match at {
            Coord::At(x) => self.phi.value(x),
            Coord::Limit(side) => self.phi.limit(side),
        };
        identity(self.dim()) * z
    }
    fn factor_derivative(&self, x: f64) -> CMatrix {
        identity(self.dim()) * self.phi.derivative(x)
    }
}

/// `F_t = v(t) I + u(t) K` with `K = S v(0⁺) + L − v(0⁻) I`, where `u` vanishes
/// on `(0, ∞)` and `u(0⁻) = 1`.
#[derive(Clone, Debug)]
pub struct PseudoExponentialSpec {
    pub v: Profile,
    pub u: Profile,
    pub h: CVector,
    pub s: SystemOperator,
    pub l: SystemOperator,
    pub k_matrix: CMatrix,
    pub sup_v: f64,
    pub sup_u: f64,
}

impl PseudoExponentialSpec {
    pub fn new(v: Profile, u: Profile, h: CVector, s: SystemOperator, l: SystemOperator) -> Result<Self> {
        let d = h.len();
        if s.nrows() != d || l.nrows() != d || s.ncols() != d || l.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.nrows(),
            });
        }
        let (_, u_hi) = u.support();
        if u_hi > 0.0 || u.limit(Side::Plus).norm() != 0.0 {
            return Err(Error::InvalidArgument("u must vanish on (0, ∞)".into()));
        }
        if (u.limit(Side::Minus) - c(1.0, 0.0)).norm() > 1e-14 {
            return Err(Error::InvalidArgument(format!("u(0⁻) must be 1, got {}", u.limit(Side::Minus))));
        }
        let k_matrix = &s * v.limit(Side::Plus) + &l - identity(d) * v.limit(Side::Minus);
        let span = |p: &Profile| {
            let (lo, hi) = p.support();
            p.sup_norm_estimate(lo.max(-1e3), hi.min(1e3))
        };
        let sup_v = span(&v);
        let sup_u = span(&u);
        Ok(PseudoExponentialSpec {
            v,
            u,
            h,
            s,
            l,
            k_matrix,
            sup_v,
            sup_u,
        })
    }

    /// Spec matched to an SLH triple.
    pub fn for_triple(v: Profile, u: Profile, h: CVector, triple: &SLHTriple) -> Result<Self> {
        PseudoExponentialSpec::new(v, u, h, triple.s.clone(), triple.l.clone())
    }
}

impl ProductState for PseudoExponentialSpec {
    fn dim(&self) -> usize {
        self.h.len()
    }
    fn seed(&self) -> CVector {
        self.h.clone()
    }
    fn factor(&self, at: Coord) -> CMatrix {
        let (v, u) = match at {
            Coord::At(x) => (self.v.value(x), self.u.value(x)),
            Coord::Limit(side) => (self.v.limit(side), self.u.limit(side)),
        };
        identity(self.dim()) * v + &self.k_matrix * u
    }
    fn factor_derivative(&self, x: f64) -> CMatrix {
        identity(self.dim()) * self.v.derivative(x) + &self.k_matrix * self.u.derivative(x)
    }
}

fn node_factors<P: ProductState + ?Sized>(state: &P, space: &TruncatedFockSpace) -> Vec<CMatrix> {
    space.grid.nodes().into_iter().map(|x| state.factor(Coord::At(x))).collect()
}

/// Levels built by `Ψ_m(t₁, rest) = F_{t₁} Ψ_{m−1}(rest)` from a given seed.
fn build_levels(space: &TruncatedFockSpace, factors: &[CMatrix], seed: &CVector) -> FockVector {
    let d = space.d;
    let n = space.n();
    let mut out = FockVector::zeros(*space);
    out.levels[0].copy_from_slice(seed.as_slice());
    for m in 1..=space.trunc {
        let (lower, upper) = out.levels.split_at_mut(m);
        let prev = &lower[m - 1];
        let cur = &mut upper[0];
        let block = prev.len();
        for j in 0..n {
            let f = &factors[j];
            let dst = &mut cur[j * block..(j + 1) * block];
            for (co, ci) in dst.chunks_mut(d).zip(prev.chunks(d)) {
                for a in 0..d {
                    let mut acc = c(0.0, 0.0);
                    for b in 0..d {
                        acc += f[(a, b)] * ci[b];
                    }
                    co[a] = acc;
                }
            }
        }
    }
    out
}

/// Samples a product state on the truncated space, recording the bound
/// `‖h‖² Σ_{m>M} c^m/m!`, `c = Δx Σ_j ‖F_{x_j}‖²`, on the dropped levels.
pub fn sample_state<P: ProductState + ?Sized>(state: &P, space: &TruncatedFockSpace) -> Result<FockVector> {
    if state.dim() != space.d {
        return Err(Error::DimensionMismatch {
            expected: space.d,
            found: state.dim(),
        });
    }
    let factors = node_factors(state, space);
    let seed = state.seed();
    let mut out = build_levels(space, &factors, &seed);
    let dx = space.grid.dx();
    let spread: f64 = factors.iter().map(|f| crate::linalg::spectral_norm(f).powi(2)).sum::<f64>() * dx;
    out.dropped_norm_sqr = seed.norm_squared() * exponential_tail(spread, space.trunc);
    Ok(out)
}

pub fn pseudo_exponential(spec: &PseudoExponentialSpec, space: &TruncatedFockSpace) -> Result<FockVector> {
    sample_state(spec, space)
}

/// `(a(s)Ψ)_m(t₁…t_m) = Ψ_{m+1}(t₁…t_m, s)` evaluated from the closed form, for
/// a grid position or a one-sided limit at 0.
pub fn point_annihilation<P: ProductState + ?Sized>(state: &P, at: Coord, space: &TruncatedFockSpace) -> Result<FockVector> {
    if state.dim() != space.d {
        return Err(Error::DimensionMismatch {
            expected: space.d,
            found: state.dim(),
        });
    }
    let factors = node_factors(state, space);
    // the last slot acts first on h
    let seed = state.factor(at) * state.seed();
    Ok(build_levels(space, &factors, &seed))
}

/// Grid surrogate of `a(0±)` for raw vectors: the last slot is read at the
/// node `±Δx/2`, which is only `O(Δx)` accurate.
pub fn point_annihilation_grid(psi: &FockVector, side: Side) -> FockVector {
    warn!("a(0±) on a raw grid vector uses the nodes at ±Δx/2 (O(Δx) accurate)");
    let space = psi.space;
    let n = space.n();
    let d = space.d;
    let node = match side {
        Side::Minus => space.grid.left_of_origin(),
        Side::Plus => space.grid.left_of_origin() + 1,
    };
    let mut out = FockVector::zeros(space);
    for m in 0..space.trunc {
        let src = &psi.levels[m + 1];
        let dst = &mut out.levels[m];
        let rows = dst.len() / d;
        for t in 0..rows {
            for a in 0..d {
                dst[t * d + a] = src[(t * n + node) * d + a];
            }
        }
    }
    out
}

/// `a_ȷ Ψ = a(0⁺)Ψ − a(0⁻)Ψ`
pub fn jump_annihilation<P: ProductState + ?Sized>(state: &P, space: &TruncatedFockSpace) -> Result<FockVector> {
    let plus = point_annihilation(state, Coord::Limit(Side::Plus), space)?;
    let minus = point_annihilation(state, Coord::Limit(Side::Minus), space)?;
    Ok(plus.sub(&minus))
}

/// `‖a(0⁻)Ψ − S a(0⁺)Ψ − LΨ‖` in the weighted norm.
pub fn boundary_residual<P: ProductState + ?Sized>(
    state: &P,
    s: &SystemOperator,
    l: &SystemOperator,
    space: &TruncatedFockSpace,
) -> Result<f64> {
    let minus = point_annihilation(state, Coord::Limit(Side::Minus), space)?;
    let plus = point_annihilation(state, Coord::Limit(Side::Plus), space)?;
    let psi = sample_state(state, space)?;
    let r = minus.sub(&plus.apply_system(s)).sub(&psi.apply_system(l));
    Ok(r.norm())
}

/// `dΓ(i∂_ac)Ψ` from closed-form slot derivatives.
pub fn ac_derivative_closed_form<P: ProductState + ?Sized>(state: &P, space: &TruncatedFockSpace) -> Result<FockVector> {
    let d = space.d;
    let n = space.n();
    let factors = node_factors(state, space);
    let derivs: Vec<CMatrix> = space.grid.nodes().into_iter().map(|x| state.factor_derivative(x)).collect();
    let values = build_levels(space, &factors, &state.seed());
    // D_m(t₁, rest) = F'_{t₁} Ψ_{m−1}(rest) + F_{t₁} D_{m−1}(rest)
    let mut out = FockVector::zeros(*space);
    for m in 1..=space.trunc {
        let block = values.levels[m - 1].len();
        let (lower, upper) = out.levels.split_at_mut(m);
        let prev_d = &lower[m - 1];
        let prev_v = &values.levels[m - 1];
        let cur = &mut upper[0];
        for j in 0..n {
            let f = &factors[j];
            let fp = &derivs[j];
            let dst = &mut cur[j * block..(j + 1) * block];
            for ((co, cv), cd) in dst.chunks_mut(d).zip(prev_v.chunks(d)).zip(prev_d.chunks(d)) {
                for a in 0..d {
                    let mut acc = c(0.0, 0.0);
                    for b in 0..d {
                        acc += fp[(a, b)] * cv[b] + f[(a, b)] * cd[b];
                    }
                    co[a] = acc;
                }
            }
        }
    }
    out.scale(I);
    Ok(out)
}

/// `HΨ = dΓ(i∂_ac)Ψ − iL†S a(0⁺)Ψ + (H − (i/2)L†L)Ψ` for a state in the domain.
pub fn gregoratti_apply<P: ProductState + ?Sized>(
    state: &P,
    triple: &SLHTriple,
    space: &TruncatedFockSpace,
) -> Result<FockVector> {
    let psi = sample_state(state, space)?;
    let residual = boundary_residual(state, &triple.s, &triple.l, space)?;
    let scale = psi.norm().max(1.0);
    if residual > 1e-9 * scale {
        return Err(Error::BoundaryViolation(residual));
    }
    let ldag = triple.l.adjoint();
    let plus = point_annihilation(state, Coord::Limit(Side::Plus), space)?;
    let mut out = ac_derivative_closed_form(state, space)?;
    out.axpy(c(1.0, 0.0), &plus.apply_system(&(&ldag * &triple.s * (-I))));
    let effective = &triple.h - &ldag * &triple.l * (I * 0.5);
    out.axpy(c(1.0, 0.0), &psi.apply_system(&effective));
    Ok(out)
}
