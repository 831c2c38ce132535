//! One-particle model on the periodic grid: `H^(k) = i∂ + E|g^(k)⟩⟨g^(k)|`,
//! its unitary group, and the exact scattering-shift group of the limit
//! Hamiltonian `i∂` with boundary condition `f(0⁻) = S f(0⁺)`.

use std::f64::consts::PI;

use log::debug;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{c, ensure_square, identity, CMatrix, CVector, C64, I};
use crate::mollifier::{circulant_taps, convolve_taps, pair, Evaluate, Grid, GridFunction, Kernel};
use crate::profile::{Profile, Side, VectorProfile};
use crate::slh::SystemOperator;

/// Largest `N·d` handled by the dense eigensolver.
pub const MAX_DENSE_DIM: usize = 2048;

/// Discretization of `∂` on the periodic grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeScheme {
    /// `(f_{j+1} − f_{j−1}) / 2Δx`: real and skew-symmetric.
    CentralDifference,
    /// Fourier multiplier `iκ`, `κ = 2πn/(NΔx)` with the Nyquist mode kept.
    /// Its exponential is the exact grid shift at multiples of `Δx`.
    Spectral,
}

impl DerivativeScheme {
    /// Circulant row: `(Df)_j = Σ_o row[o] f_{j+o}` with `o` taken mod `N`.
    pub fn circulant_row(self, grid: &Grid) -> Vec<C64> {
        let n = grid.n_points;
        let dx = grid.dx();
        let mut row = vec![c(0.0, 0.0); n];
        match self {
            DerivativeScheme::CentralDifference => {
                row[1 % n] += c(0.5 / dx, 0.0);
                row[n - 1] += c(-0.5 / dx, 0.0);
            }
            DerivativeScheme::Spectral => {
                let wavenumbers: Vec<f64> = (0..n)
                    .map(|m| {
                        let freq = if m < n / 2 { m as f64 } else { m as f64 - n as f64 };
                        2.0 * PI * freq / (n as f64 * dx)
                    })
                    .collect();
                for (o, r) in row.iter_mut().enumerate() {
                    let mut acc = c(0.0, 0.0);
                    for &kappa in &wavenumbers {
                        acc += I * kappa * c(0.0, -kappa * o as f64 * dx).exp();
                    }
                    *r = acc / n as f64;
                }
            }
        }
        row
    }

    /// Dense `N × N` derivative matrix.
    pub fn matrix(self, grid: &Grid) -> CMatrix {
        let n = grid.n_points;
        let row = self.circulant_row(grid);
        CMatrix::from_fn(n, n, |j, l| row[(l + n - j) % n])
    }
}

/// Dense Hermitian `H^(k)` on `ℂ^N ⊗ ℂ^d`, index `j·d + a`.
#[derive(Clone, Debug)]
pub struct DiscreteHamiltonian {
    pub matrix: CMatrix,
    pub grid: Grid,
    pub d: usize,
    pub k: f64,
}

/// `i·D ⊗ I_d + Δx |g^(k)⟩⟨g^(k)| ⊗ E` with the central-difference `D`.
pub fn build_hk(grid: &Grid, e: &SystemOperator, g: &Kernel, k: f64) -> Result<DiscreteHamiltonian> {
    build_hk_with(grid, e, g, k, DerivativeScheme::CentralDifference)
}

pub fn build_hk_with(
    grid: &Grid,
    e: &SystemOperator,
    g: &Kernel,
    k: f64,
    scheme: DerivativeScheme,
) -> Result<DiscreteHamiltonian> {
    let d = e.nrows();
    ensure_square(e, d)?;
    if d == 0 {
        return Err(Error::InvalidArgument("system dimension must be positive".into()));
    }
    let n = grid.n_points;
    let gk = g.scaled(k);
    gk.warn_if_unresolved(grid);
    let (lo, hi) = gk.support();
    if lo <= -grid.half_length || hi >= grid.half_length {
        return Err(Error::SupportTooWide {
            lo,
            hi,
            half_length: grid.half_length,
        });
    }
    let samples: Vec<C64> = grid.nodes().into_iter().map(|x| gk.eval(x)).collect();
    let row = scheme.circulant_row(grid);
    let dx = grid.dx();
    let dim = n * d;
    let mut m = CMatrix::zeros(dim, dim);
    for j in 0..n {
        for l in 0..n {
            let deriv = I * row[(l + n - j) % n];
            let rank_one = samples[j] * samples[l].conj() * dx;
            for a in 0..d {
                for b in 0..d {
                    let mut z = rank_one * e[(a, b)];
                    if a == b {
                        z += deriv;
                    }
                    m[(j * d + a, l * d + b)] = z;
                }
            }
        }
    }
    Ok(DiscreteHamiltonian {
        matrix: m,
        grid: *grid,
        d,
        k,
    })
}

/// Spectral data of a Hermitian matrix, reusable for many propagation times.
#[derive(Clone, Debug)]
pub struct EigenPropagator {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
    pub grid: Grid,
    pub d: usize,
}

impl EigenPropagator {
    pub fn new(h: &DiscreteHamiltonian) -> Result<Self> {
        let dim = h.matrix.nrows();
        if dim > MAX_DENSE_DIM {
            return Err(Error::InvalidArgument(format!(
                "dense propagation limited to N·d ≤ {MAX_DENSE_DIM}, got {dim}"
            )));
        }
        let eig = h.matrix.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Eigen("non-finite eigenvalue".into()));
        }
        // cheap unitarity probe of the eigenbasis
        let probe = CVector::from_fn(dim, |j, _| c(((j * 7 + 3) % 11) as f64 - 5.0, ((j * 5 + 1) % 13) as f64 - 6.0));
        let back = &eig.eigenvectors * (eig.eigenvectors.adjoint() * &probe);
        let err = (&back - &probe).norm() / probe.norm();
        if err > 1e-10 {
            return Err(Error::Eigen(format!("eigenbasis unitarity error {err:e}")));
        }
        debug!("eigensolve of dimension {dim}: probe error {err:e}");
        Ok(EigenPropagator {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
            grid: h.grid,
            d: h.d,
        })
    }

    /// `exp(−itH) f`
    pub fn propagate(&self, f: &GridFunction, t: f64) -> Result<GridFunction> {
        if f.d != self.d || f.grid.n_points != self.grid.n_points {
            return Err(Error::DimensionMismatch {
                expected: self.grid.n_points * self.d,
                found: f.values.len(),
            });
        }
        if t == 0.0 {
            return Ok(f.clone());
        }
        let mut coeffs = self.vectors.adjoint() * f.to_vector();
        for (z, &lambda) in coeffs.iter_mut().zip(self.values.iter()) {
            *z *= c(0.0, -lambda * t).exp();
        }
        Ok(GridFunction::from_vector(self.grid, self.d, &(&self.vectors * coeffs)))
    }
}

pub fn propagate_regular(h: &DiscreteHamiltonian, f: &GridFunction, t: f64) -> Result<GridFunction> {
    EigenPropagator::new(h)?.propagate(f, t)
}

/// Exact scattering shift: `(U(t)f)(x) = f(x + t)`, times `S` when
/// `x < 0 ≤ x + t`; for `t < 0` the reverse crossing picks up `S†`.
/// The periodic seam at `±L` is crossed freely.
pub fn limit_propagate(f: &GridFunction, t: f64, s: &SystemOperator) -> Result<GridFunction> {
    let grid = f.grid;
    let d = f.d;
    ensure_square(s, d)?;
    let m = grid.steps(t)?;
    if t.abs() > 0.5 * grid.half_length + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "limit propagation horizon |t| = {} exceeds L/2 = {}",
            t.abs(),
            0.5 * grid.half_length
        )));
    }
    let s_dag = s.adjoint();
    let dx = grid.dx();
    let mut out = GridFunction::zeros(grid, d);
    for j in 0..grid.n_points {
        let x = grid.node(j);
        let target = x + m as f64 * dx;
        let src = grid.wrap(j as isize + m);
        let value = CVector::from_column_slice(f.at(src));
        let mapped = if m > 0 && x < 0.0 && target >= 0.0 {
            s * value
        } else if m < 0 && x >= 0.0 && target < 0.0 {
            &s_dag * value
        } else {
            value
        };
        out.values[j * d..(j + 1) * d].copy_from_slice(mapped.as_slice());
    }
    Ok(out)
}

/// Piecewise-smooth `ℂ^d`-valued function with jump `f(0⁻) = S f(0⁺)` at 0.
#[derive(Clone, Debug)]
pub struct JumpFunctionSpec {
    pub left: VectorProfile,
    pub right: VectorProfile,
    pub s: SystemOperator,
}

impl JumpFunctionSpec {
    /// `right = φ·v₊` on `x > 0` and `left = φ·(S v₊)` on `x < 0` for a profile
    /// `φ` continuous at 0, so the boundary condition holds by construction.
    pub fn matched(profile: &Profile, v_plus: &[C64], s: &SystemOperator) -> Result<Self> {
        let d = v_plus.len();
        ensure_square(s, d)?;
        let right = VectorProfile::along(profile, v_plus);
        let left = right.mapped(s);
        Ok(JumpFunctionSpec {
            left,
            right,
            s: s.clone(),
        })
    }

    /// Arbitrary pieces, boundary condition not enforced (negative controls).
    pub fn unchecked(left: VectorProfile, right: VectorProfile, s: &SystemOperator) -> Self {
        JumpFunctionSpec {
            left,
            right,
            s: s.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.right.dim()
    }

    pub fn value(&self, x: f64) -> Vec<C64> {
        if x < 0.0 {
            self.left.value(x)
        } else {
            self.right.value(x)
        }
    }

    pub fn derivative(&self, x: f64) -> Vec<C64> {
        if x < 0.0 {
            self.left.derivative(x)
        } else {
            self.right.derivative(x)
        }
    }

    pub fn limit(&self, side: Side) -> CVector {
        let v = match side {
            Side::Plus => self.right.limit(Side::Plus),
            Side::Minus => self.left.limit(Side::Minus),
        };
        CVector::from_vec(v)
    }

    /// `‖f(0⁻) − S f(0⁺)‖`
    pub fn boundary_defect(&self) -> f64 {
        (self.limit(Side::Minus) - &self.s * self.limit(Side::Plus)).norm()
    }

    pub fn sample(&self, grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, self.dim(), |x| self.value(x))
    }

    pub fn sample_derivative(&self, grid: Grid) -> GridFunction {
        GridFunction::from_fn(grid, self.dim(), |x| self.derivative(x))
    }

    /// Support hull of both pieces restricted to their half-lines.
    pub fn support(&self) -> (f64, f64) {
        let (ll, lh) = self.left.support();
        let (rl, rh) = self.right.support();
        (ll.min(rl.max(0.0)), rh.max(lh.min(0.0)))
    }
}

/// Default domain function: a bump of halfwidth `halfwidth` centered at
/// `center`, multiplied by `v₊` on the right and `S v₊` on the left.
pub fn make_domain_function(
    center: f64,
    halfwidth: f64,
    v_plus: &[C64],
    s: &SystemOperator,
) -> Result<JumpFunctionSpec> {
    JumpFunctionSpec::matched(&Profile::bump(center, halfwidth, c(1.0, 0.0)), v_plus, s)
}

/// `(‖f^(k) − f‖, ‖H^(k) f^(k) − Hf‖)` in the grid norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphResidual {
    pub smoothing: f64,
    pub generator: f64,
}

/// Uses `∂(g^(k) * f) = g^(k) * ∂f + (f(0⁺) − f(0⁻)) g^(k)`, with `∂f` taken
/// piecewise from the closed form, so the only discretization is the
/// trapezoid rule for the convolutions and the pairing.
pub fn graph_residual(
    f: &JumpFunctionSpec,
    g: &Kernel,
    e: &SystemOperator,
    k: f64,
    grid: &Grid,
) -> Result<GraphResidual> {
    let d = f.dim();
    ensure_square(e, d)?;
    let gk = g.scaled(k);
    gk.warn_if_unresolved(grid);
    let taps = circulant_taps(&gk, grid)?;
    let fs = f.sample(*grid);
    let dfs = f.sample_derivative(*grid);
    let fk = convolve_taps(&taps, &fs);
    let g_conv_df = convolve_taps(&taps, &dfs);
    let jump = f.limit(Side::Plus) - f.limit(Side::Minus);
    let coupling = e * pair(&gk, &fk);
    let mut hk_fk = GridFunction::zeros(*grid, d);
    for j in 0..grid.n_points {
        let gj = gk.eval(grid.node(j));
        for a in 0..d {
            hk_fk.values[j * d + a] = I * g_conv_df.values[j * d + a] + I * jump[a] * gj + gj * coupling[a];
        }
    }
    let hf = dfs.scale(I);
    Ok(GraphResidual {
        smoothing: fk.distance(&fs),
        generator: hk_fk.distance(&hf),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrotterKatoReport {
    pub per_time: Vec<(f64, f64)>,
    pub sup: f64,
}

/// `max_t ‖exp(−itH^(k)) f − U(t) f‖` over grid-aligned `times ⊂ [0, T]`.
pub fn trotter_kato_sup_error(
    f: &GridFunction,
    e: &SystemOperator,
    g: &Kernel,
    k: f64,
    s: &SystemOperator,
    horizon: f64,
    times: &[f64],
) -> Result<TrotterKatoReport> {
    let grid = f.grid;
    if horizon > 0.5 * grid.half_length + 1e-12 {
        return Err(Error::InvalidArgument(format!("horizon {horizon} exceeds L/2")));
    }
    for &t in times {
        grid.steps(t)?;
        if t < -1e-12 || t > horizon + 1e-12 {
            return Err(Error::InvalidArgument(format!("time {t} outside [0, {horizon}]")));
        }
    }
    let h = build_hk(&grid, e, g, k)?;
    let prop = EigenPropagator::new(&h)?;
    let mut per_time = Vec::with_capacity(times.len());
    for &t in times {
        let regular = prop.propagate(f, t)?;
        let limit = limit_propagate(f, t, s)?;
        per_time.push((t, regular.distance(&limit)));
    }
    let sup = per_time.iter().map(|p| p.1).fold(0.0, f64::max);
    Ok(TrotterKatoReport { per_time, sup })
}

/// Free-evolution comparison (`E = 0`, `S = I`) on the same `f`.
pub fn discretization_baseline(f: &GridFunction, g: &Kernel, k: f64, horizon: f64, times: &[f64]) -> Result<TrotterKatoReport> {
    let d = f.d;
    trotter_kato_sup_error(f, &CMatrix::zeros(d, d), g, k, &identity(d), horizon, times)
}

/// Grid-aligned times `0, sΔx, 2sΔx, … ≤ T`.
pub fn aligned_times(grid: &Grid, horizon: f64, stride: usize) -> Vec<f64> {
    let dx = grid.dx();
    let stride = stride.max(1);
    let last = (horizon / dx + 1e-9).floor() as usize;
    (0..=last).step_by(stride).map(|m| m as f64 * dx).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermiticity_defect, real};
    use crate::mollifier::bump_kernel;

    fn scalar(z: C64) -> CMatrix {
        CMatrix::from_element(1, 1, z)
    }

    #[test]
    fn spectral_derivative_is_exact_on_modes() {
        let grid = Grid::new(2.0, 32).unwrap();
        let d = DerivativeScheme::Spectral.matrix(&grid);
        let kappa = 2.0 * PI * 3.0 / 4.0;
        let f = CVector::from_fn(32, |j, _| c(0.0, kappa * grid.node(j)).exp());
        let df = &d * &f;
        assert!((df - &f * (I * kappa)).norm() < 1e-10);
        assert!(hermiticity_defect(&(&d * I)) < 1e-12);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let grid = Grid::new(2.0, 64).unwrap();
        let g = bump_kernel(1.0, 0.0, 0.0).unwrap();
        let e = CMatrix::from_row_slice(2, 2, &[real(1.0), c(0.2, 0.4), c(0.2, -0.4), real(-0.5)]);
        let h = build_hk(&grid, &e, &g, 2.0).unwrap();
        assert!(hermiticity_defect(&h.matrix) < 1e-12);
    }

    #[test]
    fn limit_group_property() {
        let grid = Grid::new(2.0, 128).unwrap();
        let s = scalar(c(0.0, -1.0));
        let f = make_domain_function(0.0, 0.25, &[real(1.0)], &s).unwrap().sample(grid);
        let dx = grid.dx();
        for (a, b) in [(5, 7), (-3, 9), (12, -12), (-6, -4)] {
            let ta = a as f64 * dx;
            let tb = b as f64 * dx;
            let two = limit_propagate(&limit_propagate(&f, tb, &s).unwrap(), ta, &s).unwrap();
            let one = limit_propagate(&f, ta + tb, &s).unwrap();
            assert!(two.distance(&one) < 1e-12, "{a} {b}");
            assert!((one.norm() - f.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn limit_respects_jump() {
        let s = scalar(c(0.0, -1.0));
        let spec = make_domain_function(0.0, 0.25, &[real(1.0)], &s).unwrap();
        let ratio = spec.limit(Side::Minus)[0] / spec.limit(Side::Plus)[0];
        assert!((ratio - c(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(spec.boundary_defect(), 0.0);
    }

    #[test]
    fn free_evolution_translates() {
        let grid = Grid::new(2.0, 128).unwrap();
        let g = bump_kernel(1.0, 0.0, 0.0).unwrap();
        let h = build_hk(&grid, &scalar(real(0.0)), &g, 4.0).unwrap();
        let f = GridFunction::sample_scalar(grid, &Profile::bump(0.5, 0.4, real(1.0)));
        let prop = EigenPropagator::new(&h).unwrap();
        let out = prop.propagate(&f, 0.25).unwrap();
        assert!((out.norm() - f.norm()).abs() < 1e-10);
        let shifted = limit_propagate(&f, 0.25, &identity(1)).unwrap();
        assert!(out.distance(&shifted) < 0.05 * f.norm());
    }
}
