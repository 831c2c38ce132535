//! Smoothing kernels `g^(k)(t) = k g(kt)`, their autocorrelation `ρ`, the
//! half-line constants `κ±`, and grid convolution and pairing.

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{c, CVector, C64};
use crate::profile::{Profile, Side, VectorProfile};
use crate::quadrature;

const KERNEL_TOL: f64 = 1e-13;

/// Anything that can be evaluated pointwise and has a bounded support.
pub trait Evaluate {
    fn eval(&self, x: f64) -> C64;
    /// Closed hull of the support; `lo > hi` means empty.
    fn support(&self) -> (f64, f64);
}

impl Evaluate for Profile {
    fn eval(&self, x: f64) -> C64 {
        self.value(x)
    }
    fn support(&self) -> (f64, f64) {
        Profile::support(self)
    }
}

/// Periodic grid on `[−L, L)` with nodes at `−L + (j + ½)Δx`, so 0 is never a node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub half_length: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn new(half_length: f64, n_points: usize) -> Result<Self> {
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid half-length must be positive, got {half_length}")));
        }
        if n_points == 0 || !n_points.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("grid size must be even and positive, got {n_points}")));
        }
        Ok(Grid { half_length, n_points })
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.n_points as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_length + (j as f64 + 0.5) * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.node(j)).collect()
    }

    /// Index of the node at `−Δx/2`; the next index is the node at `+Δx/2`.
    pub fn left_of_origin(&self) -> usize {
        self.n_points / 2 - 1
    }

    /// Number of grid steps in `t`, failing when `t` is not a multiple of `Δx`.
    pub fn steps(&self, t: f64) -> Result<isize> {
        let dx = self.dx();
        let m = (t / dx).round();
        if (t / dx - m).abs() > 1e-9 {
            return Err(Error::GridAlignment { t, dx });
        }
        Ok(m as isize)
    }

    /// Periodic wrap of an index offset.
    pub fn wrap(&self, j: isize) -> usize {
        j.rem_euclid(self.n_points as isize) as usize
    }
}

/// `ℂ^d`-valued samples at the grid nodes, stored node-major (`j·d + a`).
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub d: usize,
    pub values: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(grid: Grid, d: usize) -> Self {
        GridFunction {
            grid,
            d,
            values: vec![c(0.0, 0.0); grid.n_points * d],
        }
    }

    pub fn from_fn<F: Fn(f64) -> Vec<C64>>(grid: Grid, d: usize, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.n_points * d);
        for j in 0..grid.n_points {
            let v = f(grid.node(j));
            debug_assert_eq!(v.len(), d);
            values.extend(v);
        }
        GridFunction { grid, d, values }
    }

    pub fn sample(grid: Grid, f: &VectorProfile) -> Self {
        GridFunction::from_fn(grid, f.dim(), |x| f.value(x))
    }

    pub fn sample_scalar(grid: Grid, f: &Profile) -> Self {
        GridFunction {
            grid,
            d: 1,
            values: grid.nodes().into_iter().map(|x| f.value(x)).collect(),
        }
    }

    pub fn from_vector(grid: Grid, d: usize, v: &CVector) -> Self {
        GridFunction {
            grid,
            d,
            values: v.iter().cloned().collect(),
        }
    }

    pub fn to_vector(&self) -> CVector {
        CVector::from_column_slice(&self.values)
    }

    pub fn at(&self, j: usize) -> &[C64] {
        &self.values[j * self.d..(j + 1) * self.d]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.grid.dx() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `Δx Σ_j ⟨self(x_j), other(x_j)⟩`
    pub fn inner(&self, other: &GridFunction) -> C64 {
        let s: C64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        s * self.grid.dx()
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        GridFunction {
            grid: self.grid,
            d: self.d,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        GridFunction {
            grid: self.grid,
            d: self.d,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, z: C64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            d: self.d,
            values: self.values.iter().map(|a| a * z).collect(),
        }
    }

    pub fn distance(&self, other: &GridFunction) -> f64 {
        self.sub(other).norm()
    }
}

/// Smooth compactly supported kernel
/// `g^(k)(t) = k · c · exp(−1/(1−u²)) · e^{iω kt}`, `u = (kt − center)/halfwidth`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    pub halfwidth: f64,
    pub center: f64,
    pub omega: f64,
    /// Complex normalization which makes `∫g = 1`.
    pub norm: C64,
    pub scale: f64,
}

fn raw_bump(u: f64) -> f64 {
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

impl Kernel {
    fn unscaled(&self, s: f64) -> C64 {
        let u = (s - self.center) / self.halfwidth;
        let b = raw_bump(u);
        if b == 0.0 {
            return c(0.0, 0.0);
        }
        self.norm * b * c(0.0, self.omega * s).exp()
    }

    /// `g^(k')` for `k' = k · factor`.
    pub fn scaled(&self, factor: f64) -> Kernel {
        Kernel {
            scale: self.scale * factor,
            ..*self
        }
    }

    /// `∫ g`, by quadrature.
    pub fn integral(&self) -> C64 {
        let (a, b) = Evaluate::support(self);
        quadrature::integrate(|t| self.eval(t), a, b, KERNEL_TOL)
    }

    /// `‖g^(k)‖₂²`, by quadrature.
    pub fn norm_sqr(&self) -> f64 {
        let (a, b) = Evaluate::support(self);
        quadrature::integrate_real(|t| self.eval(t).norm_sqr(), a, b, KERNEL_TOL * self.scale)
    }

    pub fn is_real(&self) -> bool {
        self.omega == 0.0 && self.norm.im == 0.0
    }

    /// Number of grid nodes across the support.
    pub fn nodes_across(&self, grid: &Grid) -> f64 {
        2.0 * self.halfwidth / self.scale / grid.dx()
    }

    pub fn warn_if_unresolved(&self, grid: &Grid) {
        let n = self.nodes_across(grid);
        if n < 16.0 {
            warn!(
                "kernel at k = {} spans only {n:.1} grid nodes (Δx = {}); results are grid-limited",
                self.scale,
                grid.dx()
            );
        }
    }
}

impl Evaluate for Kernel {
    fn eval(&self, t: f64) -> C64 {
        self.unscaled(self.scale * t) * self.scale
    }

    fn support(&self) -> (f64, f64) {
        (
            (self.center - self.halfwidth) / self.scale,
            (self.center + self.halfwidth) / self.scale,
        )
    }
}

/// Normalized bump kernel at scale `k = 1`.
pub fn bump_kernel(halfwidth: f64, center: f64, omega_mod: f64) -> Result<Kernel> {
    if !(halfwidth > 0.0 && halfwidth.is_finite()) {
        return Err(Error::InvalidArgument(format!("kernel halfwidth must be positive, got {halfwidth}")));
    }
    let raw = Kernel {
        halfwidth,
        center,
        omega: omega_mod,
        norm: c(1.0, 0.0),
        scale: 1.0,
    };
    let integral = raw.integral();
    if integral.norm() < 1e-12 {
        return Err(Error::Normalization(integral.norm()));
    }
    Ok(Kernel {
        norm: c(1.0, 0.0) / integral,
        ..raw
    })
}

pub fn scale_kernel(g: &Kernel, k: f64) -> Result<Kernel> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {k}")));
    }
    Ok(g.scaled(k))
}

/// `ρ(t) = ∫ conj(g(s)) g(s + t) ds`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Autocorrelation {
    pub kernel: Kernel,
}

impl Evaluate for Autocorrelation {
    fn eval(&self, t: f64) -> C64 {
        let (a, b) = Evaluate::support(&self.kernel);
        let lo = a.max(a - t);
        let hi = b.min(b - t);
        if lo >= hi {
            return c(0.0, 0.0);
        }
        let g = &self.kernel;
        quadrature::integrate(|s| g.eval(s).conj() * g.eval(s + t), lo, hi, KERNEL_TOL * g.scale)
    }

    fn support(&self) -> (f64, f64) {
        let (a, b) = Evaluate::support(&self.kernel);
        (-(b - a), b - a)
    }
}

pub fn autocorrelation(g: &Kernel) -> Autocorrelation {
    Autocorrelation { kernel: *g }
}

/// Restriction of a function to one half-line.
#[derive(Clone, Copy, Debug)]
pub struct OneSided<T> {
    pub inner: T,
    pub side: Side,
}

impl<T: Evaluate> Evaluate for OneSided<T> {
    fn eval(&self, x: f64) -> C64 {
        let keep = match self.side {
            Side::Plus => x > 0.0,
            Side::Minus => x < 0.0,
        };
        if keep {
            self.inner.eval(x)
        } else {
            c(0.0, 0.0)
        }
    }

    fn support(&self) -> (f64, f64) {
        let (a, b) = self.inner.support();
        match self.side {
            Side::Plus => (a.max(0.0), b),
            Side::Minus => (a, b.min(0.0)),
        }
    }
}

/// `κ± = ½ ± iσ`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaPair {
    pub kappa_plus: C64,
    pub kappa_minus: C64,
    pub sigma: f64,
}

impl KappaPair {
    pub fn from_sigma(sigma: f64) -> Self {
        KappaPair {
            kappa_plus: c(0.5, sigma),
            kappa_minus: c(0.5, -sigma),
            sigma,
        }
    }

    pub fn sum_defect(&self) -> f64 {
        (self.kappa_plus + self.kappa_minus - c(1.0, 0.0)).norm()
    }

    pub fn conjugacy_defect(&self) -> f64 {
        (self.kappa_plus - self.kappa_minus.conj()).norm()
    }
}

/// `κ₊ = ∫₀^∞ ρ`, `κ₋ = ∫_{−∞}^0 ρ`, with both structural identities checked.
pub fn kappas(rho: &Autocorrelation) -> Result<KappaPair> {
    let (_, b) = rho.support();
    let tol = 1e-11;
    let kappa_plus = quadrature::integrate(|t| rho.eval(t), 0.0, b, tol);
    let kappa_minus = quadrature::integrate(|t| rho.eval(t), -b, 0.0, tol);
    let pair = KappaPair {
        kappa_plus,
        kappa_minus,
        sigma: kappa_plus.im,
    };
    if pair.sum_defect() > 1e-8 {
        return Err(Error::Consistency(format!(
            "κ₊ + κ₋ = {} differs from 1",
            kappa_plus + kappa_minus
        )));
    }
    if pair.conjugacy_defect() > 1e-8 {
        return Err(Error::Consistency(format!(
            "κ₊ = {kappa_plus} is not the conjugate of κ₋ = {kappa_minus}"
        )));
    }
    Ok(pair)
}

fn check_support(g: &Kernel, grid: &Grid) -> Result<()> {
    let (lo, hi) = Evaluate::support(g);
    let l = grid.half_length;
    if lo <= -l || hi >= l {
        return Err(Error::SupportTooWide { lo, hi, half_length: l });
    }
    Ok(())
}

/// Kernel samples at the circulant offsets `mΔx`, `m ∈ [−N/2, N/2)`, nonzero entries only.
pub fn circulant_taps(g: &Kernel, grid: &Grid) -> Result<Vec<(isize, C64)>> {
    check_support(g, grid)?;
    let n = grid.n_points as isize;
    let dx = grid.dx();
    Ok((-n / 2..n / 2)
        .filter_map(|m| {
            let v = g.eval(m as f64 * dx);
            (v != c(0.0, 0.0)).then_some((m, v))
        })
        .collect())
}

/// Periodic discrete convolution `(g * f)(x_j) = Δx Σ_m g(mΔx) f(x_{j−m})`.
pub fn convolve(g: &Kernel, f: &GridFunction) -> Result<GridFunction> {
    g.warn_if_unresolved(&f.grid);
    let taps = circulant_taps(g, &f.grid)?;
    Ok(convolve_taps(&taps, f))
}

pub fn convolve_taps(taps: &[(isize, C64)], f: &GridFunction) -> GridFunction {
    let grid = f.grid;
    let d = f.d;
    let dx = grid.dx();
    let mut out = GridFunction::zeros(grid, d);
    for j in 0..grid.n_points {
        for &(m, w) in taps {
            let src = grid.wrap(j as isize - m);
            for a in 0..d {
                out.values[j * d + a] += w * f.values[src * d + a] * dx;
            }
        }
    }
    out
}

/// Trapezoid pairing `Δx Σ_j conj(η(x_j)) h(x_j) ∈ ℂ^d`.
pub fn pair<E: Evaluate + ?Sized>(eta: &E, h: &GridFunction) -> CVector {
    let d = h.d;
    let dx = h.grid.dx();
    let mut out = CVector::zeros(d);
    let (lo, hi) = eta.support();
    for j in 0..h.grid.n_points {
        let x = h.grid.node(j);
        if x < lo || x > hi {
            continue;
        }
        let w = eta.eval(x).conj();
        if w == c(0.0, 0.0) {
            continue;
        }
        for a in 0..d {
            out[a] += w * h.values[j * d + a] * dx;
        }
    }
    out
}

/// Continuum pairing `∫ conj(η) h` of a kernel-like function with a closed-form scalar.
pub fn pair_continuum<E: Evaluate + ?Sized>(eta: &E, h: &Profile, tol: f64) -> C64 {
    let (el, eh) = eta.support();
    let (hl, hh) = h.support();
    let a = el.max(hl);
    let b = eh.min(hh);
    if a >= b {
        return c(0.0, 0.0);
    }
    let mut breaks = h.breakpoints();
    breaks.push(0.0);
    quadrature::integrate_with_breaks(|x| eta.eval(x).conj() * h.value(x), a, b, &breaks, tol)
}
