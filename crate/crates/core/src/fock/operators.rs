use log::warn;
use nalgebra::{DMatrixView, DMatrixViewMut};

use super::space::{FockVector, TruncatedFockSpace};
use crate::error::{Error, Result};
use crate::first_quantized::DerivativeScheme;
use crate::linalg::{c, spectral_norm, CMatrix, C64, I};
use crate::mollifier::{circulant_taps, Evaluate, Grid, Kernel};
use crate::slh::EMatrix;

/// Bounded operator on the one-particle grid space `ℂ^N`.
#[derive(Clone, Debug, PartialEq)]
pub enum OneParticleOperator {
    Dense(CMatrix),
    /// `(Cf)_j = Σ_o row[o] f_{(j + o) mod N}`
    Circulant(Vec<C64>),
}

impl OneParticleOperator {
    pub fn identity(n: usize) -> Self {
        let mut row = vec![c(0.0, 0.0); n];
        row[0] = c(1.0, 0.0);
        OneParticleOperator::Circulant(row)
    }

    /// Periodic convolution `h ↦ g^(k) * h` with trapezoid weights.
    pub fn convolution(g: &Kernel, grid: &Grid) -> Result<Self> {
        g.warn_if_unresolved(grid);
        let taps = circulant_taps(g, grid)?;
        let n = grid.n_points;
        let dx = grid.dx();
        let mut row = vec![c(0.0, 0.0); n];
        // (g*h)_j = Δx Σ_m g(mΔx) h_{j−m}
        for (m, w) in taps {
            row[grid.wrap(-m)] += w * dx;
        }
        Ok(OneParticleOperator::Circulant(row))
    }

    /// `i·D` for the given derivative scheme.
    pub fn free_generator(grid: &Grid, scheme: DerivativeScheme) -> Self {
        let row = scheme.circulant_row(grid).into_iter().map(|z| I * z).collect();
        OneParticleOperator::Circulant(row)
    }

    /// Derivative on `ℝ \ {0}`: central differences, except one-sided ones at
    /// the two nodes next to 0 so that no stencil straddles the origin.
    pub fn ac_derivative(grid: &Grid) -> Self {
        let n = grid.n_points;
        let dx = grid.dx();
        let mut m = CMatrix::zeros(n, n);
        let left = grid.left_of_origin();
        for j in 0..n {
            if j == left {
                m[(j, j)] += c(1.0 / dx, 0.0);
                m[(j, j - 1)] += c(-1.0 / dx, 0.0);
            } else if j == left + 1 {
                m[(j, j + 1)] += c(1.0 / dx, 0.0);
                m[(j, j)] += c(-1.0 / dx, 0.0);
            } else {
                m[(j, (j + 1) % n)] += c(0.5 / dx, 0.0);
                m[(j, (j + n - 1) % n)] += c(-0.5 / dx, 0.0);
            }
        }
        OneParticleOperator::Dense(m)
    }

    pub fn dim(&self) -> usize {
        match self {
            OneParticleOperator::Dense(m) => m.nrows(),
            OneParticleOperator::Circulant(r) => r.len(),
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            OneParticleOperator::Dense(m) => OneParticleOperator::Dense(m.adjoint()),
            OneParticleOperator::Circulant(r) => {
                let n = r.len();
                OneParticleOperator::Circulant((0..n).map(|o| r[(n - o) % n].conj()).collect())
            }
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            OneParticleOperator::Dense(m) => m.clone(),
            OneParticleOperator::Circulant(r) => {
                let n = r.len();
                CMatrix::from_fn(n, n, |j, l| r[(l + n - j) % n])
            }
        }
    }

    /// Largest singular value; exact Fourier symbol for circulants.
    pub fn norm(&self) -> f64 {
        match self {
            OneParticleOperator::Dense(m) => spectral_norm(m),
            OneParticleOperator::Circulant(r) => {
                let n = r.len();
                (0..n)
                    .map(|p| {
                        let theta = 2.0 * std::f64::consts::PI * p as f64 / n as f64;
                        r.iter()
                            .enumerate()
                            .map(|(o, z)| z * c(0.0, theta * o as f64).exp())
                            .sum::<C64>()
                            .norm()
                    })
                    .fold(0.0, f64::max)
            }
        }
    }

    pub fn apply_vec(&self, f: &[C64]) -> Vec<C64> {
        let n = f.len();
        apply_slot(self, f, 1, 0, n, 1)
    }
}

/// Applies a one-particle operator to slot `slot` of a level-`m` tensor.
pub fn apply_slot(op: &OneParticleOperator, level: &[C64], m: usize, slot: usize, n: usize, d: usize) -> Vec<C64> {
    let inner = n.pow((m - 1 - slot) as u32) * d;
    let outer = n.pow(slot as u32);
    let mut out = vec![c(0.0, 0.0); level.len()];
    match op {
        OneParticleOperator::Dense(mat) if mat.iter().filter(|z| **z != c(0.0, 0.0)).count() > 8 * n => {
            apply_slot_gemm(mat, level, &mut out, n, inner, outer);
        }
        OneParticleOperator::Circulant(row) if row.iter().filter(|z| **z != c(0.0, 0.0)).count() > 8 => {
            apply_slot_gemm(&op.to_dense(), level, &mut out, n, inner, outer);
        }
        OneParticleOperator::Dense(mat) => {
            for o in 0..outer {
                let base = o * n * inner;
                for j in 0..n {
                    let dst = base + j * inner;
                    for l in 0..n {
                        let w = mat[(j, l)];
                        if w == c(0.0, 0.0) {
                            continue;
                        }
                        let src = base + l * inner;
                        for r in 0..inner {
                            out[dst + r] += w * level[src + r];
                        }
                    }
                }
            }
        }
        OneParticleOperator::Circulant(row) => {
            let taps: Vec<(usize, C64)> = row
                .iter()
                .enumerate()
                .filter(|(_, z)| **z != c(0.0, 0.0))
                .map(|(o, z)| (o, *z))
                .collect();
            for o in 0..outer {
                let base = o * n * inner;
                for j in 0..n {
                    let dst = base + j * inner;
                    for &(off, w) in &taps {
                        let src = base + ((j + off) % n) * inner;
                        for r in 0..inner {
                            out[dst + r] += w * level[src + r];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Dense slot action as matrix products; a level is column-major `inner × N × outer`.
fn apply_slot_gemm(mat: &CMatrix, level: &[C64], out: &mut [C64], n: usize, inner: usize, outer: usize) {
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    if inner == 1 {
        let src = DMatrixView::from_slice(level, n, outer);
        DMatrixViewMut::from_slice(out, n, outer).gemm(one, mat, &src, zero);
        return;
    }
    let mt = mat.transpose();
    let block = n * inner;
    for o in 0..outer {
        let src = DMatrixView::from_slice(&level[o * block..(o + 1) * block], inner, n);
        DMatrixViewMut::from_slice(&mut out[o * block..(o + 1) * block], inner, n).gemm(one, &src, &mt, zero);
    }
}

fn check_len(space: &TruncatedFockSpace, h: &[C64]) -> Result<()> {
    if h.len() != space.n() {
        return Err(Error::DimensionMismatch {
            expected: space.n(),
            found: h.len(),
        });
    }
    Ok(())
}

/// `(A(h)Ψ)_m(t) = Δx Σ_s conj(h(s)) Ψ_{m+1}(t, s)`; the top output level is 0.
pub fn apply_annihilation(h: &[C64], psi: &FockVector) -> Result<FockVector> {
    check_len(&psi.space, h)?;
    let mut out = annihilation_raw(h, psi);
    out.dropped_norm_sqr = psi.dropped_norm_sqr;
    Ok(out)
}

pub(crate) fn annihilation_raw(h: &[C64], psi: &FockVector) -> FockVector {
    let space = psi.space;
    let n = space.n();
    let d = space.d;
    let dx = space.grid.dx();
    let weights: Vec<(usize, C64)> = h
        .iter()
        .enumerate()
        .filter(|(_, z)| **z != c(0.0, 0.0))
        .map(|(s, z)| (s, z.conj() * dx))
        .collect();
    let mut out = FockVector::zeros(space);
    for m in 0..space.trunc {
        let src = &psi.levels[m + 1];
        let dst = &mut out.levels[m];
        let rows = dst.len() / d;
        for t in 0..rows {
            let base = t * n * d;
            for &(s, w) in &weights {
                let off = base + s * d;
                for a in 0..d {
                    dst[t * d + a] += w * src[off + a];
                }
            }
        }
    }
    out
}

/// `(A†(h)Ψ)_m(t₁…t_m) = Σ_i h(t_i) Ψ_{m−1}(t̂_i)`. Output above `M` is dropped;
/// its squared weighted norm `‖h‖²‖Ψ_M‖² + ‖A(h)Ψ_M‖²` is added to the record.
pub fn apply_creation(h: &[C64], psi: &FockVector) -> Result<FockVector> {
    check_len(&psi.space, h)?;
    let mut out = creation_raw(h, psi);
    out.dropped_norm_sqr = psi.dropped_norm_sqr + creation_overflow(h, psi);
    Ok(out)
}

/// Squared weighted norm that `A†(h)` sends above the truncation level.
pub fn creation_overflow(h: &[C64], psi: &FockVector) -> f64 {
    let space = psi.space;
    let top = space.trunc;
    let dx = space.grid.dx();
    let h2 = dx * h.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let top_only = {
        let mut v = FockVector::zeros(space);
        v.levels[top].copy_from_slice(&psi.levels[top]);
        v
    };
    let lowered = annihilation_raw(h, &top_only);
    h2 * psi.level_norm_sqr(top) + lowered.norm_sqr()
}

pub(crate) fn creation_raw(h: &[C64], psi: &FockVector) -> FockVector {
    let space = psi.space;
    let n = space.n();
    let d = space.d;
    let mut out = FockVector::zeros(space);
    let nonzero: Vec<(usize, C64)> = h
        .iter()
        .enumerate()
        .filter(|(_, z)| **z != c(0.0, 0.0))
        .map(|(j, z)| (j, *z))
        .collect();
    for m in 1..=space.trunc {
        let src = &psi.levels[m - 1];
        let dst = &mut out.levels[m];
        for slot in 0..m {
            let inner = n.pow((m - 1 - slot) as u32) * d;
            let outer = n.pow(slot as u32);
            for o in 0..outer {
                for &(j, hj) in &nonzero {
                    let dbase = (o * n + j) * inner;
                    let sbase = o * inner;
                    for r in 0..inner {
                        dst[dbase + r] += hj * src[sbase + r];
                    }
                }
            }
        }
    }
    out
}

/// `Γ(C)`: `C` on every slot of every level. Warns when `C` is not a contraction.
pub fn second_quantize_contraction(op: &OneParticleOperator, psi: &FockVector) -> Result<FockVector> {
    let space = psi.space;
    if op.dim() != space.n() {
        return Err(Error::DimensionMismatch {
            expected: space.n(),
            found: op.dim(),
        });
    }
    let nrm = op.norm();
    if nrm > 1.0 + 1e-10 {
        warn!("Γ(C) requested for a non-contraction, ‖C‖ = {nrm:.6}");
    }
    Ok(gamma_raw(op, psi))
}

pub(crate) fn gamma_raw(op: &OneParticleOperator, psi: &FockVector) -> FockVector {
    let space = psi.space;
    let mut out = psi.clone();
    for m in 1..=space.trunc {
        if out.levels[m].iter().all(|z| *z == c(0.0, 0.0)) {
            continue;
        }
        let mut lvl = std::mem::take(&mut out.levels[m]);
        for slot in 0..m {
            lvl = apply_slot(op, &lvl, m, slot, space.n(), space.d);
        }
        out.levels[m] = lvl;
    }
    out
}

/// `dΓ(B)`: `Σ_i B` on slot `i`.
pub fn differential_second_quantization(op: &OneParticleOperator, psi: &FockVector) -> Result<FockVector> {
    let space = psi.space;
    if op.dim() != space.n() {
        return Err(Error::DimensionMismatch {
            expected: space.n(),
            found: op.dim(),
        });
    }
    Ok(dgamma_raw(op, psi))
}

pub(crate) fn dgamma_raw(op: &OneParticleOperator, psi: &FockVector) -> FockVector {
    let space = psi.space;
    let mut out = FockVector::zeros(space);
    out.dropped_norm_sqr = psi.dropped_norm_sqr;
    for m in 1..=space.trunc {
        let dst = &mut out.levels[m];
        for slot in 0..m {
            let part = apply_slot(op, &psi.levels[m], m, slot, space.n(), space.d);
            for (o, p) in dst.iter_mut().zip(part) {
                *o += p;
            }
        }
    }
    out
}

/// Matrix-free `P H^(k) P` on the truncated space, where
/// `H^(k) = dΓ(iD) + E₁₁A†(g)A(g) + E₁₀A†(g) + E₀₁A(g) + E₀₀`.
#[derive(Clone, Debug)]
pub struct SecondQuantizedHamiltonian {
    pub space: TruncatedFockSpace,
    pub e: EMatrix,
    pub k: f64,
    pub g_samples: Vec<C64>,
    pub free: OneParticleOperator,
}

pub fn build_second_quantized_hk(
    e: &EMatrix,
    g: &Kernel,
    k: f64,
    space: &TruncatedFockSpace,
    scheme: DerivativeScheme,
) -> Result<SecondQuantizedHamiltonian> {
    if e.dim() != space.d {
        return Err(Error::DimensionMismatch {
            expected: space.d,
            found: e.dim(),
        });
    }
    let gk = g.scaled(k);
    gk.warn_if_unresolved(&space.grid);
    circulant_taps(&gk, &space.grid)?;
    let g_samples = space.grid.nodes().into_iter().map(|x| gk.eval(x)).collect();
    Ok(SecondQuantizedHamiltonian {
        space: *space,
        e: e.clone(),
        k,
        g_samples,
        free: OneParticleOperator::free_generator(&space.grid, scheme),
    })
}

impl SecondQuantizedHamiltonian {
    pub fn apply(&self, psi: &FockVector) -> FockVector {
        let e = &self.e;
        let g = &self.g_samples;
        let mut out = dgamma_raw(&self.free, psi);
        let lowered = annihilation_raw(g, psi);
        out.axpy(c(1.0, 0.0), &creation_raw(g, &lowered).apply_system(e.e11()));
        out.axpy(c(1.0, 0.0), &creation_raw(g, psi).apply_system(e.e10()));
        out.axpy(c(1.0, 0.0), &lowered.apply_system(e.e01()));
        out.axpy(c(1.0, 0.0), &psi.apply_system(e.e00()));
        out.dropped_norm_sqr = psi.dropped_norm_sqr;
        out
    }

    /// `‖(1 − P) H^(k) P Ψ‖`: only `E₁₀A†(g)` leaves the truncated space.
    pub fn leakage(&self, psi: &FockVector) -> f64 {
        let top = self.space.trunc;
        let mut top_only = FockVector::zeros(self.space);
        top_only.levels[top].copy_from_slice(&psi.levels[top]);
        let mapped = top_only.apply_system(self.e.e10());
        creation_overflow(&self.g_samples, &mapped).sqrt()
    }
}
