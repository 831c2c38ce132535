use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, CVector, C64};
use crate::mollifier::{Grid, GridFunction};

/// Largest particle number the dense tensor storage supports.
pub const MAX_TRUNCATION: usize = 3;

/// Default cap on stored amplitudes per vector.
pub const DEFAULT_BUDGET: usize = 4_200_000;

/// `ℂ^d ⊗ ⊕_{m ≤ M} L²(grid)^{⊗m}` with full (unsymmetrized) tensor storage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncatedFockSpace {
    pub grid: Grid,
    pub trunc: usize,
    pub d: usize,
}

impl TruncatedFockSpace {
    pub fn new(grid: Grid, trunc: usize, d: usize) -> Result<Self> {
        TruncatedFockSpace::with_budget(grid, trunc, d, DEFAULT_BUDGET)
    }

    pub fn with_budget(grid: Grid, trunc: usize, d: usize, budget: usize) -> Result<Self> {
        if trunc > MAX_TRUNCATION {
            return Err(Error::InvalidArgument(format!(
                "truncation level {trunc} exceeds the supported maximum {MAX_TRUNCATION}"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("system dimension must be positive".into()));
        }
        let space = TruncatedFockSpace { grid, trunc, d };
        let dim = space.stored_dim();
        if dim > budget {
            return Err(Error::FockBudget { dim, budget });
        }
        Ok(space)
    }

    pub fn n(&self) -> usize {
        self.grid.n_points
    }

    pub fn level_len(&self, m: usize) -> usize {
        self.n().pow(m as u32) * self.d
    }

    /// Stored amplitudes `d Σ_m N^m`.
    pub fn stored_dim(&self) -> usize {
        (0..=self.trunc).map(|m| self.level_len(m)).sum()
    }

    /// Dimension of the symmetric subspace, `d Σ_m C(N+m−1, m)`.
    pub fn symmetric_dim(&self) -> usize {
        let n = self.n();
        let mut total = 0usize;
        for m in 0..=self.trunc {
            let mut binom = 1usize;
            for i in 0..m {
                binom = binom * (n + i) / (i + 1);
            }
            total += binom;
        }
        total * self.d
    }

    /// Quadrature weight `Δx^m / m!` of level `m`.
    pub fn level_weight(&self, m: usize) -> f64 {
        let dx = self.grid.dx();
        dx.powi(m as i32) / factorial(m)
    }
}

pub fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// Splits a flat level index into grid coordinates and the system index.
pub fn unflatten(mut idx: usize, m: usize, n: usize, d: usize, coords: &mut [usize]) -> usize {
    let a = idx % d;
    idx /= d;
    for slot in (0..m).rev() {
        coords[slot] = idx % n;
        idx /= n;
    }
    a
}

pub fn flatten(coords: &[usize], a: usize, n: usize, d: usize) -> usize {
    let mut idx = 0usize;
    for &t in coords {
        idx = idx * n + t;
    }
    idx * d + a
}

/// Levels `Ψ_0 … Ψ_M`, level `m` stored as `N^m · d` amplitudes, together with
/// the squared weighted norm known to have been dropped above level `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    pub space: TruncatedFockSpace,
    pub levels: Vec<Vec<C64>>,
    pub dropped_norm_sqr: f64,
}

impl FockVector {
    pub fn zeros(space: TruncatedFockSpace) -> Self {
        let levels = (0..=space.trunc).map(|m| vec![c(0.0, 0.0); space.level_len(m)]).collect();
        FockVector {
            space,
            levels,
            dropped_norm_sqr: 0.0,
        }
    }

    /// `v ⊗ Ω`
    pub fn vacuum(space: TruncatedFockSpace, v: &[C64]) -> Result<Self> {
        if v.len() != space.d {
            return Err(Error::DimensionMismatch {
                expected: space.d,
                found: v.len(),
            });
        }
        let mut out = FockVector::zeros(space);
        out.levels[0].copy_from_slice(v);
        Ok(out)
    }

    /// `v ⊗ e(φ)` with `φ` a scalar grid function; the dropped tail
    /// `‖v‖² Σ_{m>M} ‖φ‖^{2m}/m!` is recorded.
    pub fn exponential(space: TruncatedFockSpace, phi: &GridFunction, v: &[C64]) -> Result<Self> {
        if phi.d != 1 || phi.grid.n_points != space.n() {
            return Err(Error::DimensionMismatch {
                expected: space.n(),
                found: phi.values.len(),
            });
        }
        let mut out = FockVector::vacuum(space, v)?;
        let n = space.n();
        let d = space.d;
        for m in 1..=space.trunc {
            let (lower, upper) = out.levels.split_at_mut(m);
            let prev = &lower[m - 1];
            let cur = &mut upper[0];
            let block = prev.len();
            for j in 0..n {
                let z = phi.values[j];
                let dst = &mut cur[j * block..(j + 1) * block];
                for (o, p) in dst.iter_mut().zip(prev.iter()) {
                    *o = z * p;
                }
            }
            debug_assert_eq!(cur.len(), n.pow(m as u32) * d);
        }
        let phi2 = phi.norm_sqr();
        let v2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        out.dropped_norm_sqr = v2 * exponential_tail(phi2, space.trunc);
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.space.d
    }

    pub fn level_norm_sqr(&self, m: usize) -> f64 {
        self.space.level_weight(m) * self.levels[m].iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    /// `Σ_m (Δx^m/m!) ‖Ψ_m‖²`
    pub fn norm_sqr(&self) -> f64 {
        (0..self.levels.len()).map(|m| self.level_norm_sqr(m)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn inner(&self, other: &FockVector) -> C64 {
        let mut acc = c(0.0, 0.0);
        for m in 0..self.levels.len().min(other.levels.len()) {
            let s: C64 = self.levels[m].iter().zip(&other.levels[m]).map(|(a, b)| a.conj() * b).sum();
            acc += s * self.space.level_weight(m);
        }
        acc
    }

    /// `Σ_m ⟨u| (Δx^m/m!) ⟨Ψ_m|Φ_m⟩ |v⟩`-style partial inner product, as a `d×d` matrix:
    /// entry `(a, b)` pairs system component `a` of `self` with `b` of `other`.
    pub fn system_matrix_element(&self, other: &FockVector) -> crate::linalg::CMatrix {
        let d = self.space.d;
        let mut out = crate::linalg::CMatrix::zeros(d, d);
        for m in 0..self.levels.len().min(other.levels.len()) {
            let w = self.space.level_weight(m);
            let a_lvl = &self.levels[m];
            let b_lvl = &other.levels[m];
            for (ca, cb) in a_lvl.chunks(d).zip(b_lvl.chunks(d)) {
                for a in 0..d {
                    for b in 0..d {
                        out[(a, b)] += ca[a].conj() * cb[b] * w;
                    }
                }
            }
        }
        out
    }

    pub fn axpy(&mut self, alpha: C64, x: &FockVector) {
        for (ly, lx) in self.levels.iter_mut().zip(&x.levels) {
            for (y, xv) in ly.iter_mut().zip(lx) {
                *y += alpha * xv;
            }
        }
        self.dropped_norm_sqr += alpha.norm_sqr() * x.dropped_norm_sqr;
    }

    pub fn scale(&mut self, alpha: C64) {
        for l in &mut self.levels {
            for y in l.iter_mut() {
                *y *= alpha;
            }
        }
        self.dropped_norm_sqr *= alpha.norm_sqr();
    }

    pub fn scaled(&self, alpha: C64) -> FockVector {
        let mut out = self.clone();
        out.scale(alpha);
        out
    }

    pub fn sub(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        out.axpy(c(-1.0, 0.0), other);
        out
    }

    pub fn add(&self, other: &FockVector) -> FockVector {
        let mut out = self.clone();
        out.axpy(c(1.0, 0.0), other);
        out
    }

    /// Keeps levels `< m_max`, zeroing the rest.
    pub fn below(&self, m_max: usize) -> FockVector {
        let mut out = self.clone();
        for m in m_max..out.levels.len() {
            out.levels[m].iter_mut().for_each(|z| *z = c(0.0, 0.0));
        }
        out
    }

    /// Applies a system operator to the `ℂ^d` factor at every level.
    pub fn apply_system(&self, op: &crate::linalg::CMatrix) -> FockVector {
        let d = self.space.d;
        let mut out = FockVector::zeros(self.space);
        out.dropped_norm_sqr = self.dropped_norm_sqr * crate::linalg::spectral_norm(op).powi(2);
        for (lo, li) in out.levels.iter_mut().zip(&self.levels) {
            for (co, ci) in lo.chunks_mut(d).zip(li.chunks(d)) {
                for a in 0..d {
                    let mut acc = c(0.0, 0.0);
                    for b in 0..d {
                        acc += op[(a, b)] * ci[b];
                    }
                    co[a] = acc;
                }
            }
        }
        out
    }

    /// Largest exchange-asymmetry over all levels and slot transpositions.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.space.n();
        let d = self.space.d;
        let mut worst = 0.0f64;
        for m in 2..self.levels.len() {
            let lvl = &self.levels[m];
            let mut coords = vec![0usize; m];
            for idx in 0..lvl.len() {
                let a = unflatten(idx, m, n, d, &mut coords);
                for i in 0..m {
                    for j in i + 1..m {
                        coords.swap(i, j);
                        let other = flatten(&coords, a, n, d);
                        coords.swap(i, j);
                        worst = worst.max((lvl[idx] - lvl[other]).norm());
                    }
                }
            }
        }
        worst
    }

    /// Averages every level over slot permutations.
    pub fn symmetrized(&self) -> FockVector {
        let n = self.space.n();
        let d = self.space.d;
        let mut out = self.clone();
        for m in 2..self.levels.len() {
            let perms = permutations(m);
            let lvl = &self.levels[m];
            let dst = &mut out.levels[m];
            let mut coords = vec![0usize; m];
            let mut permuted = vec![0usize; m];
            for idx in 0..lvl.len() {
                let a = unflatten(idx, m, n, d, &mut coords);
                let mut acc = c(0.0, 0.0);
                for p in &perms {
                    for (slot, &src) in p.iter().enumerate() {
                        permuted[slot] = coords[src];
                    }
                    acc += lvl[flatten(&permuted, a, n, d)];
                }
                dst[idx] = acc / perms.len() as f64;
            }
        }
        out
    }

    /// Seeded random symmetric vector with weighted norm 1; levels `≥ top` are left empty.
    pub fn random_symmetric<R: Rng>(space: TruncatedFockSpace, rng: &mut R, top: usize) -> FockVector {
        let mut out = FockVector::zeros(space);
        for (m, lvl) in out.levels.iter_mut().enumerate() {
            if m >= top {
                break;
            }
            for z in lvl.iter_mut() {
                *z = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let mut out = out.symmetrized();
        let nrm = out.norm();
        if nrm > 0.0 {
            out.scale(c(1.0 / nrm, 0.0));
        }
        out
    }

    /// `Θ_t`: every slot shifted, `(θ_t f)(x) = f(x + t)`, for grid-aligned `t`.
    pub fn shifted(&self, t: f64) -> Result<FockVector> {
        let grid = self.space.grid;
        let steps = grid.steps(t)?;
        let n = self.space.n();
        let d = self.space.d;
        let mut out = FockVector::zeros(self.space);
        out.dropped_norm_sqr = self.dropped_norm_sqr;
        out.levels[0].copy_from_slice(&self.levels[0]);
        for m in 1..self.levels.len() {
            let lvl = &self.levels[m];
            let dst = &mut out.levels[m];
            let mut coords = vec![0usize; m];
            for idx in 0..lvl.len() {
                let a = unflatten(idx, m, n, d, &mut coords);
                for cdx in coords.iter_mut() {
                    *cdx = grid.wrap(*cdx as isize + steps);
                }
                dst[idx] = lvl[flatten(&coords, a, n, d)];
            }
        }
        Ok(out)
    }

    /// Level-0 system vector.
    pub fn vacuum_component(&self) -> CVector {
        CVector::from_column_slice(&self.levels[0])
    }
}

/// `Σ_{m > M} x^m / m!`, summed stably.
pub fn exponential_tail(x: f64, trunc: usize) -> f64 {
    let mut term = 1.0;
    let mut head = 0.0;
    for m in 0..=trunc {
        if m > 0 {
            term *= x / m as f64;
        }
        head += term;
    }
    let tail = x.exp() - head;
    if tail.abs() < 1e-3 * x.exp() {
        // direct series avoids cancellation for small x
        let mut t = term;
        let mut acc = 0.0;
        for m in trunc + 1..trunc + 60 {
            t *= x / m as f64;
            acc += t;
            if t < 1e-18 * acc {
                break;
            }
        }
        acc
    } else {
        tail
    }
}

pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}
