//! Lanczos propagation of `e^{−iτH}` for operators Hermitian in the weighted
//! Fock inner product.

use nalgebra::{DMatrix, SymmetricEigen};

use super::operators::SecondQuantizedHamiltonian;
use super::space::FockVector;
use crate::error::{Error, Result};
use crate::linalg::{c, C64};

pub trait FockOperator {
    fn apply(&self, psi: &FockVector) -> FockVector;
    /// Norm of the part of `Hψ` that leaves the truncated space.
    fn leakage(&self, _psi: &FockVector) -> f64 {
        0.0
    }
}

impl FockOperator for SecondQuantizedHamiltonian {
    fn apply(&self, psi: &FockVector) -> FockVector {
        SecondQuantizedHamiltonian::apply(self, psi)
    }
    fn leakage(&self, psi: &FockVector) -> f64 {
        SecondQuantizedHamiltonian::leakage(self, psi)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    pub max_dim: usize,
    /// Local error target relative to `‖ψ‖`.
    pub tol: f64,
    pub min_step: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        KrylovOptions {
            max_dim: 30,
            tol: 1e-11,
            min_step: 1e-9,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct KrylovStats {
    pub substeps: usize,
    pub rejected: usize,
    pub error_estimate: f64,
    /// `∫ ‖(1 − P)HPψ(s)‖ ds` by the left-endpoint rule.
    pub leakage_integral: f64,
}

struct LanczosBasis {
    vectors: Vec<FockVector>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// residual coupling out of the basis; zero on exact breakdown
    tail: f64,
}

fn lanczos<H: FockOperator + ?Sized>(h: &H, psi: &FockVector, max_dim: usize) -> Result<LanczosBasis> {
    let norm = psi.norm();
    let mut v0 = psi.scaled(c(1.0 / norm, 0.0));
    v0.dropped_norm_sqr = 0.0;
    let mut vectors = vec![v0];
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    let scale = norm.max(1.0);
    loop {
        let j = vectors.len() - 1;
        let mut w = h.apply(&vectors[j]);
        let a = w.inner(&vectors[j]);
        if a.im.abs() > 1e-8 * a.norm().max(1.0) {
            return Err(Error::Lanczos(format!("operator is not Hermitian: Im⟨v, Hv⟩ = {:.3e}", a.im)));
        }
        alpha.push(a.re);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for v in &vectors {
                let p = v.inner(&w);
                w.axpy(-p, v);
            }
        }
        let b = w.norm();
        if !b.is_finite() {
            return Err(Error::Lanczos("non-finite Krylov vector".into()));
        }
        if b < 1e-13 * scale || vectors.len() == max_dim {
            let tail = if b < 1e-13 * scale { 0.0 } else { b };
            return Ok(LanczosBasis {
                vectors,
                alpha,
                beta,
                tail,
            });
        }
        beta.push(b);
        w.scale(c(1.0 / b, 0.0));
        w.dropped_norm_sqr = 0.0;
        vectors.push(w);
    }
}

/// `exp(−iτT) e₁` for the real symmetric tridiagonal `T`.
fn tridiagonal_exp_first_column(alpha: &[f64], beta: &[f64], tau: f64) -> Vec<C64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|r| {
            (0..m)
                .map(|q| {
                    let phase = C64::from_polar(1.0, -tau * eig.eigenvalues[q]);
                    phase * eig.eigenvectors[(r, q)] * eig.eigenvectors[(0, q)]
                })
                .sum()
        })
        .collect()
}

/// `ψ(t) = e^{−itH}ψ` with adaptive substeps; `t` may be negative.
pub fn krylov_propagate<H: FockOperator + ?Sized>(
    h: &H,
    psi: &FockVector,
    t: f64,
    opts: KrylovOptions,
) -> Result<(FockVector, KrylovStats)> {
    let mut stats = KrylovStats::default();
    let mut state = psi.clone();
    let norm0 = psi.norm();
    if norm0 == 0.0 || t == 0.0 {
        return Ok((state, stats));
    }
    let sign = t.signum();
    let mut remaining = t.abs();
    let mut step = remaining;
    while remaining > 0.0 {
        let basis = lanczos(h, &state, opts.max_dim)?;
        let norm = state.norm();
        loop {
            let tau = step.min(remaining);
            let col = tridiagonal_exp_first_column(&basis.alpha, &basis.beta, sign * tau);
            let err = basis.tail * col.last().map_or(0.0, |z| z.norm()) * norm;
            if err <= opts.tol * norm0 || basis.tail == 0.0 {
                stats.leakage_integral += tau * h.leakage(&state);
                let dropped = state.dropped_norm_sqr;
                let mut next = FockVector::zeros(state.space);
                for (v, z) in basis.vectors.iter().zip(&col) {
                    next.axpy(*z * norm, v);
                }
                next.dropped_norm_sqr = dropped;
                state = next;
                stats.substeps += 1;
                stats.error_estimate += err;
                remaining -= tau;
                if remaining < 1e-15 * t.abs() {
                    remaining = 0.0;
                }
                if err < 0.1 * opts.tol * norm0 {
                    step = tau * 2.0;
                } else {
                    step = tau;
                }
                break;
            }
            stats.rejected += 1;
            step = tau / 2.0;
            if step < opts.min_step {
                return Err(Error::StepUnderflow { t: t - sign * remaining, h: step });
            }
        }
    }
    Ok((state, stats))
}
