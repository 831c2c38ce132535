//! Itō calculus algebra for a single input channel: the product table of the
//! fundamental differentials, the Stratonovich to Itō coefficient solve, and
//! the (S, L, H) parametrization of unitary coefficient matrices.

use std::fmt;

use log::warn;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{c, ensure_square, frobenius, hermiticity_defect, identity, inverse, solve_right, spectral_norm, CMatrix, C64, I};
use crate::mollifier::KappaPair;

/// Operators on the system space are plain dense matrices.
pub type SystemOperator = CMatrix;

/// The four fundamental differentials `dΛ^{αβ}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Differential {
    /// `dΛ^{00} = dt`
    Time,
    /// `dΛ^{01} = dA`
    Annihilation,
    /// `dΛ^{10} = dA†`
    Creation,
    /// `dΛ^{11} = dΛ`
    Gauge,
}

impl Differential {
    pub const ALL: [Differential; 4] = [
        Differential::Time,
        Differential::Annihilation,
        Differential::Creation,
        Differential::Gauge,
    ];

    pub fn indices(self) -> (usize, usize) {
        match self {
            Differential::Time => (0, 0),
            Differential::Annihilation => (0, 1),
            Differential::Creation => (1, 0),
            Differential::Gauge => (1, 1),
        }
    }

    pub fn from_indices(alpha: usize, beta: usize) -> Option<Self> {
        match (alpha, beta) {
            (0, 0) => Some(Differential::Time),
            (0, 1) => Some(Differential::Annihilation),
            (1, 0) => Some(Differential::Creation),
            (1, 1) => Some(Differential::Gauge),
            _ => None,
        }
    }
}

impl fmt::Display for Differential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Differential::Time => "dt",
            Differential::Annihilation => "dA",
            Differential::Creation => "dA†",
            Differential::Gauge => "dΛ",
        };
        f.write_str(s)
    }
}

/// `coeff · dΛ^{alpha beta}`
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ItoMonomial {
    pub alpha: usize,
    pub beta: usize,
    pub coeff: C64,
}

impl ItoMonomial {
    pub fn new(alpha: usize, beta: usize, coeff: C64) -> Result<Self> {
        if alpha > 1 || beta > 1 {
            return Err(Error::InvalidArgument(format!("Itō indices ({alpha}, {beta}) out of range")));
        }
        Ok(ItoMonomial { alpha, beta, coeff })
    }

    pub fn unit(d: Differential) -> Self {
        let (alpha, beta) = d.indices();
        ItoMonomial {
            alpha,
            beta,
            coeff: c(1.0, 0.0),
        }
    }

    pub fn differential(&self) -> Differential {
        Differential::from_indices(self.alpha, self.beta).expect("indices validated at construction")
    }
}

/// `dΛ^{αβ} dΛ^{μν} = δ̂_{βμ} dΛ^{αν}`, where `δ̂` is 1 only for `β = μ = 1`.
pub fn ito_product(a: ItoMonomial, b: ItoMonomial) -> Option<ItoMonomial> {
    if a.beta == 1 && b.alpha == 1 {
        Some(ItoMonomial {
            alpha: a.alpha,
            beta: b.beta,
            coeff: a.coeff * b.coeff,
        })
    } else {
        None
    }
}

/// Product of an optional monomial with another, zero absorbing.
pub fn ito_product_opt(a: Option<ItoMonomial>, b: Option<ItoMonomial>) -> Option<ItoMonomial> {
    match (a, b) {
        (Some(x), Some(y)) => ito_product(x, y),
        _ => None,
    }
}

/// A 2×2 block operator matrix over the system space, indexed by `{0, 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Blocks {
    pub b00: SystemOperator,
    pub b01: SystemOperator,
    pub b10: SystemOperator,
    pub b11: SystemOperator,
}

impl Blocks {
    pub fn zeros(d: usize) -> Self {
        let z = CMatrix::zeros(d, d);
        Blocks {
            b00: z.clone(),
            b01: z.clone(),
            b10: z.clone(),
            b11: z,
        }
    }

    pub fn dim(&self) -> usize {
        self.b00.nrows()
    }

    pub fn get(&self, alpha: usize, beta: usize) -> &SystemOperator {
        match (alpha, beta) {
            (0, 0) => &self.b00,
            (0, 1) => &self.b01,
            (1, 0) => &self.b10,
            _ => &self.b11,
        }
    }

    fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidArgument("system dimension must be positive".into()));
        }
        for m in [&self.b00, &self.b01, &self.b10, &self.b11] {
            ensure_square(m, d)?;
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument("non-finite operator entry".into()));
            }
        }
        Ok(())
    }

    /// Assembles the `2d × 2d` matrix.
    pub fn to_matrix(&self) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (d, d)).copy_from(&self.b00);
        m.view_mut((0, d), (d, d)).copy_from(&self.b01);
        m.view_mut((d, 0), (d, d)).copy_from(&self.b10);
        m.view_mut((d, d), (d, d)).copy_from(&self.b11);
        m
    }

    pub fn from_matrix(m: &CMatrix) -> Self {
        let d = m.nrows() / 2;
        Blocks {
            b00: m.view((0, 0), (d, d)).into_owned(),
            b01: m.view((0, d), (d, d)).into_owned(),
            b10: m.view((d, 0), (d, d)).into_owned(),
            b11: m.view((d, d), (d, d)).into_owned(),
        }
    }

    /// Largest Frobenius block distance.
    pub fn max_block_diff(&self, other: &Blocks) -> f64 {
        (0..2)
            .flat_map(|a| (0..2).map(move |b| (a, b)))
            .map(|(a, b)| frobenius(&(self.get(a, b) - other.get(a, b))))
            .fold(0.0, f64::max)
    }
}

/// Block-Hermitian coupling matrix `E_{αβ}` with `E_{αβ}† = E_{βα}`.
#[derive(Clone, Debug, PartialEq)]
pub struct EMatrix {
    pub blocks: Blocks,
    /// Whether `‖E₁₁‖₂ < 2`, the regime where the resolvent is guaranteed.
    pub small_scattering: bool,
}

impl EMatrix {
    pub fn new(e00: SystemOperator, e01: SystemOperator, e10: SystemOperator, e11: SystemOperator) -> Result<Self> {
        let blocks = Blocks {
            b00: e00,
            b01: e01,
            b10: e10,
            b11: e11,
        };
        blocks.validate()?;
        let scale = blocks.to_matrix().iter().map(|z| z.norm()).fold(1.0, f64::max);
        let tol = 1e-12 * scale;
        if hermiticity_defect(&blocks.b00) > tol
            || hermiticity_defect(&blocks.b11) > tol
            || frobenius(&(&blocks.b01 - blocks.b10.adjoint())) > tol
        {
            return Err(Error::InvalidArgument("E must be block-Hermitian (E_ab† = E_ba)".into()));
        }
        let small_scattering = spectral_norm(&blocks.b11) < 2.0;
        Ok(EMatrix {
            blocks,
            small_scattering,
        })
    }

    /// Scalar (d = 1) constructor.
    pub fn scalar(e11: C64, e10: C64, e01: C64, e00: C64) -> Result<Self> {
        let m = |z: C64| CMatrix::from_element(1, 1, z);
        EMatrix::new(m(e00), m(e01), m(e10), m(e11))
    }

    pub fn zeros(d: usize) -> Self {
        EMatrix {
            blocks: Blocks::zeros(d),
            small_scattering: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.blocks.dim()
    }

    pub fn e00(&self) -> &SystemOperator {
        &self.blocks.b00
    }
    pub fn e01(&self) -> &SystemOperator {
        &self.blocks.b01
    }
    pub fn e10(&self) -> &SystemOperator {
        &self.blocks.b10
    }
    pub fn e11(&self) -> &SystemOperator {
        &self.blocks.b11
    }
}

/// Random block-Hermitian `E` with `‖E₁₁‖₂` drawn uniformly below `e11_bound`.
pub fn random_e_matrix<R: Rng>(rng: &mut R, d: usize, e11_bound: f64) -> EMatrix {
    let gen = |rng: &mut R| CMatrix::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let a = gen(rng);
    let e00 = (&a + a.adjoint()) * c(0.5, 0.0);
    let b = gen(rng);
    let mut e11 = (&b + b.adjoint()) * c(0.5, 0.0);
    let target = rng.gen_range(0.0..e11_bound);
    let n = spectral_norm(&e11);
    if n > 0.0 {
        e11 *= c(target / n, 0.0);
    }
    let e10 = gen(rng);
    let e01 = e10.adjoint();
    EMatrix::new(e00, e01, e10, e11).expect("constructed block-Hermitian")
}

/// Coefficient matrix `G_{αβ}` of the quantum stochastic differential equation.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    pub blocks: Blocks,
}

impl CoefficientMatrix {
    pub fn zeros(d: usize) -> Self {
        CoefficientMatrix { blocks: Blocks::zeros(d) }
    }
    pub fn dim(&self) -> usize {
        self.blocks.dim()
    }
    pub fn g00(&self) -> &SystemOperator {
        &self.blocks.b00
    }
    pub fn g01(&self) -> &SystemOperator {
        &self.blocks.b01
    }
    pub fn g10(&self) -> &SystemOperator {
        &self.blocks.b10
    }
    pub fn g11(&self) -> &SystemOperator {
        &self.blocks.b11
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SLHTriple {
    pub s: SystemOperator,
    pub l: SystemOperator,
    pub h: SystemOperator,
}

impl SLHTriple {
    pub fn new(s: SystemOperator, l: SystemOperator, h: SystemOperator) -> Result<Self> {
        let d = s.nrows();
        ensure_square(&s, d)?;
        ensure_square(&l, d)?;
        ensure_square(&h, d)?;
        Ok(SLHTriple { s, l, h })
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }
}

fn warn_large_scattering(e11: &SystemOperator) {
    let n = spectral_norm(e11);
    if n >= 2.0 {
        warn!("‖E11‖ = {n:.4} ≥ 2: the resolvent of I + (i/2)E11 is not guaranteed");
    }
}

/// Solves `G = −iE − (i/2) G diag(0, I) E`, i.e. `G (I + (i/2) diag(0, I) E) = −iE`.
pub fn solve_stratonovich_to_ito(e: &EMatrix) -> Result<CoefficientMatrix> {
    warn_large_scattering(e.e11());
    let d = e.dim();
    let em = e.blocks.to_matrix();
    let mut projector = CMatrix::zeros(2 * d, 2 * d);
    for j in d..2 * d {
        projector[(j, j)] = c(1.0, 0.0);
    }
    let system = identity(2 * d) + projector * &em * (I * 0.5);
    let rhs = em * (-I);
    let g = solve_right(&system, &rhs, "I + (i/2)E11")?;
    Ok(CoefficientMatrix {
        blocks: Blocks::from_matrix(&g),
    })
}

/// `S = G₁₁ + I`, `L = G₁₀`, `H = i(G₀₀ + ½L†L)`.
pub fn slh_from_e(e: &EMatrix) -> Result<SLHTriple> {
    let g = solve_stratonovich_to_ito(e)?;
    let d = e.dim();
    let s = g.g11() + identity(d);
    let l = g.g10().clone();
    let h = (g.g00() + l.adjoint() * &l * c(0.5, 0.0)) * I;
    SLHTriple::new(s, l, h)
}

/// `G₀₀ = −½L†L − iH`, `G₀₁ = −L†S`, `G₁₀ = L`, `G₁₁ = S − I`.
pub fn coefficient_matrix_from_slh(t: &SLHTriple) -> CoefficientMatrix {
    let d = t.dim();
    let ldag = t.l.adjoint();
    CoefficientMatrix {
        blocks: Blocks {
            b00: &ldag * &t.l * c(-0.5, 0.0) - &t.h * I,
            b01: -(&ldag * &t.s),
            b10: t.l.clone(),
            b11: &t.s - identity(d),
        },
    }
}

/// Residuals of the two unitarity identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitarityReport {
    /// `max ‖G_{αβ} + G_{βα}† + G_{1α}†G_{1β}‖`
    pub isometry: f64,
    /// `max ‖G_{αβ} + G_{βα}† + G_{α1}G_{β1}†‖`
    pub co_isometry: f64,
}

impl UnitarityReport {
    pub fn max(&self) -> f64 {
        self.isometry.max(self.co_isometry)
    }
}

pub fn check_unitarity(g: &CoefficientMatrix) -> UnitarityReport {
    let b = &g.blocks;
    let mut iso = 0.0f64;
    let mut co = 0.0f64;
    for alpha in 0..2 {
        for beta in 0..2 {
            let base = b.get(alpha, beta) + b.get(beta, alpha).adjoint();
            let r1 = &base + b.get(1, alpha).adjoint() * b.get(1, beta);
            let r2 = &base + b.get(alpha, 1) * b.get(beta, 1).adjoint();
            iso = iso.max(frobenius(&r1));
            co = co.max(frobenius(&r2));
        }
    }
    UnitarityReport {
        isometry: iso,
        co_isometry: co,
    }
}

/// `S = (I − iκ₋E)(I + iκ₊E)^{-1}`.
pub fn scattering_from_kappa(e: &SystemOperator, kappa: &KappaPair) -> Result<SystemOperator> {
    let d = e.nrows();
    ensure_square(e, d)?;
    let id = identity(d);
    let num = &id - e * (I * kappa.kappa_minus);
    let den = &id + e * (I * kappa.kappa_plus);
    Ok(num * inverse(&den, "I + iκ₊E")?)
}
