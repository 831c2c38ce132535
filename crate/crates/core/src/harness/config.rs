//! JSON experiment configuration. Unknown keys are rejected.

use std::fmt;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::linalg::{parse_complex, CMatrix, C64};
use crate::slh::EMatrix;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentId {
    Slh,
    FirstQuantized,
    GraphRate,
    Lemma7Rate,
    FockIdentities,
    PseudoRate,
    WeakConvergence,
    Cocycle,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 8] = [
        ExperimentId::Slh,
        ExperimentId::FirstQuantized,
        ExperimentId::GraphRate,
        ExperimentId::Lemma7Rate,
        ExperimentId::FockIdentities,
        ExperimentId::PseudoRate,
        ExperimentId::WeakConvergence,
        ExperimentId::Cocycle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Slh => "slh",
            ExperimentId::FirstQuantized => "first-quantized",
            ExperimentId::GraphRate => "graph-rate",
            ExperimentId::Lemma7Rate => "lemma7-rate",
            ExperimentId::FockIdentities => "fock-identities",
            ExperimentId::PseudoRate => "pseudo-rate",
            ExperimentId::WeakConvergence => "weak-convergence",
            ExperimentId::Cocycle => "cocycle",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == text)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{text}'")))
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A complex number written as a JSON number or a string such as `"0.5-1i"`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexLiteral {
    Real(f64),
    Text(String),
}

impl ComplexLiteral {
    pub fn value(&self) -> Result<C64> {
        match self {
            ComplexLiteral::Real(x) => Ok(C64::new(*x, 0.0)),
            ComplexLiteral::Text(s) => parse_complex(s).map_err(|e| Error::Config(e.to_string())),
        }
    }
}

/// A scalar (`d = 1`) or a square matrix given as rows.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum MatrixLiteral {
    Scalar(ComplexLiteral),
    Rows(Vec<Vec<ComplexLiteral>>),
}

impl MatrixLiteral {
    pub fn matrix(&self) -> Result<CMatrix> {
        match self {
            MatrixLiteral::Scalar(z) => Ok(CMatrix::from_element(1, 1, z.value()?)),
            MatrixLiteral::Rows(rows) => {
                let d = rows.len();
                if d == 0 || rows.iter().any(|r| r.len() != d) {
                    return Err(Error::Config("matrix literal must be a non-empty square array".into()));
                }
                let mut m = CMatrix::zeros(d, d);
                for (i, r) in rows.iter().enumerate() {
                    for (j, z) in r.iter().enumerate() {
                        m[(i, j)] = z.value()?;
                    }
                }
                Ok(m)
            }
        }
    }
}

fn zero_literal() -> MatrixLiteral {
    MatrixLiteral::Scalar(ComplexLiteral::Real(0.0))
}

/// Stratonovich coefficients; defaults to the benchmark `E₁₁ = 2, E₁₀ = E₀₁ = 1, E₀₀ = 0`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub e11: MatrixLiteral,
    pub e10: MatrixLiteral,
    pub e01: MatrixLiteral,
    #[serde(default = "zero_literal")]
    pub e00: MatrixLiteral,
    /// Replaces the triple derived from `E` where a boundary condition is built.
    #[serde(default)]
    pub overrides: Option<TripleOverrides>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            e11: MatrixLiteral::Scalar(ComplexLiteral::Real(2.0)),
            e10: MatrixLiteral::Scalar(ComplexLiteral::Real(1.0)),
            e01: MatrixLiteral::Scalar(ComplexLiteral::Real(1.0)),
            e00: zero_literal(),
            overrides: None,
        }
    }
}

impl ModelConfig {
    pub fn e_matrix(&self) -> Result<EMatrix> {
        let e = EMatrix::new(self.e00.matrix()?, self.e01.matrix()?, self.e10.matrix()?, self.e11.matrix()?);
        e.map_err(|err| Error::Config(format!("model: {err}")))
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TripleOverrides {
    pub s: Option<MatrixLiteral>,
    pub l: Option<MatrixLiteral>,
    pub h: Option<MatrixLiteral>,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    #[serde(default = "one")]
    pub halfwidth: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default)]
    pub omega: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            halfwidth: 1.0,
            center: 0.0,
            omega: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_length: f64,
    pub n: usize,
}

/// A peak-normalized bump rescaled to `norm` (for test functions) or to
/// peak `amplitude` (for profiles).
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpConfig {
    pub center: f64,
    pub halfwidth: f64,
    #[serde(default)]
    pub norm: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionsConfig {
    pub phi: BumpConfig,
    pub psi: BumpConfig,
}

/// Local data of the pseudo-exponential vectors: `v = (v₀ + v₁x)·plateau`, and
/// `u = (1 + u₁x)·plateau` on `x < 0`, zero on `x > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PseudoConfig {
    pub v_offset: f64,
    pub v_slope: f64,
    pub u_slope: f64,
    pub plateau: f64,
    pub ramp: f64,
    #[serde(default = "one")]
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: ExperimentId,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub kernel: KernelConfig,
    /// Second kernel, used where a modulated kernel is exercised.
    #[serde(default)]
    pub modulated_kernel: Option<KernelConfig>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default)]
    pub k: Option<Vec<f64>>,
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub time_stride: Option<usize>,
    #[serde(default)]
    pub domain_function: Option<BumpConfig>,
    /// Scattering used for the violated-boundary control; identity by default.
    #[serde(default)]
    pub control_scattering: Option<MatrixLiteral>,
    #[serde(default)]
    pub test_functions: Option<TestFunctionsConfig>,
    #[serde(default)]
    pub pseudo: Option<PseudoConfig>,
    #[serde(default)]
    pub random_count: Option<usize>,
    #[serde(default)]
    pub random_dim: Option<usize>,
    /// Error-control tolerance of the matrix-element oracle (cocycle only).
    #[serde(default)]
    pub tolerance: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_json(&text)
    }

    /// Minimal config for `experiment` with every optional field at its default.
    pub fn with_defaults(experiment: ExperimentId) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            experiment,
            seed: 0,
            model: ModelConfig::default(),
            kernel: KernelConfig::default(),
            modulated_kernel: None,
            grid: None,
            truncation: None,
            k: None,
            times: None,
            horizon: None,
            time_stride: None,
            domain_function: None,
            control_scattering: None,
            test_functions: None,
            pseudo: None,
            random_count: None,
            random_dim: None,
            tolerance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if let Some(ks) = &self.k {
            if ks.is_empty() {
                return Err(Error::Config("k list is empty".into()));
            }
            if ks.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
                return Err(Error::Config("k values must be positive".into()));
            }
        }
        if let Some(ts) = &self.times {
            if ts.is_empty() || ts.iter().any(|t| !t.is_finite()) {
                return Err(Error::Config("times must be a non-empty list of finite values".into()));
            }
        }
        if let Some(g) = &self.grid {
            if g.n < 4 || g.n % 2 != 0 || !(g.half_length > 0.0) {
                return Err(Error::Config("grid needs an even n ≥ 4 and a positive half_length".into()));
            }
        }
        for kc in std::iter::once(&self.kernel).chain(self.modulated_kernel.iter()) {
            if !(kc.halfwidth > 0.0) {
                return Err(Error::Config("kernel halfwidth must be positive".into()));
            }
        }
        if let Some(tol) = self.tolerance {
            if self.experiment != ExperimentId::Cocycle {
                return Err(Error::Config("tolerance applies only to the cocycle experiment".into()));
            }
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(Error::Config("tolerance must be positive".into()));
            }
        }
        self.model.e_matrix()?;
        Ok(())
    }

    pub fn k_list(&self, default: &[f64]) -> Vec<f64> {
        self.k.clone().unwrap_or_else(|| default.to_vec())
    }
}
