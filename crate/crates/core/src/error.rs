use thiserror::Error;

/// Failures raised by the numerical pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular system: {0}")]
    Singular(String),

    #[error("kernel normalization failed: |integral| = {0:e} is below 1e-12")]
    Normalization(f64),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("kernel support [{lo}, {hi}] does not fit inside the periodic grid (-{half_length}, {half_length})")]
    SupportTooWide { lo: f64, hi: f64, half_length: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("time {t} is not a multiple of the grid spacing {dx}")]
    GridAlignment { t: f64, dx: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("Lanczos iteration failed: {0}")]
    Lanczos(String),

    #[error("ODE step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("boundary condition violated: residual {0:e}")]
    BoundaryViolation(f64),

    #[error("truncation budget exceeded: dropped fraction {dropped:.4} > {budget:.4}")]
    TruncationBudget { dropped: f64, budget: f64 },

    #[error("Fock space too large: {dim} amplitudes exceeds budget {budget}")]
    FockBudget { dim: usize, budget: usize },

    #[error("rate fit needs at least 3 strictly positive points, got {0}")]
    InsufficientData(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> u8 {
        match self {
            // inputs that fail a resolution or budget check before any numerics run
            Error::Config(_)
            | Error::InvalidArgument(_)
            | Error::SupportTooWide { .. }
            | Error::FockBudget { .. }
            | Error::TruncationBudget { .. }
            | Error::GridAlignment { .. } => 2,
            Error::Io(_) => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
