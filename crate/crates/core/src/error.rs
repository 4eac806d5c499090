use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed parameters: {0}")]
    Malformed(String),

    #[error("parameters violate structural constraints: {0}")]
    Invalid(String),

    #[error("component index {index} out of range for p = {p}")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("pair ({i}, {j}) has H_i + H_j = 1; its eta coefficient is already the tilde form")]
    UnitSumPair { i: usize, j: usize },

    #[error("increment size must be positive, got {0}")]
    NonPositiveDelta(f64),

    #[error("spectral density is not defined at omega = 0")]
    ZeroFrequency,

    #[error("coherence needs two distinct components, got i = j = {0}")]
    SameComponent(usize),

    #[error("Hurst exponent {0} is outside (0, 1)")]
    HurstOutOfRange(f64),

    #[error(
        "parameters do not define an mfBm covariance: Q is not positive semidefinite \
         (minimum eigenvalue {min_eigenvalue:.3e})"
    )]
    NotAdmissible { min_eigenvalue: f64 },

    #[error("H_{index} = 1/2 has no (M+, M-) moving-average representation")]
    HalfHurst { index: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("negative circulant eigenvalue {value:.3e} at frequency {k} (m = {m})")]
    NegativeEigenvalue { value: f64, k: usize, m: usize },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("residual imaginary part {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ImaginaryResidual { residual: f64, tolerance: f64 },

    #[error("invalid kernel specification: {0}")]
    InvalidKernel(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
