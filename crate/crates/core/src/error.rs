use thiserror::Error;

/// Errors raised across the crate. Variant names double as the
/// machine-readable error name surfaced by the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular gram matrix (condition estimate {condition:e})")]
    SingularGram { condition: f64 },

    #[error("bias-compensation correction matrix is singular (condition estimate {condition:e}); inputs too weak relative to the observation noise")]
    CorrectionSingular { condition: f64 },

    #[error("matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("system matrix is not stable (spectral radius {spectral_radius})")]
    Unstable { spectral_radius: f64 },

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),

    #[error("trajectory does not carry noise realizations; simulate with noise recording enabled")]
    NoiseNotRecorded,

    #[error("sample size T = {horizon} is below the required threshold {threshold:e}")]
    BelowThreshold { horizon: usize, threshold: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("empty plot: no successful records to summarize")]
    EmptyPlot,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short stable identifier for the variant.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::DimensionMismatch(_) => "dimension-mismatch",
            Error::SingularGram { .. } => "singular-gram",
            Error::CorrectionSingular { .. } => "correction-singular",
            Error::NotPsd { .. } => "not-psd",
            Error::Unstable { .. } => "unstable",
            Error::NotApplicable(_) => "not-applicable",
            Error::InvalidHorizon(_) => "invalid-horizon",
            Error::NoiseNotRecorded => "noise-not-recorded",
            Error::BelowThreshold { .. } => "below-threshold",
            Error::Precondition(_) => "precondition",
            Error::InvalidConfig(_) => "invalid-config",
            Error::EmptyPlot => "empty-plot",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
