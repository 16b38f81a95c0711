use thiserror::Error;

/// Errors raised by model construction, spectral evaluation and experiments.
#[derive(Debug, Error)]
pub enum LqgError {
    #[error("even dimension required (got {0})")]
    OddDimension(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("not admissible: {0}")]
    NotAdmissible(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("subcritical range (-√(2n), √(2n)) required: |γ| = {gamma} ≥ {bound}")]
    Supercritical { gamma: f64, bound: f64 },

    #[error("finiteness gate violated: {0}")]
    GateViolated(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LqgError> = std::result::Result<T, E>;
