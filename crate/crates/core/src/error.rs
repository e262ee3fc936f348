use thiserror::Error;

pub type Result<T> = std::result::Result<T, MagnonError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MagnonError {
    /// A configuration value is outside its allowed range.
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Numerically invalid input (non-finite values, degenerate geometry).
    #[error("validation error: {0}")]
    Validation(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {message} (achieved residual {residual:e})")]
    Numeric { message: String, residual: f64 },

    #[error("unbound: {0}")]
    Unbound(String),

    #[error("insufficient overlap support: window populations {pop_a:.3e} and {pop_b:.3e} (need >= 0.5)")]
    InsufficientOverlap { pop_a: f64, pop_b: f64 },

    #[error("inconclusive scattering run: {0}")]
    InconclusiveScattering(String),
}

impl MagnonError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        MagnonError::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Short machine-readable tag, used in CLI error records.
    pub fn kind(&self) -> &'static str {
        match self {
            MagnonError::Config { .. } => "config",
            MagnonError::DimensionMismatch { .. } => "dimension_mismatch",
            MagnonError::Validation(_) => "validation",
            MagnonError::Domain(_) => "domain",
            MagnonError::Numeric { .. } => "numeric",
            MagnonError::Unbound(_) => "unbound",
            MagnonError::InsufficientOverlap { .. } => "insufficient_overlap",
            MagnonError::InconclusiveScattering(_) => "inconclusive_scattering",
        }
    }
}
