use magnon_core::MagnonError;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, ExpError>;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("invalid configuration `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("could not parse config: {0}")]
    Parse(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Core(#[from] MagnonError),
}

impl ExpError {
    pub fn kind(&self) -> &'static str {
        match self {
            ExpError::Config { .. } => "config",
            ExpError::Parse(_) => "parse",
            ExpError::Io { .. } => "io",
            ExpError::Fit(_) => "fit",
            ExpError::Core(e) => e.kind(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        ExpError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }
}
