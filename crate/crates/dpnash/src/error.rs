use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// `line` and `column` are 1-based; column 0 means the whole line.
    #[error("{origin}:{line}:{column}: {message}")]
    Parse {
        origin: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] dpnash_core::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(origin: &str, e: serde_json::Error) -> Self {
        Self::Parse {
            origin: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }

    /// True for problems with the inputs rather than with execution.
    pub fn is_validation(&self) -> bool {
        match self {
            Self::Parse { .. } | Self::UnknownPreset(_) | Self::Invalid(_) => true,
            Self::Core(e) => !matches!(
                e,
                dpnash_core::Error::WeightUnderflow { .. }
                    | dpnash_core::Error::OracleFailure { .. }
            ),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
