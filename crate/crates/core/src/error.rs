use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("split error: {0}")]
    Split(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("degenerate confidence: no cell claims the input (max confidence {max_confidence:e})")]
    DegenerateConfidence { max_confidence: f64 },

    #[error("unsupported query {query}: {reason}")]
    UnsupportedQuery { query: String, reason: String },

    #[error("ratio undefined: {0}")]
    RatioUndefined(String),

    #[error("training diverged at epoch {epoch}, batch {batch}: {message}")]
    Training {
        epoch: usize,
        batch: usize,
        message: String,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag, used by the CLI's single-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Numeric(_) => "numeric",
            Error::InsufficientData(_) => "insufficient-data",
            Error::Split(_) => "split",
            Error::Config(_) => "config",
            Error::Parse { .. } => "parse",
            Error::Format(_) => "format",
            Error::DegenerateConfidence { .. } => "degenerate-confidence",
            Error::UnsupportedQuery { .. } => "unsupported-query",
            Error::RatioUndefined(_) => "ratio-undefined",
            Error::Training { .. } => "training",
            Error::Checkpoint(_) => "checkpoint",
            Error::Io { .. } => "io",
        }
    }
}
