use std::path::PathBuf;

use thiserror::Error;

use crate::harness::Diagnostic;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("vector of length {len} exceeds bank rows {rows}")]
    BankOverflow { len: usize, rows: usize },

    #[error("shape mismatch in {context}: {left:?} vs {right:?}")]
    ShapeMismatch {
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("unknown event kind `{0}`")]
    UnknownEventKind(String),

    #[error("no cost entry for event kind `{0}`")]
    MissingCost(&'static str),

    #[error("unsupported {what}: {name}")]
    Unsupported { what: &'static str, name: String },

    #[error("invalid configuration:{}", format_diagnostics(.0))]
    InvalidConfig(Vec<Diagnostic>),
}

fn format_diagnostics(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("\n  {d}")).collect()
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidConfig(vec![Diagnostic::new(field, message)])
    }
}

pub type Result<T> = std::result::Result<T, Error>;
