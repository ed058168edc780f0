use std::path::PathBuf;

use bslab::LabError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    /// A value violates a documented invariant; `key` is the dotted config path.
    #[error("{key}: {invariant}")]
    Constraint { key: String, invariant: String },

    #[error("unknown configuration keys (strict mode): {}", .0.join(", "))]
    UnknownKeys(Vec<String>),

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("replay mismatch: {}", .0.join("; "))]
    Mismatch(Vec<String>),

    #[error(transparent)]
    Lab(#[from] LabError),
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Constraint { .. } | CliError::UnknownKeys(_) | CliError::Usage(_) => 2,
            CliError::Io { .. } => 7,
            CliError::Mismatch(_) => 8,
            CliError::Lab(e) => e.code(),
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Parse { .. } | CliError::Constraint { .. } | CliError::UnknownKeys(_) | CliError::Usage(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Mismatch(_) => "replay",
            CliError::Lab(e) => e.category(),
        }
    }

    /// One-line JSON for stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": self.category(),
            "code": self.code(),
            "message": self.to_string(),
        })
        .to_string()
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub(crate) fn constraint(key: &str, e: impl ToString) -> Self {
        CliError::Constraint { key: key.to_string(), invariant: e.to_string() }
    }
}
