use std::path::PathBuf;

use thiserror::Error;

use crate::scenario::Violation;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("scenario failed validation with {} violation(s)", .0.len())]
    Invalid(Vec<Violation>),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("maturity fit needs at least 2 samples, got {0}")]
    InsufficientData(usize),

    #[error("sample {0} is outside (0, 1]")]
    SampleOutOfRange(f64),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
