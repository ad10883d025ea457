use thiserror::Error;

use crate::model::Violation;

/// Errors raised across the simulation and reconstruction pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("experiment validation failed: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("scatterer {index} has no ellipsoid shape (required by the Born model)")]
    MissingShape { index: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("singular value decomposition failed to converge")]
    ConvergenceFailure,

    #[error("I2 needs (d-1)M+1 = {required} directions but only {available} are available")]
    InsufficientDirections { required: usize, available: usize },

    #[error("functional i2 requires --M or --mtilde=auto")]
    MissingScattererCount,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed data file {path}: {message}")]
    Parse { path: String, message: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            Error::MissingScattererCount => 4,
            _ => 2,
        }
    }
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
