use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite data: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("operator is not positive definite: <Hq, q> = {curvature:e} at CG step {step}")]
    NotPositiveDefinite { step: usize, curvature: f64 },

    #[error("inner CG did not reach tolerance {tol:e} at outer iteration {outer} ({iterations} steps, residual {residual:e})")]
    InnerNotConverged {
        outer: usize,
        iterations: usize,
        residual: f64,
        tol: f64,
    },

    #[error("iterates diverged at outer iteration {outer}: ||u|| = {norm:e}")]
    Diverged { outer: usize, norm: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Re-labels any error as a configuration error without nesting prefixes.
    pub fn into_config(self) -> Error {
        match self {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(other.to_string()),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
