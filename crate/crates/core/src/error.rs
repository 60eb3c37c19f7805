use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("evaluation failed: {0}")]
    Evaluation(String),

    #[error(
        "trajectory {trajectory} diverged at t = {time:.6} (|x| = {norm:.3e}); last finite state {last_state:?}"
    )]
    Divergence {
        trajectory: usize,
        time: f64,
        norm: f64,
        last_state: Vec<f64>,
    },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("unsupported dimension {dim}: {hint}")]
    UnsupportedDimension { dim: usize, hint: &'static str },

    #[error("rejection sampler acceptance rate {rate:.2e} is below 1e-4; use a larger level `a` or a custom proposal")]
    LowAcceptance { rate: f64 },

    #[error("metric failure: {0}")]
    Metric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the `lsa` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Argument(_) => 2,
            Error::Divergence { .. } => 3,
            Error::Metric(_)
            | Error::Quadrature(_)
            | Error::UnsupportedDimension { .. }
            | Error::LowAcceptance { .. } => 4,
            Error::Evaluation(_) | Error::Io { .. } => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
