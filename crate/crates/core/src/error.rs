use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("node {node:?} is not interior to margin {margin}")]
    NotInterior { node: [usize; 3], margin: usize },

    #[error("radius {radius} outside admissible range [{min}, {max}]")]
    RadiusOutOfRange { radius: f64, min: f64, max: f64 },

    #[error("invalid radius list: {0}")]
    InvalidRadii(String),

    #[error("invalid exponent {exponent} for n = {n} (expected one of n-2, n-1, 1)")]
    InvalidExponent { exponent: i32, n: usize },

    #[error("need at least {needed} samples, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("incompatible source: {0}")]
    Incompatible(String),

    #[error("invalid solver configuration: {0}")]
    InvalidSolveConfig(String),

    #[error("solver diverged at iteration {iteration}: energy increased by {increase:e}")]
    Diverged { iteration: usize, increase: f64 },

    #[error("shooting failed: {0}")]
    Shooting(String),

    #[error("{}:{line}: {message}", path.display())]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("field file {}: line {line}: {message}", path.display())]
    FieldFormat {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),

    #[error("io error on {}: {source}", path.display())]
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

    /// Process exit status associated with this error by the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
