use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of a singular function.
    #[error("domain error in {func}: argument {value} outside {domain}")]
    Domain {
        func: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:.3e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("incompatible right-hand side: mean {mean:.3e} must vanish for a pure Neumann problem")]
    IncompatibleRhs { mean: f64 },

    #[error("CFL violation: courant number {courant:.3} exceeds {limit}")]
    Cfl { courant: f64, limit: f64 },

    #[error("explicit stability bound violated: dt = {dt:.3e} > {bound:.3e}")]
    StabilityBound { dt: f64, bound: f64 },

    #[error("Newton iteration failed: {reason} (iterations {iterations}, residual {residual:.3e})")]
    Newton {
        reason: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("solver failure at step {step}: {source}")]
    Step {
        step: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error("snapshot truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("io error on {path}: {source}")]
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

    /// Short machine-readable category used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } | Error::InvalidParameter(_) | Error::GridMismatch(_) => "invalid",
            Error::NonConvergence { .. }
            | Error::IncompatibleRhs { .. }
            | Error::Cfl { .. }
            | Error::StabilityBound { .. }
            | Error::Newton { .. }
            | Error::Step { .. } => "solver",
            Error::Config { .. } => "config",
            Error::Format(_) | Error::Truncated { .. } | Error::Io { .. } => "io",
        }
    }
}
