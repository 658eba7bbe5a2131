//! Error type shared across the library.

use std::path::PathBuf;

/// Errors produced by solvers, domain checks and the experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain violation: {0}")]
    Domain(String),

    /// A configuration or call-site parameter is invalid.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A stated precondition of a verification routine does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The scalar root-finder exhausted its iteration budget.
    #[error(
        "root-finder did not converge after {iterations} iterations (last residual {residual:e})"
    )]
    Convergence { iterations: usize, residual: f64 },

    /// A lower-bound certificate was queried outside its validity region.
    #[error("certificate not valid at y={y} (largest admissible value {max_y})")]
    CertificateRange { y: f64, max_y: f64 },

    /// A baseline policy observed a loss outside its declared range.
    #[error("observed loss {observed} exceeds the declared scale bound {bound}")]
    ScaleViolation { observed: f64, bound: f64 },

    /// Filesystem error, annotated with the offending path.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed CSV input, annotated with the offending path.
    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
