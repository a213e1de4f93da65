//! Error type shared across the crate.
//!
//! Variants are grouped by how the CLI maps them to exit codes:
//! validation problems (bad shapes, parameters, configs) exit with 2,
//! source/network failures with 3, data-integrity failures with 4 and
//! everything else with 5.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands disagree on dimensionality.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A parameter value is outside its documented domain.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The caller violated a precondition (empty input, bad config, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// An input file does not have the expected columns or schema version.
    #[error("schema error: {0}")]
    Schema(String),

    /// A linear solve or similar numeric step failed.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Training produced a non-finite loss.
    #[error("training error: {0}")]
    Training(String),

    /// A remote or local embedding source failed to deliver vectors.
    #[error("source error: {0}")]
    Source(String),

    /// Stored data contradicts itself (wrong dims, corrupt cache lines, ...).
    #[error("integrity error: {0}")]
    Integrity(String),

    /// A lookup against a local embedding store found nothing.
    #[error("not found: {0}")]
    NotFound(String),

    /// Input with no usable structure (e.g. all points identical for a projection).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 validation, 3 source, 4 integrity, 5 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Shape(_)
            | Error::Parameter(_)
            | Error::Usage(_)
            | Error::Schema(_)
            | Error::Degenerate(_) => 2,
            Error::Source(_) => 3,
            Error::Integrity(_) | Error::NotFound(_) => 4,
            Error::Numerical(_) | Error::Training(_) | Error::Io(_) | Error::Internal(_) => 5,
        }
    }
}
