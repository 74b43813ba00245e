//! Error taxonomy shared by the whole crate.

use thiserror::Error;

/// Errors produced by library operations.
///
/// The variants map onto stable process exit codes in the CLI front end:
/// invalid input (2), precondition failure (3), resource limit (4),
/// numeric/internal failure (5).
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Malformed input: bad dimensions, unknown names, out-of-range values.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A documented operation precondition does not hold for these inputs.
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    /// An enumeration guard was exceeded.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    /// The numerical method stalled or diverged.
    #[error("numeric failure: {0}")]
    NumericFailure(String),

    /// A state the underlying theory rules out; indicates a bug, not bad input.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
