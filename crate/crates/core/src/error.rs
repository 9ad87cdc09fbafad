//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by validation, solvers and decision procedures.
///
/// Semantic failures that a verification report can carry (a broken bracket,
/// a non-hermitian metric value) are not errors; they show up as failed
/// checks or `false` results. Errors are reserved for inputs the requested
/// operation cannot meaningfully process at all.
#[derive(Debug, Error)]
pub enum CalcError {
    /// Dimensions of the inputs do not line up.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Input violates a structural precondition of the operation.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// Input is degenerate for the requested operation (zero map, zero metric).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// The operation requires a canonicalized instance.
    #[error("instance must be canonicalized first: {0}")]
    MustCanonicalize(String),

    /// The input shape is valid but outside the scope of this operation.
    #[error("unsupported shape: {0}")]
    Unsupported(String),

    /// No Levi-Civita connection exists for the given data.
    #[error("no Levi-Civita connection: {0}")]
    NoConnection(String),

    /// The metric is singular where invertibility is required.
    #[error("singular metric: {0}")]
    SingularMetric(String),

    /// The request exceeds a hard resource bound.
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, CalcError>;
