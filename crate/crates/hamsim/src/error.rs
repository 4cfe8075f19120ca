//! Crate-wide error type.
//!
//! All fallible operations return [`Result`]. Validation failures carry
//! enough context to identify the offending argument; numerical-budget
//! rejections name the budget that was exceeded so callers can loosen the
//! request instead of silently degrading.

use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum HamsimError {
    /// Two objects that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Dense-operator routines are capped to keep O(N^3) work interactive.
    #[error("dimension {got} exceeds the dense-operator cap of {cap}")]
    DimensionCap { cap: usize, got: usize },

    /// An operator that must be Hermitian is not (max |A - A†| reported).
    #[error("operator is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    /// A part that must satisfy P² = P does not.
    #[error("part is not a projector (blockwise deviation {deviation:.3e})")]
    NotProjector { deviation: f64 },

    /// A part that must satisfy R² = I does not.
    #[error("operator is not a reflection (blockwise deviation {deviation:.3e})")]
    NotReflection { deviation: f64 },

    /// A scalar argument is outside its documented domain.
    #[error("invalid argument: {what}")]
    InvalidArgument { what: String },

    /// A request exceeds a documented precision or search budget.
    #[error("precision budget exceeded: {what}")]
    PrecisionBudget { what: String },

    /// The iterative eigensolver or norm estimator failed to converge.
    #[error("numerical iteration failed to converge: {what}")]
    NoConvergence { what: String },

    /// Malformed text input (graph files, config files).
    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    /// I/O failure, annotated with the path involved.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HamsimError {
    /// Convenience constructor for [`HamsimError::InvalidArgument`].
    pub fn invalid(what: impl Into<String>) -> Self {
        HamsimError::InvalidArgument { what: what.into() }
    }

    /// Convenience constructor for [`HamsimError::PrecisionBudget`].
    pub fn budget(what: impl Into<String>) -> Self {
        HamsimError::PrecisionBudget { what: what.into() }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, HamsimError>;
