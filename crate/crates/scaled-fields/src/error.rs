//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Operands belong to different universes; no implicit conversion exists.
    #[error("cross-universe operation: operands tagged {0} and {1}")]
    CrossUniverse(String, String),

    /// Operands carry the same tag but different scaling factors.
    #[error("scaling factor mismatch: {0} vs {1}")]
    ScaleMismatch(f64, f64),

    /// Scaling factors must be finite and strictly positive.
    #[error("invalid scaling factor {0}")]
    InvalidScale(f64),

    /// Division by a structure whose external representation is zero.
    #[error("division by zero")]
    DivisionByZero,

    /// Exponent magnitude would overflow or underflow `exp`.
    #[error("scale exponent {0} overflows the representable range")]
    Overflow(f64),

    /// Input outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite {0}")]
    NonFinite(String),

    /// Tuple lengths disagree.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// Chart coordinate outside the invertible range of the chart.
    #[error("chart range error: {0}")]
    ChartRange(String),

    /// Affine chart matrix is singular, or a Newton solve hit one.
    #[error("singular matrix in chart inversion")]
    SingularMatrix,

    /// Newton inversion failed to reach the residual tolerance.
    #[error("chart inversion did not converge after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    /// Malformed argument that no more specific variant covers.
    #[error("{0}")]
    InvalidArgument(String),
}
