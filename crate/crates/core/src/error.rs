//! Error type shared by every module in the crate.

use core::fmt;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong when building problems or running solvers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Vector or matrix dimensions do not line up.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    /// An input contained NaN or an infinity.
    NonFiniteInput(&'static str),
    /// The measurement matrix is identically zero.
    DegenerateMatrix,
    /// The observation vector is identically zero where a nonzero one is required.
    DegenerateObservation,
    /// The step size `mu` falls outside the admissible range for the instance.
    StepSizeOutOfRange { mu: f64, limit: f64 },
    /// The arccos argument of the shrinkage angle exceeded 1 by more than the
    /// rounding guard; the input was below the threshold.
    ArccosDomainViolation { argument: f64 },
    /// The shrinkage map was evaluated at a point at or below the threshold.
    BelowThreshold { gamma: f64, threshold: f64 },
    /// The shape parameter `a` exceeds the strict-convexity bound `1/sqrt(lambda)`.
    ConvexityViolated { a: f64, bound: f64 },
    /// The sparsity estimate `r` is outside `1..=n-1` (or `1..=n` for signals).
    SparsityOutOfRange { r: usize, n: usize },
    /// An iterate became non-finite; the run was aborted at this iteration.
    NonFiniteIterate { iteration: usize },
    /// A scalar parameter violated its documented precondition.
    InvalidParameter(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                actual,
            } => write!(f, "dimension mismatch for {what}: expected {expected}, got {actual}"),
            Error::NonFiniteInput(what) => write!(f, "non-finite value in {what}"),
            Error::DegenerateMatrix => write!(f, "measurement matrix is identically zero"),
            Error::DegenerateObservation => write!(f, "observation vector is zero"),
            Error::StepSizeOutOfRange { mu, limit } => {
                write!(f, "step size mu = {mu} outside (0, {limit})")
            }
            Error::ArccosDomainViolation { argument } => {
                write!(f, "arccos argument {argument} > 1; input below threshold")
            }
            Error::BelowThreshold { gamma, threshold } => {
                write!(f, "|gamma| = |{gamma}| is not above the threshold {threshold}")
            }
            Error::ConvexityViolated { a, bound } => {
                write!(f, "a = {a} exceeds the strict-convexity bound {bound}")
            }
            Error::SparsityOutOfRange { r, n } => {
                write!(f, "sparsity r = {r} out of range for dimension n = {n}")
            }
            Error::NonFiniteIterate { iteration } => {
                write!(f, "iterate became non-finite at iteration {iteration}")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
