//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by operator construction and evaluation.
#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("dimension mismatch: operator expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite output from operator evaluation")]
    NonFiniteOutput,

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("inverse resolvent not implementable for family `{0}`")]
    UnsupportedInverseResolvent(&'static str),
}

/// Step-size plan rejections. Each variant names the violated inequality so
/// callers (and the validation suite) can cross-check against a direct
/// evaluation of the same condition.
#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum PlanError {
    #[error("eps1 must be positive")]
    Eps1NotPositive,
    #[error("eps2 must be positive")]
    Eps2NotPositive,
    #[error("eps3 must lie in (2,3)")]
    Eps3OutOfRange,
    #[error("eps2 must be < 2*beta")]
    Eps2TooLarge,
    #[error("eps1 + 1/eps3 must be < 1/2")]
    Eps1Eps3TooLarge,
    #[error("L must be finite and nonnegative")]
    InvalidLipschitz,
    #[error("beta must be positive")]
    InvalidCocoercivity,
    #[error("lambda must be positive")]
    LambdaNotPositive,
    #[error("lambda must be < (2*beta - eps2)*eps1")]
    LambdaCocoercivityBound,
    #[error("lambda must be <= (3 - eps3)*eps2")]
    LambdaReflectionBound,
    #[error("lambda must be < (1/2 - eps1 - 1/eps3)/L")]
    LambdaLipschitzBound,
}

/// Errors raised by a solver run.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("iteration diverged at k = {k}")]
    Divergence {
        k: usize,
        /// Records gathered before the blow-up.
        trace: crate::algorithms::IterationTrace,
    },

    #[error("stopping criterion needs a reference point but none is available")]
    MissingReference,

    #[error(transparent)]
    Operator(#[from] OperatorError),
}
