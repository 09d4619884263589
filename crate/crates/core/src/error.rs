use thiserror::Error;

use crate::profile::Profile;

/// Errors raised by the library. Variants map one-to-one onto the failure
/// modes of the individual operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("eigenvalue index l={l} is outside the conservation-law range l < {limit}")]
    IndexOutOfRange { l: u32, limit: u32 },

    #[error("invalid scaling: alpha*n = {0} must be < 1")]
    InvalidScaling(f64),

    #[error("invalid exponents: {0}")]
    InvalidExponents(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular point at y = {0}")]
    SingularPoint(f64),

    #[error("launch offset delta={delta} violates 0 <= delta <= 1e-2*|y0| (|y0|={y0_abs})")]
    BadDelta { delta: f64, y0_abs: f64 },

    #[error("regularized crossing of y=0 produced non-finite values")]
    SingularCrossing,

    #[error("step size underflow at y = {0}")]
    StepUnderflow(f64),

    #[error("state overflow at y = {0}")]
    StateOverflow(f64),

    #[error("no sign change on the bracketing interval")]
    NoBracket,

    #[error("fixed-point iteration is not contracting (ratio {0})")]
    NoContraction(f64),

    #[error("negative discriminant in zero recurrence at index {0}")]
    NegativeDiscriminant(usize),

    #[error("no root above y = {0}")]
    NoRootAbove(f64),

    #[error("matching failure at y = {at}: jump {jump:e}")]
    MatchingFailure { at: f64, jump: f64 },

    #[error("kernel routes disagree at y = {at} by {diff:e}")]
    KernelMismatch { at: f64, diff: f64 },

    #[error("kernel mass {mass} misses 1 by more than {tol}")]
    MassDeficit { mass: f64, tol: f64 },

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("need at least two positive-y extrema, got {0}")]
    InsufficientExtrema(usize),

    #[error("no convergence: residual {residual:e}")]
    NoConvergence {
        residual: f64,
        best: Box<Profile>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
