use thiserror::Error;

/// Errors produced by oracle evaluation, inner solves and the derived operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("gradient unavailable")]
    GradientUnavailable,

    #[error("hessian unavailable")]
    HessianUnavailable,

    #[error("+inf encountered while evaluating {0}")]
    InfiniteValue(&'static str),

    #[error("inadmissible gamma: gamma = {gamma}, rho = {rho}, requires gamma > 0 and gamma * rho < 1")]
    InadmissibleGamma { gamma: f64, rho: f64 },

    #[error("inner solve did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("non-finite value returned by an oracle")]
    NonFiniteOracle,

    #[error("non-finite coordinate in input point")]
    NonFinitePoint,

    #[error("invalid bracket [{lo}, {hi}]")]
    InvalidBracket { lo: f64, hi: f64 },

    #[error("function is not convex (declared rho = {0})")]
    NotConvex(f64),

    #[error("unknown function `{0}`")]
    UnknownFunction(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("singular resolvent: 1 + gamma * lambda = {0} is not positive")]
    SingularResolvent(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("conjugate is unbounded at the requested point")]
    UnboundedConjugate,

    #[error("every grid value is +inf")]
    EmptyGrid,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
