use thiserror::Error;

/// Errors raised by the simulator, the fluid solvers and the parsers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("time windows differ: [{a0}, {a1}] vs [{b0}, {b1}]")]
    DomainMismatch { a0: f64, a1: f64, b0: f64, b1: f64 },

    #[error("sup of m*f(m) is unbounded for {0}")]
    UnboundedSlope(String),

    #[error("step too large: lambda_b * L * dt = {product} must be < 0.5")]
    StepTooLarge { product: f64 },

    #[error("no fluid limit is defined for model `{0}`")]
    UnsupportedKind(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
