use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Numeric payloads are widened to `f64` so the error type stays independent
/// of the scalar the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid harvesting profile: {0}")]
    InvalidProfile(String),
    #[error("fractional order must satisfy 0 < s < 1, got {0}")]
    InvalidOrder(f64),
    #[error("unsupported dimension N = {0}; only N = 1 is implemented")]
    UnsupportedDimension(usize),
    #[error("grid functions live on different grids")]
    GridMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("operator is not positive definite (pivot {pivot} = {value:e})")]
    SingularOperator { pivot: usize, value: f64 },
    #[error("eigensolver failed after {iterations} iterations (rayleigh change {change:e}, residual {residual:e})")]
    EigensolverFailure {
        iterations: usize,
        change: f64,
        residual: f64,
    },
    #[error("theorem hypothesis violated: lambda = {lambda} must exceed lambda1 = {lambda1}")]
    HypothesisViolated { lambda: f64, lambda1: f64 },
    #[error("degenerate gap function: {0}")]
    DegenerateGap(String),
    #[error("lower and upper functions are not ordered: lower exceeds upper by {excess:e} at node {node}")]
    InvalidPair { node: usize, excess: f64 },
    #[error("{method} did not converge in {iterations} iterations (last residual {residual:e}, last increment {increment:e})")]
    NonConvergence {
        method: &'static str,
        iterations: usize,
        residual: f64,
        increment: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
