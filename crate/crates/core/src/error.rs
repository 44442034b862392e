use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parameters must be finite")]
    NonFinite,
    #[error("lambda must equal 3c exactly (c = {c}, lambda = {lambda})")]
    LambdaMismatch { c: f64, lambda: f64 },
    #[error("density range violates 3 <= c_min <= c <= c_max <= 5 (c_min = {c_min}, c = {c}, c_max = {c_max})")]
    DensityRange { c_min: f64, c: f64, c_max: f64 },
    #[error("accuracy radius must be a finite nonnegative number, got {0}")]
    Epsilon(f64),
    #[error("truncation degree must be even, got {0}")]
    OddTruncation(u32),
    #[error("violated x_max > lambda_max: x_max = {x_max}, lambda_max = {lambda_max}")]
    TruncationBelowMean { x_max: u32, lambda_max: f64 },
    #[error("violated x_max >= (2 lambda - log 2)/(log lambda - log 2) over the lambda range: x_max = {x_max}, required {required:.6}")]
    TruncationBelowTail { x_max: u32, required: f64 },
    #[error("{0}")]
    Other(String),
}

/// Arguments outside the mathematical domain of an operation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("need 0 <= p <= x, got x = {x}, p = {p}")]
    OccurrenceIndex { x: u32, p: u32 },
    #[error("point (phi = {phi}, beta1 = {beta1}) is singular: {reason}")]
    SingularPoint {
        phi: f64,
        beta1: f64,
        reason: &'static str,
    },
    #[error("V = {0} must exceed 1")]
    VNotAboveOne(f64),
    #[error("{name} = {value} outside its domain {domain}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("zero coordinate in the type-proportion table at (x = {x}, p = {p}, j = {j})")]
    ZeroProportion { x: u32, p: u32, j: u32 },
    #[error("assignment does not satisfy the formula")]
    NotASolution,
    #[error("{0}")]
    Precondition(String),
}
