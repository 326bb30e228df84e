use thiserror::Error;

/// Errors raised by the model, the closed forms and the pricing engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QnvError {
    #[error("invalid model specification: {0}")]
    InvalidSpec(String),
    #[error("argument {x} outside the domain [{lower}, {upper}]")]
    Domain { x: f64, lower: f64, upper: f64 },
    #[error("value {y} is not in the range of the transformation")]
    Range { y: f64 },
    #[error("operation not available for this root configuration: {0}")]
    Case(String),
    #[error("requested {requested} path steps exceeds the budget of {budget}")]
    Resource { requested: u128, budget: u128 },
    #[error("payoff returned a non-finite value ({0}) on path {1}")]
    NonFinitePayoff(f64, usize),
    #[error("infinite payoff with positive weight on path {0}")]
    NonIntegrable(usize),
    #[error("model does not have the required shape: {0}")]
    SpecShape(String),
    #[error("claim legs are inconsistent on path {path}: euro leg {euro}, dollar leg / X_T = {implied}")]
    LegInconsistency { path: usize, euro: f64, implied: f64 },
    #[error("invalid Monte Carlo parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T, E = QnvError> = std::result::Result<T, E>;
