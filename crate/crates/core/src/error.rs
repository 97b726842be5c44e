use thiserror::Error;

/// Errors raised by the certification toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("point outside domain: {0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("construction failed: {0}")]
    ConstructionFailed(String),
    #[error("simulation error at t={time}: {message}")]
    Simulation { time: f64, message: String },
    #[error("plan failed in phase `{phase}`: {message}")]
    PlanFailed { phase: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
