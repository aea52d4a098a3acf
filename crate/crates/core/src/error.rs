use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A construction was requested outside the regime it is defined for.
    #[error("construction regime error: {0}")]
    Regime(String),
    /// A caller-side contract was broken (shapes, sums, missing state).
    #[error("contract error: {0}")]
    Contract(String),
    /// An exhaustive computation would exceed its state-space limit.
    #[error("guardrail: {0}")]
    Guardrail(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("fit error: {0}")]
    Fit(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
