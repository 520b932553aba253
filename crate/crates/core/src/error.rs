use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value is not zeroless: {0}")]
    NotZeroless(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("unsupported expression: {0}")]
    Unsupported(String),
    #[error("limit diverges: {0}")]
    Divergent(String),
    #[error("second derivative vanishes at the point")]
    DegenerateSecondDerivative,
    #[error("side condition violated: {0}")]
    SideCondition(String),
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("no sign change: {0}")]
    NoSignChange(String),
    #[error("estimate does not stabilize: {0}")]
    NonStabilizing(String),
    #[error("no strong differentiability witness: {0}")]
    WitnessNotFound(String),
    #[error("undecided: {0}")]
    Undecided(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
