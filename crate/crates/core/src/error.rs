use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("class error: {0}")]
    Class(String),

    #[error("overflow: {what} is not representable (log value {log_value})")]
    Overflow { what: String, log_value: f64 },

    #[error("horizon error: queried n = {queried} beyond declared horizon {horizon}")]
    Horizon { queried: u64, horizon: u64 },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("hint error: {0}")]
    Hint(String),

    #[error("value error: m_{n} = {value} is outside {{-1, 0, 1}}")]
    SignValue { n: u64, value: i64 },

    #[error("zero coefficient: c_{0} = 0")]
    ZeroCoefficient(u64),

    #[error("condition error: {0}")]
    Condition(String),

    #[error("divergence prerequisite failed: {0}")]
    DivergencePrereq(String),

    #[error("search budget exhausted after reaching k = {k_reached}")]
    BudgetExhausted { k_reached: usize },

    #[error("stage budget exhausted at stage {0}")]
    StageBudgetExhausted(usize),

    #[error("block cap exceeded: requested {requested}, cap {cap}")]
    BlockCapExceeded { requested: u64, cap: u64 },

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
