use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("value is numerically zero at the available precision: {0}")]
    NumericallyZero(String),
    #[error("precision error: {0}")]
    Precision(String),
    #[error("tail bound not achievable: {0}")]
    TailBound(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("not a period: {0}")]
    NotPeriod(String),
}

pub type Result<T> = std::result::Result<T, Error>;
