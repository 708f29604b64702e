use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HardyError {
    #[error("argument {what} = {value} outside the admissible range {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("depth {0} is not supported (need 1..={max})", max = crate::weights::MAX_DEPTH)]
    Depth(usize),
    #[error("series diverges at t = {0}")]
    Divergence(f64),
    #[error("non-finite integrand value {value} at {at}")]
    NonFinite { at: f64, value: f64 },
    #[error("operation requires {0}")]
    Regime(&'static str),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("zero denominator in {0}")]
    ZeroDenominator(&'static str),
}

pub type Result<T> = std::result::Result<T, HardyError>;

pub(crate) fn domain(what: &'static str, value: f64, range: &'static str) -> HardyError {
    HardyError::Domain { what, value, range }
}
