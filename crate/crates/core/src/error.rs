use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} must be finite")]
    NonFinite { name: &'static str },

    #[error("{name} = {value} is out of range (expected {expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("effect size is zero: no finite sample size reaches the requested power")]
    ZeroEffect,

    #[error("model mismatch: {0}")]
    ModelMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name })
    }
}

pub(crate) fn out_of_range<T>(name: &'static str, value: f64, expected: &'static str) -> Result<T> {
    Err(Error::OutOfRange {
        name,
        value,
        expected,
    })
}
