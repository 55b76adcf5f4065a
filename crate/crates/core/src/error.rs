use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("parameter {t} outside [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no closed form for family `{family}` at n = {n}: {hint}")]
    Unsupported {
        family: String,
        n: usize,
        hint: String,
    },

    #[error("estimation failed: {0}")]
    Estimation(String),
}
