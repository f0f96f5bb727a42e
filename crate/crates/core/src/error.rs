use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid length vector: {0}")]
    InvalidLengths(String),

    #[error("n = {n} exceeds the exact-enumeration cap of {cap}")]
    CapExceeded { n: usize, cap: usize },

    /// A signed subset sum landed in the band between the median tolerance
    /// and the ambiguity tolerance, so it cannot be classified safely.
    #[error("signed subset sum {residual:e} is neither clearly zero nor clearly nonzero (total length {total:e})")]
    ToleranceAmbiguous { residual: f64, total: f64 },

    #[error("length vector is not generic (a median subset exists)")]
    NonGeneric,

    #[error("closed form is only available for odd n, got n = {0}")]
    EvenN(usize),

    #[error("evaluation point must be positive, got t = {0}")]
    TNonpositive(f64),

    /// Internal consistency failure in the Poincaré polynomial division.
    #[error("Poincaré numerator is not divisible by 1 - t^2 (remainder {0:?})")]
    DivisionRemainder(Vec<i64>),

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
