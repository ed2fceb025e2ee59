use num_bigint::BigUint;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("position out of range: {0}")]
    Range(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("search space of {size} candidates exceeds the limit of {limit}")]
    ResourceLimit { size: BigUint, limit: u64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed linear program: {0}")]
    MalformedLp(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable code used by the CLI reports.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Range(_) => "range",
            Error::InvalidInstance(_) => "invalid-instance",
            Error::Dimension(_) => "dimension",
            Error::ResourceLimit { .. } => "resource-limit",
            Error::Precondition(_) => "precondition",
            Error::MalformedLp(_) => "malformed-lp",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
