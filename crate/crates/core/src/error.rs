use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),
    #[error("state violates interlacing between levels {lower} and {upper}")]
    NotInterlaced { lower: usize, upper: usize },
    #[error("degenerate denominator: Delta vanishes at level {level} for {detail}")]
    DegenerateDenominator { level: usize, detail: String },
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy: {0}")]
    Accuracy(String),
    #[error("out of regime: {0}")]
    OutOfRegime(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::InvalidArguments(format!("io: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArguments(msg.into())
}
