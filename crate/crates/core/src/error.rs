use thiserror::Error;

/// Errors raised by the library. Hypothesis violations carry the name of
/// the standing assumption that failed.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("field error: {0}")]
    Field(String),
    #[error("series error: {0}")]
    Series(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("hypothesis violated ({hypothesis}): {detail}")]
    Hypothesis {
        hypothesis: &'static str,
        detail: String,
    },
    #[error("window error: {0}")]
    Window(String),
    #[error("size cap exceeded: {0}")]
    CapExceeded(String),
    #[error("instance error: {0}")]
    Instance(String),
    #[error("unknown strategy {0:?}")]
    UnknownStrategy(String),
    #[error("interpolation underdetermined: {0}")]
    Underdetermined(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn hypothesis(hypothesis: &'static str, detail: impl Into<String>) -> Error {
        Error::Hypothesis {
            hypothesis,
            detail: detail.into(),
        }
    }
}
