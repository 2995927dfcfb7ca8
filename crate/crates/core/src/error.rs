use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("need at least {required} observations, found {found}")]
    TooFewObservations { required: usize, found: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid active set: {0}")]
    InvalidActiveSet(String),
    #[error("duplicate feature name `{0}`")]
    DuplicateFeature(String),
    #[error("unknown scenario `{name}`; available: {available}")]
    UnknownScenario { name: String, available: String },
    #[error("scenario catalog: {0}")]
    Catalog(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_finite<T: num_traits::Float>(xs: &[T], what: &'static str) -> Result<()> {
    match xs.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { what, index }),
        None => Ok(()),
    }
}
