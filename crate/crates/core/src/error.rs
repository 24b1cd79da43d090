use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid ring definition: {0}")]
    InvalidRing(String),
    #[error("ring mismatch: {0}")]
    RingMismatch(String),
    #[error("singular pairing matrix")]
    SingularPairing,
    #[error("weight window violated: {0}")]
    Window(String),
    #[error(
        "class {0} has nonzero product with the canonical class; the Chern character \
         formula for such classes involves universal constants that are not known"
    )]
    CanonicalNotOrthogonal(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("mixed parity operator: {0}")]
    MixedParity(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
