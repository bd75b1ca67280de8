use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {found} does not belong to space `{space}`")]
    VariantMismatch { space: String, found: String },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("unknown speed factor `{0}`")]
    UnknownSpeed(String),

    #[error("malformed witness: {0}")]
    Witness(String),

    #[error("malformed point: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
