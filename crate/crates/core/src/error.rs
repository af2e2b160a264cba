use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),

    #[error("no catalog stars within the field of view")]
    EmptyImage,

    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("source header is missing column `{0}`")]
    MissingColumn(alloc::string::String),
}

pub type Result<T> = core::result::Result<T, Error>;
