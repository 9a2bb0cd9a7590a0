use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),
    #[error("operator is not positive semidefinite: {0}")]
    NotPsd(String),
    #[error("support violation: {0}")]
    Support(String),
    #[error("decomposition failure: {0}")]
    Decomposition(String),
    #[error("sdp solver: {0}")]
    Sdp(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable tag, used by the CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Shape(_) => "shape",
            Error::Size(_) => "size",
            Error::Parameter(_) => "parameter",
            Error::NotHermitian(_) => "not_hermitian",
            Error::NotPsd(_) => "not_psd",
            Error::Support(_) => "support",
            Error::Decomposition(_) => "decomposition",
            Error::Sdp(_) => "sdp",
            Error::Io(_) => "io",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
