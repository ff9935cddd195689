use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("capability: {0}")]
    Capability(String),
    #[error("domain: {0}")]
    Domain(String),
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("conditioning: {0}")]
    Conditioning(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("construction: {0}")]
    Construction(String),
    #[error("empty region: {0}")]
    EmptyRegion(String),
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
