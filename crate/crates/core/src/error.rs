use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("singular point: {0}")]
    Singular(String),
    #[error("did not converge: {0}")]
    NonConvergence(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("infeasible slope: {0}")]
    Infeasible(String),
    #[error("unsupported regime: {0}")]
    Unsupported(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("ill-conditioned evaluation: {0}")]
    Conditioning(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable small integer per variant, shared by the CLI exit codes and the C ABI.
    pub fn code(&self) -> i32 {
        match self {
            Error::Domain(_) => 2,
            Error::Singular(_) => 3,
            Error::NonConvergence(_) => 4,
            Error::Range(_) => 5,
            Error::Degenerate(_) => 6,
            Error::Size(_) => 7,
            Error::Infeasible(_) => 8,
            Error::Unsupported(_) => 9,
            Error::InvalidParameter(_) => 10,
            Error::Conditioning(_) => 11,
            Error::Io(_) => 12,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Singular(_) => "singular",
            Error::NonConvergence(_) => "nonconvergence",
            Error::Range(_) => "range",
            Error::Degenerate(_) => "degenerate",
            Error::Size(_) => "size",
            Error::Infeasible(_) => "infeasible",
            Error::Unsupported(_) => "unsupported",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::Conditioning(_) => "conditioning",
            Error::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
