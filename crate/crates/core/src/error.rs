use thiserror::Error;

/// Errors raised by the valuation engines and the ledger.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input at `{path}`: {message}")]
    Validation { path: String, message: String },

    #[error("infeasible trajectory at t={period}: {reason}")]
    InfeasibleTrajectory { period: usize, reason: String },

    #[error("member `{0}` already has an account")]
    DuplicateMember(String),

    #[error("unknown member `{0}`")]
    UnknownMember(String),

    #[error("member `{0}` is inactive")]
    InactiveMember(String),

    #[error("allocation weights sum to zero")]
    NoActiveMembers,

    #[error("operation `{op}` requires a {expected}-denominated book")]
    WrongDenomination { op: &'static str, expected: &'static str },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Validation { .. } => "ValidationError",
            Error::InfeasibleTrajectory { .. } => "InfeasibleTrajectory",
            Error::DuplicateMember(_) => "DuplicateMember",
            Error::UnknownMember(_) => "UnknownMember",
            Error::InactiveMember(_) => "InactiveMember",
            Error::NoActiveMembers => "NoActiveMembers",
            Error::WrongDenomination { .. } => "WrongDenomination",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
