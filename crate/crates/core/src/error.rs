use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid field: {0}")]
    Domain(String),

    #[error("could not decide irreducibility of {0}")]
    Undecided(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("{what} needs {needed}, which exceeds the cap of {cap}")]
    CapExceeded {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    #[error("{requested} digits requested, at most {max} are supported in double precision")]
    Precision { requested: u32, max: u32 },

    #[error("arguments outside the region of absolute convergence: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(pos: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            pos,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameters(msg.into())
    }
}
