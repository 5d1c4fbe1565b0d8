use thiserror::Error;

use crate::parser::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    /// Malformed arguments: out-of-range values, wrong arity, bad strengths.
    #[error("{0}")]
    Input(String),

    /// An enumeration or search guard tripped. Raise the cap or use a
    /// cheaper query.
    #[error("{what} exceeds the cap of {cap}")]
    CapExceeded { what: String, cap: usize },

    #[error("no valid tests exist")]
    Unsatisfiable,

    #[error("input is not a {strength}-CCA: valid interaction {interaction} is not covered")]
    NotCoveringArray { strength: usize, interaction: String },

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn cap(what: impl Into<String>, cap: usize) -> Self {
        Error::CapExceeded { what: what.into(), cap }
    }
}
