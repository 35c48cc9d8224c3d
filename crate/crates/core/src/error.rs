//! Error type shared across the library.
//!
//! Two categories matter downstream: bad input (rejected configurations,
//! inadmissible words, malformed data) and broken internal invariants. The CLI
//! maps them to distinct exit codes, so the distinction is part of the contract.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The caller handed us something outside the domain contract.
    #[error("invalid input: {0}")]
    Input(String),

    /// An internal consistency check failed; results cannot be trusted.
    #[error("invariant violation: {0}")]
    Invariant(String),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
