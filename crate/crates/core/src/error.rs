use thiserror::Error;

/// Errors raised by evaluation, fitting and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inputs violate a structural contract (lengths, invariants, budgets).
    #[error("contract error: {0}")]
    Contract(String),

    /// The node system has no root inside the admissible box.
    #[error("no solution in admissible box: {reason}; sign pattern of Q at box corners: {corner_signs}")]
    NoSolution { reason: String, corner_signs: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
