//! Crate-wide error type with one variant per failure class.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed textual input (Pauli labels, model documents, observables).
    #[error("parse error: {0}")]
    Parse(String),

    /// Structurally valid input that violates a model constraint.
    #[error("invalid model: {0}")]
    Model(String),

    /// Run parameters outside their admissible range.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Request exceeds the dense-matrix size limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A numerical invariant failed beyond tolerance.
    #[error("numerical consistency failure: {0}")]
    Numeric(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for this failure class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) => 2,
            Error::Model(_) => 3,
            Error::Config(_) => 4,
            Error::Capacity(_) => 5,
            Error::Numeric(_) => 6,
            Error::Io(_) => 7,
        }
    }
}
