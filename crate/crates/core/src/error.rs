//! Crate-wide error type and result alias.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: bad parameter combinations, malformed input.
    #[error("configuration error: {0}")]
    Config(String),

    /// A hard resource cap was exceeded (qubit count, dense dimension).
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("two-qubit gate indices clash: qubit {0} given twice")]
    QubitIndexClash(usize),

    #[error("matrix is not unitary (deviation {deviation:.3e} exceeds {tolerance:.1e})")]
    NotUnitary { deviation: f64, tolerance: f64 },

    /// Exhaustive compliance enumeration would be too large.
    #[error("compliance check infeasible: {0} matter sites exceeds limit of {1}")]
    ComplianceTooLarge(usize, usize),

    /// Krylov propagation failed to reach the requested tolerance.
    #[error("time evolution did not converge: {0}")]
    Convergence(String),

    #[error("shot table is in basis {found:?}, expected {expected:?}")]
    WrongBasis {
        found: crate::shots::MeasurementBasis,
        expected: crate::shots::MeasurementBasis,
    },

    #[error("unknown preset '{0}'")]
    UnknownPreset(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for config errors, 3 for resource caps.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::UnknownPreset(_)
            | Error::Json(_)
            | Error::ComplianceTooLarge(..) => 2,
            Error::ResourceCap(_) => 3,
            _ => 1,
        }
    }
}
