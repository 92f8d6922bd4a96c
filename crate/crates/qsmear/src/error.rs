//! Error type shared across the crate.

use crate::qstate::Basis;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("wavefunction leaks out of the box: normalization deficit {deficit:.3e}")]
    PacketLeak { deficit: f64 },

    #[error("basis mismatch: expected {expected}, found {found}")]
    BasisMismatch { expected: Basis, found: Basis },

    #[error("sigma = 0 is the delta-function limit; it has no pointwise values")]
    DeltaLimit,

    #[error("sectional cut is all zero or contains non-finite entries")]
    DegenerateCut,

    #[error("outcome {index} has negligible probability {probability:.3e}; conditional state undefined")]
    NegligibleOutcome { index: usize, probability: f64 },

    #[error("operator is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("states are not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("state is not normalized (deviation {deviation:.3e})")]
    NotNormalized { deviation: f64 },

    #[error("operator set is not complete (deviation {deviation:.3e})")]
    IncompleteSet { deviation: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("cell [{lo:.6}, {hi:.6}] extends outside the grid [{x_min:.6}, {x_max:.6}]")]
    CellOutsideGrid {
        lo: f64,
        hi: f64,
        x_min: f64,
        x_max: f64,
    },

    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("config parse error: {0}")]
    ConfigParse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Exit status the CLI maps this error to (config errors are 2, everything else 1).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::ConfigParse(_) => 2,
            _ => 1,
        }
    }
}
