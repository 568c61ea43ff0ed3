use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit index {index} out of range for {n} qubits")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("duplicate qubit index {0} in register")]
    DuplicateIndex(usize),

    #[error("dense backend holds at most {capacity} qubits, requested {requested}")]
    CapacityExceeded { capacity: usize, requested: usize },

    #[error("operation requires the {expected} backend")]
    WrongBackend { expected: &'static str },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("gate {0} is not transversal for this code")]
    NonTransversal(String),

    #[error("portals already consumed")]
    PortalConsumed,

    #[error("receive called on a verdict that identified the sender")]
    VerdictNotAccepted,

    #[error("invalid Clifford tableau: {0}")]
    InvalidClifford(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("transcript line {line}: {message}")]
    Transcript { line: usize, message: String },

    #[error("register ownership violated: {0}")]
    Ownership(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
