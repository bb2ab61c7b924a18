use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error type. The CLI maps `Config` to exit code 2 and every
/// other variant to exit code 1.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("qubit {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state norm {norm} departs from 1 beyond tolerance")]
    NotNormalized { norm: f64 },

    #[error("decode hit the projection pole: 1 - v_last = {margin:e}")]
    PoleProximity { margin: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
