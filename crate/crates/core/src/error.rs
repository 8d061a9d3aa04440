use thiserror::Error;

/// Errors produced by the walk engine, circuit simulator, and protocol layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid qubit index: {0}")]
    InvalidQubit(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("matrix is not unitary (max |U†U - I| = {deviation:.3e})")]
    NotUnitary { deviation: f64 },
    #[error("circuit too large: {n_qubits} qubits exceeds limit of {limit}")]
    TooManyQubits { n_qubits: usize, limit: usize },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("routing failed: {0}")]
    Routing(String),
    #[error("protocol stage `{stage}` failed: {source}")]
    ProtocolStage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
