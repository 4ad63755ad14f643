use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit count {m} outside supported range 1..={max}")]
    QubitCount { m: usize, max: usize },

    #[error("{convention} convention requires {parity} m, got m = {m}")]
    Parity {
        convention: &'static str,
        parity: &'static str,
        m: usize,
    },

    #[error("dimension mismatch: expected {expected} qubits, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid convention: {0}")]
    Convention(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("oracle is limited to {cap} qubits, got {m}")]
    OracleCap { m: usize, cap: usize },

    #[error("quadrature limited to m <= {max}, got m = {m}")]
    QuadratureSize { m: usize, max: usize },

    #[error("grid resolution {got} below minimum {min}")]
    Resolution { got: usize, min: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("rejection loop exceeded {cap} proposals at sample index {index}; envelope is broken")]
    EnvelopeExhausted { index: u64, cap: u32 },

    #[error("invalid value for {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}
