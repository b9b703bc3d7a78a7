use thiserror::Error;

/// Errors produced anywhere in the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("arity mismatch: expected {expected} qubits, got {actual}")]
    ArityMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range for {qubits} qubits")]
    IndexOutOfRange { index: usize, qubits: usize },

    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("gate payload is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("{qubits} qubits exceeds the {mode} simulation ceiling of {limit}")]
    TooLarge {
        qubits: usize,
        limit: usize,
        mode: &'static str,
    },

    #[error("circuit contains measurement, discard or preparation")]
    NotUnitary,

    #[error("circuit is not classical-reversible: {0}")]
    NotClassical(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("forbidden oracle access: {0}")]
    ForbiddenOracle(String),

    #[error("obfuscated program has no uses remaining")]
    UsesExhausted,

    #[error("unknown interpreter `{0}`")]
    UnknownInterpreter(String),

    #[error("quantum-state program has no classical serialization")]
    NotSerializable,

    #[error("insufficient program copies: need {need}, got {got}")]
    InsufficientCopies { need: usize, got: usize },

    #[error("malformed program: {0}")]
    Malformed(String),

    #[error("query budget of {0} exceeded")]
    BudgetExceeded(usize),

    #[error("payload of {qubits} qubits exceeds bound {limit}")]
    PayloadTooLarge { qubits: usize, limit: usize },

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("experiment took {elapsed:.2}s, ceiling is {limit:.2}s")]
    RuntimeExceeded { elapsed: f64, limit: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
