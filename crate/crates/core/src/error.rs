use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qubit index {index} out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { index: usize, num_qubits: usize },
    #[error("two-qubit gate needs distinct qubits, got {0} twice")]
    SameQubit(usize),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("register of {requested} qubits exceeds the simulator cap of {cap}")]
    TooManyQubits { requested: usize, cap: usize },
    #[error("ensemble probabilities sum to {0}, expected 1")]
    ProbabilitySum(f64),
    #[error("state is not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("angle {0}π/8 is not in the encryption set {{0, π/4, π/2, π, 5π/4, 3π/2}}")]
    NotInRotationSet(i32),
    #[error("angle {0} rad is not representable on the π/8 grid")]
    OffGrid(f64),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("decomposition parameters do not reproduce the target (max deviation {0:e})")]
    DecompositionMismatch(f64),
    #[error("invalid layout: {0}")]
    Layout(String),
    #[error("trap placement failed after {0} attempts")]
    TrapPlacement(usize),
    #[error("measurement pattern: {0}")]
    Pattern(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("invalid circuit: {0}")]
    Circuit(String),
    #[error("analysis: {0}")]
    Analysis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
