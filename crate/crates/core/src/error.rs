use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("qubit position {0} listed more than once")]
    DuplicatePosition(usize),

    #[error("qubit position {position} outside 1..={n_qubits}")]
    PositionOutOfRange { position: usize, n_qubits: usize },

    #[error("tracing all {n_qubits} qubits leaves a scalar; use the full trace instead")]
    FullTraceNotASpec { n_qubits: usize },

    #[error("{n} qubits requested, layout limit is {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("a layout needs at least one qubit")]
    NoQubits,

    #[error("index {index} outside 0..{bound}")]
    IndexOutOfRange { index: u64, bound: u64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("trace spec is for {spec_qubits} qubits but the state has {state_qubits}")]
    LayoutMismatch { spec_qubits: usize, state_qubits: usize },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("{n} qubits exceeds the cost guard of {max}")]
    CostGuardExceeded { n: usize, max: usize },

    #[error("matrix is not Hermitian (defect {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("eigenvalue {0:e} is below the clamping tolerance")]
    NegativeEigenvalue(f64),

    #[error("matrix dimension {dim} exceeds the dense eigensolver limit {max}")]
    TooLargeForEigensolver { dim: usize, max: usize },

    #[error("state is not normalized (defect {defect:e})")]
    NotNormalized { defect: f64 },

    #[error("method {method} cannot trace positions {positions:?}: {reason}")]
    UnsupportedPartition {
        method: &'static str,
        positions: Vec<usize>,
        reason: &'static str,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated file: expected {expected} values, found {found}")]
    TruncatedFile { expected: usize, found: usize },

    #[error("value {index} is NaN or infinite")]
    InvalidValue { index: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
