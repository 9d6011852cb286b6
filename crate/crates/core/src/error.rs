use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension {0} is not a power of two")]
    NotQubitDimension(usize),

    #[error("wire {wire} out of range for {qubits} qubits")]
    WireOutOfRange { wire: usize, qubits: usize },

    #[error("invalid wire selection: {0}")]
    InvalidWires(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("{what} is not unitary (deviation {deviation:.3e})")]
    NotUnitary { what: String, deviation: f64 },

    #[error("channel is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),

    #[error("parameter {name} = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("zero vector has no extraction unitary")]
    ZeroVector,

    #[error("unknown outcome (x={x}, a={a})")]
    UnknownOutcome { x: usize, a: usize },

    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),

    #[error("strategy count {count} exceeds the guard of {limit}")]
    TooManyStrategies { count: u128, limit: usize },

    #[error("SDP infeasible: {0}")]
    Infeasible(String),

    #[error("SDP solver did not converge after {iterations} iterations (gap {gap:.3e})")]
    NotConverged { iterations: usize, gap: f64 },

    #[error("post-selection impossible: success probability {0:.3e}")]
    PostSelectionImpossible(f64),

    #[error("no crossing: {0}")]
    NoCrossing(String),

    #[error("gate {0} has no unitary")]
    NoUnitary(String),

    #[error("invalid device profile: {0}")]
    InvalidProfile(String),

    #[error("no two-qubit gate entry for qubits ({0}, {1}) in profile")]
    UnknownGatePair(usize, usize),

    #[error("no noise parameters for qubit {0} in profile")]
    MissingQubit(usize),

    #[error("decomposition differs from its reference unitary by {0:.3e}")]
    DecompositionMismatch(f64),

    #[error("{0} invariant check(s) failed")]
    VerificationFailed(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code: 1 for validation errors, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotConverged { .. }
            | Error::PostSelectionImpossible(_)
            | Error::DecompositionMismatch(_)
            | Error::VerificationFailed(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn out_of_range(name: &'static str, value: f64, min: f64, max: f64) -> Self {
        Error::OutOfRange {
            name,
            value,
            min,
            max,
        }
    }
}

/// Checks `min <= value <= max`, rejecting NaN.
pub(crate) fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    if value.is_nan() || value < min || value > max {
        Err(Error::out_of_range(name, value, min, max))
    } else {
        Ok(())
    }
}
