use thiserror::Error;

/// Errors raised by the tomography workbench.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("operator is not unitary (max deviation {residual:.3e})")]
    NonUnitary { residual: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("pauli labels have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("invalid pauli label `{0}`")]
    InvalidLabel(String),

    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("chi matrix is not completely positive (eigenvalue {min_eigenvalue:.3e})")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("kraus operators are not trace preserving (residual {residual:.3e})")]
    NotTracePreserving { residual: f64 },

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error("parameter `{name}` out of range: {reason}")]
    ParamOutOfRange { name: String, reason: String },

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("{what} needs {requested} qubits, limit is {limit}")]
    SizeLimitExceeded {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("invalid preparation basis: {0}")]
    InvalidBasis(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param_err(name: &str, reason: impl Into<String>) -> Error {
    Error::ParamOutOfRange {
        name: name.to_string(),
        reason: reason.into(),
    }
}
