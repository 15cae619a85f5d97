//! Crate-wide error type.

use crate::optimizer::OptTrace;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error("validation failed for field `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("invalid synthetic device spec: {0}")]
    InvalidSpec(String),

    #[error("qubit index {index} out of range (device has {limit} qubits)")]
    IndexOutOfRange { index: usize, limit: usize },

    #[error("logical qubit {0} is not covered by the circuit map")]
    UnmappedQubit(usize),

    #[error("no edge properties for physical pair ({0}, {1}); route the circuit first")]
    MissingEdgeProps(usize, usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("iteration index {t} outside schedule range 0..={limit}")]
    OutOfRange { t: usize, limit: usize },

    #[error("invalid cycle shape: {0}")]
    InvalidShape(String),

    #[error("candidate map list is empty")]
    EmptyCandidates,

    #[error("no feasible circuit map: {0}")]
    NoFeasibleMap(String),

    #[error("zone allocation failed for job {job}: {message}")]
    AllocationFailure { job: usize, message: String },

    #[error("invalid gate arity: {0}")]
    InvalidArity(String),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("unroutable gate: operands {0} and {1} are not connected inside the map")]
    UnroutableGate(usize, usize),

    #[error("{n} qubits exceeds the supported bound of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("parameter vector has length {got}, circuit expects {expected}")]
    ParamLengthMismatch { expected: usize, got: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("objective evaluation failed after {} iterations: {source}", partial.iteration_count)]
    Objective {
        source: Box<Error>,
        partial: Box<OptTrace>,
    },

    #[error("invalid optimization budget: {0}")]
    InvalidBudget(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("division by zero: {0}")]
    DivisionByZero(String),

    #[error("{n} vertices exceeds the exact-oracle bound of {max}")]
    TooLargeForExact { n: usize, max: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        source: serde_json::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }
}
