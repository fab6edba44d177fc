use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("decomposition failed: non-positive pivot at index {pivot}")]
    Decomposition { pivot: usize },

    #[error("rank deficiency: {deficient} of {requested} requested columns are not supported by the data")]
    RankDeficient { requested: usize, deficient: usize },

    #[error("division by zero in {0}")]
    DivisionByZero(&'static str),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid oracle: {0}")]
    InvalidOracle(String),

    #[error("impossible outcome: qubit {qubit} = {outcome} has probability {probability:e}")]
    ImpossibleOutcome {
        qubit: usize,
        outcome: u8,
        probability: f64,
    },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("resource refusal: {required} qubits required, budget is {budget}")]
    ResourceRefusal { required: usize, budget: usize },

    #[error("resource refusal: the state would hold up to {entries} basis states, limit is {limit}")]
    StateTooLarge { entries: usize, limit: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
