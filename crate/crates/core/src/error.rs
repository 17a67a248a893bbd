use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown device `{0}`")]
    UnknownDevice(String),
    #[error("invalid lattice dimensions: {0}")]
    InvalidDimensions(String),
    #[error("operation requires a heavy-hex lattice")]
    NotHeavyHex,
    #[error("spin vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("spin entry {value} at index {index} is not ±1")]
    InvalidSpin { index: usize, value: i8 },
    #[error("{n} qubits exceeds the configured cap of {cap}")]
    TooManyQubits { n: usize, cap: usize },
    #[error("value {0} outside the unit interval")]
    OutOfDomain(f64),
    #[error("schedules have mismatched depths")]
    DepthMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("gate on ({0}, {1}) does not act along a lattice edge")]
    NotAnEdge(usize, usize),
    #[error("non-finite tensor entries on site {0}")]
    NonFinite(usize),
    #[error("degenerate local norm while evaluating a term on {0:?}")]
    DegenerateNorm(Vec<usize>),
    #[error("all-zero singular spectrum on edge ({0}, {1})")]
    ZeroSpectrum(usize, usize),
    #[error("boundary compression collapsed to zero norm at column {0}")]
    CompressionFailure(usize),
    #[error("degenerate conditional distribution at qubit {0}")]
    DegenerateConditional(usize),
    #[error("instance {index}: {source}")]
    Instance {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("config error: {0}")]
    Config(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
