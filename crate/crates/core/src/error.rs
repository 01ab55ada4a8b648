use thiserror::Error;

/// Errors produced by the point-set construction and evaluation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {value} at index {index} is outside [0, 1)")]
    OutOfUnitCube { index: usize, value: f64 },

    #[error("dyadic index space overflows u64 (d={d}, h={h})")]
    IndexOverflow { d: usize, h: u32 },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("self-balancing walk failed at step {step}: |<w, v>| = {alignment}, ||w||_inf = {max_abs}, lambda = {lambda}")]
    WalkFailure {
        step: usize,
        alignment: f64,
        max_abs: f64,
        lambda: f64,
    },

    #[error("walk failed at level {level}, node {node}: {source}")]
    TransferenceFailure {
        level: usize,
        node: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("balanced coloring requires an even number of vectors, got {0}")]
    OddLength(usize),

    #[error("expected {expected} points, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("unknown node (level {level}, node {node})")]
    UnknownNode { level: usize, node: usize },

    #[error("sobol dimension {requested} exceeds the shipped table ({available})")]
    SobolDimension { requested: usize, available: usize },

    #[error("sobol sequence supports at most 2^32 points, requested {0}")]
    SobolLength(u64),

    #[error("exact star discrepancy supports d <= 3, got d = {0}; use the grid lower bound instead")]
    ExactDimension(usize),

    #[error("argument {value} outside the open interval (0, 1)")]
    OpenIntervalDomain { value: f64 },

    #[error("infinite weighted variation: frequency {frequency:?} is nonzero in coordinate {coordinate} whose weight is 0")]
    InfiniteVariation {
        frequency: Vec<i64>,
        coordinate: usize,
    },

    #[error("Fourier coefficients are not conjugate-symmetric at {0:?}")]
    NotConjugateSymmetric(Vec<i64>),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
