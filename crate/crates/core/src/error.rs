use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("n = {0} is not a power of two")]
    NotPowerOfTwo(u64),

    #[error("uncovered parameter regime: p = {p}, beta = {beta} (no case of the lambda selection applies)")]
    UncoveredRegime { p: f64, beta: f64 },

    #[error("deformation fold at x = ({x0}, {x1}): det J = {det}")]
    DeformationFold { x0: f64, x1: f64, det: f64 },

    #[error("origin singularity: the Jacobian of the angular field is undefined at x = 0")]
    OriginSingularity,

    #[error("conjugate gradient did not converge in {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("PDE solve failed at shift {shift}, node {node} (y = {y:?}): {source}")]
    SolveFailed {
        shift: usize,
        node: usize,
        y: Vec<f64>,
        #[source]
        source: Box<Error>,
    },

    #[error("need at least 2 shifts for the RMS error estimate, got {0}")]
    TooFewShifts(usize),

    #[error("empty input")]
    Empty,

    #[error("malformed generating-vector file: {0}")]
    VectorFormat(String),

    #[error("config error in {path}: {msg}")]
    Config { path: PathBuf, msg: String },

    #[error("arithmetic overflow evaluating {0}")]
    Overflow(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
