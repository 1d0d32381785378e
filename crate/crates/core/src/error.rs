use thiserror::Error;

/// Errors raised by the geometric and counting routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions: n = {n}, k = {k} (need 1 <= k < n)")]
    InvalidDims { n: usize, k: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point {index} is not on the reference flat H_{index}: {detail}")]
    MalformedIntersection { index: usize, detail: String },

    #[error("singular interpolation system (|det M| = {det:e})")]
    Singular { det: f64 },

    #[error("degenerate simplex: {0}")]
    Degenerate(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("counterexample found: volume {volume:e} < required {required:e}")]
    Counterexample { volume: f64, required: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("need at least two levels inside the fit range, found {found}")]
    InsufficientLevels { found: usize },

    #[error("no level l satisfies q_l >= 1/l^2")]
    NoQualifyingLevel,

    #[error("no cell center is at distance >= {d0} from the hull of the first {picked} picks")]
    NoCandidate { d0: f64, picked: usize },

    #[error("sampler found no qualifying plane after {attempts} attempts")]
    NoQualifyingPlane { attempts: usize },

    #[error("scale mismatch: cube set level {set_level}, experiment level {expected}")]
    ScaleMismatch { set_level: u32, expected: u32 },

    #[error("planes {first} and {second} are closer than delta ({distance:e} < {delta:e})")]
    NotSeparated {
        first: usize,
        second: usize,
        distance: f64,
        delta: f64,
    },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
