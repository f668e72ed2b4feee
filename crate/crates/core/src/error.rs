//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("consecutive trace points {index} and {} coincide (separation {sep:e})", index + 1)]
    CoincidentPoints { index: usize, sep: f64 },

    #[error("tangents around point {index} are collinear (cross norm {norm:e})")]
    CollinearTriple { index: usize, norm: f64 },

    #[error("matrix is not a valid rotation: {reason}")]
    InvalidRotation { reason: String },

    #[error("concentration eps2 = {eps2:e} is below the 1e-5 series minimum")]
    ConcentrationTooSmall { eps2: f64 },

    #[error("time t = {t:e} is below the {min:e} sampling floor")]
    TimeTooSmall { t: f64, min: f64 },

    #[error("rotation angle {omega} outside the supported interval ({lo}, {hi})")]
    AngleOutOfRange { omega: f64, lo: f64, hi: f64 },

    #[error("input has {got} entries, network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("forward cache from network revision {cache} cannot back-propagate through revision {net}")]
    StaleCache { net: u64, cache: u64 },

    #[error("sample sets have mismatched sizes {left} and {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("non-finite transport cost between samples {i} and {j}")]
    CostOverflow { i: usize, j: usize },

    #[error("brute-force assignment supports n <= {max}, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("unknown target '{name}' (registered: {registered})")]
    UnknownTarget { name: String, registered: String },

    #[error("sample sets live in different spaces")]
    SpaceMismatch,

    #[error("schedule kind does not match paradigm: {0}")]
    ScheduleMismatch(String),

    #[error("target sample set is empty")]
    EmptyTarget,

    #[error("{0}")]
    InvalidConfig(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
