use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector norm {norm:e} is too small to normalize")]
    ZeroVector { norm: f64 },

    #[error("vector has a non-finite component")]
    NonFinite,

    /// `index` is 1-based: the pair is `(X_index, X_{index+1})`.
    #[error("cyclicity violation: |<v{index}|v{next}>| = {overlap:e}", next = index % crate::CYCLE_LEN + 1)]
    CyclicityViolation { index: usize, overlap: f64 },

    #[error("state family degenerates to the zero vector at alpha = {alpha}, beta = {beta}")]
    DegenerateState { alpha: f64, beta: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("probability {0} is outside [0, 1]")]
    OutOfRange(f64),

    #[error("exclusivity violation on pair (X{pair}, X{next}): (+1,+1) mass {mass:e}", next = pair % crate::CYCLE_LEN + 1)]
    ExclusivityViolation { pair: usize, mass: f64 },

    #[error("observable index {0} is outside 1..=5")]
    BadIndex(usize),

    #[error("malformed joint-extension targets: {0}")]
    MalformedTargets(String),

    #[error("invalid scan grid: {0}")]
    InvalidGrid(String),

    #[error("invalid observable configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}
