use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing required file {0}")]
    MissingFile(PathBuf),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{file}:{line}: {message}")]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("vectors were built with different hash parameters")]
    ParamsMismatch,

    #[error("noise operation {index} cannot be applied: {reason}")]
    NoiseExhausted { index: usize, reason: &'static str },

    #[error("graph has no nodes")]
    EmptyGraph,

    #[error("tree has {nodes} nodes, exact edit distance is limited to {limit}")]
    TreeTooLarge { nodes: usize, limit: usize },

    #[error("infeasible marginals: source mass {source_mass} vs target mass {target_mass}")]
    Infeasible { source_mass: f64, target_mass: f64 },

    #[error("pair ({i}, {j}): {source}")]
    Pair {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },
}
