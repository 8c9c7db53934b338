use thiserror::Error;

use crate::solver::LassoFit;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate dictionary: column {index} has empirical norm zero")]
    DegenerateColumn { index: usize },

    #[error("unsupported design dimension {dim}: Heaviside enumeration handles d in {{1, 2}}")]
    UnsupportedDimension { dim: usize },

    #[error(
        "solver did not reach tolerance after {iterations} iterations \
         (best KKT violation {kkt_violation:.3e})"
    )]
    NonConvergence {
        kkt_violation: f64,
        iterations: usize,
        best: Box<LassoFit>,
    },

    #[error("solver failed at truncation level p={p}: {source}")]
    SolverAtLevel {
        p: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("solver failed in replication {index}: {source}")]
    Replication {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("outside the valid regime: {0}")]
    Regime(String),

    #[error(
        "delta-grid widening exhausted: achieved bracket [{lo:.3e}, {hi:.3e}] \
         without interior infimum"
    )]
    GridWidening { lo: f64, hi: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown experiment {0:?}; see `list-experiments`")]
    UnknownExperiment(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
