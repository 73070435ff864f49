use thiserror::Error;

/// Errors produced by the library operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("data is not persistently exciting: rank([X0; U]) = {rank}, expected {expected}")]
    NotPersistentlyExciting { rank: usize, expected: usize },

    #[error("horizon too short: T = {horizon} but the state dimension is {state_dim}")]
    HorizonTooShort { horizon: usize, state_dim: usize },

    #[error("subspace is not controlled invariant (residual {residual:.3e} > {tolerance:.3e})")]
    NotControlledInvariant { residual: f64, tolerance: f64 },

    #[error("trajectory not informative: rank([U0T; X0T]) = {rank}, expected {expected}")]
    TrajectoryNotInformative { rank: usize, expected: usize },

    #[error("invariance residual exceeds tolerance ({residual:.3e} > {tolerance:.3e})")]
    ResidualExceedsTolerance { residual: f64, tolerance: f64 },

    #[error("block triangularization failed: lower-left block norm {residual:.3e} > {tolerance:.3e}")]
    BlockTriangularizationFailed { residual: f64, tolerance: f64 },

    #[error("degenerate system: R* has dimension {rstar_dim} > 0")]
    DegenerateSystem { rstar_dim: usize },

    #[error("no stealthy attack exists: {0}")]
    NoStealthyAttack(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
