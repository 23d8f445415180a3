use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree sequence has odd half-edge sum {0}")]
    OddHalfEdgeSum(u64),

    #[error("bipartite sides are unbalanced: side 1 has {side1} half-edges, side 2 has {side2}")]
    UnbalancedSides { side1: u64, side2: u64 },

    #[error("graph has {vertices} vertices, above the canonicalization limit {limit}")]
    TooLargeForCanonicalization { vertices: usize, limit: usize },

    #[error("sampling rate {rate} exceeds one (t = {t}, e(G) = {edges})")]
    RateExceedsOne { rate: f64, t: f64, edges: u64 },

    #[error("graph has no non-loop edges; the canonical sampling rate is undefined")]
    NoEdges,

    #[error("label collision persisted after {0} redraws")]
    CollisionRetry(usize),

    #[error("multigraphex fails condition {condition}: {detail}")]
    ValidationFailure { condition: String, detail: String },

    #[error(
        "estimated missed edge mass {missed} beyond the feature cutoff exceeds budget {budget}"
    )]
    TruncationBudgetExceeded { missed: f64, budget: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
