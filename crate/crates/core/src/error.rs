use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid flag type: {0}")]
    InvalidFlag(String),

    #[error("invalid lambda: {0}")]
    InvalidLambda(String),

    #[error("invalid index set: {0}")]
    InvalidIndexSet(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("lambda must be integral for {0}")]
    NonIntegral(&'static str),

    #[error("polytope is not full-dimensional")]
    Degenerate,

    #[error("polytope is not reflexive")]
    NotReflexive,

    #[error("point lies outside the polytope")]
    OutsidePolytope,

    #[error("interlacing violated at position {position}: {detail}")]
    Interlacing { position: usize, detail: String },

    #[error("facet {0} is not active at the vertex")]
    RayNotActive(usize),

    #[error("selected equalities contain a loop")]
    EqualityLoop,

    #[error("ray selection is rank deficient")]
    RankDeficient,

    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),

    #[error("Plücker point is not normalized (block of size {size}: norm² = {norm})")]
    Unnormalized { size: usize, norm: f64 },

    #[error("malformed relation: {0}")]
    MalformedRelation(String),

    #[error("point is not critical (relative gradient {0:e})")]
    NotCritical(f64),

    #[error("Newton iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("continuation lost the branch at T = {0:e}")]
    BranchLost(f64),

    #[error("line search failed: {0}")]
    LineSearch(String),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("only full flags are supported here")]
    PartialFlag,
}
