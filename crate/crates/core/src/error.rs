use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FusionError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("quantum factorial [{k}]! vanishes at factor [{j}]")]
    VanishingQuantumFactorial { k: i64, j: i64 },
    #[error("weight {0:?} is not in the open alcove")]
    AlcoveViolation(Vec<i64>),
    #[error("ambiguous numerical rank: singular value gap below threshold ({0})")]
    RankDeficiency(String),
    #[error("module is not completely reducible: {0}")]
    NotCompletelyReducible(String),
    #[error("weight {0:?} does not occur in the decomposition")]
    WeightAbsent(Vec<i64>),
    #[error("Gram form not positive definite: min eigenvalue {0:e}")]
    PositivityFailure(f64),
    #[error("branch collision at power {n}: {detail}")]
    BranchCollision { n: usize, detail: String },
    #[error("levels up to {0} are not available")]
    LevelsUnavailable(usize),
    #[error("memory budget exceeded: need {need_mb} MB, budget {budget_mb} MB")]
    MemoryBudget { need_mb: usize, budget_mb: usize },
    #[error("degree {0} exceeds the Haar threshold {1}")]
    DegreeOverflow(usize, usize),
    #[error("normalizer vanishes: {0}")]
    VanishingNormalizer(String),
    #[error("conjugate block missing for {0:?}")]
    ConjugateMissing(Vec<i64>),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, FusionError>;
