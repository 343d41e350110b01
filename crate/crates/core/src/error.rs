use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("invalid noise model: {0}")]
    InvalidNoise(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid counts table: {0}")]
    InvalidCounts(String),
    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),
    #[error("incomplete design: {0}")]
    IncompleteDesign(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("undefined test: {0}")]
    UndefinedTest(String),
    #[error("degenerate stratum: {0}")]
    DegenerateStratum(String),
    #[error("rank-deficient fit: {0}")]
    RankDeficient(String),
    #[error("undefined distinguishability: {0}")]
    UndefinedDistinguishability(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
