use thiserror::Error;

/// Errors raised while deriving parameters, building designs or running oracles.
#[derive(Debug, Error)]
pub enum Error {
    #[error("at least one non-zero weight class is required")]
    NoWeights,
    #[error("k too small: the asymptotic parametrisation needs k >= 2, got k = {0} (supply overrides for tiny instances)")]
    KTooSmall(usize),
    #[error("k = {k} non-zero items must be fewer than n = {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("design exponent must lie in (0, 1/4), got {0}")]
    EpsOutOfRange(f64),
    #[error("sparsity exponent theta = {0} lies outside (0, 1)")]
    ThetaOutOfRange(f64),
    #[error("invalid rate: {0}")]
    InvalidRate(String),
    #[error("invalid override: {0}")]
    InvalidOverride(String),
    #[error("seed compartments need {needed} non-zero auxiliary labels but only {available} auxiliary items exist")]
    SeedOverflow { needed: usize, available: usize },
    #[error("{candidates} candidate signals exceed the enumeration cap of {cap}")]
    EnumerationCap { candidates: f64, cap: u64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid design: {0}")]
    InvalidDesign(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
