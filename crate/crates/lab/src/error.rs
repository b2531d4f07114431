use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("unknown initial datum `{0}`")]
    UnknownDatum(String),
    #[error("invalid datum parameters: {0}")]
    BadParams(String),
    #[error("datum with alpha = {alpha} is not in L^{p} (alpha * p = {} >= 2)", alpha * p)]
    NotInLp { alpha: f64, p: f64 },
    #[error(transparent)]
    Core(#[from] inviscid_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("plot error: {0}")]
    Plot(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
