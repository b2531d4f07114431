use thiserror::Error;

/// Errors produced by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field has non-zero mean {mean:e}; a mean-zero field is required")]
    NonZeroMean { mean: f64 },
    #[error("invalid L^p exponent {0}")]
    BadExponent(f64),
    #[error("CFL violation at t = {t}: dt = {dt:e} exceeds 0.5*h/max|u| = {limit:e}")]
    CflViolation { t: f64, dt: f64, limit: f64 },
    #[error("time {requested} outside the carrier range [0, {end}]")]
    TimeRangeExceeded { requested: f64, end: f64 },
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("operation requires a deterministic flow; use feynman_kac_vorticity for stochastic ensembles")]
    StochasticFlowNotAllowed,
    #[error("operation requires a stochastic flow; use lagrangian_vorticity for deterministic ensembles")]
    DeterministicFlowNotAllowed,
    #[error("ensembles cannot be compared: {0}")]
    MismatchedEnsembles(String),
    #[error("eps must be positive and finite, got {0}")]
    BadEps(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("rate fit needs at least {needed} ladder points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("power-law fit requires strictly positive errors (index {index}: {value:e})")]
    NonPositiveError { index: usize, value: f64 },
    #[error("renormalization function must vanish near zero: {0}")]
    BadBeta(String),
    #[error("convex renormalization functional increased by {increase:e} at t = {t}")]
    RenormalizationIncrease { t: f64, increase: f64 },
    #[error("invalid radii: need 0 < 2r < R, got r = {r}, R = {big_r}")]
    BadRadii { r: f64, big_r: f64 },
    #[error("inequality violated: {0}")]
    BoundViolation(String),
    #[error("vorticity support reaches the box margin: {0}")]
    SupportViolation(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("time history is inconsistent: {0}")]
    HistoryGap(String),
    #[error("invalid kernel cutoff: {0}")]
    BadCutoff(String),
    #[error("malformed binary container: {0}")]
    BadContainer(String),
}

pub type Result<T> = std::result::Result<T, Error>;
