use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate window: {0}")]
    DegenerateWindow(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("seed collision: streams {first:?} and {second:?} both derive seed {seed:#x}")]
    SeedCollision {
        seed: u64,
        first: (u64, u64),
        second: (u64, u64),
    },
    #[error("sample times must be strictly increasing (index {index}: {prev} then {next})")]
    UnsortedTimes { index: usize, prev: f64, next: f64 },
    #[error("window not saturated after {slabs} time slabs")]
    SaturationFailure { slabs: usize },
    #[error("all sites are collinear")]
    Collinear,
    #[error("need at least {needed} sites, got {got}")]
    TooFewSites { needed: usize, got: usize },
    #[error("duplicate site {0} at ({1}, {2})")]
    DuplicateSite(usize, f64, f64),
    #[error("point ({0}, {1}) lies outside the window")]
    OutsideWindow(f64, f64),
    #[error("vertices {0} and {1} are not connected")]
    Disconnected(usize, usize),
    #[error("dilation hop {0} -> {1} is not a graph edge")]
    MissingEdge(usize, usize),
    #[error("cube at ({0}, {1}) contains no site")]
    EmptyCube(f64, f64),
    #[error("unknown speed distribution `{0}`")]
    UnknownDistribution(String),
    #[error("sigma curve is not strictly increasing at r = {0}")]
    NotIncreasing(f64),
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("slope {slope} of the majorant exceeds epsilon {epsilon}; increase the block base M")]
    SlopeBound { slope: f64, epsilon: f64 },
    #[error("insufficient data: {0}")]
    Insufficient(String),
    #[error("excessive censoring: {censored} of {total} replicas censored")]
    ExcessiveCensoring { censored: usize, total: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("schema mismatch: expected {expected}, found {found}")]
    Schema { expected: String, found: String },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
