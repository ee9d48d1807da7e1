use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported space dimension {0} (expected {1})")]
    UnsupportedDimension(usize, &'static str),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("bump radius {radius} exceeds L/4 = {limit}")]
    BumpTooLarge { radius: f64, limit: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("light cone wraps the periodic box: t = {t}, radius = {radius}, L/2 = {half_length}")]
    WrapBound { t: f64, radius: f64, half_length: f64 },

    #[error("quadrature did not converge: estimated error {achieved:e} > target {target:e}")]
    NonConvergence { achieved: f64, target: f64 },

    #[error("epsilon extrapolation diverged: {0}")]
    ExtrapolationDivergence(String),

    #[error("malformed field dump: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
