use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid rectangle: {0}")]
    InvalidRectangle(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid weight: {0}")]
    InvalidWeight(String),

    #[error("invalid base measure: {0}")]
    InvalidBaseMeasure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("point {index} = ({re}, {im}) lies outside the domain")]
    OutsideDomain { index: usize, re: f64, im: f64 },

    #[error("singular configuration: points {i} and {j} coincide")]
    SingularConfiguration { i: usize, j: usize },

    #[error("weight kind `{0}` does not support gradients")]
    UnsupportedKind(&'static str),

    #[error(
        "moment neighborhood infeasible at d = {d}: worst gap {gap:.3e} at moment ({n1},{n2}) vs epsilon {epsilon:.3e}"
    )]
    Infeasible {
        d: usize,
        n1: u32,
        n2: u32,
        gap: f64,
        epsilon: f64,
    },

    #[error("chain never entered the constraint set (inside fraction 0 at rho = {rho:.3e}); try a larger epsilon")]
    ChainInitialization { rho: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
