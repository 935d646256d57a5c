use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("negative density {value} sampled at ({x}, {y})")]
    NegativeDensity { value: f64, x: f64, y: f64 },

    #[error("measures live on different spaces: {0} vs {1}")]
    SpaceMismatch(String, String),

    #[error("measure has zero total mass")]
    ZeroMass,

    #[error("renormalization did not converge after {iterations} iterations (residual {residual:e}, |xi| = {xi_norm})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        xi_norm: f64,
    },

    #[error("conformal map is not certified univalent: {0}")]
    NotUnivalent(String),

    #[error("point ({0}, {1}) lies outside the cap")]
    EvaluationOutsideCap(f64, f64),

    #[error("measure is not laid out on a composite polar grid")]
    GridMismatch,

    #[error("no multiple cap found: best gap {gap:e} at r = {r}, angle = {angle}")]
    NotFound { gap: f64, r: f64, angle: f64 },

    #[error("direction field degenerates on the loop (gap {gap:e} at angle {angle})")]
    DegenerateField { gap: f64, angle: f64 },

    #[error("dimension {0} is even")]
    EvenDimension(usize),

    #[error("dimension {0} is not supported on this path")]
    DimensionUnsupported(usize),

    #[error("measure is not multiple (gap {gap:e} exceeds {tolerance:e})")]
    NotMultiple { gap: f64, tolerance: f64 },

    #[error("invalid domain spec: {0}")]
    InvalidSpec(String),

    #[error("neck width {width} is below 4h = {limit}")]
    NeckTooNarrow { width: f64, limit: f64 },

    #[error("degenerate triangle {index} (signed area {area:e})")]
    DegenerateTriangle { index: usize, area: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),

    #[error("matrix is not positive definite at pivot {0}")]
    NotPositiveDefinite(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
