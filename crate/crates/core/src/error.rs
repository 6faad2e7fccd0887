use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree {n} exceeds the configured cap n_max = {n_max}")]
    DegreeOverflow { n: usize, n_max: usize },

    #[error("Hermite recurrence exceeded the magnitude cap at degree {n}, z = {z}")]
    OverflowGuard { n: usize, z: Complex64 },

    #[error("point {z} lies outside the closed disk of radius {radius}")]
    OutsideDisk { z: Complex64, radius: f64 },

    #[error("adaptive quadrature hit depth cap {depth} (error estimate {estimate:e})")]
    ToleranceNotMet { depth: usize, estimate: f64 },

    #[error("|eps| = {eps} must be < 1")]
    EpsOutOfRange { eps: f64 },

    #[error("eps = {eps} outside the convergence regime (must be < {limit})")]
    EpsRegime { eps: f64, limit: f64 },

    #[error("pointwise product needs chaos order <= 1, found order {order}")]
    OrderTooHigh { order: u32 },

    #[error("weight product diverges: exponent {l} < convergence exponent {d}")]
    Divergence { l: u32, d: u32 },

    #[error("Riemann sums did not meet the Cauchy criterion after {levels} refinements (last gap {gap:e})")]
    NoConvergence { levels: usize, gap: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid multi-index: {0}")]
    InvalidMultiIndex(String),

    #[error("cannot parse contour: {0}")]
    ParseContour(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
