use thiserror::Error;

use crate::grid::Axis;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates a domain or grid invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch along {axis:?}: expected {expected}, got {actual}")]
    ShapeMismatch {
        axis: Axis,
        expected: usize,
        actual: usize,
    },

    #[error("grid ({m1}x{m2}) does not match {what}")]
    GridMismatch { m1: usize, m2: usize, what: String },

    /// Cholesky failed: the sweep matrix lost positive definiteness.
    #[error(
        "sweep matrix not positive definite at pivot {pivot} (value {value:e}); \
         order={order}, kappa={kappa}, h={h}, n={n}, tau_sigma={tau_sigma}"
    )]
    NotPositiveDefinite {
        pivot: usize,
        value: f64,
        order: f64,
        kappa: f64,
        h: f64,
        n: usize,
        tau_sigma: f64,
    },

    #[error("non-finite value at step {step}, node (x={x}, y={y})")]
    NonFinite { step: usize, x: f64, y: f64 },

    #[error("u^(n-2) required at step {0} but absent")]
    MissingHistory(usize),

    #[error("oracle scale guard: {unknowns} unknowns exceeds limit {limit}")]
    ScaleGuard { unknowns: usize, limit: usize },

    #[error("degenerate ladder: {0}")]
    DegenerateLadder(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
