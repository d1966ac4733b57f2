use thiserror::Error;

use crate::euler::Diagnostics;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate lattice basis (det = {det:e})")]
    DegenerateBasis { det: f64 },

    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("field is not mean-zero (|mean coefficient| = {mean:e})")]
    NonZeroMean { mean: f64 },

    #[error("bad exponent {0}: must be >= 1")]
    BadExponent(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid {n1}x{n2} does not resolve first-eigenspace mode ({m}, {n})")]
    GridTooCoarse {
        n1: usize,
        n2: usize,
        m: i64,
        n: i64,
    },

    #[error("coefficients belong to different eigenspaces")]
    MixedEigenspace,

    #[error("unsupported moment order {order} for a {dim}-dimensional eigenspace")]
    UnsupportedMoment { order: u32, dim: usize },

    #[error("cubic has a vanishing leading coefficient")]
    DegenerateLeadingCoefficient,

    #[error("reference state fails its own moment round-trip: {0}")]
    InconsistentMoments(String),

    #[error("numerical blow-up at t = {t}: max |omega| = {max_abs:e}")]
    NumericalBlowup {
        t: f64,
        max_abs: f64,
        partial: Box<Diagnostics>,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
