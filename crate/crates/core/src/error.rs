//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid anisotropy: {0}")]
    InvalidAnisotropy(String),
    #[error("operation requires a smooth or regularized anisotropy, got {0}")]
    KindUnsupported(&'static str),
    #[error("anisotropy is not elliptic: min ψ = {min_psi}")]
    NonElliptic { min_psi: f64 },
    #[error("regularization parameter out of range: ε = {0} (need 0 < ε ≤ 1)")]
    EpsilonOutOfRange(f64),
    #[error("Wulff resolution must be at least 3, got {0}")]
    ResolutionTooSmall(usize),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("degenerate edge of length {len} at sample {index}")]
    DegenerateEdge { index: usize, len: f64 },
    #[error("offset |d| = {d} exceeds the admissible radius {radius}")]
    OffsetRadiusExceeded { d: f64, radius: f64 },
    #[error("curve is not admissible for the crystalline anisotropy: {0}")]
    NonAdmissible(String),

    #[error("time step {dt} violates CFL bound {bound}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("curvature overflow: max |κ| = {max_kappa}")]
    CurvatureOverflow { max_kappa: f64 },
    #[error("consecutive supporting lines are parallel (facets {0} and {1})")]
    ParallelSupportLines(usize, usize),
    #[error("facet {facet} length crossed zero within the step")]
    FacetCrossedZero { facet: usize },
    #[error("frames {0} and {1} are not parametrization-aligned")]
    FramesNotAligned(usize, usize),
    #[error("trace did not approach blow-up: {0}")]
    NotApproachingBlowup(String),

    #[error("no valid graph cover: {0}")]
    NoValidCover(String),
    #[error("gluing failure at witness sample {witness}: pieces disagree by {mismatch}")]
    GluingFailure { witness: usize, mismatch: f64 },
    #[error("morphology: {0}")]
    Morphology(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
