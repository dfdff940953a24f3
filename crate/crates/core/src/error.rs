//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular matrix: numerical rank {rank} < {dim}")]
    SingularMatrix { rank: usize, dim: usize },
    #[error("iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("quadrature stalled: {0}")]
    QuadratureStall(String),
    #[error("insufficient coefficients: need {needed}, have {available}")]
    InsufficientCoefficients { needed: usize, available: usize },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("point lies on the contour")]
    OnCut,
    #[error("point too close to the integration chain: {0}")]
    TooCloseToChain(String),
    #[error("surface invariant violated: {0}")]
    BuildInvariantViolated(String),
    #[error("integration path crosses a cut: {0}")]
    PathCrossesCut(String),
    #[error("located {found} divisor points, expected {expected}")]
    ZeroCountMismatch { found: usize, expected: usize },
    #[error("evaluation point collides with a divisor point: {0}")]
    DivisorOnEvaluationPoint(String),
    #[error("extrapolation of gamma unstable: {0}")]
    GammaUnstable(String),
    #[error("evaluation point inside exclusion radius: {0}")]
    ExcludedPoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;
