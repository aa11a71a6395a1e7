use thiserror::Error;

use crate::geometry::Point;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures surfaced by the geometry, moving-planes, Harnack, solver and
/// stability layers.
///
/// Variants fall in two groups: input/precondition violations (see
/// [`Error::is_validation`]) and numerical failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("not star-shaped: boundary radius {rho:.3e} at angle {angle:.6} rad")]
    NotStarShaped { angle: f64, rho: f64 },

    #[error("domain flagged convex but boundary curvature {curvature:.3e} < 0 at angle {angle:.6} rad")]
    NotConvex { angle: f64, curvature: f64 },

    #[error("degenerate boundary: {0}")]
    DegenerateBoundary(String),

    #[error("non-unit direction: |omega| = {norm}")]
    NonUnitDirection { norm: f64 },

    #[error("point ({}, {}) is outside the domain", .point.x, .point.y)]
    OutsideDomain { point: Point },

    #[error("parallel set not guaranteed smooth: delta {delta} >= r_Omega {r_omega}")]
    ParallelSetNotSmooth { delta: f64, r_omega: f64 },

    #[error("containment never fails above lower bound {lower}")]
    NoBracket { lower: f64 },

    #[error("critical value inconsistent: neither tangency nor orthogonality at lambda = {lambda}")]
    CriticalValueInconsistent { lambda: f64 },

    #[error("half-ball escapes the cap at ({}, {})", .point.x, .point.y)]
    HalfBallEscapes { point: Point },

    #[error("cone from vertex ({}, {}) escapes the cap at ({}, {})", .vertex.x, .vertex.y, .escape.x, .escape.y)]
    ConeEscapes { vertex: Point, escape: Point },

    #[error("grid spacing {h} too coarse (need h <= {max})")]
    GridTooCoarse { h: f64, max: f64 },

    #[error("grid has no interior nodes")]
    EmptyGrid,

    #[error("no convergence after {iterations} iterations (last residual {:.3e})", .residuals.last().copied().unwrap_or(f64::NAN))]
    NoConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("positivity violated: min u = {min:.3e}")]
    PositivityViolated { min: f64 },

    #[error("coefficient |c| = {value:.6e} exceeds Lipschitz bound {bound:.6e}")]
    LipschitzViolated { value: f64, bound: f64 },

    #[error("not a positive solution on the cone: value {value:.3e}")]
    NotPositive { value: f64 },

    #[error("empty set: {0}")]
    Empty(String),

    #[error("outside stability regime: seminorm {seminorm:.3e} > eps {eps:.3e}")]
    OutsideRegime { seminorm: f64, eps: f64 },

    #[error("linear solver: {0}")]
    LinearSolver(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for input and precondition errors, false for numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_)
                | Error::NotStarShaped { .. }
                | Error::NotConvex { .. }
                | Error::NonUnitDirection { .. }
                | Error::OutsideDomain { .. }
                | Error::ParallelSetNotSmooth { .. }
                | Error::GridTooCoarse { .. }
                | Error::OutsideRegime { .. }
                | Error::Json(_)
        )
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
