use thiserror::Error;

use crate::model::expr::ExprError;

/// Errors raised by the numerical and geometric routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("expression evaluation failed: {0}")]
    ExpressionEval(#[from] ExprError),

    #[error("point is singular for the inversion (x = 0)")]
    SingularPoint,

    #[error("ball with center norm {center_norm} and radius {radius} contains the origin in its closure")]
    OriginInsideBall { center_norm: f64, radius: f64 },

    #[error("ellipticity violated ({condition}) at sample {sample}: margin {margin:e}")]
    EllipticityViolation {
        condition: &'static str,
        sample: usize,
        margin: f64,
    },

    #[error("solver did not converge after {iterations} iterations (last relative decrease {last_decrease:e})")]
    NotConverged { iterations: usize, last_decrease: f64 },

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("the whole space has no point at infinity on its boundary; classification refused")]
    WholeSpaceRefused,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
