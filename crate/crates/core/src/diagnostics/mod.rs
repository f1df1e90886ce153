//! Post-processing of flow output: decay-rate fits, bound checks, and
//! identity residuals that measure discretization quality.

mod bounds;
mod fit;
mod residuals;

use thiserror::Error;

use crate::ambient::AmbientError;
use crate::surface::{GeometrySnapshot, GridMode};

pub use bounds::{check_bounds, check_c0, check_gradient_decay, check_shape_rate, BoundReport, BoundsConfig, ClaimEntry};
pub use fit::{default_window, fit_decay_rate, RateFit};
pub use residuals::{codazzi_residual, normal_curvature_component, support_identity_residual};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticError {
    #[error("{0}")]
    Argument(String),
    #[error("nonpositive sample y = {y} at t = {t}")]
    NonPositive { t: f64, y: f64 },
    #[error("diagnostic not available on {0} grids")]
    UnsupportedMode(GridMode),
    #[error(transparent)]
    Ambient(#[from] AmbientError),
}

/// `max |κ_i − 1|` over all nodes.
pub fn shape_deviation(snapshot: &GeometrySnapshot) -> f64 {
    snapshot
        .nodes
        .iter()
        .flat_map(|g| g.kappa.iter())
        .map(|k| (k - 1.0).abs())
        .fold(0.0, f64::max)
}
