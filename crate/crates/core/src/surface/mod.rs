//! Sphere discretization and graph geometry.

mod derivatives;
mod geometry;
mod grid;

use thiserror::Error;

use crate::ambient::AmbientError;
use crate::symfunc::SymFuncError;

pub use derivatives::{laplacian, polar_derivatives, sphere_derivatives, SphereDerivatives};
pub use geometry::{geometry_from_state, node_geometry, principal_curvatures, GeometrySnapshot, NodeGeometry};
pub use grid::{sphere_volume, GridMode, SphericalGrid, MIN_RESOLUTION};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("grid configuration: {0}")]
    Config(String),
    #[error("metric is not positive definite")]
    NotPositiveDefinite,
    #[error("principal curvatures {kappa:?} at node {node} leave the speed's cone")]
    ConeViolation { node: usize, kappa: Vec<f64> },
    #[error("non-finite areal radius {value} at node {node}")]
    NonFinite { node: usize, value: f64 },
    #[error("node {node}: {source}")]
    Ambient { node: usize, source: AmbientError },
    #[error(transparent)]
    Speed(SymFuncError),
    #[error("node {node}: metric is not positive definite")]
    NotPositiveDefiniteAt { node: usize },
}

impl From<AmbientError> for GeometryError {
    fn from(source: AmbientError) -> Self {
        GeometryError::Ambient { node: 0, source }
    }
}

impl GeometryError {
    pub(crate) fn at_node(self, node: usize) -> Self {
        match self {
            GeometryError::ConeViolation { kappa, .. } => GeometryError::ConeViolation { node, kappa },
            GeometryError::Ambient { source, .. } => GeometryError::Ambient { node, source },
            GeometryError::NotPositiveDefinite => GeometryError::NotPositiveDefiniteAt { node },
            other => other,
        }
    }
}
