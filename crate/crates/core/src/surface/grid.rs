use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use super::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridMode {
    /// A single node: the graph is a constant, every point is equivalent.
    Symmetric,
    /// Functions of the polar angle only, on a staggered polar grid (n = 2).
    Axisymmetric,
    /// Full latitude–longitude grid with staggered latitudes (n = 2).
    LatLong,
}

impl GridMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            GridMode::Symmetric => "symmetric",
            GridMode::Axisymmetric => "axisymmetric",
            GridMode::LatLong => "latlong",
        }
    }
}

impl fmt::Display for GridMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GridMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symmetric" => Ok(GridMode::Symmetric),
            "axisymmetric" | "axisym" => Ok(GridMode::Axisymmetric),
            "latlong" => Ok(GridMode::LatLong),
            other => Err(format!("unknown grid mode '{other}'")),
        }
    }
}

/// Discretization of `S^n`.
///
/// Polar nodes are staggered, `θ_j = (j + ½)Δθ`, so no node sits on a pole.
/// For `LatLong` the node index is `j * n_azimuth + l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalGrid {
    mode: GridMode,
    n: usize,
    n_theta: usize,
    n_azimuth: usize,
    d_theta: f64,
    d_azimuth: f64,
    theta: Vec<f64>,
    azimuth: Vec<f64>,
    weights: Vec<f64>,
}

/// Volume of the round unit `S^n`.
pub fn sphere_volume(n: usize) -> f64 {
    // |S^0| = 2, |S^1| = 2π, |S^n| = 2π/(n−1)·|S^{n−2}|
    let mut v = if n.is_multiple_of(2) { 2.0 } else { 2.0 * PI };
    let mut d = if n.is_multiple_of(2) { 0 } else { 1 };
    while d < n {
        d += 2;
        v *= 2.0 * PI / (d - 1) as f64;
    }
    v
}

pub const MIN_RESOLUTION: usize = 16;

impl SphericalGrid {
    pub fn build(mode: GridMode, n: usize, resolution: usize) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::Config("dimension must be at least 1".into()));
        }
        match mode {
            GridMode::Symmetric => Ok(Self {
                mode,
                n,
                n_theta: 1,
                n_azimuth: 1,
                d_theta: 0.0,
                d_azimuth: 0.0,
                theta: vec![0.0],
                azimuth: vec![0.0],
                weights: vec![sphere_volume(n)],
            }),
            GridMode::Axisymmetric | GridMode::LatLong => {
                if n != 2 {
                    return Err(GeometryError::Config(format!("{mode} grids support n = 2 only, got n = {n}")));
                }
                if resolution < MIN_RESOLUTION {
                    return Err(GeometryError::Config(format!(
                        "resolution {resolution} below minimum {MIN_RESOLUTION}"
                    )));
                }
                let n_theta = resolution;
                let d_theta = PI / n_theta as f64;
                let n_azimuth = if mode == GridMode::LatLong { 2 * n_theta } else { 1 };
                let d_azimuth = 2.0 * PI / n_azimuth as f64;
                let mut theta = Vec::with_capacity(n_theta * n_azimuth);
                let mut azimuth = Vec::with_capacity(n_theta * n_azimuth);
                let mut weights = Vec::with_capacity(n_theta * n_azimuth);
                for j in 0..n_theta {
                    let t = (j as f64 + 0.5) * d_theta;
                    // exact cell area of the latitude band, split over the azimuth cells
                    let band = 2.0 * PI * ((j as f64 * d_theta).cos() - ((j + 1) as f64 * d_theta).cos());
                    for l in 0..n_azimuth {
                        theta.push(t);
                        azimuth.push(l as f64 * d_azimuth);
                        weights.push(band / n_azimuth as f64);
                    }
                }
                Ok(Self { mode, n, n_theta, n_azimuth, d_theta, d_azimuth, theta, azimuth, weights })
            }
        }
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn node_count(&self) -> usize {
        self.theta.len()
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_azimuth(&self) -> usize {
        self.n_azimuth
    }

    pub fn d_theta(&self) -> f64 {
        self.d_theta
    }

    pub fn d_azimuth(&self) -> f64 {
        self.d_azimuth
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn azimuth(&self) -> &[f64] {
        &self.azimuth
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Smallest geodesic spacing between neighbouring nodes along a
    /// discretized direction; `None` when nothing is discretized.
    pub fn min_spacing(&self) -> Option<f64> {
        match self.mode {
            GridMode::Symmetric => None,
            GridMode::Axisymmetric => Some(self.d_theta),
            GridMode::LatLong => Some(self.d_theta.min((0.5 * self.d_theta).sin() * self.d_azimuth)),
        }
    }

    /// Diagonal of the round metric `σ_ij` at `node` in the grid's coordinates.
    ///
    /// Symmetric grids use an orthonormal frame, so this is all ones.
    pub fn round_metric_diag(&self, node: usize) -> Vec<f64> {
        match self.mode {
            GridMode::Symmetric => vec![1.0; self.n],
            _ => {
                let s = self.theta[node].sin();
                vec![1.0, s * s]
            }
        }
    }

    pub fn integrate(&self, field: &[f64]) -> f64 {
        field.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }
}
