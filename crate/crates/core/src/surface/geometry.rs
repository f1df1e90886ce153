//! Extrinsic geometry of the graph `ρ = ρ(x)` over `S^n`.
//!
//! With `ϕ = ∫ dr/φ` and `dϕ/dρ = 1/(ρφ′)` the graph quantities are
//!
//! ```text
//! ϕ_i  = ρ_i / (ρφ′)
//! ϕ_ij = ρ_ij / (ρφ′) − (φ′² + ρφ″) / (ρφ′)² · ρ_i ρ_j / φ′
//! v    = √(1 + |∇ϕ|²_σ)
//! g_ij = ρ² (σ_ij + ϕ_i ϕ_j)
//! h_ij = (ρ/v) (φ′ (σ_ij + ϕ_i ϕ_j) − ϕ_ij)
//! ```
//!
//! and the principal curvatures are the eigenvalues of `g^{-1} h`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::derivatives::sphere_derivatives;
use super::grid::SphericalGrid;
use super::GeometryError;
use crate::ambient::WarpedAmbient;
use crate::flow::GraphState;
use crate::symfunc::{CurvatureSpeed, CurvatureVector, SymFuncError};

#[derive(Debug, Clone, PartialEq)]
pub struct NodeGeometry {
    pub rho: f64,
    pub phi_prime: f64,
    pub phi_second: f64,
    /// Coordinate gradient of `ρ`.
    pub rho_grad: DVector<f64>,
    /// Coordinate gradient of the potential `ϕ`.
    pub grad_phi: DVector<f64>,
    /// `|∇ϕ|` in the round metric.
    pub grad_phi_norm: f64,
    pub v: f64,
    pub metric: DMatrix<f64>,
    pub second_ff: DMatrix<f64>,
    pub kappa: CurvatureVector,
    pub speed: f64,
    /// `∂F/∂κ_i` in the eigenframe, same order as `kappa`.
    pub speed_grad: Vec<f64>,
    /// Support function `⟨φ∂_r, ν⟩ = φ/v`.
    pub u: f64,
    /// `∂ϕ/∂t = v/(φF)`.
    pub phi_dot: f64,
}

impl NodeGeometry {
    /// `dρ/dt = φ′ v / F`.
    pub fn rho_rate(&self) -> f64 {
        self.phi_prime * self.v / self.speed
    }

    /// Upper bound on the largest eigenvalue, relative to `σ`, of the
    /// linearized diffusion tensor `F^{ik} σ̃^{kj} / (φ² F²)`.
    ///
    /// Uses `σ̃ = φ² g^{-1} ≤ σ`, so the bound is attained at umbilic points.
    pub fn diffusion_bound(&self) -> f64 {
        let fmax = self.speed_grad.iter().copied().fold(0.0, f64::max);
        fmax / (self.rho * self.rho * self.speed * self.speed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySnapshot {
    pub t: f64,
    pub nodes: Vec<NodeGeometry>,
}

impl GeometrySnapshot {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn rho_rates(&self) -> Vec<f64> {
        self.nodes.iter().map(NodeGeometry::rho_rate).collect()
    }

    fn fold(&self, f: impl Fn(&NodeGeometry) -> f64, init: f64, op: fn(f64, f64) -> f64) -> f64 {
        self.nodes.iter().map(f).fold(init, op)
    }

    pub fn rho_min(&self) -> f64 {
        self.fold(|g| g.rho, f64::INFINITY, f64::min)
    }

    pub fn rho_max(&self) -> f64 {
        self.fold(|g| g.rho, f64::NEG_INFINITY, f64::max)
    }

    pub fn speed_min(&self) -> f64 {
        self.fold(|g| g.speed, f64::INFINITY, f64::min)
    }

    pub fn speed_max(&self) -> f64 {
        self.fold(|g| g.speed, f64::NEG_INFINITY, f64::max)
    }

    pub fn kappa_min(&self) -> f64 {
        self.fold(|g| g.kappa.min(), f64::INFINITY, f64::min)
    }

    pub fn kappa_max(&self) -> f64 {
        self.fold(|g| g.kappa.max(), f64::NEG_INFINITY, f64::max)
    }

    pub fn grad_phi_max(&self) -> f64 {
        self.fold(|g| g.grad_phi_norm, 0.0, f64::max)
    }

    pub fn phi_dot_max(&self) -> f64 {
        self.fold(|g| g.phi_dot.abs(), 0.0, f64::max)
    }
}

/// Eigenvalues of `g^{-1} h`, ascending.
///
/// `n = 2` uses the closed-form roots of `det(h − κ g) = 0`; larger `n` goes
/// through the congruence `L^{-1} h L^{-T}` with `g = L Lᵀ`.
pub fn principal_curvatures(g: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<CurvatureVector, GeometryError> {
    let n = g.nrows();
    match n {
        1 => {
            if !(g[(0, 0)] > 0.0) {
                return Err(GeometryError::NotPositiveDefinite);
            }
            Ok(CurvatureVector::new(vec![h[(0, 0)] / g[(0, 0)]]))
        }
        2 => {
            let a = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
            if !(g[(0, 0)] > 0.0 && a > 0.0) {
                return Err(GeometryError::NotPositiveDefinite);
            }
            // N = adj(g)·h has eigenvalues a·κ; its discriminant avoids b² − 4ac cancellation at umbilics
            let n00 = g[(1, 1)] * h[(0, 0)] - g[(0, 1)] * h[(1, 0)];
            let n01 = g[(1, 1)] * h[(0, 1)] - g[(0, 1)] * h[(1, 1)];
            let n10 = g[(0, 0)] * h[(1, 0)] - g[(1, 0)] * h[(0, 0)];
            let n11 = g[(0, 0)] * h[(1, 1)] - g[(1, 0)] * h[(0, 1)];
            let b = n00 + n11;
            let c = h[(0, 0)] * h[(1, 1)] - h[(0, 1)] * h[(1, 0)];
            let disc = ((n00 - n11).powi(2) + 4.0 * n01 * n10).max(0.0).sqrt();
            let q = 0.5 * (b + b.signum() * disc);
            let roots = if q == 0.0 { vec![0.0, 0.0] } else { vec![q / a, c / q] };
            Ok(CurvatureVector::new(roots))
        }
        _ => {
            let chol = g.clone().cholesky().ok_or(GeometryError::NotPositiveDefinite)?;
            let l = chol.l();
            let linv = l.clone().try_inverse().ok_or(GeometryError::NotPositiveDefinite)?;
            let mut m = &linv * h * linv.transpose();
            m = 0.5 * (&m + m.transpose());
            let eig = SymmetricEigen::new(m);
            Ok(CurvatureVector::new(eig.eigenvalues.iter().copied().collect()))
        }
    }
}

/// Builds the per-node geometry from `ρ`, its coordinate derivatives and the
/// round metric (diagonal, coordinate basis).
pub fn node_geometry<S: CurvatureSpeed>(
    rho: f64,
    rho_grad: &DVector<f64>,
    rho_hess: &DMatrix<f64>,
    round_metric: &[f64],
    ambient: &WarpedAmbient,
    speed: &S,
) -> Result<NodeGeometry, GeometryError> {
    let n = round_metric.len();
    let warp = ambient.warp_derivatives(rho)?;
    let (fp, fpp) = (warp.phi_prime, warp.phi_second);
    let scale = 1.0 / (rho * fp);
    let grad_phi = rho_grad * scale;
    let quad = -(fp * fp + rho * fpp) * scale * scale / fp;
    let hess_phi = rho_hess * scale + (rho_grad * rho_grad.transpose()) * quad;

    let norm_sq: f64 = (0..n).map(|i| grad_phi[i] * grad_phi[i] / round_metric[i]).sum();
    let v = (1.0 + norm_sq).sqrt();
    let mut tangent = &grad_phi * grad_phi.transpose();
    for (i, s) in round_metric.iter().enumerate() {
        tangent[(i, i)] += s;
    }
    let metric = &tangent * (rho * rho);
    let second_ff = (&tangent * fp - hess_phi) * (rho / v);
    let kappa = principal_curvatures(&metric, &second_ff)?;
    let (f, f_grad) = speed.value_and_gradient(&kappa).map_err(|e| match e {
        SymFuncError::ConeViolation { .. } => GeometryError::ConeViolation { node: 0, kappa: kappa.to_vec() },
        other => GeometryError::Speed(other),
    })?;
    Ok(NodeGeometry {
        rho,
        phi_prime: fp,
        phi_second: fpp,
        rho_grad: rho_grad.clone(),
        grad_phi,
        grad_phi_norm: norm_sq.sqrt(),
        v,
        metric,
        second_ff,
        kappa,
        speed: f,
        speed_grad: f_grad,
        u: rho / v,
        phi_dot: v / (rho * f),
    })
}

pub fn geometry_from_state<S: CurvatureSpeed>(
    state: &GraphState,
    grid: &SphericalGrid,
    ambient: &WarpedAmbient,
    speed: &S,
) -> Result<GeometrySnapshot, GeometryError> {
    if state.rho.len() != grid.node_count() {
        return Err(GeometryError::Config(format!(
            "state has {} nodes, grid has {}",
            state.rho.len(),
            grid.node_count()
        )));
    }
    if let Some((node, &rho)) = state.rho.iter().enumerate().find(|(_, r)| !r.is_finite()) {
        return Err(GeometryError::NonFinite { node, value: rho });
    }
    let d = sphere_derivatives(&state.rho, grid);
    let nodes = (0..grid.node_count())
        .map(|node| {
            node_geometry(
                state.rho[node],
                &d.gradient[node],
                &d.hessian[node],
                &grid.round_metric_diag(node),
                ambient,
                speed,
            )
            .map_err(|e| e.at_node(node))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GeometrySnapshot { t: state.t, nodes })
}
