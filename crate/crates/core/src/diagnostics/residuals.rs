//! Discrete defects of identities that hold exactly on smooth graphs. They
//! vanish identically on constant graphs and converge to zero at the order
//! of the difference stencils otherwise.

use super::DiagnosticError;
use crate::ambient::WarpedAmbient;
use crate::surface::{polar_derivatives, GeometrySnapshot, GridMode, NodeGeometry, SphericalGrid};

fn require_axisymmetric(grid: &SphericalGrid, snapshot: &GeometrySnapshot) -> Result<(), DiagnosticError> {
    if grid.mode() != GridMode::Axisymmetric {
        return Err(DiagnosticError::UnsupportedMode(grid.mode()));
    }
    if snapshot.len() != grid.node_count() {
        return Err(DiagnosticError::Argument("snapshot and grid sizes differ".into()));
    }
    Ok(())
}

/// A vector at a point of the ambient: coordinate components along
/// `(∂_θ, ∂_az)` and along `∂_r`.
#[derive(Debug, Clone, Copy)]
struct AmbientVector {
    tangential: [f64; 2],
    radial: f64,
}

/// `R̄(a, b, c, d)` for the warped product, from the two curvature
/// coefficients and the round metric `diag(1, sin²θ)`.
fn ambient_curvature(
    tangential: f64,
    radial: f64,
    sin2: f64,
    a: AmbientVector,
    b: AmbientVector,
    c: AmbientVector,
    d: AmbientVector,
) -> f64 {
    let s = |x: AmbientVector, y: AmbientVector| x.tangential[0] * y.tangential[0] + sin2 * x.tangential[1] * y.tangential[1];
    tangential * (s(a, c) * s(b, d) - s(a, d) * s(b, c))
        + radial
            * (s(a, c) * b.radial * d.radial + a.radial * c.radial * s(b, d)
                - s(a, d) * b.radial * c.radial
                - a.radial * d.radial * s(b, c))
}

/// Unit normal and coordinate tangents `X_θ`, `X_az` of the graph at a node.
fn frame(node: &NodeGeometry) -> (AmbientVector, AmbientVector, AmbientVector) {
    let r_theta = node.rho_grad[0] / node.phi_prime;
    let normal = AmbientVector { tangential: [-r_theta / (node.rho * node.rho * node.v), 0.0], radial: 1.0 / node.v };
    let x_theta = AmbientVector { tangential: [1.0, 0.0], radial: r_theta };
    let x_az = AmbientVector { tangential: [0.0, 1.0], radial: 0.0 };
    (normal, x_theta, x_az)
}

/// Max-norm defect of `∇_k h_ij − ∇_j h_ik = R̄(ν, X_i, X_j, X_k)`.
///
/// On an axisymmetric graph the only independent component is
/// `(i, j, k) = (az, az, θ)`, where with `g = diag(A, B)` the left side
/// reduces to `∂_θ h_az,az − ½ ∂_θB (h_θθ/A + h_az,az/B)`.
pub fn codazzi_residual(
    snapshot: &GeometrySnapshot,
    grid: &SphericalGrid,
    ambient: &WarpedAmbient,
) -> Result<f64, DiagnosticError> {
    require_axisymmetric(grid, snapshot)?;
    // h_az,az = η sin²θ with η smooth and even; only η is differenced
    let eta: Vec<f64> = snapshot
        .nodes
        .iter()
        .zip(grid.theta())
        .map(|(g, t)| g.second_ff[(1, 1)] / t.sin().powi(2))
        .collect();
    let (d_eta, _) = polar_derivatives(&eta, grid.d_theta());
    let mut worst = 0.0_f64;
    for (j, node) in snapshot.nodes.iter().enumerate() {
        let theta = grid.theta()[j];
        let (s, c) = theta.sin_cos();
        let dh_az = d_eta[j] * s * s + eta[j] * 2.0 * s * c;
        let rho = node.rho;
        let a = node.metric[(0, 0)];
        let b = node.metric[(1, 1)];
        let db = 2.0 * rho * node.rho_grad[0] * s * s + 2.0 * rho * rho * s * c;
        let lhs = dh_az - 0.5 * db * (node.second_ff[(0, 0)] / a + node.second_ff[(1, 1)] / b);

        let coeffs = ambient.curvature_coeffs(rho)?;
        let (normal, x_theta, x_az) = frame(node);
        let rhs = ambient_curvature(coeffs.tangential, coeffs.radial, s * s, normal, x_az, x_az, x_theta);
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// Max-norm defect of `∇_i u = g^{kl} h_ik ∇_l Φ` with `∇_l Φ = φ r_l`.
pub fn support_identity_residual(snapshot: &GeometrySnapshot, grid: &SphericalGrid) -> Result<f64, DiagnosticError> {
    require_axisymmetric(grid, snapshot)?;
    let u: Vec<f64> = snapshot.nodes.iter().map(|g| g.u).collect();
    let (du, _) = polar_derivatives(&u, grid.d_theta());
    let mut worst = 0.0_f64;
    for (j, node) in snapshot.nodes.iter().enumerate() {
        let r_theta = node.rho_grad[0] / node.phi_prime;
        let rhs = node.second_ff[(0, 0)] / node.metric[(0, 0)] * node.rho * r_theta;
        worst = worst.max((du[j] - rhs).abs());
    }
    Ok(worst)
}

/// Ambient `R̄(ν, X_az, X_az, X_θ)` at one node, exposed for cross-checks
/// against closed forms.
pub fn normal_curvature_component(node: &NodeGeometry, theta: f64, ambient: &WarpedAmbient) -> Result<f64, DiagnosticError> {
    let coeffs = ambient.curvature_coeffs(node.rho)?;
    let (normal, x_theta, x_az) = frame(node);
    let s = theta.sin();
    Ok(ambient_curvature(coeffs.tangential, coeffs.radial, s * s, normal, x_az, x_az, x_theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::GraphState;
    use crate::surface::geometry_from_state;
    use crate::symfunc::QuotientSpeed;

    fn snapshot(m: f64, res: usize, f: impl Fn(f64) -> f64) -> (GeometrySnapshot, SphericalGrid, WarpedAmbient) {
        let amb = WarpedAmbient::ads(2, m).unwrap();
        let grid = SphericalGrid::build(GridMode::Axisymmetric, 2, res).unwrap();
        let state = GraphState { t: 0.0, rho: grid.theta().iter().map(|&t| f(t)).collect() };
        let snap = geometry_from_state(&state, &grid, &amb, &QuotientSpeed::new(2, 1).unwrap()).unwrap();
        (snap, grid, amb)
    }

    fn bump(t: f64) -> f64 {
        3.0 + 0.3 * (2.0 * t).cos()
    }

    #[test]
    fn residuals_vanish_on_constant_graphs() {
        for m in [0.0, 2.0] {
            let (snap, grid, amb) = snapshot(m, 64, |_| 2.5);
            let c = codazzi_residual(&snap, &grid, &amb).unwrap();
            let s = support_identity_residual(&snap, &grid).unwrap();
            assert!(c <= 1e-12 && s <= 1e-12, "m={m}: codazzi {c}, support {s}");
        }
    }

    #[test]
    fn residuals_converge_at_second_order() {
        for m in [0.0, 2.0] {
            let (mut codazzi, mut support) = (Vec::new(), Vec::new());
            for res in [64, 128, 256] {
                let (snap, grid, amb) = snapshot(m, res, bump);
                codazzi.push(codazzi_residual(&snap, &grid, &amb).unwrap());
                support.push(support_identity_residual(&snap, &grid).unwrap());
            }
            for errs in [&codazzi, &support] {
                for w in errs.windows(2) {
                    assert!((w[0] / w[1]).log2() >= 1.8, "m={m}: {codazzi:?} {support:?}");
                }
            }
        }
    }

    #[test]
    fn normal_component_matches_closed_form() {
        let (snap, grid, amb) = snapshot(2.0, 64, bump);
        for (j, node) in snap.nodes.iter().enumerate() {
            let theta = grid.theta()[j];
            let r_theta = node.rho_grad[0] / node.phi_prime;
            let rho = node.rho;
            let bracket = 1.0 - node.phi_prime.powi(2) + rho * node.phi_second;
            let closed = r_theta * theta.sin().powi(2) / node.v * bracket;
            let got = normal_curvature_component(node, theta, &amb).unwrap();
            assert!((got - closed).abs() <= 1e-12 * closed.abs().max(1.0), "θ={theta} got={got} closed={closed}");
        }
    }

    #[test]
    fn full_grid_is_rejected() {
        let amb = WarpedAmbient::ads(2, 0.0).unwrap();
        let grid = SphericalGrid::build(GridMode::LatLong, 2, 16).unwrap();
        let state = GraphState::constant(2.0, grid.node_count());
        let snap = geometry_from_state(&state, &grid, &amb, &QuotientSpeed::new(2, 1).unwrap()).unwrap();
        assert_eq!(codazzi_residual(&snap, &grid, &amb), Err(DiagnosticError::UnsupportedMode(GridMode::LatLong)));
    }
}
