//! Covariant derivatives of scalar fields on the round sphere.
//!
//! Second-order central differences. Ghost values across a pole come from
//! the even extension: on the polar axis `f(−θ) = f(θ)`, and on the full
//! grid `f(−θ, a) = f(θ, a + π)`.

use nalgebra::{DMatrix, DVector};

use super::grid::{GridMode, SphericalGrid};

/// Gradient components `∂_i f` and covariant Hessian `∇_i∇_j f` per node,
/// both in the grid's coordinate basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereDerivatives {
    pub gradient: Vec<DVector<f64>>,
    pub hessian: Vec<DMatrix<f64>>,
}

pub fn sphere_derivatives(field: &[f64], grid: &SphericalGrid) -> SphereDerivatives {
    assert_eq!(field.len(), grid.node_count(), "field length does not match grid");
    let n = grid.n();
    match grid.mode() {
        GridMode::Symmetric => SphereDerivatives {
            gradient: vec![DVector::zeros(n); field.len()],
            hessian: vec![DMatrix::zeros(n, n); field.len()],
        },
        GridMode::Axisymmetric => axisymmetric(field, grid),
        GridMode::LatLong => latlong(field, grid),
    }
}

/// `(f′, f″)` along the polar axis with even reflection at both poles.
pub fn polar_derivatives(field: &[f64], d_theta: f64) -> (Vec<f64>, Vec<f64>) {
    let last = field.len() - 1;
    let at = |j: isize| -> f64 {
        if j < 0 {
            field[(-j - 1) as usize]
        } else if j as usize > last {
            field[2 * last + 1 - j as usize]
        } else {
            field[j as usize]
        }
    };
    let mut first = Vec::with_capacity(field.len());
    let mut second = Vec::with_capacity(field.len());
    for j in 0..field.len() as isize {
        let (lo, mid, hi) = (at(j - 1), at(j), at(j + 1));
        first.push((hi - lo) / (2.0 * d_theta));
        second.push((hi - 2.0 * mid + lo) / (d_theta * d_theta));
    }
    (first, second)
}

fn axisymmetric(field: &[f64], grid: &SphericalGrid) -> SphereDerivatives {
    let (first, second) = polar_derivatives(field, grid.d_theta());
    let mut gradient = Vec::with_capacity(field.len());
    let mut hessian = Vec::with_capacity(field.len());
    for (j, &theta) in grid.theta().iter().enumerate() {
        gradient.push(DVector::from_vec(vec![first[j], 0.0]));
        let az = theta.sin() * theta.cos() * first[j];
        hessian.push(DMatrix::from_row_slice(2, 2, &[second[j], 0.0, 0.0, az]));
    }
    SphereDerivatives { gradient, hessian }
}

fn latlong(field: &[f64], grid: &SphericalGrid) -> SphereDerivatives {
    let nt = grid.n_theta() as isize;
    let na = grid.n_azimuth() as isize;
    let half = na / 2;
    let (dt, da) = (grid.d_theta(), grid.d_azimuth());
    let at = |j: isize, l: isize| -> f64 {
        let (j, l) = if j < 0 {
            (-j - 1, l + half)
        } else if j >= nt {
            (2 * nt - 1 - j, l + half)
        } else {
            (j, l)
        };
        field[(j * na + l.rem_euclid(na)) as usize]
    };
    let mut gradient = Vec::with_capacity(field.len());
    let mut hessian = Vec::with_capacity(field.len());
    for j in 0..nt {
        let theta = grid.theta()[(j * na) as usize];
        let (s, c) = theta.sin_cos();
        for l in 0..na {
            let f0 = at(j, l);
            let ft = (at(j + 1, l) - at(j - 1, l)) / (2.0 * dt);
            let fa = (at(j, l + 1) - at(j, l - 1)) / (2.0 * da);
            let ftt = (at(j + 1, l) - 2.0 * f0 + at(j - 1, l)) / (dt * dt);
            let faa = (at(j, l + 1) - 2.0 * f0 + at(j, l - 1)) / (da * da);
            let fta = (at(j + 1, l + 1) - at(j + 1, l - 1) - at(j - 1, l + 1) + at(j - 1, l - 1))
                / (4.0 * dt * da);
            // Christoffels of diag(1, sin²θ): Γ^θ_aa = −sinθcosθ, Γ^a_θa = cotθ
            let h_ta = fta - c / s * fa;
            let h_aa = faa + s * c * ft;
            gradient.push(DVector::from_vec(vec![ft, fa]));
            hessian.push(DMatrix::from_row_slice(2, 2, &[ftt, h_ta, h_ta, h_aa]));
        }
    }
    SphereDerivatives { gradient, hessian }
}

/// Laplace–Beltrami of `f` from its covariant Hessian and the diagonal round metric.
pub fn laplacian(hessian: &DMatrix<f64>, metric_diag: &[f64]) -> f64 {
    metric_diag.iter().enumerate().map(|(i, s)| hessian[(i, i)] / s).sum()
}
