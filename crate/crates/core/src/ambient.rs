//! Warped-product ambient manifolds `dr² + φ(r)² g_{S^n}`.
//!
//! The state variable throughout the crate is the areal radius `ρ = φ(r)`.
//! For the anti-de Sitter–Schwarzschild family the warp factor obeys
//! `φ′² = 1 − m φ^{1−n} + φ²`, so `φ′` and `φ″` are algebraic in `ρ`:
//!
//! ```text
//! φ′(ρ) = √(1 − m ρ^{1−n} + ρ²)
//! φ″(ρ) = ½ d(φ′²)/dρ = ρ + (n − 1) m / (2 ρⁿ)
//! ```
//!
//! The second line follows from differentiating `φ′²` along `r` and using
//! `dρ/dr = φ′`. The geodesic radius `r` is only needed for diagnostics and
//! is recovered by quadrature in [`WarpedAmbient::radial_coordinate`].

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AmbientError {
    #[error("inside horizon: areal radius {rho} is not above s0 = {s0}")]
    InsideHorizon { rho: f64, s0: f64 },
    #[error("invalid ambient parameters: {0}")]
    InvalidParameters(String),
}

/// Which warp factor the ambient uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbientKind {
    /// `φ′² = 1 − m φ^{1−n} + φ²`; `m = 0` is hyperbolic space.
    AdsSchwarzschild,
    /// Euclidean space, `φ = ρ`, `φ′ = 1`, `φ″ = 0`. Cross-check mode only.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpedAmbient {
    n: usize,
    m: f64,
    s0: f64,
    kind: AmbientKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpDerivatives {
    pub phi_prime: f64,
    pub phi_second: f64,
}

/// Coefficients of the ambient curvature tensor in the coordinate frame
/// `(∂_1, …, ∂_n, ∂_r)`:
///
/// * `R̄(∂_i, ∂_j, ∂_k, ∂_l) = tangential · (σ_ik σ_jl − σ_il σ_jk)`
/// * `R̄(∂_i, ∂_r, ∂_j, ∂_r) = radial · σ_ij`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureCoeffs {
    pub tangential: f64,
    pub radial: f64,
}

/// Unique nonnegative root of `1 − m s^{1−n} + s² = 0`.
///
/// Solved on the polynomial form `s^{n−1}(1 + s²) − m` with bisection and a
/// Newton polish. Returns 0 when `m = 0`, and also when `n = 1, m ≤ 1`
/// where the equation has no positive root (the manifold then closes off
/// with a cone point at `ρ = 0`).
pub fn horizon_radius(m: f64, n: usize) -> f64 {
    assert!(m >= 0.0 && n >= 1, "horizon_radius needs m >= 0, n >= 1");
    if m == 0.0 {
        return 0.0;
    }
    let f = |s: f64| s.powi(n as i32 - 1) * (1.0 + s * s) - m;
    let df = |s: f64| {
        let p = n as i32 - 1;
        let lead = if p == 0 { 0.0 } else { p as f64 * s.powi(p - 1) * (1.0 + s * s) };
        lead + 2.0 * s.powi(p + 1)
    };
    if f(0.0) >= 0.0 {
        // only reachable for n = 1, m <= 1
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0_f64, m.max(1.0));
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = df(s);
        if d > 0.0 {
            let next = s - f(s) / d;
            if next > 0.0 {
                s = next;
            }
        }
    }
    s
}

impl WarpedAmbient {
    pub fn ads(n: usize, m: f64) -> Result<Self, AmbientError> {
        if n < 1 {
            return Err(AmbientError::InvalidParameters("dimension must be at least 1".into()));
        }
        if !(m >= 0.0) || !m.is_finite() {
            return Err(AmbientError::InvalidParameters("mass must be nonnegative".into()));
        }
        Ok(Self { n, m, s0: horizon_radius(m, n), kind: AmbientKind::AdsSchwarzschild })
    }

    pub fn hyperbolic(n: usize) -> Result<Self, AmbientError> {
        Self::ads(n, 0.0)
    }

    pub fn flat(n: usize) -> Result<Self, AmbientError> {
        if n < 1 {
            return Err(AmbientError::InvalidParameters("dimension must be at least 1".into()));
        }
        Ok(Self { n, m: 0.0, s0: 0.0, kind: AmbientKind::Flat })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    /// Horizon areal radius; the manifold is `ρ > s0`.
    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn kind(&self) -> AmbientKind {
        self.kind
    }

    fn check_domain(&self, rho: f64) -> Result<(), AmbientError> {
        if rho > self.s0 && rho.is_finite() {
            Ok(())
        } else {
            Err(AmbientError::InsideHorizon { rho, s0: self.s0 })
        }
    }

    /// `φ′²` at areal radius `rho`, without domain checks.
    fn phi_prime_sq(&self, rho: f64) -> f64 {
        match self.kind {
            AmbientKind::Flat => 1.0,
            AmbientKind::AdsSchwarzschild => {
                1.0 - self.m * rho.powi(1 - self.n as i32) + rho * rho
            }
        }
    }

    pub fn warp_derivatives(&self, rho: f64) -> Result<WarpDerivatives, AmbientError> {
        self.check_domain(rho)?;
        Ok(match self.kind {
            AmbientKind::Flat => WarpDerivatives { phi_prime: 1.0, phi_second: 0.0 },
            AmbientKind::AdsSchwarzschild => {
                let n = self.n as i32;
                WarpDerivatives {
                    phi_prime: self.phi_prime_sq(rho).max(0.0).sqrt(),
                    phi_second: rho + (n - 1) as f64 * self.m / (2.0 * rho.powi(n)),
                }
            }
        })
    }

    pub fn curvature_coeffs(&self, rho: f64) -> Result<CurvatureCoeffs, AmbientError> {
        let d = self.warp_derivatives(rho)?;
        Ok(CurvatureCoeffs {
            tangential: rho * rho * (1.0 - d.phi_prime * d.phi_prime),
            radial: -rho * d.phi_second,
        })
    }

    /// Geodesic radius `r(ρ) = ∫_{s0}^{ρ} dσ / φ′(σ)`.
    ///
    /// The substitution `σ = s0 + τ²` removes the square-root singularity at
    /// the horizon; after it the integrand is smooth and is handled by
    /// adaptive Gauss–Kronrod panels.
    pub fn radial_coordinate(&self, rho: f64) -> Result<f64, AmbientError> {
        self.check_domain(rho)?;
        if self.kind == AmbientKind::Flat {
            return Ok(rho);
        }
        let s0 = self.s0;
        let n = self.n;
        let m = self.m;
        // φ′²(s0 + x) · (s0 + x)^{n−1} = f(s0) + x·S(x), with
        // f(s) = s^{n−1} + s^{n+1} − m and S from the telescoped power differences.
        let p = n as i32 - 1;
        let f0 = if s0 > 0.0 { 0.0 } else { (if p == 0 { 1.0 } else { 0.0 }) - m };
        if s0 == 0.0 && f0 == 0.0 && m > 0.0 {
            // n = 1, m = 1: φ′ = ρ, the horizon sits at infinite distance
            return Err(AmbientError::InvalidParameters("geodesic radius is infinite for n = 1, m = 1".into()));
        }
        let integrand = |tau: f64| {
            let x = tau * tau;
            let a = s0 + x;
            let slope = power_difference_quotient(a, s0, p) + power_difference_quotient(a, s0, p + 2);
            let denom = f0 + x * slope;
            2.0 * tau * (a.powi(p) / denom).sqrt()
        };
        let upper = (rho - s0).sqrt();
        Ok(adaptive_gauss_kronrod(&integrand, 0.0, upper, 1e-13, 24))
    }

    /// Areal radius at geodesic radius `r`, by bisection on
    /// [`radial_coordinate`](Self::radial_coordinate).
    pub fn areal_radius(&self, r: f64) -> Result<f64, AmbientError> {
        if !(r >= 0.0) {
            return Err(AmbientError::InvalidParameters(format!("negative radius {r}")));
        }
        if self.kind == AmbientKind::Flat {
            return Ok(r);
        }
        let mut lo = self.s0;
        let mut hi = (self.s0 + 1.0).max(r.exp());
        while self.radial_coordinate(hi)? < r {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if mid > self.s0 && self.radial_coordinate(mid)? < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// `(a^p − b^p) / (a − b)` as the finite geometric sum, exact when `a = b`.
fn power_difference_quotient(a: f64, b: f64, p: i32) -> f64 {
    (0..p).map(|i| a.powi(p - 1 - i) * b.powi(i)).sum()
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights at KRONROD_NODES[1], [3], [5], [7]
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * KRONROD_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for (j, (&x, &w)) in KRONROD_NODES[..7].iter().zip(&KRONROD_WEIGHTS[..7]).enumerate() {
        let pair = f(center - half * x) + f(center + half * x);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += GAUSS_WEIGHTS[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

pub(crate) fn adaptive_gauss_kronrod(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: usize,
) -> f64 {
    let (whole, err) = gauss_kronrod_15(f, a, b);
    let tol = rel_tol * whole.abs().max(f64::MIN_POSITIVE);
    refine(f, a, b, whole, err, tol, max_depth)
}

fn refine(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, err: f64, tol: f64, depth: usize) -> f64 {
    if err <= tol || depth == 0 {
        return whole;
    }
    let mid = 0.5 * (a + b);
    let (left, el) = gauss_kronrod_15(f, a, mid);
    let (right, er) = gauss_kronrod_15(f, mid, b);
    refine(f, a, mid, left, el, 0.5 * tol, depth - 1)
        + refine(f, mid, b, right, er, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bisect_root(m: f64, n: usize) -> f64 {
        let g = |s: f64| 1.0 - m * s.powi(1 - n as i32) + s * s;
        let (mut lo, mut hi) = (1e-12, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn horizon_examples() {
        assert_eq!(horizon_radius(0.0, 2), 0.0);
        assert!((horizon_radius(2.0, 2) - 1.0).abs() < 1e-15);
        let s = horizon_radius(1.0, 3);
        assert!((1.0 - s.powi(-2) + s * s).abs() <= 1e-12);
        assert!((s - bisect_root(1.0, 3)).abs() < 1e-12);
    }

    #[test]
    fn horizon_residuals_over_parameter_grid() {
        for &m in &[0.1, 1.0, 2.0, 10.0] {
            for n in 1..=4 {
                let s = horizon_radius(m, n);
                if n == 1 && m <= 1.0 {
                    assert_eq!(s, 0.0);
                    continue;
                }
                let res = 1.0 - m * s.powi(1 - n as i32) + s * s;
                assert!(res.abs() <= 1e-12, "m={m} n={n} s={s} residual={res}");
            }
        }
    }

    #[test]
    fn warp_examples() {
        let h = WarpedAmbient::hyperbolic(2).unwrap();
        let d = h.warp_derivatives(2.0).unwrap();
        assert!((d.phi_prime - 5f64.sqrt()).abs() < 1e-15);
        assert_eq!(d.phi_second, 2.0);

        let a = WarpedAmbient::ads(2, 2.0).unwrap();
        let d = a.warp_derivatives(2.0).unwrap();
        assert!((d.phi_prime - 2.0).abs() < 1e-15);
        assert!((d.phi_second - 2.25).abs() < 1e-15);

        let near = a.warp_derivatives(1.0 + 1e-12).unwrap();
        assert!(near.phi_prime < 1e-5);
        assert!(matches!(a.warp_derivatives(1.0), Err(AmbientError::InsideHorizon { .. })));
        assert!(matches!(a.warp_derivatives(0.5), Err(AmbientError::InsideHorizon { .. })));
    }

    #[test]
    fn rejects_negative_mass() {
        assert!(WarpedAmbient::ads(2, -1.0).is_err());
    }

    #[test]
    fn hyperbolic_radial_coordinate_is_asinh() {
        let h = WarpedAmbient::hyperbolic(2).unwrap();
        let r = h.radial_coordinate(1f64.sinh()).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(h.radial_coordinate(1e-12).unwrap() < 1e-11);
        for &rho in &[0.1, 3.0, 50.0, 1e4] {
            let r = h.radial_coordinate(rho).unwrap();
            assert!((r - rho.asinh()).abs() <= 1e-10 * rho.asinh(), "rho={rho}");
        }
    }

    /// Integrates dρ/dr = φ′(ρ) from a series start at the horizon.
    fn ode_radius(amb: &WarpedAmbient, target: f64) -> f64 {
        let s0 = amb.s0();
        let c = amb.warp_derivatives(s0 * (1.0 + 1e-9)).unwrap().phi_second;
        let mut r = 1e-4;
        let mut rho = s0 + 0.5 * c * r * r;
        let fp = |x: f64| amb.warp_derivatives(x).map(|d| d.phi_prime).unwrap();
        let h = 1e-4;
        loop {
            let k1 = fp(rho);
            let k2 = fp(rho + 0.5 * h * k1);
            let k3 = fp(rho + 0.5 * h * k2);
            let k4 = fp(rho + h * k3);
            let next = rho + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if next >= target {
                break;
            }
            rho = next;
            r += h;
        }
        // finish with one RK4 step in ρ on dr/dρ = 1/φ′
        let g = |x: f64| 1.0 / fp(x);
        let dh = target - rho;
        let k1 = g(rho);
        let k2 = g(rho + 0.5 * dh);
        let k4 = g(target);
        r + dh / 6.0 * (k1 + 4.0 * k2 + k4)
    }

    #[test]
    fn radial_coordinate_matches_ode_oracle() {
        let a = WarpedAmbient::ads(2, 2.0).unwrap();
        let oracle = ode_radius(&a, 3.0);
        let r = a.radial_coordinate(3.0).unwrap();
        assert!(((r - oracle) / oracle).abs() <= 1e-6, "r={r} oracle={oracle}");
    }

    #[test]
    fn curvature_examples() {
        let h = WarpedAmbient::hyperbolic(2).unwrap();
        let phi = 2.0;
        let c = h.curvature_coeffs(phi).unwrap();
        assert!((c.tangential / phi.powi(4) + 1.0).abs() < 1e-15);
        assert!((c.radial / (phi * phi) + 1.0).abs() < 1e-15);

        let a = WarpedAmbient::ads(2, 2.0).unwrap();
        let c = a.curvature_coeffs(2.0).unwrap();
        assert!((c.tangential + 12.0).abs() < 1e-12);
        assert!((c.radial + 4.5).abs() < 1e-12);

        let dev = |rho: f64| {
            let c = a.curvature_coeffs(rho).unwrap();
            (c.radial / (rho * rho) + 1.0).abs()
        };
        let ratio = dev(10.0) / dev(20.0);
        assert!((ratio - 8.0).abs() < 0.05, "ratio {ratio}");
        let tdev = |rho: f64| {
            let c = a.curvature_coeffs(rho).unwrap();
            (c.tangential / rho.powi(4) + 1.0).abs()
        };
        assert!((tdev(10.0) / tdev(20.0) - 8.0).abs() < 0.05);
    }

    #[test]
    fn flat_mode() {
        let f = WarpedAmbient::flat(3).unwrap();
        let d = f.warp_derivatives(4.0).unwrap();
        assert_eq!((d.phi_prime, d.phi_second), (1.0, 0.0));
        assert_eq!(f.radial_coordinate(4.0).unwrap(), 4.0);
        let c = f.curvature_coeffs(4.0).unwrap();
        assert_eq!((c.tangential, c.radial), (0.0, 0.0));
    }

    #[test]
    fn degenerate_one_dimensional_mass_has_no_finite_radius() {
        let a = WarpedAmbient::ads(1, 1.0).unwrap();
        assert!(a.radial_coordinate(2.0).is_err());
        assert!(a.warp_derivatives(2.0).is_ok());
    }

    fn ambient_strategy() -> impl Strategy<Value = (WarpedAmbient, f64)> {
        (prop::sample::select(vec![0.0, 0.1, 1.0, 2.0, 10.0]), 1usize..=4, 1e-3f64..50.0).prop_map(
            |(m, n, offset)| {
                let a = WarpedAmbient::ads(n, m).unwrap();
                let rho = a.s0() + offset;
                (a, rho)
            },
        )
    }

    proptest! {
        #[test]
        fn phi_prime_squared_is_definitional((a, rho) in ambient_strategy()) {
            let d = a.warp_derivatives(rho).unwrap();
            let rhs = 1.0 - a.mass() * rho.powi(1 - a.n() as i32) + rho * rho;
            prop_assert!((d.phi_prime * d.phi_prime - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
        }

        #[test]
        fn phi_second_matches_finite_difference((a, rho) in ambient_strategy()) {
            let h = 1e-5 * rho;
            prop_assume!(rho - h > a.s0() * (1.0 + 1e-3));
            let sq = |x: f64| a.warp_derivatives(x).unwrap().phi_prime.powi(2);
            let fd = (sq(rho + h) - sq(rho - h)) / (2.0 * h);
            let exact = 2.0 * a.warp_derivatives(rho).unwrap().phi_second;
            prop_assert!(((fd - exact) / exact).abs() <= 1e-6, "fd={} exact={}", fd, exact);
        }

        #[test]
        fn curvature_sign_identity((a, rho) in ambient_strategy()) {
            prop_assume!(a.mass() > 0.0);
            let d = a.warp_derivatives(rho).unwrap();
            let lhs = 1.0 - d.phi_prime * d.phi_prime + rho * d.phi_second;
            let n = a.n() as f64;
            let rhs = a.mass() * rho.powf(1.0 - n) * (n + 1.0) / 2.0;
            prop_assert!(lhs >= 0.0);
            // cancellation in 1 − φ′² costs roughly ρ²·ε of absolute accuracy
            let tol = 1e-12 * rhs + 4.0 * f64::EPSILON * (1.0 + rho * rho);
            prop_assert!((lhs - rhs).abs() <= tol, "lhs={} rhs={}", lhs, rhs);
        }

        #[test]
        fn radial_coordinate_monotone_and_invertible((a, rho) in ambient_strategy()) {
            prop_assume!(!(a.n() == 1 && a.mass() == 1.0));
            let r = a.radial_coordinate(rho).unwrap();
            let r2 = a.radial_coordinate(rho * 1.01).unwrap();
            prop_assert!(r2 > r);
            let back = a.areal_radius(r).unwrap();
            prop_assert!(((back - rho) / rho).abs() <= 1e-8, "rho={} back={}", rho, back);
        }
    }
}
