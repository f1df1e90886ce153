//! Elementary symmetric functions and the normalized hessian-quotient speed
//! `F = n · C(n,k−1)/C(n,k) · σ_k/σ_{k−1}` on Gårding's cone `Γ_k`.

use std::ops::Deref;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymFuncError {
    #[error("index {index} out of range 0..={n}")]
    OutOfRange { index: usize, n: usize },
    #[error("curvature vector has {got} entries, speed expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid speed parameters: k = {k}, n = {n}")]
    InvalidSpeed { k: usize, n: usize },
    #[error("outside the Γ_{k} cone: σ_{j} = {sigma}")]
    ConeViolation { k: usize, j: usize, sigma: f64 },
}

/// Principal curvatures, sorted ascending.
///
/// `cone_order` is the largest `j` such that `σ_1, …, σ_j` are all positive,
/// so the vector lies in `Γ_k` exactly when `cone_order >= k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureVector {
    values: Vec<f64>,
    cone_order: usize,
}

impl CurvatureVector {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(|a, b| a.total_cmp(b));
        let sigma = elementary_symmetric_all(&values);
        let cone_order = sigma[1..].iter().take_while(|&&s| s > 0.0).count();
        Self { values, cone_order }
    }

    pub fn cone_order(&self) -> usize {
        self.cone_order
    }

    pub fn in_cone(&self, k: usize) -> bool {
        self.cone_order >= k
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }
}

impl Deref for CurvatureVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

/// All of `σ_0, …, σ_n`, from the coefficients of `∏ (1 + λ_i x)`.
pub fn elementary_symmetric_all(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (i, &l) in lambda.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e
}

pub fn elementary_symmetric(lambda: &[f64], j: usize) -> Result<f64, SymFuncError> {
    if j > lambda.len() {
        return Err(SymFuncError::OutOfRange { index: j, n: lambda.len() });
    }
    Ok(elementary_symmetric_all(lambda)[j])
}

/// `σ_{j−1}` of `lambda` with entry `i` removed, for every `i`.
pub fn sigma_gradient(lambda: &[f64], j: usize) -> Result<Vec<f64>, SymFuncError> {
    let n = lambda.len();
    if j == 0 || j > n {
        return Err(SymFuncError::OutOfRange { index: j, n });
    }
    Ok(deleted_sigmas(lambda, j - 1))
}

fn deleted_sigmas(lambda: &[f64], j: usize) -> Vec<f64> {
    let mut rest = Vec::with_capacity(lambda.len());
    (0..lambda.len())
        .map(|i| {
            rest.clear();
            rest.extend(lambda.iter().enumerate().filter(|&(p, _)| p != i).map(|(_, &l)| l));
            if j > rest.len() {
                0.0
            } else {
                elementary_symmetric_all(&rest)[j]
            }
        })
        .collect()
}

/// True iff `σ_j(λ) > 0` for every `1 ≤ j ≤ k`.
pub fn gamma_k_contains(lambda: &[f64], k: usize) -> bool {
    let sigma = elementary_symmetric_all(lambda);
    sigma.iter().skip(1).take(k).all(|&s| s > 0.0)
}

/// A degree-one homogeneous curvature function evaluated on principal curvatures.
pub trait CurvatureSpeed {
    fn dimension(&self) -> usize;

    /// Cone the speed is defined on.
    fn cone(&self) -> usize;

    fn value(&self, lambda: &[f64]) -> Result<f64, SymFuncError>;

    /// `∂F/∂λ_i`.
    fn gradient(&self, lambda: &[f64]) -> Result<Vec<f64>, SymFuncError>;

    fn value_and_gradient(&self, lambda: &[f64]) -> Result<(f64, Vec<f64>), SymFuncError> {
        Ok((self.value(lambda)?, self.gradient(lambda)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientSpeed {
    k: usize,
    n: usize,
    norm: f64,
}

impl QuotientSpeed {
    pub fn new(n: usize, k: usize) -> Result<Self, SymFuncError> {
        if n == 0 || k == 0 || k > n {
            return Err(SymFuncError::InvalidSpeed { k, n });
        }
        // n·C(n,k−1)/C(n,k) = n·k/(n−k+1)
        let norm = (n * k) as f64 / (n - k + 1) as f64;
        Ok(Self { k, n, norm })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    fn checked_sigmas(&self, lambda: &[f64]) -> Result<Vec<f64>, SymFuncError> {
        if lambda.len() != self.n {
            return Err(SymFuncError::DimensionMismatch { expected: self.n, got: lambda.len() });
        }
        let sigma = elementary_symmetric_all(lambda);
        if let Some(j) = (1..=self.k).find(|&j| !(sigma[j] > 0.0)) {
            return Err(SymFuncError::ConeViolation { k: self.k, j, sigma: sigma[j] });
        }
        Ok(sigma)
    }
}

impl CurvatureSpeed for QuotientSpeed {
    fn dimension(&self) -> usize {
        self.n
    }

    fn cone(&self) -> usize {
        self.k
    }

    fn value(&self, lambda: &[f64]) -> Result<f64, SymFuncError> {
        let sigma = self.checked_sigmas(lambda)?;
        Ok(self.norm * sigma[self.k] / sigma[self.k - 1])
    }

    fn gradient(&self, lambda: &[f64]) -> Result<Vec<f64>, SymFuncError> {
        self.value_and_gradient(lambda).map(|(_, g)| g)
    }

    fn value_and_gradient(&self, lambda: &[f64]) -> Result<(f64, Vec<f64>), SymFuncError> {
        let sigma = self.checked_sigmas(lambda)?;
        let k = self.k;
        let top = sigma[k];
        let bottom = sigma[k - 1];
        let d_top = deleted_sigmas(lambda, k - 1);
        let grad = if k == 1 {
            vec![self.norm; self.n]
        } else {
            let d_bottom = deleted_sigmas(lambda, k - 2);
            d_top
                .iter()
                .zip(&d_bottom)
                .map(|(&dt, &db)| self.norm * (dt * bottom - top * db) / (bottom * bottom))
                .collect()
        };
        Ok((self.norm * top / bottom, grad))
    }
}
