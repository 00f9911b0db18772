use std::f64::consts::{E, LN_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::EULER_GAMMA;

/// Zero-mean Gaussian vector with a symmetric positive-definite covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultivariateGaussian {
    dim: usize,
    /// Row-major covariance.
    cov: Vec<f64>,
    /// Row-major lower Cholesky factor.
    chol: Vec<f64>,
    eigenvalues: Vec<f64>,
}

impl MultivariateGaussian {
    /// Build from a row-major `d x d` covariance.
    pub fn new(dim: usize, cov: Vec<f64>) -> Result<Self> {
        if dim == 0 || cov.len() != dim * dim {
            return Err(Error::InvalidParameter {
                family: "mvgaussian",
                reason: format!("covariance needs {} entries for d = {dim}", dim * dim),
            });
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                family: "mvgaussian",
                reason: "covariance entries must be finite".into(),
            });
        }
        let m = DMatrix::from_row_slice(dim, dim, &cov);
        let norm = m.amax().max(f64::MIN_POSITIVE);
        for i in 0..dim {
            for j in 0..i {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * norm {
                    return Err(Error::InvalidParameter {
                        family: "mvgaussian",
                        reason: "covariance must be symmetric".into(),
                    });
                }
            }
        }
        let l = m.clone().cholesky().ok_or(Error::NotPositiveDefinite)?.l();
        let mut eigenvalues: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        if eigenvalues.iter().any(|&v| v <= 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        eigenvalues.sort_by(f64::total_cmp);
        let chol = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| l[(i, j)]).collect();
        Ok(MultivariateGaussian {
            dim,
            cov,
            chol,
            eigenvalues,
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut cov = vec![0.0; dim * dim];
        for i in 0..dim {
            cov[i * dim + i] = 1.0;
        }
        Self::new(dim, cov)
    }

    pub fn diagonal(variances: &[f64]) -> Result<Self> {
        let d = variances.len();
        let mut cov = vec![0.0; d * d];
        for (i, v) in variances.iter().enumerate() {
            cov[i * d + i] = *v;
        }
        Self::new(d, cov)
    }

    /// Two unit-variance coordinates with correlation `rho`.
    pub fn bivariate(rho: f64) -> Result<Self> {
        Self::new(2, vec![1.0, rho, rho, 1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.dim + j]
    }

    pub(crate) fn cholesky_factor(&self) -> &[f64] {
        &self.chol
    }

    /// Eigenvalues of the covariance, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Standard deviations of the marginals.
    pub fn marginal_sigmas(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.covariance(i, i).sqrt()).collect()
    }

    /// log2 det(Σ) as the sum of log eigenvalues.
    pub fn log2_det(&self) -> f64 {
        self.eigenvalues.iter().map(|v| v.log2()).sum()
    }

    /// log2 det(Σ) from the Cholesky diagonal; a cross-check on
    /// [`Self::log2_det`].
    pub fn log2_det_cholesky(&self) -> f64 {
        (0..self.dim).map(|i| 2.0 * self.chol[i * self.dim + i].log2()).sum()
    }

    /// ½ log2(Π λ_i / Π Σ_ii); zero for a diagonal covariance, negative
    /// whenever the coordinates are correlated.
    pub fn correlation_term(&self) -> f64 {
        let diag: f64 = (0..self.dim).map(|i| self.covariance(i, i).log2()).sum();
        0.5 * (self.log2_det() - diag)
    }

    /// h(X) in bits.
    pub fn differential_entropy(&self) -> f64 {
        0.5 * (self.dim as f64 * (2.0 * PI * E).log2() + self.log2_det())
    }

    /// Σ_j E[log2|X_j|].
    pub fn abs_log_moment(&self) -> f64 {
        self.marginal_sigmas()
            .iter()
            .map(|s| (s.ln() - 0.5 * (EULER_GAMMA + LN_2)) / LN_2)
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_covariances() {
        assert_eq!(
            MultivariateGaussian::new(2, vec![1.0, 2.0, 2.0, 1.0]),
            Err(Error::NotPositiveDefinite)
        );
        assert!(MultivariateGaussian::new(2, vec![1.0, 0.5, 0.4, 1.0]).is_err());
        assert!(MultivariateGaussian::new(2, vec![1.0, 0.0, 0.0]).is_err());
        assert!(MultivariateGaussian::new(0, vec![]).is_err());
    }

    #[test]
    fn determinant_routes_agree() {
        let m = MultivariateGaussian::new(3, vec![4.0, 1.0, 0.5, 1.0, 3.0, -0.2, 0.5, -0.2, 2.0]).unwrap();
        assert!((m.log2_det() - m.log2_det_cholesky()).abs() < 1e-12);
        // det by cofactor expansion: 4(6-0.04) - 1(2+0.1) + 0.5(-0.2-1.5)
        let det: f64 = 4.0 * (6.0 - 0.04) - (2.0 + 0.1) + 0.5 * (-0.2 - 1.5);
        assert!((m.log2_det() - det.log2()).abs() < 1e-12);
    }

    #[test]
    fn correlation_term() {
        let m = MultivariateGaussian::bivariate(0.5).unwrap();
        assert!((m.correlation_term() - 0.5 * 0.75f64.log2()).abs() < 1e-12);
        let m = MultivariateGaussian::diagonal(&[4.0, 9.0]).unwrap();
        assert_eq!(m.correlation_term(), 0.0);
    }
}
