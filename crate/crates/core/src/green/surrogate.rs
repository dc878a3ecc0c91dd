use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use statrs::function::gamma::gamma;

use crate::laws::StepLaw;

/// Gaussian with the covariance of a step law: local CLT density, the `J` norm and the
/// Green's function asymptotic `C_d / J(x)^{d-2}`.
#[derive(Clone, Debug)]
pub struct GaussianSurrogate {
    dim: usize,
    cov: DMatrix<f64>,
    inv: DMatrix<f64>,
    det: f64,
}

impl GaussianSurrogate {
    pub fn new(law: &StepLaw) -> GaussianSurrogate {
        Self::from_covariance(law.covariance().clone())
    }

    /// Panics if `cov` is not positive definite.
    pub fn from_covariance(cov: DMatrix<f64>) -> GaussianSurrogate {
        let chol = cov.clone().cholesky().expect("covariance must be positive definite");
        let inv = chol.inverse();
        let det = cov.determinant();
        GaussianSurrogate { dim: cov.nrows(), cov, inv, det }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inv
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// `x^T Gamma^{-1} x`.
    pub fn j2(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        (v.transpose() * &self.inv * &v)[(0, 0)]
    }

    /// `J(x) = sqrt(x^T Gamma^{-1} x)`.
    pub fn j(&self, x: &[f64]) -> f64 {
        self.j2(x).sqrt()
    }

    /// Density of `N(0, t Gamma)` at `x`.
    pub fn density(&self, t: f64, x: &[f64]) -> f64 {
        let d = self.dim as f64;
        (2.0 * PI * t).powf(-d / 2.0) / self.det.sqrt() * (-self.j2(x) / (2.0 * t)).exp()
    }

    /// Local CLT approximation of `P(S_n = x)`.
    pub fn lclt_density(&self, n: u64, x: &[f64]) -> f64 {
        self.density(n as f64, x)
    }

    /// `C_d = Gamma(d/2) / ((d-2) pi^{d/2} sqrt(det Gamma))`, for `d >= 3`.
    pub fn green_constant(&self) -> f64 {
        let d = self.dim as f64;
        assert!(self.dim >= 3, "Green's function asymptotic needs d >= 3");
        gamma(d / 2.0) / ((d - 2.0) * PI.powf(d / 2.0) * self.det.sqrt())
    }

    /// `C_d / J(x)^{d-2}`.
    pub fn green_asymptotic(&self, x: &[f64]) -> f64 {
        self.green_constant() * self.j(x).powf(2.0 - self.dim as f64)
    }

    /// Largest eigenvalue of the covariance.
    pub fn max_eigenvalue(&self) -> f64 {
        self.cov.clone().symmetric_eigenvalues().max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_walk_constants() {
        let s = GaussianSurrogate::new(&StepLaw::simple(6).unwrap());
        // Gamma = I/6 gives C = 2 * 6^3 / (4 pi^3) and J = sqrt(6)|x|.
        assert!((s.green_constant() - 108.0 / PI.powi(3)).abs() < 1e-12);
        let x = [3.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        assert!((s.j(&x) - (60.0f64).sqrt()).abs() < 1e-12);
        assert!((s.green_asymptotic(&x) - 3.0 / (PI.powi(3) * 100.0)).abs() < 1e-15);
        let s3 = GaussianSurrogate::new(&StepLaw::simple(3).unwrap());
        assert!((s3.green_asymptotic(&[2.0, 0.0, 0.0]) - 3.0 / (2.0 * PI * 2.0)).abs() < 1e-14);
    }
}
