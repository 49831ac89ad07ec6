//! Observation-noise covariance and sampling.
//!
//! A [`NoiseModel`] owns a validated symmetric positive definite covariance
//! together with its lower Cholesky factor. The factor is the only path used
//! to draw correlated samples; no inverse is ever formed.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Relative tolerance for the symmetry check on caller-supplied covariances.
pub const SYMMETRY_RTOL: f64 = 1e-12;

/// Default correlation coefficient for the exponential-correlation model.
pub const DEFAULT_RHO: f64 = 0.5;

#[derive(Debug, Clone)]
pub struct NoiseModel {
    covariance: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl NoiseModel {
    /// Independent noise with standard deviation `sigma_v` at each of `n` sensors.
    pub fn white(n: usize, sigma_v: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n_sensors", "must be at least 1"));
        }
        if !(sigma_v > 0.0 && sigma_v.is_finite()) {
            return Err(Error::invalid(
                "sigma_v",
                format!("must be positive and finite, got {sigma_v}"),
            ));
        }
        Self::from_covariance(DMatrix::from_diagonal_element(n, n, sigma_v * sigma_v))
    }

    /// Exponentially correlated noise, `Σ_ij = (p_tot / n) · rho^|i-j|`, so that
    /// `trace(Σ) = p_tot`.
    pub fn colored(n: usize, p_tot: f64, rho: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n_sensors", "must be at least 1"));
        }
        if !(p_tot > 0.0 && p_tot.is_finite()) {
            return Err(Error::invalid(
                "p_tot",
                format!("must be positive and finite, got {p_tot}"),
            ));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::invalid(
                "rho",
                format!("must lie in [0, 1), got {rho}"),
            ));
        }
        let scale = p_tot / n as f64;
        let cov = DMatrix::from_fn(n, n, |i, j| scale * rho.powi(i.abs_diff(j) as i32));
        Self::from_covariance(cov)
    }

    /// Wraps an arbitrary covariance. Asymmetric input is rejected rather than
    /// symmetrized.
    pub fn from_covariance(covariance: DMatrix<f64>) -> Result<Self> {
        let n = covariance.nrows();
        if n == 0 {
            return Err(Error::invalid("covariance", "must be non-empty"));
        }
        if covariance.ncols() != n {
            return Err(Error::invalid(
                "covariance",
                format!("must be square, got {}x{}", n, covariance.ncols()),
            ));
        }
        if covariance.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("covariance", "entries must be finite"));
        }
        let scale = covariance.amax();
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = (covariance[(i, j)] - covariance[(j, i)]).abs();
                if diff > SYMMETRY_RTOL * scale {
                    return Err(Error::invalid(
                        "covariance",
                        format!("not symmetric at ({i}, {j}): |difference| = {diff:e}"),
                    ));
                }
            }
        }
        if covariance.trace() <= 0.0 {
            return Err(Error::SingularCovariance("trace is not positive".into()));
        }
        let chol = Cholesky::new(covariance.clone())
            .ok_or_else(|| Error::SingularCovariance("Cholesky factorization failed".into()))?;
        if chol
            .l_dirty()
            .diagonal()
            .iter()
            .any(|d| d.is_nan() || *d <= 0.0)
        {
            return Err(Error::SingularCovariance(
                "Cholesky factor has a non-positive diagonal entry".into(),
            ));
        }
        Ok(Self { covariance, chol })
    }

    pub fn dim(&self) -> usize {
        self.covariance.nrows()
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Lower-triangular factor `L` with `L Lᵀ = Σ`.
    pub fn chol_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub(crate) fn cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.chol
    }

    /// Total noise power `trace(Σ)`.
    pub fn total_power(&self) -> f64 {
        self.covariance.trace()
    }

    /// Per-sensor RMS noise level, `sqrt(trace(Σ) / N)`.
    pub fn rms_sigma(&self) -> f64 {
        (self.total_power() / self.dim() as f64).sqrt()
    }

    /// Draws `L g` with `g` a vector of i.i.d. standard normals taken from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let g = DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|_| rng.sample::<f64, _>(StandardNormal)),
        );
        // l_dirty keeps stale values above the diagonal, so multiply by hand.
        let l = self.chol.l_dirty();
        let n = self.dim();
        DVector::from_fn(n, |i, _| (0..=i).map(|j| l[(i, j)] * g[j]).sum())
    }
}
