//! Stochastic threshold design: the next thresholds are the current estimate
//! plus independent Gaussian dither, `τ(k+1) = θ̂(k)·1 + w`, `w ~ N(0, σ_τ² I)`.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Initial thresholds, either one value for every sensor or one per sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThresholdInit {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl Default for ThresholdInit {
    fn default() -> Self {
        ThresholdInit::Scalar(0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPolicy {
    sigma_tau: f64,
    init: ThresholdInit,
}

impl ThresholdPolicy {
    /// `sigma_tau = 0` gives deterministic thresholds at the current estimate.
    pub fn new(sigma_tau: f64, init: ThresholdInit) -> Result<Self> {
        if !(sigma_tau >= 0.0 && sigma_tau.is_finite()) {
            return Err(Error::invalid(
                "sigma_tau",
                format!("must be non-negative and finite, got {sigma_tau}"),
            ));
        }
        match &init {
            ThresholdInit::Scalar(v) if !v.is_finite() => {
                return Err(Error::invalid("init", "must be finite"))
            }
            ThresholdInit::Vector(v) if v.iter().any(|x| !x.is_finite()) => {
                return Err(Error::invalid("init", "entries must be finite"))
            }
            _ => {}
        }
        Ok(Self { sigma_tau, init })
    }

    pub fn with_sigma(sigma_tau: f64) -> Result<Self> {
        Self::new(sigma_tau, ThresholdInit::default())
    }

    pub fn sigma_tau(&self) -> f64 {
        self.sigma_tau
    }

    pub fn init(&self) -> &ThresholdInit {
        &self.init
    }

    pub fn initial_thresholds(&self, n: usize) -> Result<DVector<f64>> {
        if n == 0 {
            return Err(Error::invalid("n_sensors", "must be at least 1"));
        }
        match &self.init {
            ThresholdInit::Scalar(v) => Ok(DVector::from_element(n, *v)),
            ThresholdInit::Vector(v) if v.len() == n => Ok(DVector::from_column_slice(v)),
            ThresholdInit::Vector(v) => Err(Error::LengthMismatch {
                name: "init",
                expected: n,
                got: v.len(),
            }),
        }
    }

    pub fn next_thresholds<R: Rng + ?Sized>(
        &self,
        theta_hat: f64,
        n: usize,
        rng: &mut R,
    ) -> DVector<f64> {
        if self.sigma_tau == 0.0 {
            return DVector::from_element(n, theta_hat);
        }
        DVector::from_iterator(
            n,
            (0..n).map(|_| theta_hat + self.sigma_tau * rng.sample::<f64, _>(StandardNormal)),
        )
    }
}
