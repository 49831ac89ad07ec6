//! Mutual information between a random parameter and one noisy sign bit.
//!
//! With `p_θ = Pr(r = +1 | θ) = Q((τ − θ)/σ_v)`,
//! `I(θ; r) = H_b(E[p_θ]) − E[H_b(p_θ)]`, both expectations taken over the
//! prior and evaluated by composite Simpson quadrature.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature nodes used by [`mutual_information`].
pub const DEFAULT_NODES: usize = 4001;
/// Half-width of the truncated Gaussian support, in prior standard deviations.
pub const GAUSSIAN_SUPPORT_SIGMAS: f64 = 8.0;

/// Standard Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Probability that a sensor at threshold `tau` reports `+1` when the
/// parameter is `theta`.
pub fn p_theta(theta: f64, tau: f64, sigma_v: f64) -> Result<f64> {
    if sigma_v.is_nan() || sigma_v <= 0.0 {
        return Err(Error::invalid(
            "sigma_v",
            format!("must be positive, got {sigma_v}"),
        ));
    }
    Ok(q_function((tau - theta) / sigma_v))
}

/// Entropy in bits of a Bernoulli(p) variable, with `0·log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    Ok(entropy_unchecked(p))
}

fn entropy_unchecked(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PriorSpec {
    Uniform { lower: f64, upper: f64 },
    Gaussian { mean: f64, std: f64 },
}

impl PriorSpec {
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        let p = PriorSpec::Uniform { lower, upper };
        p.validate()?;
        Ok(p)
    }

    pub fn gaussian(mean: f64, std: f64) -> Result<Self> {
        let p = PriorSpec::Gaussian { mean, std };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PriorSpec::Uniform { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite() && lower < upper) {
                    return Err(Error::invalid(
                        "upper",
                        format!("uniform bounds need lower < upper, got [{lower}, {upper}]"),
                    ));
                }
            }
            PriorSpec::Gaussian { mean, std } => {
                if !mean.is_finite() {
                    return Err(Error::invalid("mean", "must be finite"));
                }
                if !(std > 0.0 && std.is_finite()) {
                    return Err(Error::invalid(
                        "std",
                        format!("must be positive, got {std}"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Integration interval: exact bounds for uniform, `mean ± 8 std` for Gaussian.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            PriorSpec::Uniform { lower, upper } => (lower, upper),
            PriorSpec::Gaussian { mean, std } => (
                mean - GAUSSIAN_SUPPORT_SIGMAS * std,
                mean + GAUSSIAN_SUPPORT_SIGMAS * std,
            ),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match *self {
            PriorSpec::Uniform { lower, upper } => {
                if (lower..=upper).contains(&x) {
                    1.0 / (upper - lower)
                } else {
                    0.0
                }
            }
            PriorSpec::Gaussian { mean, std } => {
                let u = (x - mean) / std;
                (-0.5 * u * u).exp() / (std * (2.0 * PI).sqrt())
            }
        }
    }

    pub fn shifted(&self, c: f64) -> Self {
        match *self {
            PriorSpec::Uniform { lower, upper } => PriorSpec::Uniform {
                lower: lower + c,
                upper: upper + c,
            },
            PriorSpec::Gaussian { mean, std } => PriorSpec::Gaussian {
                mean: mean + c,
                std,
            },
        }
    }
}

/// `I(θ; r)` in bits using [`DEFAULT_NODES`] quadrature nodes.
pub fn mutual_information(prior: &PriorSpec, tau: f64, sigma_v: f64) -> Result<f64> {
    mutual_information_with_nodes(prior, tau, sigma_v, DEFAULT_NODES)
}

/// `I(θ; r)` with an explicit odd node count (at least 3).
pub fn mutual_information_with_nodes(
    prior: &PriorSpec,
    tau: f64,
    sigma_v: f64,
    nodes: usize,
) -> Result<f64> {
    if nodes < 3 || nodes.is_multiple_of(2) {
        return Err(Error::invalid(
            "nodes",
            format!("Simpson quadrature needs an odd count of at least 3, got {nodes}"),
        ));
    }
    if !(sigma_v > 0.0 && sigma_v.is_finite()) {
        return Err(Error::invalid(
            "sigma_v",
            format!("must be positive, got {sigma_v}"),
        ));
    }
    if !tau.is_finite() {
        return Err(Error::invalid("tau", "must be finite"));
    }
    prior.validate()?;

    let (a, b) = prior.support();
    let h = (b - a) / (nodes - 1) as f64;
    let mut p_one = 0.0;
    let mut cond_entropy = 0.0;
    for i in 0..nodes {
        let x = if i == nodes - 1 { b } else { a + i as f64 * h };
        let weight = if i == 0 || i == nodes - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let f = prior.density(x);
        let p = q_function((tau - x) / sigma_v);
        p_one += weight * f * p;
        cond_entropy += weight * f * entropy_unchecked(p);
    }
    p_one *= h / 3.0;
    cond_entropy *= h / 3.0;

    let mi = entropy_unchecked(p_one.clamp(0.0, 1.0)) - cond_entropy;
    Ok(mi.clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MICurve {
    pub sigma_values: Vec<f64>,
    pub mi_bits: Vec<f64>,
}

impl MICurve {
    pub fn len(&self) -> usize {
        self.sigma_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma_values.is_empty()
    }

    /// Index of the largest value, first one on ties.
    pub fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, v) in self.mi_bits.iter().enumerate() {
            if best.is_none_or(|b| *v > self.mi_bits[b]) {
                best = Some(i);
            }
        }
        best
    }
}

/// Evaluates [`mutual_information`] at every noise level of an ascending grid.
pub fn mi_curve(prior: &PriorSpec, tau: f64, sigma_grid: &[f64]) -> Result<MICurve> {
    if sigma_grid.is_empty() {
        return Err(Error::invalid("sigma_grid", "must not be empty"));
    }
    if sigma_grid.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(Error::invalid(
            "sigma_grid",
            "values must be positive and finite",
        ));
    }
    if sigma_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "sigma_grid",
            "values must be strictly ascending",
        ));
    }
    let mi_bits = sigma_grid
        .par_iter()
        .map(|s| mutual_information(prior, tau, *s))
        .collect::<Result<Vec<_>>>()?;
    Ok(MICurve {
        sigma_values: sigma_grid.to_vec(),
        mi_bits,
    })
}
