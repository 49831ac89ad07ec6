//! End-to-end adaptive recovery loop and Monte Carlo aggregation.
//!
//! Each time step runs: observe, quantize against the current thresholds,
//! solve the recovery program, estimate θ, then draw the next thresholds
//! around that estimate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::{NoiseModel, DEFAULT_RHO};
use crate::recovery::{solve_cqp, RecoveryCache};
use crate::sensing::{observe, quantize, SignalGenerator};
use crate::threshold::{ThresholdInit, ThresholdPolicy};

pub const DEFAULT_BURN_IN: usize = 10;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_SEED: u64 = 0;

fn default_rho() -> f64 {
    DEFAULT_RHO
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum NoiseSpec {
    White {
        sigma_v: f64,
    },
    Colored {
        p_tot: f64,
        #[serde(default = "default_rho")]
        rho: f64,
    },
}

impl NoiseSpec {
    pub fn build(&self, n: usize) -> Result<NoiseModel> {
        match *self {
            NoiseSpec::White { sigma_v } => NoiseModel::white(n, sigma_v),
            NoiseSpec::Colored { p_tot, rho } => NoiseModel::colored(n, p_tot, rho),
        }
    }
}

/// Threshold policy as configured.
///
/// A missing `sigma_tau` defaults to `sqrt(trace(Σ)/N + Δ²)`, where `Δ` is the
/// signal's largest one-step change: the dither has to span both the noise
/// and the distance the parameter can move before the next frame. For a
/// constant signal this is the per-sensor noise level.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySpec {
    #[serde(default)]
    pub sigma_tau: Option<f64>,
    #[serde(default)]
    pub init: ThresholdInit,
}

impl PolicySpec {
    pub fn build(&self, noise: &NoiseModel, signal: &SignalGenerator) -> Result<ThresholdPolicy> {
        let sigma = self
            .sigma_tau
            .unwrap_or_else(|| default_sigma_tau(noise, signal));
        ThresholdPolicy::new(sigma, self.init.clone())
    }
}

pub fn default_sigma_tau(noise: &NoiseModel, signal: &SignalGenerator) -> f64 {
    let drift = signal.max_step_change();
    (noise.rms_sigma().powi(2) + drift * drift).sqrt()
}

fn default_burn_in() -> usize {
    DEFAULT_BURN_IN
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_sensors: usize,
    pub noise: NoiseSpec,
    pub signal: SignalGenerator,
    #[serde(default)]
    pub policy: PolicySpec,
    pub horizon: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

impl SimConfig {
    pub fn new(
        n_sensors: usize,
        noise: NoiseSpec,
        signal: SignalGenerator,
        horizon: usize,
    ) -> Self {
        Self {
            n_sensors,
            noise,
            signal,
            policy: PolicySpec::default(),
            horizon,
            burn_in: DEFAULT_BURN_IN,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sensors == 0 {
            return Err(Error::invalid("n_sensors", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        if self.burn_in >= self.horizon {
            return Err(Error::invalid(
                "burn_in",
                format!(
                    "must be below horizon {}, got {}",
                    self.horizon, self.burn_in
                ),
            ));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        self.signal.validate()?;
        let noise = self.noise.build(self.n_sensors)?;
        self.policy
            .build(&noise, &self.signal)?
            .initial_thresholds(self.n_sensors)?;
        Ok(())
    }
}

/// SplitMix64 finalizer applied to `base + index`; a bijection, so distinct
/// trial indices never share a stream.
pub fn trial_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub k: u64,
    pub theta: f64,
    pub theta_hat: f64,
    pub objective: f64,
    pub fast_path: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub steps: Vec<StepRecord>,
    /// `‖x − x̂‖² / ‖x‖²` over the post-burn-in steps, or the bare squared
    /// error when `‖x‖ = 0`.
    pub nmse: f64,
    pub zero_norm: bool,
    /// Steps where the solver stopped at its iteration cap.
    pub capped_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    /// Trajectory of the first trial.
    pub per_step: Vec<StepRecord>,
    pub nmse: f64,
    pub nmse_per_trial: Vec<f64>,
    pub zero_norm: bool,
    pub capped_steps: usize,
    pub seed: u64,
}

impl SimReport {
    pub fn trials(&self) -> usize {
        self.nmse_per_trial.len()
    }

    pub fn median_nmse(&self) -> f64 {
        median(&self.nmse_per_trial)
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

/// A validated configuration with its noise model and recovery cache built
/// once and shared by every trial.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    noise: NoiseModel,
    cache: RecoveryCache,
    policy: ThresholdPolicy,
}

impl Simulation {
    pub fn new(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let noise = config.noise.build(config.n_sensors)?;
        let cache = RecoveryCache::new(&noise)?;
        let policy = config.policy.build(&noise, &config.signal)?;
        Ok(Self {
            config: config.clone(),
            noise,
            cache,
            policy,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn cache(&self) -> &RecoveryCache {
        &self.cache
    }

    pub fn policy(&self) -> &ThresholdPolicy {
        &self.policy
    }

    pub fn run_trial(&self, seed: u64) -> Result<TrialOutcome> {
        let cfg = &self.config;
        let n = cfg.n_sensors;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tau = self.policy.initial_thresholds(n)?;
        let mut steps = Vec::with_capacity(cfg.horizon);
        let mut capped_steps = 0;

        for k in 0..cfg.horizon as u64 {
            let theta = cfg.signal.theta_at(k);
            let z = observe(theta, &self.noise, &mut rng);
            let frame = quantize(&z, &tau, k)?;
            let result = solve_cqp(&self.cache, &frame)?;
            if result.hit_iteration_cap {
                capped_steps += 1;
            }
            steps.push(StepRecord {
                k,
                theta,
                theta_hat: result.theta_hat,
                objective: result.objective,
                fast_path: result.fast_path,
                iterations: result.iterations,
            });
            tau = self.policy.next_thresholds(result.theta_hat, n, &mut rng);
        }

        let (mut err, mut norm) = (0.0, 0.0);
        for s in &steps[cfg.burn_in..] {
            err += (s.theta - s.theta_hat).powi(2);
            norm += s.theta * s.theta;
        }
        let zero_norm = norm == 0.0;
        let nmse = if zero_norm { err } else { err / norm };
        Ok(TrialOutcome {
            steps,
            nmse,
            zero_norm,
            capped_steps,
        })
    }

    /// Runs every trial, in parallel, and reduces in trial order.
    pub fn run_monte_carlo(&self) -> Result<SimReport> {
        let cfg = &self.config;
        let outcomes = (0..cfg.trials as u64)
            .into_par_iter()
            .map(|i| self.run_trial(trial_seed(cfg.seed, i)))
            .collect::<Result<Vec<_>>>()?;
        let nmse_per_trial: Vec<f64> = outcomes.iter().map(|o| o.nmse).collect();
        let nmse = nmse_per_trial.iter().sum::<f64>() / nmse_per_trial.len() as f64;
        let zero_norm = outcomes.iter().any(|o| o.zero_norm);
        let capped_steps = outcomes.iter().map(|o| o.capped_steps).sum();
        let per_step = outcomes
            .into_iter()
            .next()
            .map(|o| o.steps)
            .unwrap_or_default();
        Ok(SimReport {
            per_step,
            nmse,
            nmse_per_trial,
            zero_norm,
            capped_steps,
            seed: cfg.seed,
        })
    }
}

pub fn run_trial(config: &SimConfig, seed: u64) -> Result<TrialOutcome> {
    Simulation::new(config)?.run_trial(seed)
}

pub fn run_monte_carlo(config: &SimConfig) -> Result<SimReport> {
    Simulation::new(config)?.run_monte_carlo()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    /// Swept value: sensor count or total noise power.
    pub value: f64,
    pub nmse: f64,
    pub median_nmse: f64,
}

/// One Monte Carlo run per sensor count. White noise keeps its per-sensor
/// level; colored noise keeps its total power.
pub fn sweep_nodes(base: &SimConfig, n_list: &[usize]) -> Result<Vec<SweepRow>> {
    if n_list.is_empty() {
        return Err(Error::invalid("n_list", "must not be empty"));
    }
    if n_list.contains(&0) {
        return Err(Error::invalid("n_list", "sensor counts must be positive"));
    }
    n_list
        .iter()
        .map(|&n| {
            let cfg = SimConfig {
                n_sensors: n,
                ..base.clone()
            };
            let report = run_monte_carlo(&cfg)?;
            Ok(SweepRow {
                value: n as f64,
                nmse: report.nmse,
                median_nmse: report.median_nmse(),
            })
        })
        .collect()
}

/// One Monte Carlo run per total noise power with colored noise rebuilt each
/// time. A white base config sweeps uncorrelated noise (`rho = 0`).
pub fn sweep_noise_power(base: &SimConfig, p_list: &[f64]) -> Result<Vec<SweepRow>> {
    if p_list.is_empty() {
        return Err(Error::invalid("p_list", "must not be empty"));
    }
    let rho = match base.noise {
        NoiseSpec::Colored { rho, .. } => rho,
        NoiseSpec::White { .. } => 0.0,
    };
    p_list
        .iter()
        .map(|&p_tot| {
            let cfg = SimConfig {
                noise: NoiseSpec::Colored { p_tot, rho },
                ..base.clone()
            };
            let report = run_monte_carlo(&cfg)?;
            Ok(SweepRow {
                value: p_tot,
                nmse: report.nmse,
                median_nmse: report.median_nmse(),
            })
        })
        .collect()
}
