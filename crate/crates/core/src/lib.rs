//! Recovery of a scalar parameter from 1-bit quantized sensor readings.
//!
//! Sensors compare noisy readings of a common parameter against thresholds
//! set by a fusion center and report only the sign. The fusion center recovers
//! the unquantized readings by solving a small convex quadratic program,
//! forms a covariance-weighted estimate, and dithers the next thresholds
//! around it.

pub mod cli;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod noise;
pub mod recovery;
pub mod sensing;
pub mod threshold;

pub use error::{Error, Result};
pub use harness::{
    run_monte_carlo, run_trial, sweep_nodes, sweep_noise_power, NoiseSpec, PolicySpec, SimConfig,
    SimReport, Simulation, StepRecord, SweepRow, TrialOutcome,
};
pub use infotheory::{binary_entropy, mi_curve, mutual_information, p_theta, MICurve, PriorSpec};
pub use noise::NoiseModel;
pub use recovery::{solve_cqp, solve_cqp_with, RecoveryCache, RecoveryResult, Solver};
pub use sensing::{observe, quantize, Bit, QuantizedFrame, SignalGenerator};
pub use threshold::{ThresholdInit, ThresholdPolicy};
