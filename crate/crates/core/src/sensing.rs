//! Ground-truth signal, noisy observation and the per-sensor sign quantizer.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;

/// Default sample period in seconds for sinusoidal signals.
pub const DEFAULT_DT: f64 = 1e-3;

fn default_dt() -> f64 {
    DEFAULT_DT
}

/// The parameter trajectory `θ(k)` observed by every sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SignalGenerator {
    Constant {
        value: f64,
    },
    /// `A · sin(2π f k dt)`.
    Sinusoid {
        amplitude: f64,
        frequency_hz: f64,
        #[serde(default = "default_dt")]
        dt: f64,
    },
}

impl SignalGenerator {
    pub fn constant(value: f64) -> Self {
        SignalGenerator::Constant { value }
    }

    pub fn sinusoid(amplitude: f64, frequency_hz: f64, dt: f64) -> Result<Self> {
        let s = SignalGenerator::Sinusoid {
            amplitude,
            frequency_hz,
            dt,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SignalGenerator::Constant { value } => {
                if !value.is_finite() {
                    return Err(Error::invalid("value", "must be finite"));
                }
            }
            SignalGenerator::Sinusoid {
                amplitude,
                frequency_hz,
                dt,
            } => {
                if !amplitude.is_finite() {
                    return Err(Error::invalid("amplitude", "must be finite"));
                }
                if !(frequency_hz >= 0.0 && frequency_hz.is_finite()) {
                    return Err(Error::invalid(
                        "frequency_hz",
                        format!("must be non-negative, got {frequency_hz}"),
                    ));
                }
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
                }
            }
        }
        Ok(())
    }

    /// Largest possible `|θ(k+1) − θ(k)|`: zero for a constant,
    /// `2|A|·|sin(π f dt)|` for a sinusoid.
    pub fn max_step_change(&self) -> f64 {
        match *self {
            SignalGenerator::Constant { .. } => 0.0,
            SignalGenerator::Sinusoid {
                amplitude,
                frequency_hz,
                dt,
            } => 2.0 * amplitude.abs() * (PI * frequency_hz * dt).sin().abs(),
        }
    }

    pub fn theta_at(&self, k: u64) -> f64 {
        match *self {
            SignalGenerator::Constant { value } => value,
            SignalGenerator::Sinusoid {
                amplitude,
                frequency_hz,
                dt,
            } => amplitude * (2.0 * PI * frequency_hz * k as f64 * dt).sin(),
        }
    }
}

/// Unquantized sensor readings `θ·1 + v`.
pub fn observe<R: Rng + ?Sized>(theta: f64, noise: &NoiseModel, rng: &mut R) -> DVector<f64> {
    noise.sample(rng).add_scalar(theta)
}

/// A single sign bit, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Bit {
    Neg,
    Pos,
}

impl Bit {
    /// `sgn(x)` with `sgn(0) = +1`.
    pub fn sign_of(x: f64) -> Self {
        if x >= 0.0 {
            Bit::Pos
        } else {
            Bit::Neg
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Bit::Pos => 1.0,
            Bit::Neg => -1.0,
        }
    }
}

impl From<Bit> for i8 {
    fn from(b: Bit) -> i8 {
        match b {
            Bit::Pos => 1,
            Bit::Neg => -1,
        }
    }
}

impl TryFrom<i8> for Bit {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(Bit::Pos),
            -1 => Ok(Bit::Neg),
            other => Err(Error::invalid(
                "r",
                format!("bits must be +1 or -1, got {other}"),
            )),
        }
    }
}

/// One round of 1-bit data received at the fusion center.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedFrame {
    k: u64,
    bits: Vec<Bit>,
    tau: DVector<f64>,
}

impl QuantizedFrame {
    pub fn new(k: u64, bits: Vec<Bit>, tau: DVector<f64>) -> Result<Self> {
        if bits.len() != tau.len() {
            return Err(Error::LengthMismatch {
                name: "tau",
                expected: bits.len(),
                got: tau.len(),
            });
        }
        Ok(Self { k, bits, tau })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn bits(&self) -> &[Bit] {
        &self.bits
    }

    pub fn tau(&self) -> &DVector<f64> {
        &self.tau
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

/// Applies `r_i = sgn(z_i - τ_i)` at every sensor.
pub fn quantize(z: &DVector<f64>, tau: &DVector<f64>, k: u64) -> Result<QuantizedFrame> {
    if z.len() != tau.len() {
        return Err(Error::LengthMismatch {
            name: "tau",
            expected: z.len(),
            got: tau.len(),
        });
    }
    let bits = z
        .iter()
        .zip(tau.iter())
        .map(|(zi, ti)| Bit::sign_of(zi - ti))
        .collect();
    QuantizedFrame::new(k, bits, tau.clone())
}
