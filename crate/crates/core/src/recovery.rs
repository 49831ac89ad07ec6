//! Recovery of the unquantized readings from one frame of sign bits.
//!
//! With `η = Σ⁻¹1 / (1ᵀΣ⁻¹1)` and `W = I − 1ηᵀ`, the weighted least-squares
//! criterion with θ eliminated reduces to `zᵀMz`, `M = WᵀΣ⁻¹W`. The recovered
//! `ẑ` minimizes it over the sign-consistent region `Diag(r)(z − τ) ⪰ 0`, and
//! `θ̂ = ηᵀẑ`.
//!
//! `M` is blind along `1`, so whenever a constant vector `c·1` is consistent
//! with the bits the minimum is zero and the solution is picked analytically
//! from the interval of admissible `c`. Otherwise the program is solved by
//! projected gradient descent; the constraints are half-lines per
//! coordinate, so projection is a clamp.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::sensing::{Bit, QuantizedFrame};

/// Iteration cap for the projected-gradient path.
pub const MAX_ITERATIONS: usize = 20_000;
/// Relative objective-decrease stopping tolerance.
pub const OBJECTIVE_RTOL: f64 = 1e-12;
/// Relative feasibility tolerance, scaled by `1 + ‖τ‖_∞`.
pub const FEASIBILITY_RTOL: f64 = 1e-9;
/// Coordinates closer than this to their threshold are skipped by the
/// sign-consistency check.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Quantities derived from `Σ` that every solve reuses.
#[derive(Debug, Clone)]
pub struct RecoveryCache {
    eta: DVector<f64>,
    m: DMatrix<f64>,
    lipschitz: f64,
    chol: Cholesky<f64, Dyn>,
    fisher: f64,
}

impl RecoveryCache {
    pub fn new(noise: &NoiseModel) -> Result<Self> {
        let n = noise.dim();
        let chol = noise.cholesky().clone();
        let sinv_one = chol.solve(&DVector::from_element(n, 1.0));
        let fisher = sinv_one.sum();
        if !(fisher > 0.0 && fisher.is_finite()) {
            return Err(Error::SingularCovariance(format!(
                "1ᵀΣ⁻¹1 = {fisher} is not a positive finite number"
            )));
        }
        let eta = sinv_one / fisher;

        let mut w = DMatrix::<f64>::identity(n, n);
        for j in 0..n {
            w.column_mut(j).add_scalar_mut(-eta[j]);
        }
        let sinv_w = chol.solve(&w);
        let mut m = w.transpose() * sinv_w;
        // round-off leaves M slightly asymmetric; it is symmetric by construction
        let mt = m.transpose();
        m += mt;
        m *= 0.5;

        let lambda_max = SymmetricEigen::new(m.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        // floor keeps the step finite for N = 1, where M = 0
        let lipschitz = (lambda_max * (1.0 + 1e-6)).max(f64::MIN_POSITIVE.sqrt());

        Ok(Self {
            eta,
            m,
            lipschitz,
            chol,
            fisher,
        })
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    /// Normalized weights `η`; they sum to one.
    pub fn eta(&self) -> &DVector<f64> {
        &self.eta
    }

    /// The reduced quadratic form `M`.
    pub fn m_matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Upper bound on the largest eigenvalue of `M`.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// `1ᵀΣ⁻¹1`.
    pub fn fisher_denominator(&self) -> f64 {
        self.fisher
    }

    /// Variance of the unquantized estimator, `(1ᵀΣ⁻¹1)⁻¹`.
    pub fn estimator_variance(&self) -> f64 {
        1.0 / self.fisher
    }

    /// `zᵀMz`.
    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        z.dot(&(&self.m * z))
    }

    /// Weighted least-squares estimate `ηᵀz`.
    pub fn estimate_theta(&self, z: &DVector<f64>) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::LengthMismatch {
                name: "z",
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(self.eta.dot(z))
    }

    /// Same estimate computed as `1ᵀΣ⁻¹z / 1ᵀΣ⁻¹1` with fresh triangular solves.
    pub fn estimate_theta_direct(&self, z: &DVector<f64>) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::LengthMismatch {
                name: "z",
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(self.chol.solve(z).sum() / self.fisher)
    }

    pub fn solve(&self, frame: &QuantizedFrame) -> Result<RecoveryResult> {
        solve_cqp(self, frame)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub z_hat: DVector<f64>,
    pub theta_hat: f64,
    /// `ẑᵀMẑ`.
    pub objective: f64,
    pub iterations: usize,
    /// The analytic constant-vector solution was used.
    pub fast_path: bool,
    /// Every coordinate off the threshold boundary reproduces its bit.
    pub consistent: bool,
    /// Projected gradient stopped at [`MAX_ITERATIONS`] without meeting the
    /// decrease tolerance.
    pub hit_iteration_cap: bool,
}

/// Bounds on a constant vector `c·1` that is consistent with the bits:
/// `lo = max τ_i over r_i = +1`, `hi = min τ_i over r_i = −1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ConstantInterval {
    pub fn of(frame: &QuantizedFrame) -> Self {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (b, t) in frame.bits().iter().zip(frame.tau().iter()) {
            match b {
                Bit::Pos => lo = lo.max(*t),
                Bit::Neg => hi = hi.min(*t),
            }
        }
        Self { lo, hi }
    }

    pub fn is_feasible(&self) -> bool {
        self.lo <= self.hi
    }

    /// Midpoint when both ends are finite, otherwise the finite end.
    pub fn pick(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            (true, false) => self.lo,
            (false, true) => self.hi,
            (false, false) => 0.0,
        }
    }
}

fn project(z: &mut DVector<f64>, bits: &[Bit], tau: &DVector<f64>) {
    for ((zi, b), t) in z.iter_mut().zip(bits).zip(tau.iter()) {
        *zi = match b {
            Bit::Pos => zi.max(*t),
            Bit::Neg => zi.min(*t),
        };
    }
}

fn sign_consistent(z: &DVector<f64>, frame: &QuantizedFrame) -> bool {
    z.iter()
        .zip(frame.bits())
        .zip(frame.tau().iter())
        .all(|((zi, b), t)| {
            let d = zi - t;
            d.abs() <= BOUNDARY_TOL || Bit::sign_of(d) == *b
        })
}

/// Projected-gradient variant used on frames with no consistent constant
/// vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Nesterov-accelerated projected gradient, momentum reset whenever the
    /// objective would increase.
    #[default]
    Accelerated,
    /// Plain projected gradient with step `1 / lipschitz`.
    Plain,
}

/// Minimizes `zᵀMz` subject to `Diag(r)(z − τ) ⪰ 0` and returns the estimate.
pub fn solve_cqp(cache: &RecoveryCache, frame: &QuantizedFrame) -> Result<RecoveryResult> {
    solve_cqp_with(cache, frame, Solver::default())
}

pub fn solve_cqp_with(
    cache: &RecoveryCache,
    frame: &QuantizedFrame,
    solver: Solver,
) -> Result<RecoveryResult> {
    let n = frame.len();
    if n == 0 {
        return Err(Error::invalid("frame", "must contain at least one sensor"));
    }
    if n != cache.dim() {
        return Err(Error::LengthMismatch {
            name: "frame",
            expected: cache.dim(),
            got: n,
        });
    }

    let interval = ConstantInterval::of(frame);
    if interval.is_feasible() {
        let c = interval.pick();
        let z_hat = DVector::from_element(n, c);
        let theta_hat = cache.estimate_theta(&z_hat)?;
        let consistent = sign_consistent(&z_hat, frame);
        return Ok(RecoveryResult {
            z_hat,
            theta_hat,
            objective: 0.0,
            iterations: 0,
            fast_path: true,
            consistent,
            hit_iteration_cap: false,
        });
    }

    let descent = match solver {
        Solver::Accelerated => accelerated_descent(cache, frame),
        Solver::Plain => plain_descent(cache, frame),
    };
    let theta_hat = cache.estimate_theta(&descent.z)?;
    let consistent = sign_consistent(&descent.z, frame);
    Ok(RecoveryResult {
        z_hat: descent.z,
        theta_hat,
        objective: descent.objective.max(0.0),
        iterations: descent.iterations,
        fast_path: false,
        consistent,
        hit_iteration_cap: !descent.converged,
    })
}

struct Descent {
    z: DVector<f64>,
    objective: f64,
    iterations: usize,
    converged: bool,
}

fn plain_descent(cache: &RecoveryCache, frame: &QuantizedFrame) -> Descent {
    let (tau, bits) = (frame.tau(), frame.bits());
    let step = 1.0 / cache.lipschitz;
    let mut z = tau.clone();
    let mut grad = &cache.m * &z;
    let mut f = z.dot(&grad);
    let stop = OBJECTIVE_RTOL * (1.0 + f);
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        z.axpy(-step, &grad, 1.0);
        project(&mut z, bits, tau);
        grad = &cache.m * &z;
        let f_next = z.dot(&grad);
        iterations += 1;
        let decrease = (f - f_next).abs();
        f = f_next;
        if decrease <= stop {
            return Descent {
                z,
                objective: f,
                iterations,
                converged: true,
            };
        }
    }
    Descent {
        z,
        objective: f,
        iterations,
        converged: false,
    }
}

fn accelerated_descent(cache: &RecoveryCache, frame: &QuantizedFrame) -> Descent {
    let (tau, bits) = (frame.tau(), frame.bits());
    let step = 1.0 / cache.lipschitz;

    let mut z = tau.clone();
    let mut mz = &cache.m * &z;
    let mut f = z.dot(&mz);
    let stop = OBJECTIVE_RTOL * (1.0 + f);
    // extrapolated point and M times it, kept as a combination of M z terms
    let mut y = z.clone();
    let mut my = mz.clone();
    let mut t = 1.0f64;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        let mut z_next = y.clone();
        z_next.axpy(-step, &my, 1.0);
        project(&mut z_next, bits, tau);
        let mz_next = &cache.m * &z_next;
        let f_next = z_next.dot(&mz_next);
        iterations += 1;

        if f_next > f && t > 1.0 {
            // momentum overshot: drop it and take a plain step from z
            t = 1.0;
            y.copy_from(&z);
            my.copy_from(&mz);
            continue;
        }

        let decrease = (f - f_next).abs();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = &z_next * (1.0 + beta) - &z * beta;
        my = &mz_next * (1.0 + beta) - &mz * beta;
        z = z_next;
        mz = mz_next;
        f = f_next;
        t = t_next;
        if decrease <= stop {
            return Descent {
                z,
                objective: f,
                iterations,
                converged: true,
            };
        }
    }
    Descent {
        z,
        objective: f,
        iterations,
        converged: false,
    }
}
