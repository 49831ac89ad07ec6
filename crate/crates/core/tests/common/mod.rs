//! Independent oracles shared by the integration tests. Nothing here calls
//! into the solver or the quadrature it checks.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use onebit::{Bit, QuantizedFrame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use statrs::distribution::{ContinuousCDF, Normal as StatrsNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random symmetric positive definite matrix `s·(A Aᵀ / n + δ I)`.
pub fn random_spd<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let scale = 10f64.powf(rng.random_range(-1.0..1.0));
    let delta = rng.random_range(0.05..1.0);
    let mut s = (&a * a.transpose()) / n as f64 + DMatrix::identity(n, n) * delta;
    s *= scale;
    // exact symmetry
    let st = s.transpose();
    (s + st) * 0.5
}

/// `M = (I − 1ηᵀ)ᵀ Σ⁻¹ (I − 1ηᵀ)` through an explicit inverse, as a
/// cross-check of the Cholesky route.
pub fn reduced_form_by_inverse(sigma: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = sigma.nrows();
    let inv = sigma.clone().try_inverse().expect("invertible");
    let ones = DVector::from_element(n, 1.0);
    let sinv_one = &inv * &ones;
    let eta = &sinv_one / ones.dot(&sinv_one);
    let w = DMatrix::identity(n, n) - &ones * eta.transpose();
    (eta, w.transpose() * inv * w)
}

pub fn quad(m: &DMatrix<f64>, z: &DVector<f64>) -> f64 {
    z.dot(&(m * z))
}

pub fn frame(tau: &DVector<f64>, bits: &[Bit]) -> QuantizedFrame {
    QuantizedFrame::new(0, bits.to_vec(), tau.clone()).unwrap()
}

pub fn random_bits<R: Rng>(n: usize, rng: &mut R) -> Vec<Bit> {
    (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                Bit::Pos
            } else {
                Bit::Neg
            }
        })
        .collect()
}

/// True when the bits admit a consistent constant vector.
pub fn constant_feasible(tau: &DVector<f64>, bits: &[Bit]) -> bool {
    let lo = tau
        .iter()
        .zip(bits)
        .filter(|(_, b)| **b == Bit::Pos)
        .map(|(t, _)| *t)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = tau
        .iter()
        .zip(bits)
        .filter(|(_, b)| **b == Bit::Neg)
        .map(|(t, _)| *t)
        .fold(f64::INFINITY, f64::min);
    lo <= hi
}

pub fn feasible(z: &DVector<f64>, tau: &DVector<f64>, bits: &[Bit], tol: f64) -> bool {
    z.iter()
        .zip(tau.iter())
        .zip(bits)
        .all(|((zi, ti), b)| b.value() * (zi - ti) >= -tol)
}

/// Coarse-to-fine grid search over the feasible box
/// `[τ_i, R]` (bit +1) or `[−R, τ_i]` (bit −1), `R = 10‖τ‖_∞ + 10`.
/// Each level evaluates `points` values per axis, then recentres a box of
/// two cells around the best point; the final level has spacing `final_step`.
/// Returns the best objective found, which upper-bounds the true minimum.
pub fn grid_oracle(
    m: &DMatrix<f64>,
    tau: &DVector<f64>,
    bits: &[Bit],
    points: usize,
    final_step: f64,
) -> f64 {
    let n = tau.len();
    let radius = 10.0 * tau.amax() + 10.0;
    let clip = |i: usize, lo: f64, hi: f64| -> (f64, f64) {
        match bits[i] {
            Bit::Pos => (lo.max(tau[i]), hi.min(radius)),
            Bit::Neg => (lo.max(-radius), hi.min(tau[i])),
        }
    };
    let mut bounds: Vec<(f64, f64)> = (0..n).map(|i| clip(i, -radius, radius)).collect();
    let mut best_z = DVector::from_fn(n, |i, _| bounds[i].0.max(bounds[i].1.min(0.0)));
    let mut best_f = quad(m, &best_z);

    loop {
        let steps: Vec<f64> = bounds
            .iter()
            .map(|(lo, hi)| {
                if hi > lo {
                    (hi - lo) / (points - 1) as f64
                } else {
                    0.0
                }
            })
            .collect();
        let total = points.pow(n as u32);
        let mut z = DVector::zeros(n);
        for idx in 0..total {
            let mut rem = idx;
            for i in 0..n {
                let j = rem % points;
                rem /= points;
                z[i] = (bounds[i].0 + j as f64 * steps[i]).min(bounds[i].1);
            }
            let f = quad(m, &z);
            if f < best_f {
                best_f = f;
                best_z.copy_from(&z);
            }
        }
        let coarsest = steps.iter().cloned().fold(0.0, f64::max);
        if coarsest <= final_step * (1.0 + 1e-9) {
            break;
        }
        let next_half = (2.0 * coarsest).max(0.5 * final_step * (points - 1) as f64);
        bounds = (0..n)
            .map(|i| clip(i, best_z[i] - next_half, best_z[i] + next_half))
            .collect();
    }
    best_f
}

/// Exact minimum by enumerating active sets. With `Σ` SPD the null space of
/// `M` is `span{1}`, so every proper free block `M_FF` is invertible; the
/// all-free case is the zero-objective constant solution.
pub fn kkt_oracle(m: &DMatrix<f64>, tau: &DVector<f64>, bits: &[Bit]) -> f64 {
    let n = tau.len();
    if constant_feasible(tau, bits) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let active: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let free: Vec<usize> = (0..n).filter(|i| mask & (1 << i) == 0).collect();
        let mut z = tau.clone();
        if !free.is_empty() {
            let mff = DMatrix::from_fn(free.len(), free.len(), |a, b| m[(free[a], free[b])]);
            let rhs = DVector::from_fn(free.len(), |a, _| {
                -active
                    .iter()
                    .map(|&j| m[(free[a], j)] * tau[j])
                    .sum::<f64>()
            });
            let Some(sol) = mff.lu().solve(&rhs) else {
                continue;
            };
            for (a, &i) in free.iter().enumerate() {
                z[i] = sol[a];
            }
        }
        if feasible(&z, tau, bits, 1e-12) {
            best = best.min(quad(m, &z));
        }
    }
    best
}

fn entropy(p: f64) -> f64 {
    let t = |x: f64| {
        if x > 0.0 && x < 1.0 {
            -x * x.log2()
        } else {
            0.0
        }
    };
    t(p) + t(1.0 - p)
}

#[derive(Debug, Clone, Copy)]
pub enum Prior {
    Uniform(f64, f64),
    Gaussian(f64, f64),
}

/// Monte Carlo estimate of `I(θ; r)`: simulate `θ`, noise and the sign bit to
/// estimate `P(r = 1)`, and average the conditional entropy over the `θ`
/// draws with the normal CDF from `statrs`.
pub fn mc_mutual_information(prior: Prior, tau: f64, sigma_v: f64, draws: usize, seed: u64) -> f64 {
    let mut rng = rng(seed);
    let std_normal = StatrsNormal::new(0.0, 1.0).unwrap();
    let noise = Normal::new(0.0, sigma_v).unwrap();
    let uniform = match prior {
        Prior::Uniform(a, b) => Some(Uniform::new(a, b).unwrap()),
        Prior::Gaussian(..) => None,
    };
    let gaussian = match prior {
        Prior::Gaussian(mu, s) => Some(Normal::new(mu, s).unwrap()),
        Prior::Uniform(..) => None,
    };
    let mut ones = 0usize;
    let mut cond = 0.0;
    for _ in 0..draws {
        let theta = match (&uniform, &gaussian) {
            (Some(u), _) => u.sample(&mut rng),
            (_, Some(g)) => g.sample(&mut rng),
            _ => unreachable!(),
        };
        if theta + noise.sample(&mut rng) >= tau {
            ones += 1;
        }
        let p = std_normal.cdf((theta - tau) / sigma_v);
        cond += entropy(p);
    }
    entropy(ones as f64 / draws as f64) - cond / draws as f64
}
