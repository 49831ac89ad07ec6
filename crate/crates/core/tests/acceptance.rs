//! Acceptance suite. Runs each criterion in turn and prints one
//! `[PASS]`/`[FAIL]` line per criterion; exits nonzero if any fails.

mod common;

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use nalgebra::{DMatrix, DVector};
use onebit::harness::{NoiseSpec, SimConfig};
use onebit::recovery::BOUNDARY_TOL;
use onebit::{
    mi_curve, mutual_information, quantize, run_monte_carlo, solve_cqp, sweep_nodes, NoiseModel,
    PriorSpec, RecoveryCache, SignalGenerator,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);

fn cache_for(sigma: &DMatrix<f64>) -> RecoveryCache {
    RecoveryCache::new(&NoiseModel::from_covariance(sigma.clone()).unwrap()).unwrap()
}

fn c1_invariants() -> Outcome {
    let mut rng = rng(0xC1);
    let mut worst_m1 = 0.0f64;
    let mut worst_quad = f64::INFINITY;
    for _ in 0..100 {
        let n = rng.random_range(2..=10);
        let cache = cache_for(&random_spd(n, &mut rng));
        let eta_sum = cache.eta().sum();
        if (eta_sum - 1.0).abs() > 1e-12 {
            return Err(format!("ηᵀ1 = {eta_sum}"));
        }
        let m = cache.m_matrix();
        let ratio = (m * DVector::from_element(n, 1.0)).amax() / m.amax();
        worst_m1 = worst_m1.max(ratio);
        if ratio > 1e-10 {
            return Err(format!("‖M·1‖∞/‖M‖max = {ratio:e} at N={n}"));
        }
        for _ in 0..100 {
            let x = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0)).normalize();
            let q = quad(m, &x);
            worst_quad = worst_quad.min(q);
            if q < -1e-10 {
                return Err(format!("xᵀMx = {q:e} at N={n}"));
            }
        }
    }
    Ok(format!(
        "max ‖M·1‖∞/‖M‖max {worst_m1:.1e}, min xᵀMx {worst_quad:.1e}"
    ))
}

fn c2_oracle() -> Outcome {
    let mut rng = rng(0xC2);
    let mut worst_gap = f64::NEG_INFINITY;
    let mut general = 0;
    for i in 0..200 {
        let n = rng.random_range(1..=4);
        let cache = cache_for(&random_spd(n, &mut rng));
        let tau = DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0));
        let bits = random_bits(n, &mut rng);
        let r = solve_cqp(&cache, &frame(&tau, &bits)).map_err(|e| e.to_string())?;
        let oracle = grid_oracle(cache.m_matrix(), &tau, &bits, 11, 1e-2);
        let gap = r.objective - oracle;
        worst_gap = worst_gap.max(gap);
        if gap > 1e-3 {
            return Err(format!(
                "instance {i}: solver {} > oracle {oracle} + 1e-3",
                r.objective
            ));
        }
        let requantized = quantize(&r.z_hat, &tau, 0).map_err(|e| e.to_string())?;
        for j in 0..n {
            let off_boundary = (r.z_hat[j] - tau[j]).abs() > BOUNDARY_TOL * (1.0 + tau[j].abs());
            if off_boundary && requantized.bits()[j] != bits[j] {
                return Err(format!("instance {i}: coordinate {j} contradicts its bit"));
            }
        }
        general += usize::from(!r.fast_path);
    }
    Ok(format!(
        "worst solver − oracle {worst_gap:.1e}, {general} general-path instances"
    ))
}

fn tracking(n: usize, noise: NoiseSpec, f: f64) -> SimConfig {
    let mut cfg = SimConfig::new(
        n,
        noise,
        SignalGenerator::sinusoid(10.0, f, 1e-3).unwrap(),
        1000,
    );
    cfg.trials = 100;
    cfg
}

fn c3_white() -> Outcome {
    let report = run_monte_carlo(&tracking(100, NoiseSpec::White { sigma_v: 1.0 }, 200.0))
        .map_err(|e| e.to_string())?;
    if report.nmse < 1e-2 {
        Ok(format!(
            "mean NMSE {:.3e} over {} trials",
            report.nmse,
            report.trials()
        ))
    } else {
        Err(format!("mean NMSE {:.3e}", report.nmse))
    }
}

fn c4_colored() -> Outcome {
    let cfg = tracking(
        100,
        NoiseSpec::Colored {
            p_tot: 5.0,
            rho: 0.5,
        },
        50.0,
    );
    let rows = sweep_nodes(&cfg, &[10, 25, 50, 100]).map_err(|e| e.to_string())?;
    let medians: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.2e}", r.median_nmse))
        .collect();
    let mean_100 = rows[3].nmse;
    if mean_100 >= 1e-2 {
        return Err(format!("mean NMSE at N=100 {mean_100:.3e}"));
    }
    if rows.windows(2).any(|w| w[1].median_nmse > w[0].median_nmse) {
        return Err(format!(
            "medians not non-increasing: {}",
            medians.join(", ")
        ));
    }
    Ok(format!(
        "mean NMSE at N=100 {mean_100:.3e}, medians {}",
        medians.join(", ")
    ))
}

fn c5_mutual_information() -> Outcome {
    let prior = PriorSpec::uniform(-1.0, 1.0).unwrap();
    let count = 121;
    let grid: Vec<f64> = (0..count)
        .map(|i| {
            if i == count - 1 {
                10.0
            } else {
                10f64.powf(-3.0 + 4.0 * i as f64 / (count - 1) as f64)
            }
        })
        .collect();
    let curve = mi_curve(&prior, 1.5, &grid).map_err(|e| e.to_string())?;
    let k = curve.argmax().unwrap();
    let peak = curve.mi_bits[k];
    let (first, last) = (curve.mi_bits[0], curve.mi_bits[count - 1]);
    if k == 0 || k == count - 1 {
        return Err(format!("maximum at endpoint index {k}"));
    }
    if peak < first + 1e-3 || peak < last + 1e-3 {
        return Err(format!(
            "peak {peak:.4e} vs endpoints {first:.4e}, {last:.4e}"
        ));
    }

    let mut rng = rng(0xC5);
    let mut worst = 0.0f64;
    for i in 0..5 {
        let (p, spec) = if i % 2 == 0 {
            let a = rng.random_range(-2.0..0.0);
            let b = a + rng.random_range(0.5..3.0);
            (Prior::Uniform(a, b), PriorSpec::uniform(a, b).unwrap())
        } else {
            let m = rng.random_range(-1.0..1.0);
            let s = rng.random_range(0.3..2.0);
            (Prior::Gaussian(m, s), PriorSpec::gaussian(m, s).unwrap())
        };
        let tau = rng.random_range(-1.5..1.5);
        let sigma = 10f64.powf(rng.random_range(-1.0..0.5));
        let q = mutual_information(&spec, tau, sigma).map_err(|e| e.to_string())?;
        let mc = mc_mutual_information(p, tau, sigma, 10_000_000, 0xC500 + i);
        worst = worst.max((q - mc).abs());
        if (q - mc).abs() > 1e-3 {
            return Err(format!(
                "{p:?} τ={tau:.3} σ={sigma:.3}: quadrature {q:.6} vs MC {mc:.6}"
            ));
        }
    }
    Ok(format!(
        "peak {peak:.4} at σ={:.3e} (endpoints {first:.2e}, {last:.2e}); worst |quad − MC| {worst:.1e}",
        curve.sigma_values[k]
    ))
}

fn c6_estimator() -> Outcome {
    let mut rng = rng(0xC6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(1..=200);
        let sigma = rng.random_range(0.1..5.0);
        let cache = RecoveryCache::new(&NoiseModel::white(n, sigma).unwrap()).unwrap();
        let z = DVector::from_fn(n, |_, _| rng.random_range(-10.0..10.0));
        let err = (cache.estimate_theta(&z).unwrap() - z.mean()).abs();
        worst = worst.max(err);
        if err > 1e-12 {
            return Err(format!("white N={n}: |θ̂ − mean| = {err:e}"));
        }
    }
    let diag =
        NoiseModel::from_covariance(DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0])))
            .and_then(|m| RecoveryCache::new(&m))
            .map_err(|e| e.to_string())?;
    let t = diag
        .estimate_theta(&DVector::from_vec(vec![1.0, 5.0]))
        .unwrap();
    if (t - 1.8).abs() > 1e-12 {
        return Err(format!("diag(1,4) example gives {t}"));
    }
    Ok(format!(
        "worst white |θ̂ − mean| {worst:.1e}, diag(1,4) → {t}"
    ))
}

fn c7_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("c.json");
    fs::write(
        &cfg,
        r#"{"n_sensors":50,"noise":{"kind":"colored","p_tot":5,"rho":0.5},
            "signal":{"kind":"sinusoid","amplitude":10,"frequency_hz":50,"dt":0.001},
            "horizon":300,"trials":8,"seed":7}"#,
    )
    .map_err(|e| e.to_string())?;
    let cfg = cfg.to_str().unwrap().to_owned();
    let commands: [(&str, Vec<&str>); 4] = [
        (
            "simulate",
            vec!["simulate", "--config", &cfg, "--seed", "3"],
        ),
        (
            "sweep-nodes",
            vec!["sweep-nodes", "--config", &cfg, "--n-list", "10,25"],
        ),
        (
            "sweep-power",
            vec!["sweep-power", "--config", &cfg, "--p-list", "1,5"],
        ),
        (
            "mi-curve",
            vec![
                "mi-curve",
                "--prior",
                "gaussian",
                "--tau",
                "0.5",
                "--sigma-grid",
                "log:0.001:10:40",
            ],
        ),
    ];
    for (name, args) in &commands {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = dir.path().join(format!("{name}-{run}.csv"));
            let status = Command::new(env!("CARGO_BIN_EXE_onebit"))
                .args(args)
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!(
                    "{name} failed: {}",
                    String::from_utf8_lossy(&status.stderr)
                ));
            }
            outputs.push(fs::read(&out).map_err(|e| e.to_string())?);
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{name} output differs between runs"));
        }
    }
    Ok("simulate, sweep-nodes, sweep-power, mi-curve byte-identical".into())
}

fn main() {
    let criteria: [Criterion; 7] = [
        (
            "C1",
            "reduced-form invariants",
            Duration::from_secs(5),
            c1_invariants,
        ),
        (
            "C2",
            "CQP vs grid oracle",
            Duration::from_secs(60),
            c2_oracle,
        ),
        (
            "C3",
            "white-noise tracking",
            Duration::from_secs(120),
            c3_white,
        ),
        (
            "C4",
            "colored-noise tracking",
            Duration::from_secs(300),
            c4_colored,
        ),
        (
            "C5",
            "mutual information",
            Duration::from_secs(120),
            c5_mutual_information,
        ),
        (
            "C6",
            "estimator correctness",
            Duration::from_secs(60),
            c6_estimator,
        ),
        (
            "C7",
            "CLI determinism",
            Duration::from_secs(120),
            c7_determinism,
        ),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if outcome.is_ok() && elapsed > budget {
            outcome = Err(format!("took {elapsed:.1?}, budget {budget:?}"));
        }
        match outcome {
            Ok(detail) => println!("[PASS] {id} {name}: {detail} ({elapsed:.2?})"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {detail} ({elapsed:.2?})");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
