//! Command-line front end: config loading, grid parsing, CSV output and
//! command dispatch. The `onebit` binary is a thin wrapper around [`main`].

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::harness::{self, SimConfig};
use crate::infotheory::{self, PriorSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

const USAGE: &str =
    "usage: onebit <simulate|sweep-nodes|sweep-power|mi-curve> [OPTIONS] (see --help)";

const CONFIG_HELP: &str = "\
Simulation config (JSON, unknown keys rejected):
  n_sensors    required, sensor count N
  noise        required, {\"kind\":\"white\",\"sigma_v\":S} or
               {\"kind\":\"colored\",\"p_tot\":P,\"rho\":R}; rho defaults to 0.5
  signal       required, {\"kind\":\"constant\",\"value\":C} or
               {\"kind\":\"sinusoid\",\"amplitude\":A,\"frequency_hz\":F,\"dt\":T};
               dt defaults to 0.001
  horizon      required, time steps K
  policy       {\"sigma_tau\":S,\"init\":X}; sigma_tau defaults to
               sqrt(trace(Σ)/N + D²) with D the signal's largest one-step
               change (sigma_v for white noise and a constant signal); init is
               a number or a per-sensor array and defaults to 0
  burn_in      steps excluded from NMSE, default 10
  trials       Monte Carlo trials, default 100
  seed         base seed, default 0";

#[derive(Debug, Parser)]
#[command(
    name = "onebit",
    version,
    about = "Adaptive 1-bit parameter recovery simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the adaptive recovery loop and write the first trial's trajectory.
    #[command(after_help = CONFIG_HELP)]
    Simulate(SimArgs),
    /// Sweep the sensor count and write mean NMSE per count.
    #[command(after_help = CONFIG_HELP)]
    SweepNodes {
        #[command(flatten)]
        common: SimArgs,
        /// Comma-separated sensor counts, e.g. 10,25,50,100.
        #[arg(long, value_name = "LIST")]
        n_list: String,
    },
    /// Sweep total colored-noise power and write mean NMSE per power.
    #[command(after_help = CONFIG_HELP)]
    SweepPower {
        #[command(flatten)]
        common: SimArgs,
        /// Comma-separated total powers trace(Σ), e.g. 1,2,5,10.
        #[arg(long, value_name = "LIST")]
        p_list: String,
    },
    /// Mutual information of one sign bit against the noise level.
    MiCurve(MiArgs),
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Overrides the config's seed.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorKind {
    Uniform,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct MiArgs {
    /// Prior JSON ({"kind":"uniform","lower":a,"upper":b} or
    /// {"kind":"gaussian","mean":m,"std":s}); replaces the prior flags.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "uniform")]
    pub prior: PriorKind,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long, default_value_t = 1.0)]
    pub std: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    pub lower: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub upper: f64,
    /// Quantization threshold.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub tau: f64,
    /// START:STOP:COUNT, evenly spaced; prefix with `log:` for log spacing.
    #[arg(long, value_name = "GRID")]
    pub sigma_grid: String,
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Accepted for symmetry with the other commands; the curve is deterministic.
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))
}

/// Strict parse of a simulation config; the result is validated.
pub fn parse_config_str(text: &str) -> Result<SimConfig, CliError> {
    let cfg: SimConfig =
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
    cfg.validate()
        .map_err(|e| CliError::usage(format!("invalid config: {e}")))?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<SimConfig, CliError> {
    parse_config_str(&read_file(path)?)
        .map_err(|e| CliError::usage(format!("{}: {}", path.display(), e.message)))
}

pub fn parse_prior_config(path: &Path) -> Result<PriorSpec, CliError> {
    let text = read_file(path)?;
    let prior: PriorSpec = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{}: invalid prior: {e}", path.display())))?;
    prior
        .validate()
        .map_err(|e| CliError::usage(format!("{}: invalid prior: {e}", path.display())))?;
    Ok(prior)
}

/// Parses `START:STOP:COUNT` or `log:START:STOP:COUNT`. The last point equals
/// STOP exactly.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = |why: &str| CliError::usage(format!("invalid --sigma-grid {spec:?}: {why}"));
    let (log, body) = match spec.strip_prefix("log:") {
        Some(rest) => (true, rest),
        None => (false, spec),
    };
    let parts: Vec<&str> = body.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected START:STOP:COUNT"));
    }
    let start: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| bad("START is not a number"))?;
    let stop: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| bad("STOP is not a number"))?;
    let count: usize = parts[2]
        .trim()
        .parse()
        .map_err(|_| bad("COUNT is not an integer"))?;
    if count == 0 {
        return Err(bad("COUNT must be positive"));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(bad("bounds must be finite"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err(bad("log grid bounds must be positive"));
    }
    let (a, b) = if log {
        (start.ln(), stop.ln())
    } else {
        (start, stop)
    };
    let last = (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                stop
            } else {
                let x = a + (b - a) * i as f64 / last;
                if log {
                    x.exp()
                } else {
                    x
                }
            }
        })
        .collect())
}

fn parse_list<T: std::str::FromStr>(flag: &str, text: &str) -> Result<Vec<T>, CliError> {
    let values = text
        .split(',')
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::usage(format!("invalid --{flag} entry {s:?}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(CliError::usage(format!(
            "--{flag} must list at least one value"
        )));
    }
    Ok(values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Flag(bool),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match *self {
            Cell::Int(v) => write!(out, "{v}").unwrap(),
            Cell::Float(v) if v.is_finite() => write!(out, "{v:.16e}").unwrap(),
            Cell::Float(v) if v.is_nan() => out.push_str("NaN"),
            Cell::Float(v) => out.push_str(if v > 0.0 { "inf" } else { "-inf" }),
            Cell::Flag(b) => out.push(if b { '1' } else { '0' }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    /// CSV text: header first, LF endings, floats with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        out
    }

    pub fn trajectory(steps: &[harness::StepRecord]) -> Self {
        Self {
            header: vec!["k", "theta", "theta_hat", "objective", "fast_path"],
            rows: steps
                .iter()
                .map(|s| {
                    vec![
                        Cell::Int(s.k),
                        Cell::Float(s.theta),
                        Cell::Float(s.theta_hat),
                        Cell::Float(s.objective),
                        Cell::Flag(s.fast_path),
                    ]
                })
                .collect(),
        }
    }

    pub fn node_sweep(rows: &[harness::SweepRow]) -> Self {
        Self {
            header: vec!["n", "nmse"],
            rows: rows
                .iter()
                .map(|r| vec![Cell::Int(r.value as u64), Cell::Float(r.nmse)])
                .collect(),
        }
    }

    pub fn power_sweep(rows: &[harness::SweepRow]) -> Self {
        Self {
            header: vec!["p_tot", "nmse"],
            rows: rows
                .iter()
                .map(|r| vec![Cell::Float(r.value), Cell::Float(r.nmse)])
                .collect(),
        }
    }

    pub fn mi_curve(curve: &infotheory::MICurve) -> Self {
        Self {
            header: vec!["sigma_v", "mi_bits"],
            rows: curve
                .sigma_values
                .iter()
                .zip(&curve.mi_bits)
                .map(|(s, m)| vec![Cell::Float(*s), Cell::Float(*m)])
                .collect(),
        }
    }
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<(), CliError> {
    if table.rows.is_empty() {
        return Err(CliError::usage("refusing to write an empty table"));
    }
    fs::write(path, table.to_csv())
        .map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

fn load_sim(args: &SimArgs) -> Result<SimConfig, CliError> {
    let mut cfg = parse_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Executes a parsed command and returns the summary printed on success.
pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let cfg = load_sim(&args)?;
            let report = harness::run_monte_carlo(&cfg)?;
            emit_csv(&Table::trajectory(&report.per_step), &args.out)?;
            Ok(format!(
                "nmse={} trials={} seed={}",
                report.nmse,
                report.trials(),
                report.seed
            ))
        }
        Command::SweepNodes { common, n_list } => {
            let cfg = load_sim(&common)?;
            let n_list: Vec<usize> = parse_list("n-list", &n_list)?;
            let rows = harness::sweep_nodes(&cfg, &n_list)?;
            emit_csv(&Table::node_sweep(&rows), &common.out)?;
            Ok(rows
                .iter()
                .map(|r| {
                    format!(
                        "n={} nmse={} trials={} seed={}",
                        r.value, r.nmse, cfg.trials, cfg.seed
                    )
                })
                .collect::<Vec<_>>()
                .join("\n"))
        }
        Command::SweepPower { common, p_list } => {
            let cfg = load_sim(&common)?;
            let p_list: Vec<f64> = parse_list("p-list", &p_list)?;
            let rows = harness::sweep_noise_power(&cfg, &p_list)?;
            emit_csv(&Table::power_sweep(&rows), &common.out)?;
            Ok(rows
                .iter()
                .map(|r| {
                    format!(
                        "p_tot={} nmse={} trials={} seed={}",
                        r.value, r.nmse, cfg.trials, cfg.seed
                    )
                })
                .collect::<Vec<_>>()
                .join("\n"))
        }
        Command::MiCurve(args) => {
            let prior = match &args.config {
                Some(path) => parse_prior_config(path)?,
                None => match args.prior {
                    PriorKind::Uniform => PriorSpec::uniform(args.lower, args.upper)?,
                    PriorKind::Gaussian => PriorSpec::gaussian(args.mean, args.std)?,
                },
            };
            let grid = parse_grid(&args.sigma_grid)?;
            let curve = infotheory::mi_curve(&prior, args.tau, &grid)?;
            emit_csv(&Table::mi_curve(&curve), &args.out)?;
            let best = curve.argmax().unwrap_or(0);
            Ok(format!(
                "points={} mi_max={} sigma_at_max={}",
                curve.len(),
                curve.mi_bits[best],
                curve.sigma_values[best]
            ))
        }
    }
}

/// Parses `argv` (program name first), runs, and reports. Returns the exit code.
pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let first = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim();
            eprintln!("{first}; {USAGE}");
            return EXIT_USAGE;
        }
    };
    match run(cli) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {}", e.message.replace('\n', " "));
            e.code
        }
    }
}
