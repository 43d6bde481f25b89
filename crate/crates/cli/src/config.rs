//! Experiment configuration: an optional `key = value` file overlaid by
//! command-line flags.

use std::path::PathBuf;

use cirlab::approx::parse_key_values;
use clap::{Args, ValueEnum};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Grid {
    /// `n_min, n_min + step, ..., n_max`.
    Linear,
    /// `n_min, 2·n_min, 4·n_min, ...` up to `n_max`.
    Doubling,
}

/// Flags shared by every subcommand. All are optional so a config file can
/// supply them.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Registry program name; repeat for several.
    #[arg(long)]
    pub program: Vec<String>,
    #[arg(long)]
    pub n_min: Option<u64>,
    #[arg(long)]
    pub n_max: Option<u64>,
    /// Spacing of a linear grid.
    #[arg(long)]
    pub n_step: Option<u64>,
    #[arg(long, value_enum)]
    pub grid: Option<Grid>,
    /// Step budget per run.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Θ tolerance (ratio spread allowed over the tail).
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Timing series CSV (`n,steps`); repeat for several.
    #[arg(long)]
    pub series: Vec<PathBuf>,
    /// Fit window `lo:hi`.
    #[arg(long)]
    pub window: Option<String>,
    /// Witness registry name or manifest path.
    #[arg(long)]
    pub witness: Option<String>,
    /// Bound such as `n^2` or `3*nlogn + 4`.
    #[arg(long)]
    pub form: Option<String>,
    /// Exact rational arithmetic where supported.
    #[arg(long)]
    pub exact: bool,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: &'static str,
    pub programs: Vec<String>,
    pub n_min: u64,
    pub n_max: u64,
    pub n_step: u64,
    pub grid: Grid,
    pub budget: u64,
    pub tolerance: f64,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub series: Vec<PathBuf>,
    pub window: Option<(u64, u64)>,
    pub witness: Option<String>,
    pub form: Option<String>,
    pub exact: bool,
}

pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Default `(n_min, n_max)` per experiment.
fn default_range(experiment: &str) -> (u64, u64) {
    match experiment {
        "measure" => (16, 256),
        "falsify" => (4, 40),
        "appendixB" => (1, 10_000),
        "verify-ca" | "report" => (1, 16),
        _ => (1, 12),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| usage(format!("`{key}` expects a number, got `{v}`")))
}

pub fn parse_window(s: &str) -> Result<(u64, u64), CliError> {
    let (lo, hi) = s.split_once(':').or_else(|| s.split_once("..")).ok_or_else(|| usage(format!("window `{s}` is not `lo:hi`")))?;
    let (lo, hi) = (parse_num("window", lo.trim())?, parse_num("window", hi.trim())?);
    if lo > hi {
        return Err(usage(format!("window `{s}` is empty")));
    }
    Ok((lo, hi))
}

const KEYS: [&str; 14] =
    ["program", "n-min", "n-max", "n-step", "grid", "budget", "tolerance", "out", "jobs", "series", "window", "witness", "form", "exact"];

impl ExperimentConfig {
    pub fn resolve(experiment: &'static str, flags: &Flags) -> Result<ExperimentConfig, CliError> {
        let mut file = match &flags.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
                parse_key_values(&text).map_err(|line| usage(format!("{}:{line}: expected `key = value`", path.display())))?
            }
            None => Default::default(),
        };
        if let Some(k) = file.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(usage(format!("unknown config key `{k}`")));
        }
        let list = |v: String| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect::<Vec<_>>();
        let (lo, hi) = default_range(experiment);
        let mut take = |k: &str| file.remove(k);

        let programs = if flags.program.is_empty() { take("program").map(list).unwrap_or_default() } else { flags.program.clone() };
        let series = if flags.series.is_empty() {
            take("series").map(list).unwrap_or_default().into_iter().map(PathBuf::from).collect()
        } else {
            flags.series.clone()
        };
        let n_min = match (flags.n_min, take("n-min")) {
            (Some(v), _) => v,
            (None, Some(v)) => parse_num("n-min", &v)?,
            (None, None) => lo,
        };
        let n_max = match (flags.n_max, take("n-max")) {
            (Some(v), _) => v,
            (None, Some(v)) => parse_num("n-max", &v)?,
            (None, None) => hi,
        };
        let n_step = match (flags.n_step, take("n-step")) {
            (Some(v), _) => v,
            (None, Some(v)) => parse_num("n-step", &v)?,
            (None, None) => 1,
        };
        let grid = match (flags.grid, take("grid")) {
            (Some(g), _) => g,
            (None, Some(v)) => Grid::from_str(&v, true).map_err(|_| usage(format!("grid `{v}` is not linear or doubling")))?,
            (None, None) => Grid::Linear,
        };
        let budget = match (flags.budget, take("budget")) {
            (Some(v), _) => v,
            (None, Some(v)) => parse_num("budget", &v)?,
            (None, None) => DEFAULT_BUDGET,
        };
        let tolerance = match (flags.tolerance, take("tolerance")) {
            (Some(v), _) => v,
            (None, Some(v)) => parse_num("tolerance", &v)?,
            (None, None) => cirlab::analysis::DEFAULT_THETA_TOLERANCE,
        };
        let out = flags.out.clone().or_else(|| take("out").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
        let jobs = match (flags.jobs, take("jobs")) {
            (Some(v), _) => Some(v),
            (None, Some(v)) => Some(parse_num("jobs", &v)?),
            (None, None) => None,
        };
        let window = match flags.window.clone().or_else(|| take("window")) {
            Some(w) => Some(parse_window(&w)?),
            None => None,
        };
        let witness = flags.witness.clone().or_else(|| take("witness"));
        let form = flags.form.clone().or_else(|| take("form"));
        let exact = flags.exact || take("exact").is_some_and(|v| v == "true");

        if n_min > n_max {
            return Err(usage(format!("empty range {n_min}..{n_max}")));
        }
        if budget == 0 {
            return Err(usage("budget must be positive"));
        }
        if n_step == 0 {
            return Err(usage("n-step must be positive"));
        }
        if jobs == Some(0) {
            return Err(usage("jobs must be positive"));
        }
        if tolerance.is_nan() || tolerance < 1.0 {
            return Err(usage("tolerance must be at least 1"));
        }
        Ok(ExperimentConfig {
            experiment,
            programs,
            n_min,
            n_max,
            n_step,
            grid,
            budget,
            tolerance,
            out,
            jobs,
            series,
            window,
            witness,
            form,
            exact,
        })
    }

    pub fn ns(&self) -> Vec<u64> {
        match self.grid {
            Grid::Linear => (self.n_min..=self.n_max).step_by(self.n_step as usize).collect(),
            Grid::Doubling => cirlab::analysis::doubling_grid(self.n_min.max(1), self.n_max),
        }
    }
}
