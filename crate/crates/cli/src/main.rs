//! `cirlab`: runs verifications and measurements against the registry and
//! prints a JSON verdict.
//!
//! Exit status is 0 on success, 1 when a verification fails, 2 on a usage or
//! configuration error.

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use cirlab::zoo::Registry;
use clap::{Parser, Subcommand};
use thiserror::Error;

mod commands;
mod config;
mod output;

use config::{ExperimentConfig, Flags};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> CliError {
        CliError::Io { path: path.display().to_string(), source }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cirlab", version, about = "Step-exact experiments on enumerating machines, approximations and analogies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check E-machine conditions for n = 1..n-max; writes profile CSV.
    VerifyEtm(Flags),
    /// Check an approximation witness (registry name or manifest file).
    VerifyApprox(Flags),
    /// Check a computational analogy witness in both directions.
    VerifyCa(Flags),
    /// Measure charged steps over an n grid; writes CSV and SVG.
    Measure(Flags),
    /// Fit power laws to timing series.
    Fit(Flags),
    /// Compare a challenger with the best E-machine, split by parity.
    Falsify(Flags),
    /// Check the Σ F(i)/i ratio for a bound.
    #[command(name = "appendixB", alias = "appendix-b")]
    AppendixB(Flags),
    /// Registry listing, CA class ledger and paired falsifier verdicts.
    Report(Flags),
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::VerifyEtm(f) => ("verify-etm", f),
            Command::VerifyApprox(f) => ("verify-approx", f),
            Command::VerifyCa(f) => ("verify-ca", f),
            Command::Measure(f) => ("measure", f),
            Command::Fit(f) => ("fit", f),
            Command::Falsify(f) => ("falsify", f),
            Command::AppendixB(f) => ("appendixB", f),
            Command::Report(f) => ("report", f),
        }
    }
}

fn run(cli: Cli) -> Result<output::Verdict, CliError> {
    let (experiment, flags) = cli.command.parts();
    let c = ExperimentConfig::resolve(experiment, flags)?;
    if let Some(jobs) = c.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    }
    if experiment == "appendixB" {
        return commands::appendix_b_cmd(&c);
    }
    let r = Registry::standard();
    match experiment {
        "verify-etm" => commands::verify_etm_cmd(&r, &c),
        "verify-approx" => commands::verify_approx_cmd(&r, &c),
        "verify-ca" => commands::verify_ca_cmd(&r, &c),
        "measure" => commands::measure_cmd(&r, &c),
        "fit" => commands::fit_cmd(&r, &c),
        "falsify" => commands::falsify_cmd(&r, &c),
        _ => commands::report_cmd(&r, &c),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(v) => {
            // a closed pipe downstream is not an error of the experiment
            let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&v).expect("verdicts serialize"));
            if v.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
