//! `cvspin`: runs c-valued spin verifications and games from a spec.
//!
//! Settings come from flags, then an optional JSON config file, then the
//! built-in defaults, in that order of precedence. Exit codes: 0 success,
//! 1 a verification did not hold, 2 invalid input, 3 runtime failure.

mod modes;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::json;

use modes::{Outcome, SpecError};
use spec::{Mode, PartialSpec, RunSpec};

#[derive(Debug, Parser)]
#[command(
    name = "cvspin",
    version,
    about = "c-valued spin simulations and the joint-mapping game"
)]
struct Args {
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// JSON file with any of the flag names below as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// singlet | phi-plus | product:<4 or 8 reals> | [raw:]<8 reals>
    #[arg(long, allow_hyphen_values = true)]
    state: Option<String>,
    /// yx | computational | [raw:]<16 reals>
    #[arg(long, allow_hyphen_values = true)]
    basis: Option<String>,
    /// two-point | three-point | raw:<values>;<weights>
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
    /// Polar angles in the xz-plane, e.g. 0,pi/2,pi/4,-pi/4.
    #[arg(long, allow_hyphen_values = true)]
    angles: Option<String>,
    #[arg(long)]
    rounds: Option<u64>,
    /// Random trials for verify-theorem1.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// quantum | sign | constant:+1 | constant:-1 | coin | random-table:<seed> | table:<path>
    #[arg(long)]
    strategy_a: Option<String>,
    #[arg(long)]
    strategy_b: Option<String>,
    #[arg(long)]
    sigma_k: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

impl Args {
    fn into_parts(self) -> (Option<PathBuf>, PartialSpec) {
        let flags = PartialSpec {
            mode: self.mode,
            state: self.state,
            basis: self.basis,
            xi: self.xi,
            angles: self.angles,
            rounds: self.rounds,
            trials: self.trials,
            seed: self.seed,
            strategy_a: self.strategy_a,
            strategy_b: self.strategy_b,
            sigma_k: self.sigma_k,
            out: self.out,
            workers: self.workers,
        };
        (self.config, flags)
    }
}

fn resolve(args: Args) -> Result<RunSpec> {
    let (config, flags) = args.into_parts();
    let file = match config {
        Some(path) => PartialSpec::from_file(&path)?,
        None => PartialSpec::default(),
    };
    RunSpec::resolve(file.overlay(flags))
}

fn write_report(spec: &RunSpec, outcome: &Outcome) -> Result<PathBuf> {
    let report = json!({
        "metadata": {
            "timestamp": chrono::Utc::now().to_rfc3339(),
            "version": env!("CARGO_PKG_VERSION"),
        },
        "mode": spec.mode,
        "config": spec,
        "config_digest": spec.digest(),
        "result": outcome.result,
    });
    std::fs::create_dir_all(&spec.out)
        .with_context(|| format!("cannot create {}", spec.out.display()))?;
    let path = spec.out.join("report.json");
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(path)
}

fn main() -> ExitCode {
    let spec = match resolve(Args::parse()) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let outcome = match modes::run(&spec) {
        Err(SpecError(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(3);
        }
        Ok(Ok(outcome)) => outcome,
    };
    match write_report(&spec, &outcome) {
        Ok(path) => println!("wrote {}", path.display()),
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(3);
        }
    }
    if outcome.verified {
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed; see the report");
        ExitCode::from(1)
    }
}
