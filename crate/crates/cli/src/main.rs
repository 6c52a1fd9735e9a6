use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alpha_walk_core::experiments::config::{ExperimentConfig, ExperimentKind};
use alpha_walk_core::experiments::report::Check;
use alpha_walk_core::experiments::{
    run_cond_check, run_dioph_sum, run_discrepancy_curve, run_et_check, run_fit_exponent, run_gap_diagnostic,
    run_moment_check, run_simulate,
};
use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

/// Discrepancy experiments for random-walk subsequences of {n alpha}.
#[derive(Parser)]
#[command(name = "alpha-walk-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate walks and dump the fractional parts with their certificates.
    Simulate(RunArgs),
    /// Discrepancy curve over the checkpoints, with medians and quartiles.
    Curve(RunArgs),
    /// Discrepancy curve plus the exponent regression.
    Fit(RunArgs),
    /// Monte Carlo moments of exponential sums against the moment bounds.
    Moments(RunArgs),
    /// Diophantine sums, their growth regime and block decomposition.
    Diophsum(RunArgs),
    /// Certify a regularity condition of the step distribution.
    Condcheck(RunArgs),
    /// Discrepancy curve checked against the Erdős–Turán bound.
    Etcheck(RunArgs),
    /// Empty-gap lower-bound diagnostic.
    Gapdiag(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; defaults apply to every missing field.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

impl RunArgs {
    fn load(&self, kind: Option<ExperimentKind>) -> Result<(ExperimentConfig, PathBuf, usize)> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => ExperimentConfig::new(kind.unwrap_or(ExperimentKind::DiscrepancyCurve)),
        };
        if let Some(kind) = kind {
            cfg.kind = kind;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output = out.to_string_lossy().into_owned();
        }
        let workers = self
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
            .max(1);
        let dir = PathBuf::from(&cfg.output);
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok((cfg, dir, workers))
    }
}

fn run(command: &Command) -> Result<(Vec<Check>, PathBuf)> {
    let finish = |checks: Vec<Check>, dir: &Path| Ok((checks, dir.to_path_buf()));
    match command {
        Command::Simulate(a) => {
            let (cfg, dir, w) = a.load(None)?;
            run_simulate(&cfg, w, &dir)?;
            finish(Vec::new(), &dir)
        }
        Command::Curve(a) => {
            let (cfg, dir, w) = a.load(Some(ExperimentKind::DiscrepancyCurve))?;
            let r = run_discrepancy_curve(&cfg, w)?;
            r.write(&dir, &cfg)?;
            finish(r.checks(), &dir)
        }
        Command::Fit(a) => {
            let (cfg, dir, w) = a.load(Some(ExperimentKind::FitExponent))?;
            let r = run_fit_exponent(&cfg, w)?;
            r.write(&dir, &cfg)?;
            finish(r.checks(), &dir)
        }
        Command::Moments(a) => {
            let (cfg, dir, w) = a.load(Some(ExperimentKind::MomentCheck))?;
            let r = run_moment_check(&cfg, w)?;
            r.write(&dir, &cfg)?;
            finish(r.checks(), &dir)
        }
        Command::Diophsum(a) => {
            let (cfg, dir, w) = a.load(Some(ExperimentKind::DiophSum))?;
            let r = run_dioph_sum(&cfg, w)?;
            r.write(&dir, &cfg)?;
            finish(r.checks(), &dir)
        }
        Command::Condcheck(a) => {
            let (cfg, dir, _) = a.load(Some(ExperimentKind::CondCheck))?;
            let r = run_cond_check(&cfg)?;
            r.write(&dir, &cfg)?;
            finish(r.checks(), &dir)
        }
        Command::Etcheck(a) => {
            let (cfg, dir, w) = a.load(Some(ExperimentKind::EtCheck))?;
            let r = run_et_check(&cfg, w)?;
            r.write(&dir, &cfg)?;
            finish(r.checks(), &dir)
        }
        Command::Gapdiag(a) => {
            let (cfg, dir, w) = a.load(Some(ExperimentKind::GapDiagnostic))?;
            let r = run_gap_diagnostic(&cfg, w)?;
            r.write(&dir, &cfg)?;
            finish(r.checks(), &dir)
        }
    }
}

fn main() -> Result<ExitCode> {
    let cli = Cli::parse();
    let (checks, dir) = run(&cli.command)?;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    println!("wrote {}", dir.display());
    Ok(if checks.iter().all(|c| c.passed) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
