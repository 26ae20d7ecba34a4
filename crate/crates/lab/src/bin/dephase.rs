// Copyright 2026 The dephase Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dephase::config::{ExperimentConfig, FigureConfig};
use dephase::figures;
use dephase::oracle::{self, ORACLE_TOL};
use dephase::output;
use dephase::summary;
use dephase::sweep::{self, RunOptions};
use dephase::LabError;
use dephase_core::evolution::IntegratorConfig;

/// Steady-state exciton transport under time-dependent dephasing.
#[derive(Debug, Parser)]
#[command(name = "dephase", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment (or figure) config, JSON.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV for `sweep`, output directory for `figure`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Integration budget T_max in units of 1/ω.
    #[arg(long, global = true)]
    tmax: Option<f64>,
    /// Relative tolerance of the integrator.
    #[arg(long, global = true)]
    rtol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a config and check complete positivity at every sweep point.
    Validate,
    /// Run the sweep of an experiment config.
    Sweep,
    /// Run the bundled config of a figure (or `--config`, a figure config).
    Figure { number: u32 },
    /// Compare integrated and null-space steady states on small chains.
    Oracle,
}

enum Outcome {
    Ok,
    Unconverged,
}

fn options(cli: &Cli) -> RunOptions {
    RunOptions { threads: cli.threads, t_max: cli.tmax, rtol: cli.rtol }
}

fn require_config(cli: &Cli) -> Result<&Path, LabError> {
    cli.config.as_deref().ok_or_else(|| LabError::Config("--config is required".into()))
}

fn validate(cli: &Cli) -> Result<Outcome, LabError> {
    let text = std::fs::read_to_string(require_config(cli)?)?;
    let experiments = match ExperimentConfig::from_json(&text) {
        Ok(c) => vec![c],
        Err(single) => match FigureConfig::from_json(&text) {
            Ok(f) => f.series,
            Err(_) => return Err(single),
        },
    };
    for e in &experiments {
        sweep::validate_cp(e, &options(cli))?;
        println!("{}: ok ({} points)", e.label, e.sweep.points);
    }
    Ok(Outcome::Ok)
}

fn run_sweep(cli: &Cli) -> Result<Outcome, LabError> {
    let config = ExperimentConfig::load(require_config(cli)?)?;
    let result = sweep::run_sweep(&config, &options(cli))?;
    let n = config.chain.n_sites;
    match cli.out.as_ref().or(config.output.as_ref()) {
        Some(path) => output::write_csv_file(&result.records, n, path)?,
        None => output::write_csv(&result.records, n, std::io::stdout().lock())?,
    }
    for r in result.records.iter().filter(|r| r.error.is_some()) {
        eprintln!("{} = {}: {}", config.sweep.parameter_name(), r.parameter, r.error.as_deref().unwrap_or_default());
    }
    eprintln!("{}", serde_json::to_string_pretty(&summary::summarize(&result))?);
    Ok(if result.all_converged() { Outcome::Ok } else { Outcome::Unconverged })
}

fn run_figure(cli: &Cli, number: u32) -> Result<Outcome, LabError> {
    let config = match &cli.config {
        Some(path) => FigureConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => figures::bundled(number)?,
    };
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(format!("figure{number}")));
    let run = figures::run_figure(&config, &dir, &options(cli))?;
    println!("{}", serde_json::to_string_pretty(&run.summary)?);
    Ok(if run.all_converged() { Outcome::Ok } else { Outcome::Unconverged })
}

fn run_oracle(cli: &Cli) -> Result<Outcome, LabError> {
    let mut config = IntegratorConfig::default();
    if let Some(t) = cli.tmax {
        config.t_max = t;
    }
    if let Some(r) = cli.rtol {
        config.rtol = r;
    }
    let rows = oracle::oracle_table(&[2, 3, 4], &[0.0, 0.05, 0.5], &config)?;
    println!("n_sites,extraction_site,gamma,trace_distance,converged");
    for r in &rows {
        println!("{},{},{},{:e},{}", r.n_sites, r.extraction_site, r.gamma, r.trace_distance, r.converged);
    }
    if rows.iter().all(|r| r.passed()) {
        Ok(Outcome::Ok)
    } else {
        eprintln!("trace distance above {ORACLE_TOL:e} or unconverged run");
        Ok(Outcome::Unconverged)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate => validate(&cli),
        Command::Sweep => run_sweep(&cli),
        Command::Figure { number } => run_figure(&cli, *number),
        Command::Oracle => run_oracle(&cli),
    };
    match result {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Unconverged) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
