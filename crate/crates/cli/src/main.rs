#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;
mod penalty;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, Format};

#[derive(Parser)]
#[command(name = "ruinkit", version, about = "Ruin quantities for Lévy risk models with Brownian perturbation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Right inverse Φ(q) of the Laplace exponent over a q list
    Phi,
    /// Ruin probability over an x list
    Ruin,
    /// Scale functions W, W_Φ and f₁ at an x list
    Scale,
    /// Classic and extended penalty functions for a named penalty
    Edpf,
    /// Expected discounted value of capital injections over (q, x)
    Edvci,
    /// Monte Carlo estimate of one target over (q, x)
    Simulate,
    /// Analytic-versus-simulation acceptance suite
    Validate,
}

#[derive(clap::Args)]
struct Flags {
    /// TOML experiment configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; without it the data go to stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    paths: Option<u64>,
    /// Comma-separated discount rates
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    q: Option<Vec<f64>>,
    /// Comma-separated initial surpluses
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<f64>>,
    /// Penalty at ruin, e.g. `deficit` or `capped_deficit:2`
    #[arg(long, global = true)]
    penalty: Option<String>,
    /// Stationary penalty at later records, e.g. `increment`
    #[arg(long, global = true)]
    subsequent: Option<String>,
    /// Simulation target, e.g. `edvci` or `n_law(2)`
    #[arg(long, global = true)]
    target: Option<String>,
}

impl Flags {
    fn apply(self, cfg: &mut ExperimentConfig) {
        let q = &mut cfg.query;
        q.seed = self.seed.or(q.seed);
        q.paths = self.paths.or(q.paths);
        q.q = self.q.or(q.q.take());
        q.x = self.x.or(q.x.take());
        q.penalty = self.penalty.or(q.penalty.take());
        q.subsequent = self.subsequent.or(q.subsequent.take());
        q.target = self.target.or(q.target.take());
        cfg.output.format = self.format.or(cfg.output.format);
        cfg.output.path = self.out.or(cfg.output.path.take());
    }
}

/// Exit status 2: the validation suite ran and at least one criterion failed.
const VALIDATION_FAILED: u8 = 2;

fn run(cli: Cli) -> Result<ExitCode> {
    let mut cfg = match &cli.flags.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if cli.command == Command::Validate => ExperimentConfig::empty(),
        None => anyhow::bail!("--config <path> is required for this command"),
    };
    cli.flags.apply(&mut cfg);
    let format = cfg.output.format.unwrap_or_default();

    if cli.command == Command::Validate {
        let report = commands::validate(&cfg)?;
        print!("{}", report.render());
        if let Some(path) = &cfg.output.path {
            let body = match format {
                Format::Csv => commands::report_table(&report).csv()?,
                Format::Json => serde_json::to_string_pretty(&commands::report_json(&report))? + "\n",
            };
            output::write(path, &body)?;
        }
        return Ok(if report.passed() { ExitCode::SUCCESS } else { ExitCode::from(VALIDATION_FAILED) });
    }

    let table = match cli.command {
        Command::Phi => commands::phi(&cfg)?,
        Command::Ruin => commands::ruin(&cfg)?,
        Command::Scale => commands::scale(&cfg)?,
        Command::Edpf => commands::edpf(&cfg)?,
        Command::Edvci => commands::edvci(&cfg)?,
        Command::Simulate => commands::simulate(&cfg)?,
        Command::Validate => unreachable!(),
    };
    let body = table.render(format)?;
    match &cfg.output.path {
        Some(path) => {
            output::write(path, &body)?;
            print!("{}", table.summary());
        }
        None => print!("{body}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
