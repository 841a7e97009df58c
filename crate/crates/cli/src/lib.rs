//! `ncq`: command-line driver for the nonclassicality pipeline.
//!
//! | command | writes |
//! |---------|--------|
//! | `simulate` | `quadratures.csv` (`phase,x`) |
//! | `pipeline` | `p_w{w}.csv`, `section_w{w}.csv`, `verdict.json` |
//! | `fig1` | `fig1_w{w}_{squeezed,unsqueezed}.csv` (`t,re,im,sigma`) |
//! | `fig2` | `fig2_w{w}.csv` (`t,p,sigma`) |
//! | `bochner` | `bochner.json` |
//! | `filter-check` | `filter_check.json`, `radial_table.{csv,json}` |
//!
//! Exit codes: 0 success, 2 usage or config error, 3 numerical failure,
//! 4 I/O failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::Options;
pub use error::CliError;

#[derive(Parser)]
#[command(name = "ncq", version, about = "Nonclassicality quasiprobabilities from homodyne data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct Invocation {
    /// Flat `key = value` file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,

    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand)]
pub enum Command {
    /// Simulate balanced homodyne data for an analytic state
    Simulate(Invocation),
    /// Estimate, filter and transform; report negativities per width
    Pipeline(Invocation),
    /// Filtered characteristic function along both principal axes
    Fig1(Invocation),
    /// Quasiprobability along the squeezed axis
    Fig2(Invocation),
    /// Modulus or determinant test on the characteristic function
    Bochner(Invocation),
    /// Check a filter family against conditions (a)-(c)
    FilterCheck(Invocation),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate(_) => "simulate",
            Command::Pipeline(_) => "pipeline",
            Command::Fig1(_) => "fig1",
            Command::Fig2(_) => "fig2",
            Command::Bochner(_) => "bochner",
            Command::FilterCheck(_) => "filter-check",
        }
    }

    fn invocation(self) -> Invocation {
        match self {
            Command::Simulate(i)
            | Command::Pipeline(i)
            | Command::Fig1(i)
            | Command::Fig2(i)
            | Command::Bochner(i)
            | Command::FilterCheck(i) => i,
        }
    }
}

/// Runs one subcommand.
pub fn run(command: Command) -> Result<(), CliError> {
    let name = command.name();
    let Invocation { config, options } = command.invocation();
    let options = match config {
        Some(path) => config::merge(options, config::load_config(&path)?),
        None => options,
    };
    match name {
        "simulate" => commands::simulate(options),
        "pipeline" => commands::pipeline(options),
        "fig1" => commands::fig1(options),
        "fig2" => commands::fig2(options),
        "bochner" => commands::bochner(options),
        _ => commands::filter_check(options),
    }
}
