//! Batch front end: simulate recordings, run the tracking and counting
//! pipeline, train and compare classifiers, and rebuild reports.

mod config;
mod error;
mod learn;
mod report;
mod run;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use grouptrack::classify::Method;

use config::{Overrides, RunConfig};
use error::CliResult;

#[derive(Parser)]
#[command(name = "grouptrack", version, about = "Grouped people tracking and counting with a simulated MIMO FMCW radar")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write ground truth and radar data for each scenario and seed to <out>/data.
    Simulate {
        #[command(flatten)]
        o: Overrides,
    },
    /// Run the pipeline and write logs, per-frame OSPA and reports to <out>.
    Run {
        #[command(flatten)]
        o: Overrides,
    },
    /// Train counting models from feature CSVs into <out>/models.
    Train {
        #[command(flatten)]
        o: Overrides,
        /// Feature CSVs; defaults to every features.csv under <out>/runs.
        #[arg(long = "input", short)]
        inputs: Vec<PathBuf>,
        /// Train all four methods instead of the configured one.
        #[arg(long)]
        all: bool,
    },
    /// Compare methods and feature sets and write <out>/grid.csv.
    Eval {
        #[command(flatten)]
        o: Overrides,
        #[arg(long = "input", short)]
        inputs: Vec<PathBuf>,
        /// Held-out feature CSVs; without them the inputs are split.
        #[arg(long = "test")]
        tests: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        ablation: learn::Ablation,
    },
    /// Rebuild report CSVs from run directories.
    Report {
        #[command(flatten)]
        o: Overrides,
        /// Run directories; defaults to every directory under <out>/runs.
        dirs: Vec<PathBuf>,
        /// Also write per-feature histograms with this many bins.
        #[arg(long)]
        histograms: Option<usize>,
    },
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Simulate { o } => simulate::simulate(&RunConfig::resolve(&o)?),
        Command::Run { o } => run::run(&RunConfig::resolve(&o)?),
        Command::Train { o, inputs, all } => learn::train(&RunConfig::resolve(&o)?, &inputs, all),
        Command::Eval { o, inputs, tests, ablation } => {
            let cfg = RunConfig::resolve(&o)?;
            let methods = if o.method.is_some() { vec![cfg.method] } else { Method::ALL.to_vec() };
            learn::eval(&cfg, &inputs, &tests, ablation, &methods).map(|_| ())
        }
        Command::Report { o, dirs, histograms } => report::report(&RunConfig::resolve(&o)?, &dirs, histograms),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("grouptrack: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
