mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Status;
use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "pooled", version, about = "Spatially coupled pooled data simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a design, draw a signal, decode it and write the decode report.
    Simulate {
        #[command(flatten)]
        run: RunConfig,
        /// Per-item score trace CSV.
        #[arg(long)]
        trace: Option<std::path::PathBuf>,
    },
    /// Success counts over a grid of one parameter.
    Sweep {
        #[command(flatten)]
        run: RunConfig,
        /// c, n or theta.
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Read c values as multiples of c_min.
        #[arg(long)]
        relative: bool,
    },
    /// Exhaustive and threshold decoding of a tiny instance, plus the bounds.
    Oracle {
        #[command(flatten)]
        run: RunConfig,
        /// Largest number of candidate signals to enumerate.
        #[arg(long, default_value_t = pooled_core::oracle::ENUMERATION_CAP)]
        cap: u64,
        /// Also report the exponential reading of the binary lower bound.
        #[arg(long)]
        exponential_qgt: bool,
    },
    /// Degree, count, density and residual checks on one instance.
    Diagnostics {
        #[command(flatten)]
        run: RunConfig,
    },
    /// Closed-form pool-count bounds, feasibility and tail exponents.
    Bounds {
        #[command(flatten)]
        run: RunConfig,
        #[arg(long)]
        exponential_qgt: bool,
    },
    /// Monte Carlo check of the conditional moments of one unexplained sum.
    Moments {
        #[command(flatten)]
        run: RunConfig,
        /// Position of the item inside the first bulk compartment.
        #[arg(long, default_value_t = 0)]
        item: usize,
        #[arg(long, default_value_t = 0)]
        offset: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    match cli.command {
        Command::Simulate { run, trace } => commands::simulate(run.resolve()?, trace),
        Command::Sweep { run, axis, values, relative } => commands::sweep(run.resolve()?, &axis, &values, relative),
        Command::Oracle { run, cap, exponential_qgt } => commands::oracle(run.resolve()?, cap, exponential_qgt),
        Command::Diagnostics { run } => commands::diagnostics(run.resolve()?),
        Command::Bounds { run, exponential_qgt } => commands::bounds(run.resolve()?, exponential_qgt),
        Command::Moments { run, item, offset, samples } => commands::moments(run.resolve()?, item, offset, samples),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(status) => status.into(),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
