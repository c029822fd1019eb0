//! `svi`: solve, compare, inspect and cross-check stochastic games.
//!
//! Exit codes: 0 converged (or all checks passed), 1 input error,
//! 2 iteration cap reached, 3 harness failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "svi", version, about = "Sound value iteration for turn-based stochastic games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a model and print the result as JSON.
    Solve {
        #[arg(long, value_enum, default_value_t = Alg::Svi)]
        alg: Alg,
        #[command(flatten)]
        run: RunArgs,
        model: PathBuf,
    },
    /// Run several algorithms on one model and print a CSV table.
    Compare {
        /// Comma-separated list of algorithms.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![Alg::Svi, Alg::Bvi, Alg::Vi])]
        algs: Vec<Alg>,
        #[command(flatten)]
        run: RunArgs,
        model: PathBuf,
    },
    /// Print the target/sink/unknown partition, SCCs and MECs as JSON.
    Inspect { model: PathBuf },
    /// Print exact values as fractions.
    Oracle { model: PathBuf },
    /// Cross-check the solvers against the oracle on random games.
    Harness {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        n: u64,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        #[arg(long = "max-iter", default_value_t = 20_000)]
        max_iter: u64,
        #[arg(long)]
        no_delay_guard: bool,
        /// Directory receiving the failing games as model files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 1e-6)]
    epsilon: f64,
    /// Stop on the relative instead of the absolute gap.
    #[arg(long)]
    relative: bool,
    #[arg(long)]
    no_ec_handling: bool,
    /// Per-SCC bounds (same as --alg svi-topo).
    #[arg(long)]
    topological: bool,
    #[arg(long = "max-iter", default_value_t = 10_000_000)]
    max_iter: u64,
    /// Write the per-iteration trace as CSV to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Drop the delay action (for demonstrating what it prevents).
    #[arg(long)]
    no_delay_guard: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Alg {
    Svi,
    SviTopo,
    Bvi,
    Vi,
    Oracle,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve { alg, run, model } => commands::solve(alg, &run, &model),
        Command::Compare { algs, run, model } => commands::compare(&algs, &run, &model),
        Command::Inspect { model } => commands::inspect(&model),
        Command::Oracle { model } => commands::oracle(&model),
        Command::Harness {
            seed,
            n,
            epsilon,
            max_iter,
            no_delay_guard,
            out,
        } => commands::harness(seed, n, epsilon, max_iter, !no_delay_guard, out.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
