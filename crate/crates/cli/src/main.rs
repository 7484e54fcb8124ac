//! `stiefel-polar`: instance generation, solving, checks and the benchmark suite.
//!
//! Exit codes: 0 success, 2 validation error, 3 numeric failure, 4 check failed.

mod bench;
mod check;
mod error;
mod files;
mod generate;
mod solve;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "stiefel-polar", version, about = "Polar-decomposition block iterations for tensor approximation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a spec and its ground-truth sidecar.
    Generate(generate::GenerateArgs),
    /// Run an algorithm; writes a trace CSV and a result JSON.
    Solve(solve::SolveArgs),
    /// Run a diagnostic and print a JSON report.
    Check(check::CheckArgs),
    /// Run a benchmark example over seeds.
    Bench(bench::BenchArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Generate(a) => generate::run(a),
        Command::Solve(a) => solve::run(a).map(|r| println!("{:?} after {} sweeps, objective {:.16e}", r.status, r.sweeps, r.objective)),
        Command::Check(a) => check::run(a).map(drop),
        Command::Bench(a) => bench::run(a).map(drop),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
