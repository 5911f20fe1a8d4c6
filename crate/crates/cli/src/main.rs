//! `flownet`: refine, simulate, verify and optimize dissipative flow networks
//! from JSON descriptions.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "flownet", version, about = "Actuated dissipative network flows: simulation, monotonicity checks and robust control")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "flownet-out")]
    pub out: PathBuf,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Subdivide every edge into segments shorter than epsilon.
    Refine(RefineArgs),
    /// Integrate the nodal dynamics and write the trajectory.
    Simulate(SimulateArgs),
    /// Check the monotonicity conditions and order propagation.
    Verify(VerifyArgs),
    /// Solve a robust optimal control problem.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct RefineArgs {
    pub network: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Nominal,
    Lower,
    Upper,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    pub network: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    /// End time; defaults to the network horizon.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Integrator step; defaults to half the RK4 stability estimate.
    #[arg(long)]
    pub step: Option<f64>,
    /// Which injection profiles drive the run.
    #[arg(long, value_enum, default_value = "nominal")]
    pub scenario: Scenario,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub network: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    /// Operating points for the Jacobian sign checks.
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    /// Randomised order-propagation trials.
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    pub problem: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(summary) => {
            if !cli.quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
