//! Command-line front end for the extended Jaynes-Cummings Trotter
//! toolkit: Hamiltonian dumps, commuting partitions, error bounds, cost
//! plans, desk-scale simulations, and fault-tolerant resource reports.
//!
//! Artifacts are deterministic for a fixed config and seed set; CSV tables
//! confine the timestamp to a leading `#` metadata line so the body is
//! byte-stable across reruns.

use clap::{Parser, Subcommand};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

use output::{deliver, CommandOutput, Delivery};

/// Failure classes mapped onto process exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad request: flags, config file, or model out of range. Exit 2.
    #[error("{0}")]
    Config(String),
    /// A computation failed or left its validity envelope. Exit 3.
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ejcm",
    version,
    about = "Trotter toolkit for the extended Jaynes-Cummings model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Assemble the Hamiltonian and dump terms and counts.
    Build(commands::build::BuildArgs),
    /// Group interaction terms into commuting families.
    Partition(commands::partition::PartitionArgs),
    /// Evaluate closed-form product-formula error bounds.
    Bound(commands::bound::BoundArgs),
    /// Optimize slice/step allocations and gate costs.
    Plan(commands::plan::PlanArgs),
    /// Measure product-formula errors against the dense propagator.
    Simulate(commands::simulate::SimulateArgs),
    /// Rabi oscillation against the closed-form survival probability.
    Jc(commands::jc::JcArgs),
    /// Rotating-frame slice counts: numerical versus theoretical.
    Interaction(commands::interaction::InteractionArgs),
    /// Evolve a density matrix on the vectorized doubled register.
    Mixed(commands::mixed::MixedArgs),
    /// Fault-tolerant resource report.
    Resources(commands::resources::ResourcesArgs),
}

/// Runs one parsed invocation and writes its artifact.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let (output, delivery) = produce(cli)?;
    deliver(&output, &delivery)
}

/// Runs one parsed invocation and returns the artifact without writing,
/// for embedding and tests.
pub fn produce(cli: &Cli) -> Result<(CommandOutput, Delivery), CliError> {
    match &cli.command {
        Command::Build(args) => commands::build::run(args),
        Command::Partition(args) => commands::partition::run(args),
        Command::Bound(args) => commands::bound::run(args),
        Command::Plan(args) => commands::plan::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Jc(args) => commands::jc::run(args),
        Command::Interaction(args) => commands::interaction::run(args),
        Command::Mixed(args) => commands::mixed::run(args),
        Command::Resources(args) => commands::resources::run(args),
    }
}
