//! Experiment runner for `curvmax-core`.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use curvmax_core::Execution;
use serde::Serialize;

use commands::{
    Context, ContinuityArgs, FourierArgs, MaximalArgs, RegionsArgs, ScalingArgs, SparseArgs,
    WeightsArgs,
};
use config::{merge, GlobalArgs};
use output::OutDir;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<curvmax_core::Error> for CliError {
    fn from(e: curvmax_core::Error) -> Self {
        use curvmax_core::Error as E;
        match e {
            E::InvalidInput(_)
            | E::DimensionMismatch { .. }
            | E::ScaleOutOfRange(_)
            | E::NonDyadic(_)
            | E::StoppingConstantTooSmall { .. }
            | E::Io(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "curvmax",
    version,
    about = "Maximal averages over finite-type curves: experiments"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exponent regions: boundary polylines and comparisons.
    Regions(RegionsArgs),
    /// Decay of the Fourier transform of the curve measure.
    FourierDecay(FourierArgs),
    /// Norm ratios of the local maximal function.
    MaximalNorm(MaximalArgs),
    /// Scaling sweep of one counterexample family.
    Scaling(ScalingArgs),
    /// Sparse selection and the domination ratio.
    Sparse(SparseArgs),
    /// Weight characteristics and weighted norm ratios.
    Weights(WeightsArgs),
    /// Norms of translation differences of the averages.
    Continuity(ContinuityArgs),
}

fn execute<A, S, F>(flags: &A, global: &GlobalArgs, run: F) -> Result<String, CliError>
where
    A: Serialize + serde::de::DeserializeOwned,
    S: Serialize,
    F: FnOnce(&A, &Context) -> Result<S, CliError>,
{
    let (args, global) = merge(flags, global, global.config.as_deref())?;
    if let Some(n) = global.threads {
        if n == 0 {
            return Err(CliError::Config("threads must be positive".into()));
        }
        curvmax_core::exec::set_threads(n);
    }
    let out = OutDir::create(&global.out.unwrap_or_else(|| PathBuf::from(".")))?;
    let ctx = Context {
        out,
        seed: global.seed.unwrap_or(0),
        exec: Execution::default(),
    };
    let summary = run(&args, &ctx)?;
    serde_json::to_string_pretty(&summary).map_err(|e| CliError::Numerical(e.to_string()))
}

/// Runs one subcommand and returns its JSON summary.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let g = &cli.global;
    match &cli.command {
        Command::Regions(a) => execute(a, g, commands::regions),
        Command::FourierDecay(a) => execute(a, g, commands::fourier_decay),
        Command::MaximalNorm(a) => execute(a, g, commands::maximal_norm),
        Command::Scaling(a) => execute(a, g, commands::scaling),
        Command::Sparse(a) => execute(a, g, commands::sparse),
        Command::Weights(a) => execute(a, g, commands::weights),
        Command::Continuity(a) => execute(a, g, commands::continuity),
    }
}
