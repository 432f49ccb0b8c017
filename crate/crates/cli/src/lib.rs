//! Command-line front end: single states, association fans, planar fields,
//! pinwheel maps, spectra and the self-check suite.

pub mod commands;
pub mod config;
pub mod export;

use anyhow::Result;
use clap::{Parser, Subcommand, ValueEnum};
use pinwheel_core::validation::Mutation;

use crate::commands::{cmd_fan, cmd_map, cmd_pinwheel, cmd_spectrum, cmd_state, cmd_validate, Limit, Outcome};
use crate::config::{ConfigError, Overrides, RunConfig};

pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "pinwheel",
    version,
    about = "Coherent states on the frequency circle and the orientation maps they generate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true, env = "PINWHEEL_THREADS")]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one coherent state and print its uncertainty report.
    State,
    /// Integrate the fan of integral curves through a base element.
    Fan,
    /// Synthesize one planar field.
    Map {
        #[arg(long, value_enum, default_value = "none")]
        limit: Limit,
    },
    /// Build the orientation map, detect pinwheels and measure the spectrum.
    Pinwheel,
    /// Run the self-check suite; exit status 0 iff every check passes.
    Validate {
        #[arg(long, value_enum, hide = true)]
        mutate: Option<MutationArg>,
    },
    /// Radial power spectrum of one synthesized state.
    Spectrum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MutationArg {
    FlipX1Sign,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = RunConfig::load(&cli.overrides)?;
    match &cli.command {
        Command::State => cmd_state(&cfg),
        Command::Fan => cmd_fan(&cfg),
        Command::Map { limit } => cmd_map(&cfg, *limit),
        Command::Pinwheel => cmd_pinwheel(&cfg),
        Command::Validate { mutate } => cmd_validate(&cfg, mutate.map(|MutationArg::FlipX1Sign| Mutation::FlipX1Sign)),
        Command::Spectrum => cmd_spectrum(&cfg),
    }
}

/// 2 for bad configuration, 1 for anything else.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let config = err.downcast_ref::<ConfigError>().is_some()
        || err
            .downcast_ref::<pinwheel_core::Error>()
            .is_some_and(|e| e.is_configuration());
    if config {
        EXIT_CONFIG
    } else {
        EXIT_RUNTIME
    }
}
