//! Command-line front end: config ingestion, sweeps, fitting and data files
//! for the transducer and qubit models.

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::RunConfig;
use output::OutputDir;

/// Error carrying the process exit code: 1 for model/runtime failures,
/// 2 for configuration and input parsing failures.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn config(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 2, error: error.into() }
    }

    pub fn runtime(error: impl Into<anyhow::Error>) -> Self {
        Self { code: 1, error: error.into() }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(error: E) -> Self {
        Self::runtime(error)
    }
}

pub type CmdResult = Result<(), Failure>;

#[derive(Debug, Parser)]
#[command(name = "moqt-lab", version, about = "Electro-optic transducer and optically driven qubit modelling")]
pub struct Cli {
    /// JSON run configuration; the bundled device-default is used when absent.
    #[arg(long, global = true, env = "MOQT_LAB_CONFIG")]
    pub config: Option<PathBuf>,
    /// Directory for all written files.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Seed for synthetic data.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Suppress progress and warning messages on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    /// Override a config field, e.g. `--set device.microwave.external_ratio=0.6`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub sets: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Efficiency sweep over pump power and duty cycle plus an operating-point summary.
    Transduce(commands::transduce::Args),
    /// Detuning versus pulse-width population map.
    Chevron(commands::chevron::Args),
    /// Fit a model to a `x,y[,sigma]` CSV dataset.
    Fit(commands::fit::Args),
    /// Entanglement rate and fidelity table for one or more scenarios.
    Budget(commands::budget::Args),
    /// Hybrid-mode scan of the coupled rings and triple-resonance candidates.
    Vernier(commands::vernier::Args),
    /// Electro-optic coupling chain, optionally solving for one geometry field.
    G0(commands::g0::Args),
    /// Write a seeded synthetic dataset for one of the fit models.
    Synth(commands::synth::Args),
}

pub struct Context {
    pub out: OutputDir,
    pub seed: u64,
    pub quiet: bool,
    config_path: Option<PathBuf>,
    sets: Vec<String>,
}

impl Context {
    pub fn config(&self) -> Result<RunConfig, Failure> {
        RunConfig::load(self.config_path.as_deref(), &self.sets)
    }

    pub fn warn(&self, message: &str) {
        if !self.quiet {
            eprintln!("warning: {message}");
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    // The output directory may come from the config, so read it up front when
    // the command uses one.
    let needs_config = !matches!(cli.command, Command::Budget(_) | Command::Fit(_) | Command::Synth(_));
    let config_dir = if needs_config && cli.output_dir.is_none() {
        RunConfig::load(cli.config.as_deref(), &cli.sets)?.paths.output_dir
    } else {
        None
    };
    let root = cli.output_dir.clone().or(config_dir).unwrap_or_else(|| PathBuf::from("moqt-out"));
    let ctx = Context {
        out: OutputDir::create(root, cli.quiet).map_err(Failure::runtime)?,
        seed: cli.seed,
        quiet: cli.quiet,
        config_path: cli.config,
        sets: cli.sets,
    };
    match cli.command {
        Command::Transduce(a) => commands::transduce::run(&ctx, a),
        Command::Chevron(a) => commands::chevron::run(&ctx, a),
        Command::Fit(a) => commands::fit::run(&ctx, a),
        Command::Budget(a) => commands::budget::run(&ctx, a),
        Command::Vernier(a) => commands::vernier::run(&ctx, a),
        Command::G0(a) => commands::g0::run(&ctx, a),
        Command::Synth(a) => commands::synth::run(&ctx, a),
    }
}

/// Parse `args` (program name first) and run the selected command, printing
/// any error to stderr.
pub fn run_cli<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
