//! Command-line front end: riemann | ansatz | simulate | kinetic-check | fit.
//! Exit codes: 0 success, 1 computational failure, 2 configuration error.

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use vpbwave_core::config::{parse_config, RunConfig, Scenario};
use vpbwave_core::{cli, VpbError};

#[derive(Parser)]
#[command(name = "vpbwave", version, about = "Composite-wave laboratory for the bipolar VPB system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, clap::Args)]
struct CommonArgs {
    /// Configuration file (sectioned key = value text).
    #[arg(long)]
    config: PathBuf,
    /// Override the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the RNG seed from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the star states of the wave pattern and report strengths.
    Riemann(CommonArgs),
    /// Construct the composite wave, tabulate it and fit residual decay.
    Ansatz(CommonArgs),
    /// Time-integrate the perturbed wave and report decay diagnostics.
    Simulate(CommonArgs),
    /// Run the kinetic invariant suite on the configured grids.
    KineticCheck(CommonArgs),
    /// Fit a decay exponent to an external time series.
    Fit(CommonArgs),
}

fn load(args: &CommonArgs, scenario: Scenario) -> Result<RunConfig, VpbError> {
    let mut cfg = parse_config(&args.config)?;
    cfg.scenario = scenario;
    if let Some(out) = &args.out {
        cfg.out_dir = out.display().to_string();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (args, scenario) = match &cli.command {
        Command::Riemann(a) => (a, Scenario::Riemann),
        Command::Ansatz(a) => (a, Scenario::Ansatz),
        Command::Simulate(a) => (a, Scenario::Simulate),
        Command::KineticCheck(a) => (a, Scenario::KineticCheck),
        Command::Fit(a) => (a, Scenario::Fit),
    };
    let cfg = match load(args, scenario) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match cli::run_scenario(&cfg) {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("json"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
