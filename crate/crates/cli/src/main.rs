//! `domkit` — experiment driver for the planar-domain toolkit.
//!
//! Each subcommand reads a TOML configuration (all keys defaulted), runs
//! one experiment family, and writes CSV tables plus a run manifest into
//! the output directory.  Result files are deterministic for a given
//! configuration.
//!
//! Exit codes: 0 success, 1 validation failure, 2 numerical failure,
//! 3 claim-check failure (a verified mathematical claim did not hold).

mod experiments;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use domkit::formats::{parse_config, ExperimentConfig};
use domkit::Error;

#[derive(Parser)]
#[command(name = "domkit", version, about = "Planar-domain experiment driver")]
struct Cli {
    /// TOML configuration file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the configuration).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Halve resolutions and family sizes for fast runs.
    #[arg(long, global = true)]
    quick: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Two-variable bump construction: orbit centers, Levi eigenvalues,
    /// stage distances.
    Bumps,
    /// Uniformize a domain onto a circle domain.
    Uniformize,
    /// Enumerate the automorphism group of a circle domain.
    Autgroup,
    /// Semicontinuity certificates for a symmetric perturbation family.
    Semicont,
    /// Bergman kernel and metric samples.
    Bergman,
    /// Kernel stability under domain perturbation.
    Stability,
    /// Near-boundary Bergman curvature scan.
    Curvature,
    /// Boundary-orbit classification and orbit probe.
    Wongrosay,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Bumps => "bumps",
            Command::Uniformize => "uniformize",
            Command::Autgroup => "autgroup",
            Command::Semicont => "semicont",
            Command::Bergman => "bergman",
            Command::Stability => "stability",
            Command::Curvature => "curvature",
            Command::Wongrosay => "wongrosay",
        }
    }
}

const ALL_COMMANDS: [Command; 8] = [
    Command::Bumps,
    Command::Uniformize,
    Command::Autgroup,
    Command::Semicont,
    Command::Bergman,
    Command::Stability,
    Command::Curvature,
    Command::Wongrosay,
];

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Parse { .. }
        | Error::ParameterDomain { .. }
        | Error::InvalidGrid { .. }
        | Error::InvalidCurve { .. }
        | Error::InvalidDomain { .. }
        | Error::InvalidCircleDomain { .. }
        | Error::GridMismatch { .. }
        | Error::Precondition { .. }
        | Error::Io(_) => 1,
        Error::ClaimFailed { .. } => 3,
        _ => 2,
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let mut config = match &cli.config {
        Some(path) => parse_config(&std::fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.out = Some(out.display().to_string());
    }
    if cli.quick {
        experiments::apply_quick(&mut config);
    }
    Ok(config)
}

fn run(cli: &Cli) -> Result<(), Error> {
    let config = load_config(cli)?;
    let out_root = PathBuf::from(config.out.clone().unwrap_or_else(|| "out".into()));
    match cli.command {
        Some(command) => experiments::run_one(command.name(), &config, &out_root),
        None => {
            // No subcommand: all-defaults smoke suite at quick resolution.
            let mut smoke = config;
            experiments::apply_quick(&mut smoke);
            for command in ALL_COMMANDS {
                experiments::run_one(command.name(), &smoke, &out_root.join("smoke"))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(exit_code_for(&error))
        }
    }
}
