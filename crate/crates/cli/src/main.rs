//! Command-line front end for the qudit phase-estimation toolkit: five run
//! modes sharing a JSON configuration format, seeded reproducibility, and
//! CSV/JSON artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

mod config;
mod output;
mod run;

use config::{parse_config, resolve, CliOverrides, Mode, OutputFormat};

#[derive(Parser)]
#[command(
    name = "quditpea",
    version,
    about = "Qudit phase-estimation simulator and fitting toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact control-register distribution for every eigenstate
    Ideal(RunArgs),
    /// Seeded photon-counting simulation through the device model
    Photonic(RunArgs),
    /// Least-squares phase fit of a measured count table
    Fit(FitArgs),
    /// Digit-by-digit iterative estimation run
    Iterate(RunArgs),
    /// Collapse-probability curves across the phase interval
    Curves(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct FitArgs {
    /// Count-table CSV to fit (header: eigenstate,proj0,...)
    #[arg(long, value_name = "CSV")]
    input: PathBuf,
    /// Optional JSON configuration (supplies per-row true phases)
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// True phase applied to every row, radians or an "x pi" literal
    #[arg(long, value_name = "PHASE")]
    true_phase: Option<String>,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct CommonOpts {
    /// Overrides the seed in the configuration
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (also settable via QUDITPEA_OUTPUT)
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
    /// Artifact format
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn main() -> ExitCode {
    match try_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn try_main() -> Result<()> {
    let cli = Cli::parse();
    let (mode, config_path, overrides) = match cli.command {
        Command::Ideal(args) => unpack(Mode::Ideal, args),
        Command::Photonic(args) => unpack(Mode::Photonic, args),
        Command::Iterate(args) => unpack(Mode::Iterate, args),
        Command::Curves(args) => unpack(Mode::Curves, args),
        Command::Fit(args) => {
            let overrides = CliOverrides {
                seed: args.common.seed,
                output: args.common.output,
                format: args.common.format,
                input: Some(args.input),
                true_phase: args.true_phase,
            };
            (Mode::Fit, args.config, overrides)
        }
    };
    let file = config_path.as_deref().map(parse_config).transpose()?;
    let resolved = resolve(mode, file, overrides)?;
    run::execute(&resolved)
}

fn unpack(mode: Mode, args: RunArgs) -> (Mode, Option<PathBuf>, CliOverrides) {
    let overrides = CliOverrides {
        seed: args.common.seed,
        output: args.common.output,
        format: args.common.format,
        input: None,
        true_phase: None,
    };
    (mode, Some(args.config), overrides)
}
