//! dispersim: feasibility calculations and emulation for temporal pump
//! filtering of heralded single-photon sources.

// `!(x > 0.0)` keeps NaN on the error path; `x <= 0.0` would accept it.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod run_config;
mod units;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use run_config::OutputFormat;

/// Exit code for configuration and parse errors.
pub const EXIT_CONFIG: u8 = 2;
/// Exit code for solver and model errors.
pub const EXIT_MODEL: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub code: u8,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_CONFIG,
        }
    }

    pub fn model(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: EXIT_MODEL,
        }
    }
}

impl From<dispersim_core::Error> for CliError {
    fn from(err: dispersim_core::Error) -> Self {
        use dispersim_core::Error as E;
        let code = match err {
            E::Domain(_) | E::Config(_) | E::PlatformNotFound(_) => EXIT_CONFIG,
            E::DegenerateDensity
            | E::SignalExtinguished { .. }
            | E::SeparationUnreachable { .. }
            | E::NonMonotoneObjective { .. }
            | E::NotSeparated
            | E::Internal(_) => EXIT_MODEL,
        };
        Self {
            message: err.to_string(),
            code,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "dispersim",
    version,
    about = "Temporal pump-filtering simulator for heralded single-photon sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the platform registry
    Platforms {
        #[command(subcommand)]
        action: PlatformsAction,
    },
    /// Solve the minimum separation distance for one platform and jitter
    Separation(SeparationArgs),
    /// Solve across a jitter range, one CSV row per jitter
    Sweep(SweepArgs),
    /// Emit density, cumulative, and jittered click curves at one distance
    Profile(ProfileArgs),
    /// Run the seeded fiber-loop Monte Carlo emulation
    LoopSim(LoopSimArgs),
}

#[derive(Subcommand)]
enum PlatformsAction {
    /// List built-in and user-loaded platforms
    List(PlatformListArgs),
}

#[derive(Args)]
struct PlatformListArgs {
    /// Additional platform JSON files to load
    #[arg(long)]
    file: Vec<PathBuf>,
}

/// Options shared by every scenario-based command.
#[derive(Args, Clone)]
struct ScenarioArgs {
    /// Platform name (built-in, from --file, or from $DISPERSIM_PLATFORM_PATH)
    #[arg(long)]
    platform: Option<String>,

    /// Detector jitter FWHM, unit-suffixed (e.g. 20ps)
    #[arg(long, allow_hyphen_values = true)]
    jitter: Option<String>,

    /// Optical pulse FWHM, unit-suffixed (default 1ps)
    #[arg(long, allow_hyphen_values = true)]
    pulse_fwhm: Option<String>,

    /// Pump photons per pulse before losses
    #[arg(long)]
    pump_photons: Option<f64>,

    /// Photon-pair generation probability per pump pulse
    #[arg(long)]
    pair_probability: Option<f64>,

    /// Contamination threshold defining "separated"
    #[arg(long)]
    threshold: Option<f64>,

    /// FWHM-to-σ convention: sech2-exact, gaussian-equivalent, gaussian-reciprocal
    #[arg(long)]
    width_convention: Option<String>,

    /// Additional platform JSON files
    #[arg(long)]
    file: Vec<PathBuf>,

    /// Run-configuration JSON file supplying defaults
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write output here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct SeparationArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,

    /// Emit one CSV header plus one data row instead of the readable report
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,

    /// Lowest jitter of the sweep (e.g. 4ps)
    #[arg(long, allow_hyphen_values = true)]
    jitter_min: String,

    /// Highest jitter of the sweep, inclusive (e.g. 20ps)
    #[arg(long, allow_hyphen_values = true)]
    jitter_max: String,

    /// Jitter increment (e.g. 4ps)
    #[arg(long, allow_hyphen_values = true)]
    jitter_step: String,
}

#[derive(Args)]
struct ProfileArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,

    /// Propagation length, unit-suffixed (e.g. 90.08mm)
    #[arg(long, allow_hyphen_values = true)]
    length: String,
}

#[derive(Args)]
struct LoopSimArgs {
    /// Number of laser triggers to emulate
    #[arg(long)]
    trials: Option<u64>,

    /// Random seed; identical seeds give byte-identical output
    #[arg(long)]
    seed: Option<u64>,

    /// Loop round-trip time (default 156.9ns)
    #[arg(long, allow_hyphen_values = true)]
    loop_delay: Option<String>,

    /// Laser repetition rate (default 125khz)
    #[arg(long)]
    rep_rate: Option<String>,

    /// Number of pulse-train time bins (default 51)
    #[arg(long)]
    bins: Option<usize>,

    /// Out-coupled fraction per pass (default 0.1)
    #[arg(long)]
    tap_ratio: Option<f64>,

    /// Loss per round trip per channel, dB (default 0.5)
    #[arg(long)]
    loop_loss: Option<f64>,

    /// Pump-minus-signal delay per round trip (default bulk-silica 539.9ps)
    #[arg(long, allow_hyphen_values = true)]
    differential_delay: Option<String>,

    /// Probability a trigger creates at least one pair (default 0.615)
    #[arg(long)]
    creation_probability: Option<f64>,

    /// Pump click amplitude at unit out-coupling (default 1.0)
    #[arg(long)]
    pump_scale: Option<f64>,

    /// Detector jitter FWHM (default 800ps)
    #[arg(long, allow_hyphen_values = true)]
    jitter: Option<String>,

    /// Detector efficiency in [0, 1] (default 1)
    #[arg(long)]
    efficiency: Option<f64>,

    /// Detector dead time (default 0ns)
    #[arg(long, allow_hyphen_values = true)]
    dead_time: Option<String>,

    /// Dark-count rate, Hz (default 0)
    #[arg(long)]
    dark_rate: Option<f64>,

    /// Run-configuration JSON file supplying defaults
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write output here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Platforms {
            action: PlatformsAction::List(args),
        } => commands::platforms_list(&args.file),
        Command::Separation(args) => commands::separation(&args.scenario, args.csv),
        Command::Sweep(args) => commands::sweep(
            &args.scenario,
            &args.jitter_min,
            &args.jitter_max,
            &args.jitter_step,
        ),
        Command::Profile(args) => commands::profile(&args.scenario, &args.length),
        Command::LoopSim(args) => commands::loop_sim(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
