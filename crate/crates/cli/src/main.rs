//! `fpu-lab`: run relaxation experiments on the α-FPU chain.
//!
//! Data go to files in the output directory; progress and the one-line
//! summary go to stderr.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;

#[derive(Debug, Parser)]
#[command(
    name = "fpu-lab",
    version,
    about = "Relaxation to equipartition in the alpha-FPU chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single experiment: series, spectra and manifest for one amplitude.
    Run(RunArgs),
    /// One experiment per amplitude plus a summary table.
    Sweep(SweepArgs),
    /// Recompute both n_eff estimators from a saved spectra file.
    Estimate(EstimateArgs),
    /// Built-in invariant suite.
    Check,
}

/// Experiment settings. Values stay strings here so that the library parser
/// reports every problem against the key that caused it.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// `key = value` file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of sites (power of two).
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// Initially excited mode.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    /// `leapfrog` or `spectral`.
    #[arg(long)]
    integrator: Option<String>,
    /// Step size; defaults to 0.02 (leapfrog) or 1 (spectral).
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    t_end: Option<String>,
    #[arg(long)]
    samples_per_decade: Option<String>,
    /// Modes per packet for the packet estimator.
    #[arg(long)]
    packet_size: Option<String>,
    /// Output directory [env: FPU_LAB_OUT, default: current directory].
    #[arg(long)]
    out: Option<String>,
}

impl ConfigArgs {
    fn flags(&self) -> Vec<(String, String)> {
        [
            ("n", &self.n),
            ("alpha", &self.alpha),
            ("beta", &self.beta),
            ("mode", &self.mode),
            ("amplitude", &self.amplitude),
            ("integrator", &self.integrator),
            ("h", &self.h),
            ("t_end", &self.t_end),
            ("samples_per_decade", &self.samples_per_decade),
            ("packet_size", &self.packet_size),
            ("out", &self.out),
        ]
        .into_iter()
        .filter_map(|(key, value)| value.as_ref().map(|v| (key.to_string(), v.clone())))
        .collect()
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Comma-separated amplitudes [default: 10,20,30,35,40].
    #[arg(long)]
    amplitudes: Option<String>,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    /// Spectra CSV written by `run`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 8)]
    packet_size: usize,
    /// Output directory [env: FPU_LAB_OUT, default: current directory].
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::Sweep(args) => commands::sweep(args),
        Command::Estimate(args) => commands::estimate(args),
        Command::Check => commands::check(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("fpu-lab: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m)
            | Failure::Io(m)
            | Failure::BlowUp(m)
            | Failure::Numerical(m)
            | Failure::Check(m) => f.write_str(m),
        }
    }
}
