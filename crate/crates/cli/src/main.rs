use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pairgen_cli::{cmd_simulate, cmd_sweep_pump, cmd_validate};

/// Photon-pair spectra for bulk, periodically poled and layered nonlinear
/// structures, with the boundary (surface) contributions kept explicit.
#[derive(Parser)]
#[command(name = "pairgen", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario config and write spectrum/summary CSVs plus a manifest.
    Simulate {
        /// Scenario configuration file (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: rayon's choice). Results do not depend on it.
        #[arg(long)]
        threads: Option<usize>,
        /// Disable surface contributions (volume-only kernels).
        #[arg(long)]
        no_surface: bool,
    },
    /// Sweep the cw pump wavelength of a poled scenario, re-deriving the
    /// optimum poling period at every point.
    SweepPump {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// First pump wavelength, nm.
        #[arg(long)]
        from_nm: f64,
        /// Last pump wavelength, nm.
        #[arg(long)]
        to_nm: f64,
        /// Number of sweep points (>= 2).
        #[arg(long)]
        points: usize,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Run the oracle validation suites and report per-case agreement.
    Validate {
        /// Seed for the randomized suites.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Multiplier applied to every suite tolerance (0 fails everything).
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
        /// Also write oracle_report.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate {
            config,
            out,
            threads,
            no_surface,
        } => cmd_simulate(&config, &out, threads, no_surface),
        Command::SweepPump {
            config,
            out,
            from_nm,
            to_nm,
            points,
            threads,
        } => cmd_sweep_pump(&config, &out, from_nm, to_nm, points, threads),
        Command::Validate {
            seed,
            tolerance_scale,
            out,
        } => cmd_validate(seed, tolerance_scale, out.as_deref()).map(|_| ()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
