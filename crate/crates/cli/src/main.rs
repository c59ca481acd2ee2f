//! Command-line front end: single simulations, phase-boundary scans, the
//! analytic driving boundary, the equilibrium diagram, oracle comparisons
//! and unit conversions.

mod commands;
mod util;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use parabath_core::Error as CoreError;
use util::CliError;

#[derive(Parser)]
#[command(
    name = "parabath",
    version,
    about = "Exact dissipative dynamics and entanglement of two parametrically driven coupled oscillators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Flat key=value config file; keys are the SystemConfig field names.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override a config value (repeatable), e.g. --set theta=10.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Output directory for CSV/JSON files.
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    out: PathBuf,

    /// Worker threads for scans (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    workers: Option<usize>,

    /// Output format for tabular data.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one configuration and emit the trajectory plus a summary.
    Simulate {
        /// Initial state: thermal | vacuum | tmsv:R | gibbs
        #[arg(long, default_value = "thermal")]
        initial: String,
    },
    /// Bisect the entanglement boundary θ(κ1) and compare with the
    /// analytic prediction growth_rate/γ.
    Boundary {
        /// Scan axis, e.g. --scan kappa1=0.05:0.5:10
        #[arg(long, value_name = "NAME=MIN:MAX:COUNT")]
        scan: Vec<String>,
        /// Steady E_N threshold defining "entangled".
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        /// Bisection depth.
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Steady-state window in drive periods.
        #[arg(long, default_value_t = 10)]
        window: usize,
    },
    /// Equilibrium (undriven) entanglement diagram over (θ, κ0).
    Equilibrium {
        #[arg(long, value_name = "NAME=MIN:MAX:COUNT")]
        scan: Vec<String>,
    },
    /// Floquet growth-rate map over (κ1, δ).
    Exponent {
        #[arg(long, value_name = "NAME=MIN:MAX:COUNT")]
        scan: Vec<String>,
    },
    /// Cross-validate the exact propagator against the discretized bath
    /// and the small-ħ master equation on one configuration.
    OracleCompare,
    /// Convert between the reduced temperature θ = kT/ħω and Kelvin.
    Units {
        /// Motional frequency ν in Hz (ħω = hν).
        #[arg(long, value_name = "HZ")]
        frequency: Option<f64>,
        /// Reduced temperature to convert (defaults to the config value).
        #[arg(long)]
        theta: Option<f64>,
        /// Temperature in Kelvin to convert back to θ.
        #[arg(long, value_name = "K")]
        temperature: Option<f64>,
        /// Oscillator mass in kg (enables position-spread output).
        #[arg(long, value_name = "KG")]
        mass: Option<f64>,
        /// Trap size in meters (enables the spread/size margin).
        #[arg(long, value_name = "M")]
        size: Option<f64>,
    },
}

fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::Core(e) => match e {
            CoreError::Config(_) | CoreError::Domain(_) | CoreError::Recurrence { .. } => 2,
            CoreError::Caustic { .. }
            | CoreError::Integration { .. }
            | CoreError::KernelAccuracy { .. }
            | CoreError::Divergence { .. } => 3,
            CoreError::OracleMismatch(_) => 4,
        },
        CliError::Usage(_) => 2,
        CliError::Io(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let config = match util::resolve_config(cli.config.as_deref(), &cli.set) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let json_format = cli.format == Format::Json;
    let result = match &cli.command {
        Command::Simulate { initial } => {
            commands::simulate(&config, initial, &cli.out, json_format)
        }
        Command::Boundary { scan, epsilon, depth, window } => {
            commands::boundary(&config, scan, *epsilon, *depth, *window, &cli.out)
        }
        Command::Equilibrium { scan } => commands::equilibrium(&config, scan, &cli.out),
        Command::Exponent { scan } => commands::exponent(&config, scan, &cli.out),
        Command::OracleCompare => commands::oracle_compare(&config, &cli.out),
        Command::Units { frequency, theta, temperature, mass, size } => commands::units(
            &config,
            *frequency,
            *theta,
            *temperature,
            *mass,
            *size,
            &cli.out,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
