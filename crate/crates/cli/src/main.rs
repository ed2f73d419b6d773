mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Rate, fidelity and timing models for quantum-dot repeater chains.
#[derive(Debug, Parser)]
#[command(name = "qdrepeater", version)]
struct Cli {
    /// Parameter file (TOML key = "value unit" pairs).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override one parameter after the file is loaded. Repeatable.
    #[arg(long = "param", global = true, value_name = "KEY=VALUE")]
    params: Vec<String>,

    /// Write the primary output here instead of stdout; a `.meta.json`
    /// companion is written next to it.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Monte Carlo seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo trial count.
    #[arg(long, global = true)]
    trials: Option<u64>,

    /// Compose overall fidelities even where a component is outside its
    /// perturbative regime.
    #[arg(long, global = true)]
    force: bool,

    /// Run on the calling thread only.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Distribution rate against distance for the repeater curves and direct transmission.
    Rates(RatesArgs),
    /// Overall fidelity over a Purcell factor × nuclear polarization grid.
    Contour(ContourArgs),
    /// Run the acceptance suite against the resolved parameters.
    Validate,
    /// Monte Carlo of the protocol timing with a comparison to the closed form.
    Mc(McArgs),
    /// Exact quantum-oracle checks.
    Qsim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Args)]
struct RatesArgs {
    /// First distance, km.
    #[arg(long, default_value_t = 0.0)]
    l_start_km: f64,
    /// Last distance, km.
    #[arg(long, default_value_t = 2000.0)]
    l_stop_km: f64,
    #[arg(long, default_value_t = 41)]
    points: usize,
    #[arg(long, value_enum, default_value_t = Scale::Linear)]
    scale: Scale,
}

#[derive(Debug, Clone, Args)]
struct ContourArgs {
    #[arg(long, default_value_t = 100.0)]
    fp_start: f64,
    #[arg(long, default_value_t = 1000.0)]
    fp_stop: f64,
    #[arg(long, default_value_t = 10)]
    fp_points: usize,
    #[arg(long, default_value_t = 0.80)]
    pol_start: f64,
    #[arg(long, default_value_t = 1.0)]
    pol_stop: f64,
    #[arg(long, default_value_t = 11)]
    pol_points: usize,
}

#[derive(Debug, Clone, Args)]
struct McArgs {
    /// Nesting level; defaults to the configured `n_nest`.
    #[arg(long)]
    nest: Option<u32>,
    /// Duration of each swap, s.
    #[arg(long, default_value_t = 0.0)]
    swap_time: f64,
    /// Discard links whose memories wait longer than this, s.
    #[arg(long)]
    memory_cutoff: Option<f64>,
    /// Storage-time threshold reported in the summary, s.
    #[arg(long, default_value_t = 1.0)]
    storage_threshold: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
