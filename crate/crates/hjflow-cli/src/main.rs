mod commands;
mod config;
mod plots;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit status: 0 ok, 1 check failure, 2 runtime error.
pub const EXIT_OK: u8 = 0;
pub const EXIT_CHECK_FAILURE: u8 = 1;
pub const EXIT_RUNTIME_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "hjflow",
    about = "Boundary control experiments for viscous HJ PDEs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a reference trajectory and its feedforward boundary inputs.
    Trajgen {
        /// Scenario configuration file(s); multiple configs run in parallel.
        #[arg(long, required = true, num_args = 1..)]
        config: Vec<PathBuf>,
        /// Output directory (overrides the config's output.dir).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Run a closed-loop simulation and write CSV outputs.
    Simulate {
        #[arg(long, required = true, num_args = 1..)]
        config: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        grid_n: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Run the numeric certification suites.
    Verify {
        /// all | kernels | gevrey | norms | roundtrips
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = match cli.command {
        Command::Trajgen {
            config,
            out,
            grid_n,
            t_end,
        } => commands::run_many(config, move |cfg_path| {
            commands::trajgen::run(cfg_path, out.clone(), grid_n, t_end)
        }),
        Command::Simulate {
            config,
            out,
            grid_n,
            dt,
            t_end,
        } => commands::run_many(config, move |cfg_path| {
            commands::simulate::run(cfg_path, out.clone(), grid_n, dt, t_end)
        }),
        Command::Verify { suite, out } => commands::verify::run(&suite, &out),
    };
    ExitCode::from(status)
}
