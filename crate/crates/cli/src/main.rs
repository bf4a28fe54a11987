use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cosserat::certificates::DEFAULT_SEED;
use cosserat_cli::commands;

/// Soft-arm strain-space dynamics simulator.
#[derive(Parser)]
#[command(name = "cosserat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Simulate {
        file: PathBuf,
        /// Validate and print the fully explicit scenario without running it.
        #[arg(long)]
        dry_run: bool,
        /// Directory for relative output paths.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run structural certificates: spd | bound | skew | linparam | energy | passivity | all.
    Verify {
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Run every variant of a sweep file in parallel.
    Sweep {
        file: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Output directory; defaults to `<file stem>_out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Simulate { file, dry_run, out } => {
            commands::simulate(file, *dry_run, out.as_deref(), &mut stdout)
        }
        Command::Verify { suite, seed, samples } => {
            commands::verify(suite, *seed, *samples, &mut stdout)
        }
        Command::Sweep { file, jobs, out } => {
            commands::sweep(file, *jobs, out.as_deref(), &mut stdout)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.one_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
