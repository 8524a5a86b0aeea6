use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rotns::commands::{self, Command, Invocation};

/// Pseudo-spectral experiments for the stationary and transient rotating Navier-Stokes equations.
///
/// Exit codes: 0 success, 1 configuration or input error, 2 solver did not
/// converge, 3 blowup, 4 verification failure.
#[derive(Debug, Parser)]
#[command(name = "rotns", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides ROTNS_OUT and `[output] dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for every randomized field (overrides `[experiment] seed`).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for FFTs and sweeps.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Picard iteration for the stationary problem.
    SolveStationary,
    /// Exponential-integrator time stepping.
    SolveTransient,
    /// Weighted force norms (and optionally solves) over a range of Omega.
    SweepOmega,
    /// Invariant suite; exits with 4 if a hard check fails.
    Verify,
    /// Fourier-Besov and Coriolis-weighted norms of a spectrum file.
    Norms {
        /// Spectrum container to analyse.
        #[arg(long, value_name = "PATH")]
        input: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let (command, input) = match cli.command {
        Sub::SolveStationary => (Command::SolveStationary, None),
        Sub::SolveTransient => (Command::SolveTransient, None),
        Sub::SweepOmega => (Command::SweepOmega, None),
        Sub::Verify => (Command::Verify, None),
        Sub::Norms { input } => (Command::Norms, Some(input)),
    };
    let inv = Invocation {
        command,
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        input,
    };
    match commands::run(&inv) {
        Ok(summary) => {
            println!("{}", summary.message);
            println!("artifacts: {}", summary.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
