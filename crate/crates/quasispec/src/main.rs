use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use quasispec::suites::Suite;
use quasispec::{execute, CliError, Command, Config};

#[derive(Parser)]
#[command(name = "quasispec", version, about = "Spectral scans and checks for quasiperiodic singular Jacobi operators")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file; defaults to `output.path`, then stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides `run.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lyapunov exponent, IDS, rotation number and label per energy (CSV).
    LeScan,
    /// Integrated density of states and rotation number per energy (CSV).
    IdsScan,
    /// Locates label switches and compares them with ±λ (JSON).
    MobilityEdge,
    /// Thouless formula residuals on the grid (JSON).
    Thouless,
    /// IDS of the chain against its dual strip, and the U₂ conjugation (JSON).
    DualityCheck,
    /// Eigenvalues of the finite restriction with IPR (CSV).
    Eig,
    /// Accelerations over the energy grid and `run.eps` (CSV).
    Acceleration,
    /// Runs a fixed verification suite (JSON).
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let path = cli.config.ok_or_else(|| CliError::config("--config <path> is required"))?;
    let mut cfg = Config::load(&path)?;
    if let Some(seed) = cli.seed {
        cfg.run.seed = seed;
    }
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::config("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().map_err(|e| CliError::config(e.to_string()))?;
    }
    let cmd = match cli.command {
        Cmd::LeScan => Command::LeScan,
        Cmd::IdsScan => Command::IdsScan,
        Cmd::MobilityEdge => Command::MobilityEdge,
        Cmd::Thouless => Command::Thouless,
        Cmd::DualityCheck => Command::DualityCheck,
        Cmd::Eig => Command::Eig,
        Cmd::Acceleration => Command::Acceleration,
        Cmd::Verify { suite } => Command::Verify(suite),
    };
    let out = cli.out.or_else(|| cfg.output.path.clone());
    let outcome = execute(cmd, &cfg)?;
    outcome.output.write(out.as_deref())?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("quasispec: check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("quasispec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
