//! `cusplab`: batch front-end with reproducible run manifests.

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::commands::Run;
use crate::config::Config;
use crate::error::CliError;
use crate::manifest::RunManifest;

/// Exit status for command-line usage errors.
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "cusplab",
    version,
    about = "Numerical laboratory for analysis on hyperbolic cusps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML configuration with sections [surface], [operator], [grid], [tolerances].
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Indicial family coefficients and characteristic polynomial.
    Indicial,
    /// Indicial roots in the configured window and the set S(A).
    Roots,
    /// Fredholm index jump between the weights rho and rho_to.
    IndexJump,
    /// Invert the indicial operator on the line Re λ = rho.
    #[command(name = "mode0-solve")]
    Mode0Solve,
    /// Kernel elements at the indicial roots, and the cross-root correction when rho_to is set.
    #[command(name = "mode0-kernel")]
    Mode0Kernel,
    /// Littlewood-Paley block norms and Hölder-Zygmund report.
    LpNorm,
    /// Closed geodesics of the surface up to the configured word length.
    Geodesics,
    /// Normalized X-ray transform on every enumerated class.
    Xray,
    /// Solenoidal decomposition and X-ray probe of a 2-tensor.
    Decompose,
    /// Acceptance checks as a pass/fail table.
    Suite {
        /// Run only these criteria (comma separated ids).
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Indicial => "indicial",
            Command::Roots => "roots",
            Command::IndexJump => "index-jump",
            Command::Mode0Solve => "mode0-solve",
            Command::Mode0Kernel => "mode0-kernel",
            Command::LpNorm => "lp-norm",
            Command::Geodesics => "geodesics",
            Command::Xray => "xray",
            Command::Decompose => "decompose",
            Command::Suite { .. } => "suite",
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Validation("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Validation(e.to_string()))?;
    }
    let cfg = Config::load(cli.config.as_deref())?;
    let start = Instant::now();
    let mut run = Run::new(&cfg, cli.seed, cli.out.clone())?;
    let status = match &cli.command {
        Command::Indicial => commands::indicial(&mut run),
        Command::Roots => commands::roots(&mut run),
        Command::IndexJump => commands::index_jump_cmd(&mut run),
        Command::Mode0Solve => commands::mode0_solve(&mut run),
        Command::Mode0Kernel => commands::mode0_kernel(&mut run),
        Command::LpNorm => commands::lp_norm(&mut run),
        Command::Geodesics => commands::geodesics(&mut run),
        Command::Xray => commands::xray(&mut run),
        Command::Decompose => commands::decompose(&mut run),
        Command::Suite { criteria } => commands::suite_cmd(&mut run, criteria).and_then(|all| {
            if all {
                Ok(())
            } else {
                Err(CliError::Numeric("some acceptance criteria failed".into()))
            }
        }),
    };
    // the suite writes its table even when a criterion fails
    if status.is_ok() || matches!(cli.command, Command::Suite { .. }) && !run.outputs.is_empty() {
        let manifest = RunManifest {
            command: cli.command.name().into(),
            config_digest: cfg.digest(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: cli.seed,
            threads: rayon::current_num_threads(),
            outputs: run.outputs.clone(),
            wall_time: start.elapsed().as_secs_f64(),
        };
        manifest.write(&cli.out)?;
    }
    status
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cusplab {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
