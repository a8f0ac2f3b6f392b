//! `krand`: every experiment as a subcommand, with table caching,
//! deterministic seeding, and JSON reports.

mod cache;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Budget(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Budget(_) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "krand",
    version,
    about = "Exact description-length tables and the experiments built on them"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args, Clone)]
struct GlobalArgs {
    /// Master seed; all pseudorandom choices derive from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads for parallel enumeration (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Directory for cached tables.
    #[arg(
        long,
        global = true,
        env = "KRAND_CACHE_DIR",
        default_value = ".krand-cache"
    )]
    cache_dir: PathBuf,

    /// Path of the JSON report (default: krand-<subcommand>.json).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Build (or fetch from cache) an exact description-length table.
    BuildKtab(commands::BuildKtabArgs),
    /// Incompressible-string counts, density, and the conditional
    /// complexity of the complement prefix.
    Census(commands::CensusArgs),
    /// Constructive hitting-sequence search on a seeded random family.
    Hitting(commands::HittingArgs),
    /// Greedy combinatorial design construction.
    Design(commands::DesignArgs),
    /// Derandomize polynomial identity tests with a census-seeded generator.
    DerandPit(commands::DerandPitArgs),
    /// Advice pruning and sampling with exact success probabilities.
    AdviceSim(commands::AdviceSimArgs),
    /// Instance-checker battery for the permanent-bit language.
    CheckerSim(commands::CheckerSimArgs),
    /// Decide a CNF formula by sampled advice and self-reduction.
    SatSim(commands::SatSimArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
        {
            eprintln!("error: could not configure {jobs} worker threads: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.cmd {
        Cmd::BuildKtab(args) => commands::build_ktab(&cli.global, args),
        Cmd::Census(args) => commands::census(&cli.global, args),
        Cmd::Hitting(args) => commands::hitting(&cli.global, args),
        Cmd::Design(args) => commands::design(&cli.global, args),
        Cmd::DerandPit(args) => commands::derand_pit(&cli.global, args),
        Cmd::AdviceSim(args) => commands::advice_sim(&cli.global, args),
        Cmd::CheckerSim(args) => commands::checker_sim(&cli.global, args),
        Cmd::SatSim(args) => commands::sat_sim(&cli.global, args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
