mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "uniqset", version, about = "Exact recovery and uniqueness-set experiments on finite signal classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config for the command.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output path; overrides the config's `output`. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for the library's parallel loops.
    #[arg(long, global = true, env = "UNIQSET_WORKERS")]
    workers: Option<usize>,

    /// Highest ball precision in bits.
    #[arg(long, global = true)]
    precision_cap: Option<u32>,

    /// Enumeration limit for classes and minor scans.
    #[arg(long, global = true)]
    limit: Option<u64>,

    /// Let minor scans run on composite lengths.
    #[arg(long, global = true)]
    allow_composite: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Marker-encode a signal file onto an encodedY class.
    Encode,
    /// Write the trace of a signal as an observation file.
    Observe,
    /// Recover a signal from an observation (sparse or bruteforce mode).
    Recover,
    /// Uniqueness verdicts, window sweeps and minor scans.
    Verify,
    /// Robustness scan over rounding depths, as CSV and JSON.
    Muscan,
}

/// Settings shared by every command after flag parsing.
pub struct Options {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub precision_cap: Option<u32>,
    pub limit: Option<u64>,
    pub allow_composite: bool,
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
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<commands::Status> {
    if let Some(n) = cli.workers {
        anyhow::ensure!(n > 0, "--workers must be positive");
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let config = cli.config.ok_or_else(|| anyhow::anyhow!("--config is required"))?;
    if let Some(cap) = cli.precision_cap {
        anyhow::ensure!(cap >= 2, "--precision-cap must be at least 2 bits");
    }
    let opts = Options {
        config,
        out: cli.out,
        precision_cap: cli.precision_cap,
        limit: cli.limit,
        allow_composite: cli.allow_composite,
    };
    match cli.command {
        Command::Encode => commands::encode(&opts),
        Command::Observe => commands::observe(&opts),
        Command::Recover => commands::recover(&opts),
        Command::Verify => commands::verify(&opts),
        Command::Muscan => commands::muscan(&opts),
    }
}
