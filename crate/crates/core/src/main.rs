use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::error;

use grasslink::experiment::{emit_csv, run_error_sweep, run_overhead_sweep, ExperimentConfig, ExperimentError};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_FAILED_CELL: u8 = 3;

#[derive(Parser)]
#[command(name = "grasslink", version, about = "Monte-Carlo sweeps for blind Grassmann analog transmission")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write the result CSV.
    Run {
        /// Config file, or `paper_defaults` for the built-in defaults.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = SweepKind::Error)]
        sweep: SweepKind,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Check a config file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepKind {
    Error,
    Overhead,
}

fn load(path: &std::path::Path) -> Result<ExperimentConfig, u8> {
    ExperimentConfig::load(path)
        .and_then(ExperimentConfig::with_env_seed)
        .map_err(|e| {
            error!("{e}");
            eprintln!("error: {e}");
            EXIT_CONFIG
        })
}

fn run(config: PathBuf, out: PathBuf, sweep: SweepKind, threads: Option<usize>) -> Result<(), u8> {
    let cfg = load(&config)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            eprintln!("error: --threads must be positive");
            return Err(EXIT_CONFIG);
        }
        pool = pool.num_threads(n);
    }
    let pool = pool.build().map_err(|e| {
        eprintln!("error: {e}");
        EXIT_FAILURE
    })?;
    let result = pool
        .install(|| match sweep {
            SweepKind::Error => run_error_sweep(&cfg),
            SweepKind::Overhead => run_overhead_sweep(&cfg),
        })
        .map_err(|e| {
            eprintln!("error: {e}");
            match e {
                ExperimentError::Config(_) => EXIT_CONFIG,
                _ => EXIT_FAILURE,
            }
        })?;
    emit_csv(&result, &out).map_err(|e| {
        eprintln!("error: {}: {e}", out.display());
        EXIT_FAILURE
    })?;
    if result.has_failures() {
        for row in result.rows.iter().filter(|r| r.stats.is_err()) {
            eprintln!(
                "failed cell {} {}={}: {}",
                row.scheme,
                row.variable.id(),
                row.value,
                row.stats.as_ref().unwrap_err()
            );
        }
        return Err(EXIT_FAILED_CELL);
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            out,
            sweep,
            threads,
        } => run(config, out, sweep, threads),
        Command::Validate { config } => load(&config).map(|cfg| {
            println!(
                "ok: {} schemes, {} {} values, {} trials",
                cfg.schemes.len(),
                cfg.sweep.values.len(),
                cfg.sweep.variable.id(),
                cfg.trials
            );
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
