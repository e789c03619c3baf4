//! Command line front end.
//!
//! Exit codes: 0 success, 1 unexpected failure, 2 invalid configuration,
//! 3 infeasible target, 4 Monte Carlo cross-check failure.

use clap::{Parser, Subcommand};
use keyadapt_cli::config::{parse_config, resolve_config, Resolved};
use keyadapt_cli::csvout::write_tables;
use keyadapt_cli::pipelines::{
    config_hash, run_adapt, run_equalize, run_figures, run_montecarlo, run_multiuser,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "keyadapt",
    about = "Secret-key-rate adaption experiments over Gaussian sub-channels",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Path to the JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration against every model invariant.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the single-ensemble rate adaption.
    Adapt(RunArgs),
    /// Run the per-user rate adaptions.
    Multiuser(RunArgs),
    /// Emit the per-user variance-correction and equalization audit.
    Equalize(RunArgs),
    /// Cross-check the analytic error rate against Monte Carlo.
    Montecarlo(RunArgs),
    /// Emit the figure data tables.
    Figures {
        #[command(flatten)]
        run: RunArgs,
        /// Emit only one pipeline: fig2, fig3, fig4, s1, s2, s3 or s4.
        #[arg(long)]
        pipeline: Option<String>,
    },
}

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_CROSSCHECK: u8 = 4;

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

struct Loaded {
    resolved: Resolved,
    hash: String,
}

fn load(config_path: &Path, seed: Option<u64>) -> anyhow::Result<Result<Loaded, u8>> {
    let bytes = std::fs::read(config_path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", config_path.display()))?;
    let mut config = match parse_config(&bytes) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return Ok(Err(EXIT_CONFIG));
        }
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    match resolve_config(&config) {
        Ok(resolved) => Ok(Ok(Loaded {
            resolved,
            hash: config_hash(&bytes),
        })),
        Err(report) => {
            eprintln!("configuration invalid:");
            for v in &report.violations {
                eprintln!("  - {v}");
            }
            Ok(Err(EXIT_CONFIG))
        }
    }
}

fn out_dir(run: &RunArgs, resolved: &Resolved) -> PathBuf {
    run.out
        .clone()
        .unwrap_or_else(|| PathBuf::from(&resolved.output_dir))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Validate { config } => {
            let bytes = std::fs::read(&config)
                .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", config.display()))?;
            let parsed = match parse_config(&bytes) {
                Ok(c) => c,
                Err(msg) => {
                    eprintln!("{msg}");
                    return Ok(EXIT_CONFIG);
                }
            };
            let report = keyadapt_cli::config::validate_config(&parsed);
            if report.pass() {
                println!("PASS");
                Ok(EXIT_OK)
            } else {
                for v in &report.violations {
                    println!("violation: {v}");
                }
                Ok(EXIT_CONFIG)
            }
        }
        Command::Adapt(run) => {
            let loaded = match load(&run.config, run.seed)? {
                Ok(l) => l,
                Err(code) => return Ok(code),
            };
            let (tables, feasible) = run_adapt(&loaded.resolved)?;
            let dir = out_dir(&run, &loaded.resolved);
            write_tables(&dir, &tables, &loaded.hash)?;
            report_files(&dir, tables.len());
            if feasible {
                Ok(EXIT_OK)
            } else {
                eprintln!("target infeasible; see adapt_infeasible.csv");
                Ok(EXIT_INFEASIBLE)
            }
        }
        Command::Multiuser(run) => {
            let loaded = match load(&run.config, run.seed)? {
                Ok(l) => l,
                Err(code) => return Ok(code),
            };
            let (tables, feasible) = run_multiuser(&loaded.resolved)?;
            let dir = out_dir(&run, &loaded.resolved);
            write_tables(&dir, &tables, &loaded.hash)?;
            report_files(&dir, tables.len());
            if feasible {
                Ok(EXIT_OK)
            } else {
                eprintln!("at least one user target is infeasible");
                Ok(EXIT_INFEASIBLE)
            }
        }
        Command::Equalize(run) => {
            let loaded = match load(&run.config, run.seed)? {
                Ok(l) => l,
                Err(code) => return Ok(code),
            };
            let tables = run_equalize(&loaded.resolved)?;
            let dir = out_dir(&run, &loaded.resolved);
            write_tables(&dir, &tables, &loaded.hash)?;
            report_files(&dir, tables.len());
            Ok(EXIT_OK)
        }
        Command::Montecarlo(run) => {
            let loaded = match load(&run.config, run.seed)? {
                Ok(l) => l,
                Err(code) => return Ok(code),
            };
            let (table, pass) = run_montecarlo(&loaded.resolved)?;
            let dir = out_dir(&run, &loaded.resolved);
            write_tables(&dir, std::slice::from_ref(&table), &loaded.hash)?;
            report_files(&dir, 1);
            if pass {
                Ok(EXIT_OK)
            } else {
                eprintln!("cross-check failed at one or more grid points");
                Ok(EXIT_CROSSCHECK)
            }
        }
        Command::Figures { run, pipeline } => {
            let loaded = match load(&run.config, run.seed)? {
                Ok(l) => l,
                Err(code) => return Ok(code),
            };
            let tables = run_figures(&loaded.resolved, pipeline.as_deref())?;
            let dir = out_dir(&run, &loaded.resolved);
            write_tables(&dir, &tables, &loaded.hash)?;
            report_files(&dir, tables.len());
            Ok(EXIT_OK)
        }
    }
}

fn report_files(dir: &Path, count: usize) {
    println!("wrote {count} tables and manifest.csv to {}", dir.display());
}
