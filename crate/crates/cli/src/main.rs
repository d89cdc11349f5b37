//! Experiment driver for the translation-cost simulator: generate traces,
//! sweep simulations and bound evaluations, emit CSV, and self-verify.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or configuration
//! error, 3 i/o or trace-format error.

mod commands;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::TraceFormat;
use sweep::SweepArgs;
use vatsim::error::Error;

#[derive(Parser)]
#[command(
    name = "vatsim",
    version,
    about = "virtual address translation cost simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate trace files, one per (workload, n, seed).
    Gen {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Output directory for the trace files.
        #[arg(long, default_value = "traces")]
        out: PathBuf,
        /// Write a single trace to this exact path (the sweep must contain
        /// exactly one trace).
        #[arg(long)]
        trace_out: Option<PathBuf>,
        /// Trace file format: text or binary.
        #[arg(long, default_value = "text")]
        trace_format: String,
    },
    /// Run the simulation sweep and emit one CSV row per run.
    Run {
        #[command(flatten)]
        sweep: SweepArgs,
        /// Replay these trace files under the configuration sweep too.
        #[arg(long = "trace-in")]
        trace_in: Vec<PathBuf>,
        /// Cache size in cells for the EM baseline (default W * P).
        #[arg(long)]
        em_m: Option<u64>,
        /// Block size in cells for the EM baseline (default P).
        #[arg(long)]
        em_b: Option<u64>,
        /// Output file (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Output format; only csv is defined.
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Evaluate the analytic bounds for the same sweep, row-aligned with
    /// `run`.
    Bounds {
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Re-check the model invariants and optionally validate trace files.
    Verify {
        /// Cache capacities to exercise.
        #[arg(long = "W", visible_alias = "w", default_values_t = vec![8u64, 16])]
        ws: Vec<u64>,
        /// Tree depth for the invariant runs.
        #[arg(long, default_value_t = 5)]
        d: u32,
        /// Trace files to parse and replay.
        #[arg(long = "trace-in")]
        trace_in: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) | Error::Parse(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn check_format(format: &str) -> Result<(), Error> {
    if format == "csv" {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "unsupported output format {format:?} (only csv)"
        )))
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Gen {
            sweep,
            out,
            trace_out,
            trace_format,
        } => {
            let format: TraceFormat = trace_format.parse()?;
            commands::cmd_gen(&sweep, &out, trace_out.as_deref(), &format)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            sweep,
            trace_in,
            em_m,
            em_b,
            out,
            format,
        } => {
            check_format(&format)?;
            commands::cmd_run(&sweep, &trace_in, em_m, em_b, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bounds { sweep, out, format } => {
            check_format(&format)?;
            commands::cmd_bounds(&sweep, out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { ws, d, trace_in } => {
            let checks = verify::run_checks(&ws, d, &trace_in)?;
            let mut all_pass = true;
            for c in &checks {
                println!(
                    "check {:<60} {} ({})",
                    c.name,
                    if c.pass { "pass" } else { "FAIL" },
                    c.detail
                );
                all_pass &= c.pass;
            }
            if all_pass {
                println!("all {} checks passed", checks.len());
                Ok(ExitCode::SUCCESS)
            } else {
                println!("verification failed");
                Ok(ExitCode::from(1))
            }
        }
    }
}
