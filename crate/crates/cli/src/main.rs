//! `storsion` — command-line front end for the density engine.
//!
//! Three subcommands: `verify` runs the seeded self-check suites,
//! `density` computes the per-term residue density for a point-data
//! file, and `ledger` emits the discrepancy ledger (JSON or markdown).
//!
//! Exit codes: `0` success, `1` input or I/O problem, `2` usage error
//! (malformed flags, handled by the argument parser), `3` violated
//! internal invariant — including a failing verification check, which
//! means the engine itself is broken, not the input.
//!
//! If `STORSION_REPORT_DIR` is set, relative `--out` paths are resolved
//! under it.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use storsion_core::functional::EngineError;
use storsion_core::report::{
    density_report, ledger_report, parse_point_file, render_json, render_ledger_markdown,
    verify_report_with_tolerance,
};

/// Environment variable that relative `--out` paths are resolved under.
const REPORT_DIR_VAR: &str = "STORSION_REPORT_DIR";

#[derive(Parser)]
#[command(
    name = "storsion",
    version,
    about = "Exact-arithmetic spectral-torsion densities with a discrepancy ledger",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a self-verification suite and report each check.
    Verify {
        /// Which suite to run.
        #[arg(long, default_value = "all", value_parser = ["traces", "sphere", "oracle", "symbols", "all"])]
        suite: String,
        /// RNG seed for the randomized checks.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trial budget per randomized check.
        #[arg(long, default_value_t = 500)]
        trials: usize,
        /// Override the matrix-oracle residual tolerance. Residuals
        /// must fall strictly below it, so 0 forces failure — a
        /// negative control showing the checks are live.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Optional path for the JSON report (relative paths resolve
        /// under STORSION_REPORT_DIR when set).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute the residue density for a point-data file.
    Density {
        /// Point-data JSON file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Report destination (relative paths resolve under
        /// STORSION_REPORT_DIR when set).
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the discrepancy ledger for a point-data file.
    Ledger {
        /// Point-data JSON file.
        #[arg(long = "in")]
        input: PathBuf,
        /// Ledger destination (relative paths resolve under
        /// STORSION_REPORT_DIR when set).
        #[arg(long)]
        out: PathBuf,
        /// Output format.
        #[arg(long, default_value = "json", value_parser = ["json", "markdown"])]
        format: String,
    },
}

enum CliError {
    /// Unusable input or a filesystem problem: exit 1.
    Input(String),
    /// Broken engine invariant (or failed verification): exit 3.
    Internal(String),
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Input(msg) => CliError::Input(msg),
            EngineError::Internal(_) => CliError::Internal(e.to_string()),
        }
    }
}

fn read_input(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var(REPORT_DIR_VAR) {
            if !dir.is_empty() {
                return PathBuf::from(dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

fn write_output(path: &Path, content: &str) -> Result<PathBuf, CliError> {
    let resolved = resolve_out(path);
    if let Some(parent) = resolved.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| {
                CliError::Input(format!("cannot create {}: {e}", parent.display()))
            })?;
        }
    }
    fs::write(&resolved, content)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", resolved.display())))?;
    Ok(resolved)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Verify {
            suite,
            seed,
            trials,
            tolerance,
            out,
        } => {
            let report = verify_report_with_tolerance(&suite, seed, trials, tolerance)?;
            let section = report.suite.as_ref().expect("verify reports carry a suite");
            for check in &section.checks {
                let status = if check.passed { "PASS" } else { "FAIL" };
                println!("{status} {}/{}: {}", check.suite, check.name, check.detail);
            }
            println!(
                "suite '{suite}': {} checks, seed {seed}, trials {trials}: {}",
                section.checks.len(),
                if section.passed { "all passed" } else { "FAILURES" }
            );
            if let Some(out) = out {
                let path = write_output(&out, &render_json(&report))?;
                println!("report written to {}", path.display());
            }
            if section.passed {
                Ok(())
            } else {
                Err(CliError::Internal(format!(
                    "verification suite '{suite}' failed"
                )))
            }
        }
        Command::Density { input, out } => {
            let (point, mode) = parse_point_file(&read_input(&input)?)?;
            let report = density_report(&point, mode)?;
            for section in report.densities.as_deref().unwrap_or(&[]) {
                println!(
                    "mode {}: total {} (x Vol(S^{}) tr[id]), numeric {} + {}i",
                    section.mode,
                    section.total,
                    point.n - 1,
                    section.numeric_re,
                    section.numeric_im
                );
            }
            let path = write_output(&out, &render_json(&report))?;
            println!("report written to {}", path.display());
            Ok(())
        }
        Command::Ledger { input, out, format } => {
            let (point, _) = parse_point_file(&read_input(&input)?)?;
            let report = ledger_report(&point)?;
            let rendered = match format.as_str() {
                "markdown" => render_ledger_markdown(&report)?,
                _ => render_json(&report),
            };
            let ledger = report.ledger.as_ref().expect("ledger reports carry a ledger");
            println!(
                "totals: paper {} derived {}; {} term rows, {} total rows",
                ledger.paper_total,
                ledger.derived_total,
                ledger.term_rows.len(),
                ledger.total_rows.len()
            );
            let path = write_output(&out, &rendered)?;
            println!("ledger written to {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
