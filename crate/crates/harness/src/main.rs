//! `cvi-bench`: run, sweep, and compare benchmark experiments.
//!
//! Exit codes: 0 success (for `compare`: within tolerance), 1 compare
//! deviation above tolerance, 2 spec/validation problem, 3 runtime failure
//! (solver or I/O; solver failures leave a `<csv>.err.txt` sidecar). A
//! stdout pipe closed by the consumer (`cvi-bench list-problems | head -1`)
//! ends the process with the conventional 141.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cvi_harness::{
    compare_tables, execute_run, execute_sweep, method_catalog, problem_catalog, sweep_threads,
    CsvTable, ExperimentSpec, HarnessError,
};

#[derive(Parser)]
#[command(name = "cvi-bench", version, about = "Benchmark runner for constrained variational-inequality solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment spec: solve and write the trace CSV (plus optional
    /// SVG plot and JSON trace dump).
    Run {
        /// TOML experiment spec.
        spec: PathBuf,
    },
    /// Run a sweep spec: one axis, several methods, a summary CSV, and one
    /// trace CSV per run. CVI_SOLVE_THREADS bounds the parallelism.
    Sweep {
        /// TOML sweep spec.
        spec: PathBuf,
    },
    /// Compare two trace CSVs aligned by iteration; the wall-time column is
    /// ignored and NaN equals NaN.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Maximum tolerated absolute deviation.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
    /// List the available benchmark problems.
    ListProblems,
    /// List the available methods and their hyperparameter keys.
    ListMethods,
}

/// Print one line to stdout without panicking when the consumer hangs up.
fn emit(args: std::fmt::Arguments) {
    let mut out = std::io::stdout().lock();
    if let Err(e) = out.write_fmt(args).and_then(|()| out.write_all(b"\n")) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(141);
        }
        let _ = writeln!(std::io::stderr(), "error: failed writing to stdout: {e}");
        std::process::exit(3);
    }
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(format_args!($($arg)*)) };
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Run { spec } => {
            let spec = ExperimentSpec::load(&spec)?;
            let artifacts = execute_run(&spec)?;
            outln!(
                "wrote {} ({} rows)",
                artifacts.csv_path.display(),
                artifacts.trace.records.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { spec } => {
            let spec = ExperimentSpec::load(&spec)?;
            let threads = sweep_threads()?;
            let artifacts = execute_sweep(&spec, threads)?;
            outln!(
                "wrote {} ({} runs)",
                artifacts.summary_csv.display(),
                artifacts.run_csvs.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare { a, b, tol } => {
            let table_a = CsvTable::load(&a).map_err(validation)?;
            let table_b = CsvTable::load(&b).map_err(validation)?;
            let report = compare_tables(&table_a, &table_b).map_err(validation)?;
            for col in &report.columns {
                outln!(
                    "column {}: max abs deviation {}, mean abs deviation {}",
                    col.name,
                    cvi_harness::format_float(col.max_abs),
                    cvi_harness::format_float(col.mean_abs)
                );
            }
            if report.unmatched_iters > 0 {
                outln!("{} iterations present in only one file", report.unmatched_iters);
            }
            if !report.unshared_columns.is_empty() {
                outln!("columns present in only one file: {}", report.unshared_columns.join(", "));
            }
            let max = report.max_deviation();
            outln!(
                "rows compared: {}; max deviation: {}",
                report.rows_compared,
                cvi_harness::format_float(max)
            );
            if report.within(tol) {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!(
                    "max deviation {} exceeds tolerance {}",
                    cvi_harness::format_float(max),
                    cvi_harness::format_float(tol)
                );
                Ok(ExitCode::from(1))
            }
        }
        Command::ListProblems => {
            for (name, desc) in problem_catalog() {
                outln!("{name:<12} {desc}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ListMethods => {
            for (name, desc) in method_catalog() {
                outln!("{name:<14} {desc}");
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn validation(message: String) -> HarnessError {
    HarnessError::Validation(cvi_harness::ValidationError::new(message))
}
