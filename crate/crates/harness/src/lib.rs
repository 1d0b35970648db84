//! Experiment harness for the constrained-VI solvers: TOML experiment specs,
//! a problem/method registry, deterministic CSV traces, SVG plots, and
//! parallel parameter sweeps. The `cvi-bench` binary wraps this library.

pub mod csvio;
pub mod runner;
pub mod spec;
pub mod svg;

pub use csvio::{compare_tables, format_float, trace_to_csv, write_atomic, CompareReport, CsvTable};
pub use runner::{
    build_problem, execute_run, execute_sweep, method_catalog, prepare_run, problem_catalog,
    resolve_method, sweep_threads, HarnessError, PreparedRun, ResolvedMethod, RunArtifacts,
    SweepArtifacts,
};
pub use spec::{
    BudgetSpec, ExperimentSpec, MethodSpec, OutputsSpec, ProblemSpec, StopSpec, SweepAxis,
    SweepSpec, ValidationError,
};
