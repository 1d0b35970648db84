//! Experiment specification files.
//!
//! An experiment is described by a TOML file with the following sections:
//!
//! ```toml
//! run_seed = 7                      # optional, default seed for seeded problems
//!
//! [problem]
//! name = "hbg"                      # see `cvi-bench list-problems`
//! eta = 0.5                         # problem-specific parameters
//! n = 1000
//!
//! [method]
//! name = "acvi"                     # see `cvi-bench list-methods`
//! beta = 0.5
//! mu_init = 1e-6
//! delta = 0.5
//! outers = 10
//! inners = 5
//!
//! [budget]
//! max_iters = 50                    # at least one of max_iters / max_wall_time_s
//! max_wall_time_s = 60.0
//!
//! [stop]                            # optional early-stop rule
//! metric = "relative_error"
//! threshold = 0.02
//!
//! [outputs]
//! csv = "out/run.csv"               # required for `run`
//! svg = "out/run.svg"               # optional plot
//! trace_dump = "out/trace.json"     # optional full trace as JSON
//! ```
//!
//! A sweep file replaces `[method]` with a `[sweep]` section holding an axis,
//! its values, and one or more `[[sweep.method]]` blocks.
//!
//! Unknown keys anywhere in the file are rejected so that typos surface as
//! validation errors instead of silently ignored settings.

use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};

/// Top-level experiment description, deserialized from TOML.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Default seed for seeded problem constructors when `[problem]` has no
    /// `seed` of its own. Also recorded in trace echoes for provenance.
    pub run_seed: Option<u64>,
    pub problem: ProblemSpec,
    /// Single-run method. Required by `run`, ignored by `sweep`.
    pub method: Option<MethodSpec>,
    pub budget: BudgetSpec,
    pub stop: Option<StopSpec>,
    #[serde(default)]
    pub outputs: OutputsSpec,
    /// Sweep description. Required by `sweep`, ignored by `run`.
    pub sweep: Option<SweepSpec>,
}

/// Which problem instance to build.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub name: String,
    /// Monotonicity / curvature parameter (hbg, ghbg, gghbg).
    pub eta: Option<f64>,
    /// Total dimension (hbg).
    pub n: Option<usize>,
    /// Per-player dimension (ghbg, gghbg).
    pub half_dim: Option<usize>,
    /// Sample count for the sampled two-parameter game (toy_gan).
    pub num_samples: Option<usize>,
    /// Constructor seed for randomized instances; falls back to `run_seed`.
    pub seed: Option<u64>,
    /// Problem variant selector (forsaken: "ball4", "x1_min", "x2_min").
    pub variant: Option<String>,
    /// Optional start point override, length must match the problem dimension.
    pub start: Option<Vec<f64>>,
}

/// Which solver to run and with what hyperparameters.
///
/// All hyperparameters are optional at the schema level; `resolve_method`
/// checks that the ones required by the chosen `name` are present.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub name: String,

    // Interior-point / ADMM family (acvi, acvi_inexact, vacvi).
    pub beta: Option<f64>,
    pub mu_init: Option<f64>,
    pub delta: Option<f64>,
    pub outers: Option<usize>,
    pub inners: Option<usize>,
    /// Explicit per-outer inner-iteration counts; alternative to
    /// `outers` + `inners`.
    pub schedule: Option<Vec<usize>>,
    /// ACVI x-update mode: "affine" (closed form, affine fields only) or
    /// "newton" (default).
    pub x_solver: Option<String>,
    /// ACVI y-update mode: "structural" (closed form where available) or
    /// "newton" (default: structural when the problem supports it).
    pub y_solver: Option<String>,

    // Inexact subproblem solves (acvi_inexact).
    /// First-order inner optimizer: "gda" or "eg".
    pub optimizer: Option<String>,
    /// Number of first-order steps per subproblem.
    pub steps: Option<usize>,
    pub eta_x: Option<f64>,
    pub eta_y: Option<f64>,

    // Projection baselines (gda, eg, ogda, la) and their step size.
    pub gamma: Option<f64>,
    /// Update count for baselines and the linear-minimization method; defaults
    /// to `budget.max_iters`.
    pub iterations: Option<usize>,
    /// Lookahead inner-step count (la).
    pub k: Option<usize>,
    /// Lookahead averaging weight (la).
    pub alpha: Option<f64>,
    /// Lookahead base method: "gda", "eg", or "ogda" (la).
    pub base: Option<String>,

    // Linear-minimization method (fw).
    /// Step rule: "harmonic" (default) or "adaptive".
    pub step_rule: Option<String>,
    /// Adaptive step-rule curvature constant.
    pub c: Option<f64>,
    /// Adaptive step-rule scale factor.
    pub nu: Option<f64>,
    /// Gap threshold for early stopping (fw). Default 0 (never trips).
    pub eps: Option<f64>,
}

/// Iteration and wall-time limits. At least one bound must be set.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSpec {
    pub max_iters: Option<usize>,
    pub max_wall_time_s: Option<f64>,
}

/// Early-stop rule: stop once `metric <= threshold`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    pub metric: String,
    pub threshold: f64,
}

/// Output artifact paths. Relative paths are resolved against the directory
/// containing the spec file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSpec {
    /// Trace CSV path. Required for `run`; sweeps name their outputs after
    /// `sweep.summary_csv` instead.
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    /// Metric plotted in the SVG; defaults to the stop metric, then to the
    /// first metric column.
    pub svg_metric: Option<String>,
    /// SVG x axis: "iter" (default) or "wall_time".
    pub svg_x: Option<String>,
    pub trace_dump: Option<PathBuf>,
}

/// Sweep over one axis with one or more methods.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// One of "eta", "time_budget", "error_threshold".
    pub axis: String,
    pub values: Vec<f64>,
    /// Summary CSV path; per-run CSVs are written next to it.
    pub summary_csv: PathBuf,
    #[serde(rename = "method")]
    pub methods: Vec<MethodSpec>,
}

/// Sweep axis kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Vary the problem's `eta` parameter.
    Eta,
    /// Vary the wall-time budget (seconds).
    TimeBudget,
    /// Vary the stop threshold.
    ErrorThreshold,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Result<Self, ValidationError> {
        match name {
            "eta" => Ok(SweepAxis::Eta),
            "time_budget" => Ok(SweepAxis::TimeBudget),
            "error_threshold" => Ok(SweepAxis::ErrorThreshold),
            other => Err(ValidationError::new(format!(
                "unknown sweep axis `{other}`; expected one of `eta`, `time_budget`, `error_threshold`"
            ))),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SweepAxis::Eta => "eta",
            SweepAxis::TimeBudget => "time_budget",
            SweepAxis::ErrorThreshold => "error_threshold",
        }
    }
}

/// A spec-file problem: the file failed to parse or declared an inconsistent
/// experiment. Maps to exit code 2 in the CLI.
#[derive(Debug, Clone)]
pub struct ValidationError {
    message: String,
}

impl ValidationError {
    pub fn new(message: impl Into<String>) -> Self {
        ValidationError { message: message.into() }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for ValidationError {}

impl ExperimentSpec {
    /// Parse a spec from TOML text.
    pub fn from_toml(text: &str) -> Result<Self, ValidationError> {
        toml::from_str(text).map_err(|e| ValidationError::new(format!("invalid spec file: {e}")))
    }

    /// Read and parse a spec file, then resolve relative output paths against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, ValidationError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ValidationError::new(format!("cannot read spec file {}: {e}", path.display()))
        })?;
        let mut spec = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(csv) = spec.outputs.csv.take() {
            spec.outputs.csv = Some(resolve_path(base, &csv));
        }
        if let Some(svg) = spec.outputs.svg.take() {
            spec.outputs.svg = Some(resolve_path(base, &svg));
        }
        if let Some(dump) = spec.outputs.trace_dump.take() {
            spec.outputs.trace_dump = Some(resolve_path(base, &dump));
        }
        if let Some(sweep) = spec.sweep.as_mut() {
            sweep.summary_csv = resolve_path(base, &sweep.summary_csv);
        }
        Ok(spec)
    }

    /// Structural checks shared by `run` and `sweep`.
    pub fn validate_common(&self) -> Result<(), ValidationError> {
        if self.budget.max_iters.is_none() && self.budget.max_wall_time_s.is_none() {
            return Err(ValidationError::new(
                "budget must set at least one of `max_iters` / `max_wall_time_s`",
            ));
        }
        if let Some(t) = self.budget.max_wall_time_s {
            if !(t > 0.0) {
                return Err(ValidationError::new(format!(
                    "budget.max_wall_time_s must be positive, got {t}"
                )));
            }
        }
        if let Some(stop) = &self.stop {
            if !stop.threshold.is_finite() {
                return Err(ValidationError::new(format!(
                    "stop.threshold must be finite, got {}",
                    stop.threshold
                )));
            }
        }
        Ok(())
    }

    /// Checks for a single-run spec (`cvi-bench run`).
    pub fn validate_for_run(&self) -> Result<(), ValidationError> {
        self.validate_common()?;
        if self.method.is_none() {
            return Err(ValidationError::new("run spec needs a [method] section"));
        }
        if self.outputs.csv.is_none() {
            return Err(ValidationError::new("run spec needs outputs.csv"));
        }
        Ok(())
    }

    /// Checks for a sweep spec (`cvi-bench sweep`).
    pub fn validate_for_sweep(&self) -> Result<(), ValidationError> {
        self.validate_common()?;
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| ValidationError::new("sweep spec needs a [sweep] section"))?;
        let axis = SweepAxis::parse(&sweep.axis)?;
        if sweep.values.is_empty() {
            return Err(ValidationError::new("sweep.values must not be empty"));
        }
        if sweep.methods.is_empty() {
            return Err(ValidationError::new(
                "sweep needs at least one [[sweep.method]] block",
            ));
        }
        match axis {
            SweepAxis::Eta => {
                if self.problem.eta.is_some() {
                    return Err(ValidationError::new(
                        "problem.eta must be omitted when sweeping the eta axis",
                    ));
                }
            }
            SweepAxis::TimeBudget => {
                for &v in &sweep.values {
                    if !(v > 0.0) {
                        return Err(ValidationError::new(format!(
                            "time_budget sweep values must be positive, got {v}"
                        )));
                    }
                }
            }
            SweepAxis::ErrorThreshold => {
                if self.stop.is_none() {
                    return Err(ValidationError::new(
                        "error_threshold sweep needs a [stop] section naming the metric",
                    ));
                }
            }
        }
        Ok(())
    }
}

fn resolve_path(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}
