//! Problem and method registries, run preparation, execution, and sweeps.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nalgebra::DVector;
use thiserror::Error;

use cvi_core::config::{
    AcviConfig, InexactConfig, InnerOptimizer, InnerSchedule, XSolverMode, YSolverMode,
};
use cvi_core::metrics::MetricContext;
use cvi_core::problems::{
    make_cbg, make_forsaken, make_ghbg, make_gghbg, make_hbg, make_ratio_game, make_toy_gan,
    ForsakenVariant,
};
use cvi_core::trace::metric;
use cvi_core::{
    acvi_inexact_run_controlled, acvi_run_controlled, fw_run_controlled, run_baseline_controlled,
    vacvi_run_controlled, BaselineMethod, FwGamma, ProblemInstance, RunControl, SolverError,
    SolverTrace,
};

use crate::csvio::{self, format_float};
use crate::spec::{
    BudgetSpec, ExperimentSpec, MethodSpec, ProblemSpec, StopSpec, SweepAxis, ValidationError,
};
use crate::svg::{render_line_plot, PlotSeries};

/// Harness failure, split by CLI exit code: validation problems exit 2,
/// runtime failures (solver or I/O) exit 3.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{0}")]
    Validation(#[from] ValidationError),
    #[error("solver failed: {0}")]
    Solver(#[source] SolverError),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation(_) => 2,
            HarnessError::Solver(_) | HarnessError::Io { .. } => 3,
        }
    }
}

// ---------------------------------------------------------------------------
// Problem registry

/// (name, one-line description) for `list-problems`.
pub fn problem_catalog() -> &'static [(&'static str, &'static str)] {
    &[
        ("cbg", "planar bilinear game with weak damping; known solution at the origin"),
        ("ratio_game", "2x2 stochastic ratio game on a product of simplices"),
        ("forsaken", "nonmonotone planar field with a limit cycle; variants: ball4, x1_min, x2_min"),
        ("toy_gan", "two-parameter sampled moment-matching game (params: num_samples, seed)"),
        ("hbg", "high-dimensional bilinear game on product simplices (params: eta, n)"),
        ("ghbg", "generalized bilinear game, ball constraints + random equalities (eta, half_dim, seed)"),
        ("gghbg", "generalized bilinear game, box constraints + random equalities (eta, half_dim, seed)"),
    ]
}

fn reject_unused_problem_params(spec: &ProblemSpec, allowed: &[&str]) -> Result<(), ValidationError> {
    let declared = [
        ("eta", spec.eta.is_some()),
        ("n", spec.n.is_some()),
        ("half_dim", spec.half_dim.is_some()),
        ("num_samples", spec.num_samples.is_some()),
        ("seed", spec.seed.is_some()),
        ("variant", spec.variant.is_some()),
    ];
    for (key, set) in declared {
        if set && !allowed.contains(&key) {
            return Err(ValidationError::new(format!(
                "problem `{}` does not take parameter `{key}`",
                spec.name
            )));
        }
    }
    Ok(())
}

/// Build the problem instance a spec names, filling defaults for omitted
/// parameters. `run_seed` seeds randomized constructors when `[problem]`
/// carries no seed of its own.
pub fn build_problem(
    spec: &ProblemSpec,
    run_seed: Option<u64>,
) -> Result<ProblemInstance, ValidationError> {
    let seed = |fallback: u64| spec.seed.or(run_seed).unwrap_or(fallback);
    let ctor_err = |e: &dyn std::fmt::Display| {
        ValidationError::new(format!("problem `{}`: {e}", spec.name))
    };
    match spec.name.as_str() {
        "cbg" => {
            reject_unused_problem_params(spec, &[])?;
            Ok(make_cbg())
        }
        "ratio_game" => {
            reject_unused_problem_params(spec, &[])?;
            Ok(make_ratio_game())
        }
        "forsaken" => {
            reject_unused_problem_params(spec, &["variant"])?;
            let variant = match spec.variant.as_deref().unwrap_or("ball4") {
                "ball4" => ForsakenVariant::Ball4,
                "x1_min" => ForsakenVariant::X1Min,
                "x2_min" => ForsakenVariant::X2Min,
                other => {
                    return Err(ValidationError::new(format!(
                        "unknown forsaken variant `{other}`; expected `ball4`, `x1_min`, or `x2_min`"
                    )))
                }
            };
            Ok(make_forsaken(variant))
        }
        "toy_gan" => {
            reject_unused_problem_params(spec, &["num_samples", "seed"])?;
            make_toy_gan(spec.num_samples.unwrap_or(500), seed(7)).map_err(|e| ctor_err(&e))
        }
        "hbg" => {
            reject_unused_problem_params(spec, &["eta", "n"])?;
            make_hbg(spec.eta.unwrap_or(0.5), spec.n.unwrap_or(1000)).map_err(|e| ctor_err(&e))
        }
        "ghbg" => {
            reject_unused_problem_params(spec, &["eta", "half_dim", "seed"])?;
            make_ghbg(spec.eta.unwrap_or(0.5), spec.half_dim.unwrap_or(20), seed(11))
                .map_err(|e| ctor_err(&e))
        }
        "gghbg" => {
            reject_unused_problem_params(spec, &["eta", "half_dim", "seed"])?;
            make_gghbg(spec.eta.unwrap_or(0.5), spec.half_dim.unwrap_or(20), seed(13))
                .map_err(|e| ctor_err(&e))
        }
        other => Err(ValidationError::new(format!(
            "unknown problem `{other}`; expected one of {}",
            problem_catalog()
                .iter()
                .map(|(n, _)| format!("`{n}`"))
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

// ---------------------------------------------------------------------------
// Method registry

/// (name, one-line description) for `list-methods`.
pub fn method_catalog() -> &'static [(&'static str, &'static str)] {
    &[
        ("acvi", "interior-point ADMM with exact subproblem solves (beta, mu_init, delta, outers+inners or schedule, x_solver, y_solver)"),
        ("acvi_inexact", "interior-point ADMM with first-order subproblem solves (acvi keys + optimizer, steps, eta_x, eta_y)"),
        ("vacvi", "all-barrier variant: inequalities in the x-update, equalities by projection (beta, mu_init, delta, outers+inners or schedule)"),
        ("gda", "projected gradient descent-ascent (gamma, iterations)"),
        ("eg", "projected extragradient (gamma, iterations)"),
        ("ogda", "projected optimistic gradient descent-ascent (gamma, iterations)"),
        ("la", "Lookahead wrapper over gda/eg/ogda (gamma, iterations, k, alpha, base)"),
        ("fw", "Frank-Wolfe on the instantaneous gap (step_rule, c, nu, eps, iterations)"),
    ]
}

/// A method spec resolved against a budget: concrete solver configuration,
/// ready to execute.
#[derive(Debug, Clone)]
pub enum ResolvedMethod {
    Acvi(AcviConfig),
    AcviInexact(AcviConfig, InexactConfig),
    Vacvi(AcviConfig),
    Baseline {
        method: BaselineMethod,
        gamma: f64,
        iterations: usize,
    },
    Fw {
        gamma: FwGamma,
        iterations: usize,
        eps: f64,
    },
}

impl ResolvedMethod {
    pub fn label(&self) -> String {
        match self {
            ResolvedMethod::Acvi(_) => "acvi".to_string(),
            ResolvedMethod::AcviInexact(..) => "acvi_inexact".to_string(),
            ResolvedMethod::Vacvi(_) => "vacvi".to_string(),
            ResolvedMethod::Baseline { method, .. } => method.label(),
            ResolvedMethod::Fw { .. } => "fw".to_string(),
        }
    }

    /// Beta for the per-iteration descent metric; present only for the
    /// ADMM-style methods that carry dual variables.
    fn metric_beta(&self) -> Option<f64> {
        match self {
            ResolvedMethod::Acvi(cfg)
            | ResolvedMethod::AcviInexact(cfg, _)
            | ResolvedMethod::Vacvi(cfg) => Some(cfg.beta),
            _ => None,
        }
    }

    /// Whether the method tracks a separate y-iterate (consensus residual).
    fn emits_consensus(&self) -> bool {
        self.metric_beta().is_some()
    }

    /// Start points for the interior-point methods must be strictly
    /// feasible; projection methods project for themselves.
    fn needs_strict_start(&self) -> bool {
        self.metric_beta().is_some()
    }
}

fn require<T>(value: Option<T>, method: &str, key: &str) -> Result<T, ValidationError> {
    value.ok_or_else(|| {
        ValidationError::new(format!("method `{method}` requires hyperparameter `{key}`"))
    })
}

fn require_positive(value: f64, method: &str, key: &str) -> Result<f64, ValidationError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ValidationError::new(format!(
            "method `{method}`: `{key}` must be positive and finite, got {value}"
        )))
    }
}

fn reject_unused_method_keys(m: &MethodSpec, allowed: &[&str]) -> Result<(), ValidationError> {
    let declared = [
        ("beta", m.beta.is_some()),
        ("mu_init", m.mu_init.is_some()),
        ("delta", m.delta.is_some()),
        ("outers", m.outers.is_some()),
        ("inners", m.inners.is_some()),
        ("schedule", m.schedule.is_some()),
        ("x_solver", m.x_solver.is_some()),
        ("y_solver", m.y_solver.is_some()),
        ("optimizer", m.optimizer.is_some()),
        ("steps", m.steps.is_some()),
        ("eta_x", m.eta_x.is_some()),
        ("eta_y", m.eta_y.is_some()),
        ("gamma", m.gamma.is_some()),
        ("iterations", m.iterations.is_some()),
        ("k", m.k.is_some()),
        ("alpha", m.alpha.is_some()),
        ("base", m.base.is_some()),
        ("step_rule", m.step_rule.is_some()),
        ("c", m.c.is_some()),
        ("nu", m.nu.is_some()),
        ("eps", m.eps.is_some()),
    ];
    for (key, set) in declared {
        if set && !allowed.contains(&key) {
            return Err(ValidationError::new(format!(
                "method `{}` does not take hyperparameter `{key}`",
                m.name
            )));
        }
    }
    Ok(())
}

fn schedule_from(m: &MethodSpec) -> Result<InnerSchedule, ValidationError> {
    match (&m.schedule, m.outers, m.inners) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => Err(ValidationError::new(format!(
            "method `{}`: give either `schedule` or `outers`+`inners`, not both",
            m.name
        ))),
        (Some(s), None, None) => Ok(InnerSchedule::PerOuter(s.clone())),
        (None, outers, inners) => Ok(InnerSchedule::Constant {
            outers: require(outers, &m.name, "outers")?,
            inners: require(inners, &m.name, "inners")?,
        }),
    }
}

fn acvi_config_from(m: &MethodSpec) -> Result<AcviConfig, ValidationError> {
    let beta = require(m.beta, &m.name, "beta")?;
    let mu_init = require(m.mu_init, &m.name, "mu_init")?;
    let delta = require(m.delta, &m.name, "delta")?;
    let mut cfg = AcviConfig::new(beta, mu_init, delta, schedule_from(m)?);
    if let Some(mode) = &m.x_solver {
        cfg = cfg.with_x_solver(match mode.as_str() {
            "affine" => XSolverMode::AffineClosedForm,
            "newton" => XSolverMode::Newton,
            other => {
                return Err(ValidationError::new(format!(
                    "unknown x_solver `{other}`; expected `affine` or `newton`"
                )))
            }
        });
    }
    if let Some(mode) = &m.y_solver {
        cfg = cfg.with_y_solver(match mode.as_str() {
            "structural" => YSolverMode::StructuralClosedForm,
            "newton" => YSolverMode::DampedNewton,
            other => {
                return Err(ValidationError::new(format!(
                    "unknown y_solver `{other}`; expected `structural` or `newton`"
                )))
            }
        });
    }
    cfg.validate()
        .map_err(|e| ValidationError::new(format!("method `{}`: {e}", m.name)))?;
    Ok(cfg)
}

fn baseline_method_from(name: &str) -> Result<BaselineMethod, ValidationError> {
    match name {
        "gda" => Ok(BaselineMethod::Gda),
        "eg" => Ok(BaselineMethod::Eg),
        "ogda" => Ok(BaselineMethod::Ogda),
        other => Err(ValidationError::new(format!(
            "unknown base method `{other}`; expected `gda`, `eg`, or `ogda`"
        ))),
    }
}

/// Resolve a method spec to a runnable configuration. Iteration-count
/// defaults come from `budget.max_iters` for the methods that need an
/// explicit loop bound.
pub fn resolve_method(m: &MethodSpec, budget: &BudgetSpec) -> Result<ResolvedMethod, ValidationError> {
    let loop_bound = |explicit: Option<usize>| explicit.or(budget.max_iters).unwrap_or(usize::MAX);
    match m.name.as_str() {
        "acvi" => {
            reject_unused_method_keys(
                m,
                &["beta", "mu_init", "delta", "outers", "inners", "schedule", "x_solver", "y_solver"],
            )?;
            Ok(ResolvedMethod::Acvi(acvi_config_from(m)?))
        }
        "acvi_inexact" => {
            reject_unused_method_keys(
                m,
                &["beta", "mu_init", "delta", "outers", "inners", "schedule", "optimizer", "steps", "eta_x", "eta_y"],
            )?;
            let cfg = acvi_config_from(m)?;
            let optimizer = match m.optimizer.as_deref().unwrap_or("gda") {
                "gda" => InnerOptimizer::Gda,
                "eg" => InnerOptimizer::Eg,
                other => {
                    return Err(ValidationError::new(format!(
                        "unknown optimizer `{other}`; expected `gda` or `eg`"
                    )))
                }
            };
            let steps = require(m.steps, &m.name, "steps")?;
            if steps == 0 {
                return Err(ValidationError::new(
                    "method `acvi_inexact`: `steps` must be at least 1",
                ));
            }
            let inexact = InexactConfig {
                optimizer,
                steps,
                eta_x: require_positive(require(m.eta_x, &m.name, "eta_x")?, &m.name, "eta_x")?,
                eta_y: require_positive(require(m.eta_y, &m.name, "eta_y")?, &m.name, "eta_y")?,
            };
            Ok(ResolvedMethod::AcviInexact(cfg, inexact))
        }
        "vacvi" => {
            reject_unused_method_keys(m, &["beta", "mu_init", "delta", "outers", "inners", "schedule"])?;
            Ok(ResolvedMethod::Vacvi(acvi_config_from(m)?))
        }
        "gda" | "eg" | "ogda" => {
            reject_unused_method_keys(m, &["gamma", "iterations"])?;
            Ok(ResolvedMethod::Baseline {
                method: baseline_method_from(&m.name)?,
                gamma: require_positive(require(m.gamma, &m.name, "gamma")?, &m.name, "gamma")?,
                iterations: loop_bound(m.iterations),
            })
        }
        "la" => {
            reject_unused_method_keys(m, &["gamma", "iterations", "k", "alpha", "base"])?;
            let k = require(m.k, &m.name, "k")?;
            if k == 0 {
                return Err(ValidationError::new("method `la`: `k` must be at least 1"));
            }
            let alpha = require(m.alpha, &m.name, "alpha")?;
            if !(0.0..=1.0).contains(&alpha) {
                return Err(ValidationError::new(format!(
                    "method `la`: `alpha` must lie in [0, 1], got {alpha}"
                )));
            }
            let base = baseline_method_from(m.base.as_deref().unwrap_or("gda"))?;
            Ok(ResolvedMethod::Baseline {
                method: BaselineMethod::La {
                    k,
                    alpha,
                    base: Box::new(base),
                },
                gamma: require_positive(require(m.gamma, &m.name, "gamma")?, &m.name, "gamma")?,
                iterations: loop_bound(m.iterations),
            })
        }
        "fw" => {
            reject_unused_method_keys(m, &["step_rule", "c", "nu", "eps", "iterations"])?;
            let gamma = match m.step_rule.as_deref().unwrap_or("harmonic") {
                "harmonic" => {
                    if m.c.is_some() || m.nu.is_some() {
                        return Err(ValidationError::new(
                            "method `fw`: `c` and `nu` apply only to the adaptive step rule",
                        ));
                    }
                    FwGamma::Harmonic
                }
                "adaptive" => FwGamma::Adaptive {
                    c: require_positive(require(m.c, &m.name, "c")?, &m.name, "c")?,
                    nu: require_positive(require(m.nu, &m.name, "nu")?, &m.name, "nu")?,
                },
                other => {
                    return Err(ValidationError::new(format!(
                        "unknown step_rule `{other}`; expected `harmonic` or `adaptive`"
                    )))
                }
            };
            let eps = m.eps.unwrap_or(0.0);
            if !(eps >= 0.0) {
                return Err(ValidationError::new(format!(
                    "method `fw`: `eps` must be nonnegative, got {eps}"
                )));
            }
            Ok(ResolvedMethod::Fw {
                gamma,
                iterations: loop_bound(m.iterations),
                eps,
            })
        }
        other => Err(ValidationError::new(format!(
            "unknown method `{other}`; expected one of {}",
            method_catalog()
                .iter()
                .map(|(n, _)| format!("`{n}`"))
                .collect::<Vec<_>>()
                .join(", ")
        ))),
    }
}

// ---------------------------------------------------------------------------
// Run preparation and execution

/// Everything needed to execute one run: resolved method, external stopping
/// rules, the tracked metric, and an optional start point.
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub method: ResolvedMethod,
    pub control: RunControl,
    /// Metric used for summaries, plots, and threshold counting.
    pub metric: String,
    pub threshold: Option<f64>,
    pub start: Option<DVector<f64>>,
}

/// Resolve a method against a problem, budget, and stop rule, validating the
/// combination (stop metric supported, start point usable).
pub fn prepare_run(
    problem: &ProblemInstance,
    method_spec: &MethodSpec,
    budget: &BudgetSpec,
    stop: Option<&StopSpec>,
    start: Option<&[f64]>,
) -> Result<PreparedRun, ValidationError> {
    let method = resolve_method(method_spec, budget)?;

    let start = match start {
        None => None,
        Some(values) => {
            let n = problem.field.dim();
            if values.len() != n {
                return Err(ValidationError::new(format!(
                    "start point has length {}, problem `{}` has dimension {n}",
                    values.len(),
                    problem.name
                )));
            }
            let v = DVector::from_column_slice(values);
            if method.needs_strict_start() {
                if !problem
                    .constraints
                    .inequalities
                    .iter()
                    .all(|phi| phi.value(&v) < 0.0)
                {
                    return Err(ValidationError::new(format!(
                        "method `{}` needs a strictly feasible start point",
                        method.label()
                    )));
                }
                let eq = problem.constraints.equality_residual(&v);
                if eq > 1e-8 {
                    return Err(ValidationError::new(format!(
                        "start point violates the equality constraints (residual {eq:.3e})"
                    )));
                }
            }
            Some(v)
        }
    };

    if let Some(s) = stop {
        if !metric::CANONICAL_ORDER.contains(&s.metric.as_str()) {
            return Err(ValidationError::new(format!(
                "unknown stop metric `{}`; expected one of {}",
                s.metric,
                metric::CANONICAL_ORDER
                    .iter()
                    .map(|n| format!("`{n}`"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
        let ctx = MetricContext::for_problem(problem, method.metric_beta());
        let probe_y = method.emits_consensus().then(|| problem.interior_point.clone());
        let supported = ctx.compute(&problem.interior_point, probe_y.as_ref(), None, None);
        if !supported.contains_key(&s.metric) {
            return Err(ValidationError::new(format!(
                "problem `{}` with method `{}` does not produce metric `{}` (available: {})",
                problem.name,
                method.label(),
                s.metric,
                supported
                    .keys()
                    .map(|n| format!("`{n}`"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )));
        }
    }

    let control = RunControl {
        max_updates: budget.max_iters,
        max_wall_time_s: budget.max_wall_time_s,
        stop_metric: stop.map(|s| (s.metric.clone(), s.threshold)),
    };
    let metric_name = stop
        .map(|s| s.metric.clone())
        .unwrap_or_else(|| problem.default_metric.to_string());

    Ok(PreparedRun {
        method,
        control,
        metric: metric_name,
        threshold: stop.map(|s| s.threshold),
        start,
    })
}

impl PreparedRun {
    fn config_with_start(&self, cfg: &AcviConfig) -> AcviConfig {
        match &self.start {
            Some(v) => cfg.clone().with_start(v.iter().copied().collect()),
            None => cfg.clone(),
        }
    }

    pub fn execute(&self, problem: &ProblemInstance) -> Result<SolverTrace, SolverError> {
        match &self.method {
            ResolvedMethod::Acvi(cfg) => {
                acvi_run_controlled(problem, &self.config_with_start(cfg), &self.control)
            }
            ResolvedMethod::AcviInexact(cfg, inexact) => acvi_inexact_run_controlled(
                problem,
                &self.config_with_start(cfg),
                inexact,
                &self.control,
            ),
            ResolvedMethod::Vacvi(cfg) => {
                vacvi_run_controlled(problem, &self.config_with_start(cfg), &self.control)
            }
            ResolvedMethod::Baseline {
                method,
                gamma,
                iterations,
            } => run_baseline_controlled(
                problem,
                method,
                *gamma,
                *iterations,
                self.start.as_ref(),
                &self.control,
            ),
            ResolvedMethod::Fw {
                gamma,
                iterations,
                eps,
            } => fw_run_controlled(
                problem,
                *gamma,
                *iterations,
                *eps,
                self.start.as_ref(),
                &self.control,
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Single runs

/// Artifacts of a completed single run.
pub struct RunArtifacts {
    pub trace: SolverTrace,
    pub csv_path: PathBuf,
}

fn sidecar_path(csv: &std::path::Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".err.txt");
    csv.with_file_name(name)
}

fn write_or_io(path: &std::path::Path, text: &str) -> Result<(), HarnessError> {
    csvio::write_atomic(path, text).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run_and_write_csv(
    problem: &ProblemInstance,
    prepared: &PreparedRun,
    csv_path: &std::path::Path,
) -> Result<SolverTrace, HarnessError> {
    let trace = match prepared.execute(problem) {
        Ok(t) => t,
        Err(e) => {
            // Solver failures leave a sidecar naming the failing update.
            let _ = csvio::write_atomic(&sidecar_path(csv_path), &format!("{e}\n"));
            return Err(HarnessError::Solver(e));
        }
    };
    write_or_io(csv_path, &csvio::trace_to_csv(&trace))?;
    Ok(trace)
}

/// Execute a single-run spec: solve, then write the CSV and any optional
/// artifacts (SVG plot, JSON trace dump).
pub fn execute_run(spec: &ExperimentSpec) -> Result<RunArtifacts, HarnessError> {
    spec.validate_for_run()?;
    let problem = build_problem(&spec.problem, spec.run_seed)?;
    let prepared = prepare_run(
        &problem,
        spec.method.as_ref().expect("validated"),
        &spec.budget,
        spec.stop.as_ref(),
        spec.problem.start.as_deref(),
    )?;
    let csv_path = spec.outputs.csv.as_deref().expect("validated");
    let trace = run_and_write_csv(&problem, &prepared, csv_path)?;

    if let Some(dump) = &spec.outputs.trace_dump {
        let json = serde_json::to_string_pretty(&trace).expect("traces serialize to JSON");
        write_or_io(dump, &json)?;
    }

    if let Some(svg_path) = &spec.outputs.svg {
        let names = trace.metric_names();
        let chosen = match &spec.outputs.svg_metric {
            Some(name) => {
                if !names.contains(name) {
                    return Err(HarnessError::Validation(ValidationError::new(format!(
                        "svg_metric `{name}` is not produced by this run (available: {})",
                        names.join(", ")
                    ))));
                }
                Some(name.clone())
            }
            None => [prepared.metric.as_str(), problem.default_metric]
                .iter()
                .find(|n| names.iter().any(|have| have == *n))
                .map(|n| n.to_string())
                .or_else(|| names.first().cloned()),
        };
        let wall_x = match spec.outputs.svg_x.as_deref() {
            None | Some("iter") => false,
            Some("wall_time") => true,
            Some(other) => {
                return Err(HarnessError::Validation(ValidationError::new(format!(
                    "unknown svg_x `{other}`; expected `iter` or `wall_time`"
                ))))
            }
        };
        let series: Vec<PlotSeries> = chosen
            .iter()
            .map(|name| PlotSeries {
                label: trace.method.clone(),
                points: trace
                    .records
                    .iter()
                    .filter_map(|r| {
                        let x = if wall_x { r.wall_time_s } else { r.iter as f64 };
                        r.metrics.get(name).map(|&v| (x, v))
                    })
                    .collect(),
            })
            .collect();
        let y_label = chosen.as_deref().unwrap_or("metric");
        let x_label = if wall_x { "wall time (s)" } else { "iteration" };
        let title = format!("{} on {}", trace.method, problem.name);
        let svg = render_line_plot(&title, x_label, y_label, &series);
        write_or_io(svg_path, &svg)?;
    }

    Ok(RunArtifacts {
        trace,
        csv_path: csv_path.to_path_buf(),
    })
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepJob {
    axis_value: f64,
    label: String,
    problem: ProblemInstance,
    prepared: PreparedRun,
    csv_path: PathBuf,
}

struct SummaryRow {
    axis_value: f64,
    method: String,
    iters_to_threshold: Option<usize>,
    final_metric: f64,
    wall_time_s: f64,
    capped: bool,
}

/// Artifacts of a completed sweep.
pub struct SweepArtifacts {
    pub summary_csv: PathBuf,
    pub run_csvs: Vec<PathBuf>,
}

/// Worker count for sweeps: `CVI_SOLVE_THREADS` when set (must be a positive
/// integer), otherwise the machine's available parallelism.
pub fn sweep_threads() -> Result<usize, ValidationError> {
    match std::env::var("CVI_SOLVE_THREADS") {
        Ok(raw) => raw.trim().parse::<usize>().ok().filter(|&n| n >= 1).ok_or_else(|| {
            ValidationError::new(format!(
                "CVI_SOLVE_THREADS must be a positive integer, got `{raw}`"
            ))
        }),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn run_sweep_job(job: &SweepJob) -> Result<SummaryRow, HarnessError> {
    let trace = run_and_write_csv(&job.problem, &job.prepared, &job.csv_path)?;
    let iters = job
        .prepared
        .threshold
        .and_then(|th| trace.iters_to_threshold(&job.prepared.metric, th));
    let final_metric = trace
        .last()
        .metrics
        .get(&job.prepared.metric)
        .copied()
        .unwrap_or(f64::NAN);
    Ok(SummaryRow {
        axis_value: job.axis_value,
        method: job.label.clone(),
        iters_to_threshold: iters,
        final_metric,
        wall_time_s: trace.last().wall_time_s,
        capped: iters.is_none(),
    })
}

/// Execute a sweep spec on `threads` workers. Jobs are validated and their
/// problems constructed up front (serially, so validation errors surface
/// before any solving), then solved in parallel. Results land in a summary
/// CSV ordered by (axis value, method block); per-run CSVs are kept next to
/// it. The schedule never influences output content, so serial and parallel
/// sweeps write identical files apart from wall-clock columns.
pub fn execute_sweep(spec: &ExperimentSpec, threads: usize) -> Result<SweepArtifacts, HarnessError> {
    spec.validate_for_sweep()?;
    let sweep = spec.sweep.as_ref().expect("validated");
    let axis = SweepAxis::parse(&sweep.axis).expect("validated");

    let dir = sweep
        .summary_csv
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = sweep
        .summary_csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sweep".to_string());

    let mut jobs = Vec::new();
    for &value in &sweep.values {
        let mut problem_spec = spec.problem.clone();
        let mut budget = spec.budget.clone();
        let mut stop = spec.stop.clone();
        match axis {
            SweepAxis::Eta => problem_spec.eta = Some(value),
            SweepAxis::TimeBudget => budget.max_wall_time_s = Some(value),
            SweepAxis::ErrorThreshold => {
                stop.as_mut().expect("validated").threshold = value;
            }
        }
        let problem = build_problem(&problem_spec, spec.run_seed)?;
        for (mi, method_spec) in sweep.methods.iter().enumerate() {
            let prepared = prepare_run(
                &problem,
                method_spec,
                &budget,
                stop.as_ref(),
                problem_spec.start.as_deref(),
            )?;
            let label = prepared.method.label();
            let csv_path = dir.join(format!(
                "{stem}_{}_{}_m{}_{label}.csv",
                axis.label(),
                format_float(value),
                mi + 1
            ));
            jobs.push(SweepJob {
                axis_value: value,
                label,
                problem: problem.clone(),
                prepared,
                csv_path,
            });
        }
    }

    let worker_count = threads.max(1).min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<SummaryRow, HarnessError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..worker_count {
            s.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= jobs.len() {
                    break;
                }
                let outcome = run_sweep_job(&jobs[idx]);
                results.lock().expect("no panics while holding the lock")[idx] = Some(outcome);
            });
        }
    });

    let mut rows = Vec::with_capacity(jobs.len());
    for slot in results.into_inner().expect("workers joined") {
        match slot.expect("every job ran") {
            Ok(row) => rows.push(row),
            Err(e) => return Err(e),
        }
    }

    let mut text = String::from("axis_value,method,iters_to_threshold,final_metric,wall_time_s,capped\n");
    for row in &rows {
        let iters = row
            .iters_to_threshold
            .map(|i| i.to_string())
            .unwrap_or_else(|| "NaN".to_string());
        text.push_str(&format!(
            "{},{},{iters},{},{},{}\n",
            format_float(row.axis_value),
            row.method,
            format_float(row.final_metric),
            format_float(row.wall_time_s),
            row.capped
        ));
    }
    write_or_io(&sweep.summary_csv, &text)?;

    Ok(SweepArtifacts {
        summary_csv: sweep.summary_csv.clone(),
        run_csvs: jobs.into_iter().map(|j| j.csv_path).collect(),
    })
}
