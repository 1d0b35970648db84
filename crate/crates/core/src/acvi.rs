//! Interior-point ADMM for constrained variational inequalities.
//!
//! Each outer iteration shrinks the barrier weight mu; each inner iteration
//! performs an ADMM sweep on the augmented problem:
//!   x solves the projected root equation
//!     G(x) = x + (1/beta) P_c F(x) - P_c y_k + (1/beta) P_c lambda_k - d_c = 0,
//!   y minimizes -mu sum_i log(-phi_i(y)) + (beta/2) ||y - x_{k+1} - lambda_k/beta||^2,
//!   lambda_{k+1} = lambda_k + beta (x_{k+1} - y_{k+1}).
//! y and lambda carry over between outer iterations.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use thiserror::Error;

use crate::config::{
    AcviConfig, InexactConfig, InnerOptimizer, XSolverMode, YSolverMode, MU_FLOOR,
};
use crate::constraints::{ConstraintSpec, StructureTag};
use crate::error::SolverError;
use crate::field::VectorField;
use crate::linops::{
    damped_newton_root, EqualityProjector, NewtonError, NewtonOptions, MIN_BACKTRACK_STEP,
};
use crate::metrics::MetricContext;
use crate::problem::ProblemInstance;
use crate::trace::{RunClock, RunControl, SolverTrace, TraceRecord};

#[derive(Debug, Error)]
pub enum SubproblemError {
    #[error(transparent)]
    Newton(#[from] NewtonError),
    #[error("closed-form x-solver requires an affine operator")]
    AffineFieldRequired,
    #[error("x-subproblem linear system is singular")]
    SingularSystem,
    #[error("structural y-solver cannot handle this constraint structure")]
    UnsupportedStructure,
    #[error("warm start is not strictly feasible")]
    InfeasibleWarmStart,
}

/// Mutable solver state across iterations. lambda always equals its previous
/// value plus beta (x - y) of the same sweep.
#[derive(Clone, Debug)]
pub struct AcviState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub lambda: DVector<f64>,
    pub mu: f64,
    pub outer: usize,
    pub inner: usize,
}

// ---------------------------------------------------------------------------
// x-subproblem

/// G(x), the root function of the x-subproblem.
pub fn x_root_residual(
    field: &VectorField,
    proj: &EqualityProjector,
    x: &DVector<f64>,
    y_k: &DVector<f64>,
    lambda_k: &DVector<f64>,
    beta: f64,
) -> DVector<f64> {
    let inner = (field.eval(x) + lambda_k) / beta - y_k;
    x + proj.apply(&inner) - proj.d_c()
}

/// Factored linear system for affine operators: with F(x) = A x + b the root
/// equation is (I + (1/beta) P_c A) x = P_c (y - lambda/beta - b/beta) + d_c,
/// so the matrix can be factored once per run.
pub struct AffineXSystem {
    m: DMatrix<f64>,
    lu: LU<f64, Dyn, Dyn>,
    pc_b_over_beta: DVector<f64>,
    beta: f64,
}

impl AffineXSystem {
    pub fn prepare(
        field: &VectorField,
        proj: &EqualityProjector,
        beta: f64,
    ) -> Result<Self, SubproblemError> {
        let aff = field
            .affine_form()
            .ok_or(SubproblemError::AffineFieldRequired)?;
        let n = field.dim();
        let m = DMatrix::identity(n, n) + proj.apply_to_matrix(&aff.a) / beta;
        let lu = m.clone().lu();
        if !lu.is_invertible() {
            return Err(SubproblemError::SingularSystem);
        }
        let pc_b_over_beta = proj.apply(&aff.b) / beta;
        Ok(AffineXSystem {
            m,
            lu,
            pc_b_over_beta,
            beta,
        })
    }

    pub fn solve(
        &self,
        proj: &EqualityProjector,
        y_k: &DVector<f64>,
        lambda_k: &DVector<f64>,
        tol: f64,
    ) -> Result<DVector<f64>, SubproblemError> {
        let rhs = proj.apply(&(y_k - lambda_k / self.beta)) + proj.d_c() - &self.pc_b_over_beta;
        let mut x = self
            .lu
            .solve(&rhs)
            .ok_or(SubproblemError::SingularSystem)?;
        // One iterative-refinement pass when the direct solve is not tight.
        let r = &self.m * &x - &rhs;
        if r.amax() > 0.1 * tol {
            let corr = self.lu.solve(&r).ok_or(SubproblemError::SingularSystem)?;
            x -= corr;
        }
        Ok(x)
    }
}

/// One-off x-subproblem solve; `warm` seeds the iterative modes.
#[allow(clippy::too_many_arguments)]
pub fn solve_x_subproblem(
    field: &VectorField,
    proj: &EqualityProjector,
    y_k: &DVector<f64>,
    lambda_k: &DVector<f64>,
    beta: f64,
    mode: &XSolverMode,
    warm: &DVector<f64>,
    tol: f64,
) -> Result<DVector<f64>, SubproblemError> {
    match mode {
        XSolverMode::AffineClosedForm => {
            AffineXSystem::prepare(field, proj, beta)?.solve(proj, y_k, lambda_k, tol)
        }
        XSolverMode::Newton => solve_x_newton(field, proj, y_k, lambda_k, beta, warm, tol),
        XSolverMode::InnerFirstOrder {
            optimizer,
            steps,
            step_size,
        } => Ok(x_first_order_steps(
            field, proj, y_k, lambda_k, beta, warm, *optimizer, *steps, *step_size,
        )),
    }
}

fn solve_x_newton(
    field: &VectorField,
    proj: &EqualityProjector,
    y_k: &DVector<f64>,
    lambda_k: &DVector<f64>,
    beta: f64,
    warm: &DVector<f64>,
    tol: f64,
) -> Result<DVector<f64>, SubproblemError> {
    let residual = |x: &DVector<f64>| x_root_residual(field, proj, x, y_k, lambda_k, beta);
    let jacobian = |x: &DVector<f64>| {
        let jf = field.jacobian_or_fd(x);
        DMatrix::identity(field.dim(), field.dim()) + proj.apply_to_matrix(&jf) / beta
    };
    let opts = NewtonOptions {
        tol,
        ..NewtonOptions::default()
    };
    damped_newton_root(&residual, &jacobian, warm, None, &opts).map_err(Into::into)
}

#[allow(clippy::too_many_arguments)]
fn x_first_order_steps(
    field: &VectorField,
    proj: &EqualityProjector,
    y_k: &DVector<f64>,
    lambda_k: &DVector<f64>,
    beta: f64,
    warm: &DVector<f64>,
    optimizer: InnerOptimizer,
    steps: usize,
    eta: f64,
) -> DVector<f64> {
    let g = |x: &DVector<f64>| x_root_residual(field, proj, x, y_k, lambda_k, beta);
    let mut x = warm.clone();
    for _ in 0..steps {
        match optimizer {
            InnerOptimizer::Gda => {
                let gx = g(&x);
                x -= eta * gx;
            }
            InnerOptimizer::Eg => {
                let half = &x - eta * g(&x);
                let gh = g(&half);
                x -= eta * gh;
            }
        }
    }
    x
}

// ---------------------------------------------------------------------------
// y-subproblem

/// Barrier-prox objective -mu sum log(-phi_i(y)) + (beta/2) ||y - c||^2;
/// +inf outside the strict interior.
pub fn barrier_prox_value(
    cs: &ConstraintSpec,
    y: &DVector<f64>,
    c: &DVector<f64>,
    beta: f64,
    mu: f64,
) -> f64 {
    let mut barrier = 0.0;
    for phi in &cs.inequalities {
        let v = phi.value(y);
        if v >= 0.0 {
            return f64::INFINITY;
        }
        barrier -= mu * (-v).ln();
    }
    barrier + 0.5 * beta * (y - c).norm_squared()
}

/// Gradient of the barrier-prox objective: beta (y - c) - mu sum grad phi_i / phi_i.
pub fn barrier_prox_gradient(
    cs: &ConstraintSpec,
    y: &DVector<f64>,
    c: &DVector<f64>,
    beta: f64,
    mu: f64,
) -> DVector<f64> {
    let mut g = beta * (y - c);
    for phi in &cs.inequalities {
        g -= (mu / phi.value(y)) * phi.gradient(y);
    }
    g
}

/// Hessian of the barrier-prox objective:
/// beta I + mu sum (grad grad^T / phi^2 - H_phi / phi); positive definite on
/// the strict interior.
pub fn barrier_prox_hessian(
    cs: &ConstraintSpec,
    y: &DVector<f64>,
    beta: f64,
    mu: f64,
) -> DMatrix<f64> {
    let n = y.len();
    let mut h = beta * DMatrix::identity(n, n);
    for phi in &cs.inequalities {
        let v = phi.value(y);
        let g = phi.gradient(y);
        h += (mu / (v * v)) * &g * g.transpose();
        h -= (mu / v) * phi.hessian_or_fd(y);
    }
    h
}

/// Positive root of w^2 - t w - q = 0 (q > 0), in the form that avoids
/// cancellation for t < 0.
fn pos_root(t: f64, q: f64) -> f64 {
    let disc = (t * t + 4.0 * q).sqrt();
    if t >= 0.0 {
        0.5 * (t + disc)
    } else {
        2.0 * q / (disc - t)
    }
}

/// Safeguarded scalar Newton for an increasing g on (lo, hi) with
/// g(lo) < 0 < g(hi); `g` returns (value, slope). Endpoints are never
/// evaluated. The root is resolved to machine precision rather than to a
/// residual threshold: the prox roots feed KKT residual checks, and near the
/// constraint boundary a small scalar residual can still mean a large
/// gradient once divided by the barrier denominator.
fn monotone_scalar_root(g: &dyn Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64) -> f64 {
    let mut s = 0.5 * (lo + hi);
    for _ in 0..200 {
        let (val, slope) = g(s);
        if val == 0.0 {
            return s;
        }
        if val > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let mut next = if slope.is_finite() && slope > 0.0 {
            s - val / slope
        } else {
            f64::NAN
        };
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if next == s || (hi - lo) <= f64::EPSILON * lo.abs().max(hi.abs()) {
            return s;
        }
        s = next;
    }
    s
}

fn box_coordinate(c: f64, lower: f64, upper: f64, beta: f64, mu: f64) -> f64 {
    match (lower.is_finite(), upper.is_finite()) {
        (false, false) => c,
        (true, false) => lower + pos_root(c - lower, mu / beta),
        (false, true) => upper - pos_root(upper - c, mu / beta),
        (true, true) => {
            let g = |y: f64| {
                let wl = y - lower;
                let wu = upper - y;
                (
                    beta * (y - c) - mu / wl + mu / wu,
                    beta + mu / (wl * wl) + mu / (wu * wu),
                )
            };
            monotone_scalar_root(&g, lower, upper)
        }
    }
}

fn ball_prox(
    center: &DVector<f64>,
    radius: f64,
    c: &DVector<f64>,
    beta: f64,
    mu: f64,
) -> DVector<f64> {
    let q = c - center;
    let rho = q.norm();
    if rho == 0.0 {
        return center.clone();
    }
    // Stationarity reduces to the scalar equation
    //   f(s) = beta (s - 1)(s^2 rho^2 - r^2) - 2 mu s = 0
    // for y = center + s q, with the root in (0, min(1, r/rho)); f decreases
    // there, so the increasing helper gets -f.
    let smax = (radius / rho).min(1.0);
    let g = |s: f64| {
        let a = s * s * rho * rho - radius * radius;
        let f = beta * (s - 1.0) * a - 2.0 * mu * s;
        let df = beta * a + 2.0 * beta * s * rho * rho * (s - 1.0) - 2.0 * mu;
        (-f, -df)
    };
    let s = monotone_scalar_root(&g, 0.0, smax);
    center + s * q
}

/// Minimizes the barrier-prox objective for y given x_{k+1} and lambda_k.
/// With no inequalities the minimizer is exactly c = x_next + lambda_k/beta.
#[allow(clippy::too_many_arguments)]
pub fn solve_y_subproblem(
    cs: &ConstraintSpec,
    x_next: &DVector<f64>,
    lambda_k: &DVector<f64>,
    beta: f64,
    mu: f64,
    mode: &YSolverMode,
    warm: &DVector<f64>,
    tol: f64,
) -> Result<DVector<f64>, SubproblemError> {
    let c = x_next + lambda_k / beta;
    if cs.inequalities.is_empty() {
        return Ok(c);
    }
    match mode {
        YSolverMode::StructuralClosedForm => structural_y(cs, &c, beta, mu),
        YSolverMode::DampedNewton => {
            if !cs.strictly_feasible(warm) {
                return Err(SubproblemError::InfeasibleWarmStart);
            }
            let residual = |y: &DVector<f64>| barrier_prox_gradient(cs, y, &c, beta, mu);
            let jacobian = |y: &DVector<f64>| barrier_prox_hessian(cs, y, beta, mu);
            let guard = |y: &DVector<f64>| cs.strictly_feasible(y);
            let opts = NewtonOptions {
                tol,
                ..NewtonOptions::default()
            };
            damped_newton_root(&residual, &jacobian, warm, Some(&guard), &opts)
                .map_err(Into::into)
        }
    }
}

fn structural_y(
    cs: &ConstraintSpec,
    c: &DVector<f64>,
    beta: f64,
    mu: f64,
) -> Result<DVector<f64>, SubproblemError> {
    let q = mu / beta;
    match &cs.structure_tag {
        // Simplex blocks contribute only the orthant inequalities here; the
        // sum constraints are equalities handled by the x-subproblem.
        StructureTag::Orthant | StructureTag::Simplex { .. } => {
            Ok(DVector::from_fn(c.len(), |i, _| pos_root(c[i], q)))
        }
        StructureTag::ShiftedSimplex { .. } => {
            Ok(DVector::from_fn(c.len(), |i, _| {
                -1.0 + pos_root(c[i] + 1.0, q)
            }))
        }
        StructureTag::Box { lower, upper } => Ok(DVector::from_fn(c.len(), |i, _| {
            box_coordinate(c[i], lower[i], upper[i], beta, mu)
        })),
        StructureTag::EuclideanBall { center, radius } => {
            Ok(ball_prox(center, *radius, c, beta, mu))
        }
        StructureTag::General => Err(SubproblemError::UnsupportedStructure),
    }
}

// ---------------------------------------------------------------------------
// lambda update and run drivers

pub fn update_lambda(
    lambda_k: &DVector<f64>,
    x_next: &DVector<f64>,
    y_next: &DVector<f64>,
    beta: f64,
) -> DVector<f64> {
    lambda_k + beta * (x_next - y_next)
}

fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.as_slice().to_vec()
}

fn initial_record(
    ctx: &MetricContext,
    x: &DVector<f64>,
    y: &DVector<f64>,
    lambda: &DVector<f64>,
    clock: &RunClock,
) -> TraceRecord {
    TraceRecord {
        iter: 0,
        outer: 0,
        inner: 0,
        x: to_vec(x),
        y: Some(to_vec(y)),
        lambda: Some(to_vec(lambda)),
        wall_time_s: clock.elapsed_s(),
        metrics: ctx.compute(x, Some(y), None, None),
    }
}

struct InitState {
    x: DVector<f64>,
    y: DVector<f64>,
    lambda: DVector<f64>,
}

fn initial_state(problem: &ProblemInstance, config: &AcviConfig) -> InitState {
    let n = problem.field.dim();
    let y = match &config.y_init {
        Some(v) => DVector::from_vec(v.clone()),
        None => problem.interior_point.clone(),
    };
    let lambda = match &config.lambda_init {
        Some(v) => DVector::from_vec(v.clone()),
        None => DVector::zeros(n),
    };
    InitState {
        x: y.clone(),
        y,
        lambda,
    }
}

enum XDriver {
    Affine(AffineXSystem),
    Iterative,
}

/// How the two subproblems are carried out inside a run.
enum SweepKind<'a> {
    Exact,
    Inexact(&'a InexactConfig),
}

fn run_loop(
    problem: &ProblemInstance,
    config: &AcviConfig,
    control: &RunControl,
    sweep: SweepKind<'_>,
    method: &str,
    config_echo: String,
) -> Result<SolverTrace, SolverError> {
    config.validate()?;
    let cs = &problem.constraints;
    let proj = EqualityProjector::build(cs.eq_matrix.clone(), cs.eq_rhs.clone())?;
    let beta = config.beta;
    let tol = config.tol_subproblem;
    let init = initial_state(problem, config);
    let ctx = MetricContext::for_problem(problem, Some(beta));
    let clock = RunClock::start();
    let mut trace = SolverTrace::new(method, config_echo);
    trace
        .records
        .push(initial_record(&ctx, &init.x, &init.y, &init.lambda, &clock));

    let x_driver = match (&sweep, &config.x_solver) {
        (SweepKind::Exact, XSolverMode::AffineClosedForm) => XDriver::Affine(
            AffineXSystem::prepare(&problem.field, &proj, beta).map_err(|source| {
                SolverError::XSubproblem {
                    outer: 0,
                    inner: 0,
                    source,
                }
            })?,
        ),
        _ => XDriver::Iterative,
    };

    let mut state = AcviState {
        x: init.x,
        y: init.y,
        lambda: init.lambda,
        mu: config.mu_init,
        outer: 0,
        inner: 0,
    };
    let mut iter = 0usize;

    'outer_loop: for t in 0..config.schedule.outers() {
        state.outer = t;
        state.mu = (config.delta * state.mu).max(MU_FLOOR);
        for k in 0..config.schedule.inners_at(t) {
            if control.update_budget_exhausted(iter) {
                break 'outer_loop;
            }
            state.inner = k;
            let x_next = match &sweep {
                SweepKind::Exact => match &x_driver {
                    XDriver::Affine(sys) => sys.solve(&proj, &state.y, &state.lambda, tol),
                    XDriver::Iterative => solve_x_subproblem(
                        &problem.field,
                        &proj,
                        &state.y,
                        &state.lambda,
                        beta,
                        &config.x_solver,
                        &state.x,
                        tol,
                    ),
                },
                SweepKind::Inexact(inexact) => Ok(x_first_order_steps(
                    &problem.field,
                    &proj,
                    &state.y,
                    &state.lambda,
                    beta,
                    &state.x,
                    inexact.optimizer,
                    inexact.steps,
                    inexact.eta_x,
                )),
            }
            .map_err(|source| SolverError::XSubproblem {
                outer: t,
                inner: k,
                source,
            })?;

            let y_next = match &sweep {
                SweepKind::Exact => solve_y_subproblem(
                    cs,
                    &x_next,
                    &state.lambda,
                    beta,
                    state.mu,
                    &config.y_solver,
                    &state.y,
                    tol,
                ),
                SweepKind::Inexact(inexact) => Ok(y_first_order_steps(
                    cs,
                    &x_next,
                    &state.lambda,
                    beta,
                    state.mu,
                    &state.y,
                    inexact.steps,
                    inexact.eta_y,
                )),
            }
            .map_err(|source| SolverError::YSubproblem {
                outer: t,
                inner: k,
                source,
            })?;

            let lambda_next = update_lambda(&state.lambda, &x_next, &y_next, beta);
            iter += 1;
            let metrics = ctx.compute(
                &x_next,
                Some(&y_next),
                Some((&state.lambda, &state.y)),
                Some((&lambda_next, &y_next)),
            );
            let record = TraceRecord {
                iter,
                outer: t,
                inner: k + 1,
                x: to_vec(&x_next),
                y: Some(to_vec(&y_next)),
                lambda: Some(to_vec(&lambda_next)),
                wall_time_s: clock.elapsed_s(),
                metrics,
            };
            let stop = control.should_stop(&record);
            trace.records.push(record);
            state.x = x_next;
            state.y = y_next;
            state.lambda = lambda_next;
            if stop {
                break 'outer_loop;
            }
        }
    }
    Ok(trace)
}

/// Warm-started gradient descent on the barrier-prox objective with
/// strict-feasibility backtracking.
#[allow(clippy::too_many_arguments)]
fn y_first_order_steps(
    cs: &ConstraintSpec,
    x_next: &DVector<f64>,
    lambda_k: &DVector<f64>,
    beta: f64,
    mu: f64,
    warm: &DVector<f64>,
    steps: usize,
    eta: f64,
) -> DVector<f64> {
    let c = x_next + lambda_k / beta;
    if cs.inequalities.is_empty() {
        // Unconstrained quadratic: plain descent steps toward c.
        let mut y = warm.clone();
        for _ in 0..steps {
            y -= eta * beta * (&y - &c);
        }
        return y;
    }
    let mut y = warm.clone();
    for _ in 0..steps {
        let g = barrier_prox_gradient(cs, &y, &c, beta, mu);
        let base = barrier_prox_value(cs, &y, &c, beta, mu);
        let g2 = g.norm_squared();
        let mut s = eta;
        loop {
            let trial = &y - s * &g;
            if cs.strictly_feasible(&trial) {
                let v = barrier_prox_value(cs, &trial, &c, beta, mu);
                if v.is_finite() && v <= base - 1e-4 * s * g2 {
                    y = trial;
                    break;
                }
            }
            s *= 0.5;
            if s < MIN_BACKTRACK_STEP {
                break;
            }
        }
    }
    y
}

pub fn acvi_run(problem: &ProblemInstance, config: &AcviConfig) -> Result<SolverTrace, SolverError> {
    acvi_run_controlled(problem, config, &RunControl::unbounded())
}

pub fn acvi_run_controlled(
    problem: &ProblemInstance,
    config: &AcviConfig,
    control: &RunControl,
) -> Result<SolverTrace, SolverError> {
    let echo = serde_json::to_string(config).unwrap_or_default();
    run_loop(problem, config, control, SweepKind::Exact, "acvi", echo)
}

pub fn acvi_inexact_run(
    problem: &ProblemInstance,
    config: &AcviConfig,
    inexact: &InexactConfig,
) -> Result<SolverTrace, SolverError> {
    acvi_inexact_run_controlled(problem, config, inexact, &RunControl::unbounded())
}

pub fn acvi_inexact_run_controlled(
    problem: &ProblemInstance,
    config: &AcviConfig,
    inexact: &InexactConfig,
    control: &RunControl,
) -> Result<SolverTrace, SolverError> {
    let echo = serde_json::to_string(&(config, inexact)).unwrap_or_default();
    run_loop(
        problem,
        config,
        control,
        SweepKind::Inexact(inexact),
        "acvi_inexact",
        echo,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::ConstraintSpec;

    #[test]
    fn orthant_prox_closed_form_is_stationary() {
        // One-dimensional orthant with c = -1: y is tiny but positive and the
        // prox gradient vanishes.
        let cs = ConstraintSpec::orthant(1);
        let x_next = DVector::from_vec(vec![-1.0]);
        let lambda = DVector::zeros(1);
        let (beta, mu) = (1.0, 1e-6);
        let y = solve_y_subproblem(
            &cs,
            &x_next,
            &lambda,
            beta,
            mu,
            &YSolverMode::StructuralClosedForm,
            &DVector::from_vec(vec![0.5]),
            1e-12,
        )
        .unwrap();
        assert!(y[0] > 0.0);
        assert!((y[0] - 1e-6).abs() < 1e-8, "y = {}", y[0]);
        let c = &x_next + &lambda / beta;
        let g = barrier_prox_gradient(&cs, &y, &c, beta, mu);
        assert!(g.amax() < 1e-12);
    }

    #[test]
    fn y_without_inequalities_returns_prox_center() {
        let cs = ConstraintSpec::free(2);
        let x_next = DVector::from_vec(vec![1.0, 2.0]);
        let lambda = DVector::from_vec(vec![0.5, -0.5]);
        let beta = 0.5;
        let y = solve_y_subproblem(
            &cs,
            &x_next,
            &lambda,
            beta,
            1e-6,
            &YSolverMode::StructuralClosedForm,
            &DVector::zeros(2),
            1e-12,
        )
        .unwrap();
        assert_eq!(y, &x_next + &lambda / beta);
    }

    #[test]
    fn lambda_update_identity() {
        let lambda = DVector::from_vec(vec![0.1, -0.2]);
        let x = DVector::from_vec(vec![1.0, 1.0]);
        let y = DVector::from_vec(vec![0.5, 1.5]);
        let next = update_lambda(&lambda, &x, &y, 0.08);
        assert_eq!(next, &lambda + 0.08 * (&x - &y));
    }

    #[test]
    fn pos_root_stable_for_negative_shift() {
        // Root of w^2 - t w - q with t very negative: the naive formula
        // cancels; this one must stay positive and satisfy the equation.
        let t = -1e8;
        let q = 1e-12;
        let w = pos_root(t, q);
        assert!(w > 0.0);
        let residual = w * w - t * w - q;
        assert!(residual.abs() < 1e-18 * q.max(t * t));
    }
}
