//! Barrier-first variant: the x-subproblem absorbs the inequality barrier and
//! stays strictly inside the inequality set, while the y-subproblem becomes
//! an exact affine projection onto the equalities.
//!
//! Per sweep:
//!   x solves x - y_k + (1/beta)(F(x) + lambda_k)
//!             - (mu/beta) sum_i grad phi_i(x) / phi_i(x) = 0,
//!   y_{k+1} = P_c (x_{k+1} + lambda_k / beta) + d_c,
//!   lambda_{k+1} = lambda_k + beta (x_{k+1} - y_{k+1}).

use nalgebra::{DMatrix, DVector};

use crate::acvi::{update_lambda, SubproblemError};
use crate::config::{AcviConfig, MU_FLOOR};
use crate::constraints::ConstraintSpec;
use crate::error::SolverError;
use crate::field::VectorField;
use crate::linops::{damped_newton_root, EqualityProjector, NewtonOptions};
use crate::metrics::MetricContext;
use crate::problem::ProblemInstance;
use crate::trace::{RunClock, RunControl, SolverTrace, TraceRecord};

/// Residual of the barrier x-subproblem.
pub fn barrier_x_residual(
    field: &VectorField,
    cs: &ConstraintSpec,
    x: &DVector<f64>,
    y_k: &DVector<f64>,
    lambda_k: &DVector<f64>,
    beta: f64,
    mu: f64,
) -> DVector<f64> {
    let mut r = x - y_k + (field.eval(x) + lambda_k) / beta;
    for phi in &cs.inequalities {
        r -= (mu / beta / phi.value(x)) * phi.gradient(x);
    }
    r
}

fn barrier_x_jacobian(
    field: &VectorField,
    cs: &ConstraintSpec,
    x: &DVector<f64>,
    beta: f64,
    mu: f64,
) -> DMatrix<f64> {
    let n = x.len();
    let mut j = DMatrix::identity(n, n) + field.jacobian_or_fd(x) / beta;
    for phi in &cs.inequalities {
        let v = phi.value(x);
        let g = phi.gradient(x);
        j += (mu / beta / (v * v)) * &g * g.transpose();
        j -= (mu / beta / v) * phi.hessian_or_fd(x);
    }
    j
}

/// Damped Newton on the barrier residual; every iterate stays strictly
/// inside the inequality set. `warm` must be strictly feasible.
pub fn solve_x_barrier(
    field: &VectorField,
    cs: &ConstraintSpec,
    y_k: &DVector<f64>,
    lambda_k: &DVector<f64>,
    beta: f64,
    mu: f64,
    warm: &DVector<f64>,
    tol: f64,
) -> Result<DVector<f64>, SubproblemError> {
    let opts = NewtonOptions {
        tol,
        ..NewtonOptions::default()
    };
    if cs.inequalities.is_empty() {
        let residual = |x: &DVector<f64>| barrier_x_residual(field, cs, x, y_k, lambda_k, beta, mu);
        let jacobian = |x: &DVector<f64>| barrier_x_jacobian(field, cs, x, beta, mu);
        return damped_newton_root(&residual, &jacobian, warm, None, &opts).map_err(Into::into);
    }
    if !cs.strictly_feasible(warm) {
        return Err(SubproblemError::InfeasibleWarmStart);
    }
    let residual = |x: &DVector<f64>| barrier_x_residual(field, cs, x, y_k, lambda_k, beta, mu);
    let jacobian = |x: &DVector<f64>| barrier_x_jacobian(field, cs, x, beta, mu);
    let guard = |x: &DVector<f64>| cs.strictly_feasible(x);
    damped_newton_root(&residual, &jacobian, warm, Some(&guard), &opts).map_err(Into::into)
}

pub fn vacvi_run(
    problem: &ProblemInstance,
    config: &AcviConfig,
) -> Result<SolverTrace, SolverError> {
    vacvi_run_controlled(problem, config, &RunControl::unbounded())
}

/// Same outer/inner schedule and carry-over semantics as `acvi_run`; only the
/// subproblem split differs. The x/y solver mode fields of the config are
/// ignored (x is always the guarded Newton, y the exact projection).
pub fn vacvi_run_controlled(
    problem: &ProblemInstance,
    config: &AcviConfig,
    control: &RunControl,
) -> Result<SolverTrace, SolverError> {
    config.validate()?;
    let cs = &problem.constraints;
    let proj = EqualityProjector::build(cs.eq_matrix.clone(), cs.eq_rhs.clone())?;
    let beta = config.beta;
    let tol = config.tol_subproblem;
    let n = problem.field.dim();

    let y0 = match &config.y_init {
        Some(v) => DVector::from_vec(v.clone()),
        None => problem.interior_point.clone(),
    };
    let lambda0 = match &config.lambda_init {
        Some(v) => DVector::from_vec(v.clone()),
        None => DVector::zeros(n),
    };
    // The first barrier solve needs a strictly feasible warm start even when
    // the y override is not interior.
    let mut x = if cs.inequalities.is_empty() || cs.strictly_feasible(&y0) {
        y0.clone()
    } else {
        problem.interior_point.clone()
    };
    let mut y = y0;
    let mut lambda = lambda0;

    let ctx = MetricContext::for_problem(problem, Some(beta));
    let clock = RunClock::start();
    let echo = serde_json::to_string(config).unwrap_or_default();
    let mut trace = SolverTrace::new("vacvi", echo);
    trace.records.push(TraceRecord {
        iter: 0,
        outer: 0,
        inner: 0,
        x: x.as_slice().to_vec(),
        y: Some(y.as_slice().to_vec()),
        lambda: Some(lambda.as_slice().to_vec()),
        wall_time_s: clock.elapsed_s(),
        metrics: ctx.compute(&x, Some(&y), None, None),
    });

    let mut mu = config.mu_init;
    let mut iter = 0usize;
    'outer_loop: for t in 0..config.schedule.outers() {
        mu = (config.delta * mu).max(MU_FLOOR);
        for k in 0..config.schedule.inners_at(t) {
            if control.update_budget_exhausted(iter) {
                break 'outer_loop;
            }
            let x_next = solve_x_barrier(&problem.field, cs, &y, &lambda, beta, mu, &x, tol)
                .map_err(|source| SolverError::XSubproblem {
                    outer: t,
                    inner: k,
                    source,
                })?;
            let y_next = proj.affine_project(&(&x_next + &lambda / beta));
            let lambda_next = update_lambda(&lambda, &x_next, &y_next, beta);
            iter += 1;
            let metrics = ctx.compute(
                &x_next,
                Some(&y_next),
                Some((&lambda, &y)),
                Some((&lambda_next, &y_next)),
            );
            let record = TraceRecord {
                iter,
                outer: t,
                inner: k + 1,
                x: x_next.as_slice().to_vec(),
                y: Some(y_next.as_slice().to_vec()),
                lambda: Some(lambda_next.as_slice().to_vec()),
                wall_time_s: clock.elapsed_s(),
                metrics,
            };
            let stop = control.should_stop(&record);
            trace.records.push(record);
            x = x_next;
            y = y_next;
            lambda = lambda_next;
            if stop {
                break 'outer_loop;
            }
        }
    }
    Ok(trace)
}
