//! Projection-based first-order baselines and Frank-Wolfe.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::constraints::{Block, ConstraintSpec, StructureTag};
use crate::error::SolverError;
use crate::field::VectorField;
use crate::metrics::MetricContext;
use crate::problem::ProblemInstance;
use crate::trace::{RunClock, RunControl, SolverTrace, TraceRecord};

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("greedy projection did not terminate within {cap} iterations (violation {violation:.3e})")]
    NonTerminating { cap: usize, violation: f64 },
    #[error("no projection oracle available: {0}")]
    Unsupported(&'static str),
}

/// Euclidean projection onto the benchmark constraint sets. The simplex
/// variants are exact per-block sort-and-threshold projections; greedy is the
/// approximate row-action scheme for general halfspace systems.
pub enum ProjectionOracle {
    Orthant,
    Box {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
    Ball {
        center: DVector<f64>,
        radius: f64,
    },
    /// Each block lives on {v >= 0, sum v = 1}.
    SimplexBlocks { blocks: Vec<Block> },
    /// Each block lives on {v >= -1, sum v = 0}.
    ShiftedSimplexBlocks { blocks: Vec<Block> },
    /// Halfspace system A x <= b attacked one most-violated row at a time;
    /// equality rows enter as opposing pairs.
    GreedyLinear {
        a: DMatrix<f64>,
        b: DVector<f64>,
        eps: f64,
    },
}

/// Default violation threshold for the greedy projection.
pub const GREEDY_EPS: f64 = 1e-8;

impl ProjectionOracle {
    /// Derives the oracle from a problem's constraint structure.
    pub fn from_constraints(cs: &ConstraintSpec) -> Result<Self, ProjectionError> {
        match &cs.structure_tag {
            StructureTag::Orthant => Ok(ProjectionOracle::Orthant),
            StructureTag::EuclideanBall { center, radius } => Ok(ProjectionOracle::Ball {
                center: center.clone(),
                radius: *radius,
            }),
            StructureTag::Simplex { blocks } => Ok(ProjectionOracle::SimplexBlocks {
                blocks: blocks.clone(),
            }),
            StructureTag::ShiftedSimplex { blocks } => Ok(ProjectionOracle::ShiftedSimplexBlocks {
                blocks: blocks.clone(),
            }),
            StructureTag::Box { lower, upper } => {
                if cs.num_equalities() == 0 {
                    Ok(ProjectionOracle::Box {
                        lower: lower.clone(),
                        upper: upper.clone(),
                    })
                } else {
                    // Box bounds become halfspace rows, and each equality row
                    // becomes an opposing pair, all handled greedily. Exact
                    // equality projection followed by greedy would not work:
                    // the box row actions drift off the equality set.
                    let n = cs.dim();
                    let mut rows = Vec::new();
                    let mut rhs = Vec::new();
                    for i in 0..n {
                        if upper[i].is_finite() {
                            let mut r = vec![0.0; n];
                            r[i] = 1.0;
                            rows.push(r);
                            rhs.push(upper[i]);
                        }
                        if lower[i].is_finite() {
                            let mut r = vec![0.0; n];
                            r[i] = -1.0;
                            rows.push(r);
                            rhs.push(-lower[i]);
                        }
                    }
                    for j in 0..cs.num_equalities() {
                        let row: Vec<f64> = cs.eq_matrix.row(j).iter().copied().collect();
                        rows.push(row.iter().map(|&t| -t).collect());
                        rhs.push(-cs.eq_rhs[j]);
                        rows.push(row);
                        rhs.push(cs.eq_rhs[j]);
                    }
                    let m = rows.len();
                    let flat: Vec<f64> = rows.into_iter().flatten().collect();
                    Ok(ProjectionOracle::GreedyLinear {
                        a: DMatrix::from_row_slice(m, n, &flat),
                        b: DVector::from_vec(rhs),
                        eps: GREEDY_EPS,
                    })
                }
            }
            StructureTag::General => Err(ProjectionError::Unsupported(
                "general constraint sets have no projection oracle",
            )),
        }
    }

    pub fn project(&self, v: &DVector<f64>) -> Result<DVector<f64>, ProjectionError> {
        match self {
            ProjectionOracle::Orthant => Ok(v.map(|t| t.max(0.0))),
            ProjectionOracle::Box { lower, upper } => Ok(DVector::from_fn(v.len(), |i, _| {
                v[i].max(lower[i]).min(upper[i])
            })),
            ProjectionOracle::Ball { center, radius } => {
                let diff = v - center;
                let norm = diff.norm();
                if norm <= *radius {
                    Ok(v.clone())
                } else {
                    Ok(center + (*radius / norm) * diff)
                }
            }
            ProjectionOracle::SimplexBlocks { blocks } => {
                let mut out = v.clone();
                for b in blocks {
                    let seg = simplex_project(&v.rows(b.start, b.len).into_owned(), 1.0);
                    out.rows_mut(b.start, b.len).copy_from(&seg);
                }
                Ok(out)
            }
            ProjectionOracle::ShiftedSimplexBlocks { blocks } => {
                let mut out = v.clone();
                for b in blocks {
                    // Shift to u = v + 1 >= 0 with sum u = len, project, shift back.
                    let shifted = v.rows(b.start, b.len).add_scalar(1.0);
                    let seg = simplex_project(&shifted, b.len as f64).add_scalar(-1.0);
                    out.rows_mut(b.start, b.len).copy_from(&seg);
                }
                Ok(out)
            }
            ProjectionOracle::GreedyLinear { a, b, eps } => {
                greedy_projection(a, b, v, *eps).map(|(theta, _)| theta)
            }
        }
    }

    /// Worst normalized constraint violation of v under this oracle's set
    /// description; zero means feasible.
    pub fn max_violation(&self, v: &DVector<f64>) -> f64 {
        match self {
            ProjectionOracle::Orthant => v.iter().fold(0.0f64, |m, &t| m.max(-t)),
            ProjectionOracle::Box { lower, upper } => v
                .iter()
                .enumerate()
                .fold(0.0f64, |m, (i, &t)| m.max(lower[i] - t).max(t - upper[i])),
            ProjectionOracle::Ball { center, radius } => {
                ((v - center).norm() - radius).max(0.0)
            }
            ProjectionOracle::SimplexBlocks { blocks } => {
                blocks.iter().fold(0.0f64, |m, b| {
                    let seg = v.rows(b.start, b.len);
                    let neg = seg.iter().fold(0.0f64, |acc, &t| acc.max(-t));
                    m.max(neg).max((seg.sum() - 1.0).abs())
                })
            }
            ProjectionOracle::ShiftedSimplexBlocks { blocks } => {
                blocks.iter().fold(0.0f64, |m, b| {
                    let seg = v.rows(b.start, b.len);
                    let neg = seg.iter().fold(0.0f64, |acc, &t| acc.max(-1.0 - t));
                    m.max(neg).max(seg.sum().abs())
                })
            }
            ProjectionOracle::GreedyLinear { a, b, .. } => max_normalized_violation(a, b, v),
        }
    }
}

/// Exact Euclidean projection onto {w >= 0, sum w = s} by sorting and
/// thresholding.
pub fn simplex_project(v: &DVector<f64>, s: f64) -> DVector<f64> {
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("no NaN in projection input"));
    let mut cumsum = 0.0;
    let mut tau = sorted[0] - s;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - s) / (j as f64 + 1.0);
        if u - t > 0.0 {
            tau = t;
        }
    }
    v.map(|t| (t - tau).max(0.0))
}

fn max_normalized_violation(a: &DMatrix<f64>, b: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.nrows() {
        let row = a.row(j);
        let slack = row.transpose().dot(v) - b[j];
        if slack > 0.0 {
            worst = worst.max(slack / row.norm());
        }
    }
    worst
}

/// Row-action projection onto {x : A x <= b}: repeatedly project onto the
/// most-violated halfspace until the worst normalized violation drops below
/// eps. Returns the point and the number of row steps taken.
pub fn greedy_projection(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    v: &DVector<f64>,
    eps: f64,
) -> Result<(DVector<f64>, usize), ProjectionError> {
    let m = a.nrows();
    let mut theta = v.clone();
    if m == 0 {
        return Ok((theta, 0));
    }
    let initial = max_normalized_violation(a, b, &theta);
    if initial <= eps {
        return Ok((theta, 0));
    }
    let cap = 10 * m * ((initial / eps).ln().ceil().max(1.0) as usize);
    let mut steps = 0;
    loop {
        let mut best_row = usize::MAX;
        let mut best_violation = 0.0;
        for j in 0..m {
            let slack = a.row(j).transpose().dot(&theta) - b[j];
            if slack > 0.0 {
                let nv = slack / a.row(j).norm();
                if nv > best_violation {
                    best_violation = nv;
                    best_row = j;
                }
            }
        }
        if best_row == usize::MAX || best_violation < eps {
            return Ok((theta, steps));
        }
        if steps >= cap {
            return Err(ProjectionError::NonTerminating {
                cap,
                violation: best_violation,
            });
        }
        let row = a.row(best_row).transpose();
        let slack = row.dot(&theta) - b[best_row];
        theta -= (slack / row.norm_squared()) * row;
        steps += 1;
    }
}

// ---------------------------------------------------------------------------
// Baseline steps

pub fn gda_step(
    field: &VectorField,
    oracle: &ProjectionOracle,
    x: &DVector<f64>,
    gamma: f64,
) -> Result<DVector<f64>, ProjectionError> {
    oracle.project(&(x - gamma * field.eval(x)))
}

/// Extragradient: evaluate at the projected half step, move from the anchor.
pub fn eg_step(
    field: &VectorField,
    oracle: &ProjectionOracle,
    x: &DVector<f64>,
    gamma: f64,
) -> Result<DVector<f64>, ProjectionError> {
    let half = oracle.project(&(x - gamma * field.eval(x)))?;
    oracle.project(&(x - gamma * field.eval(&half)))
}

/// Optimistic GDA memory: the previous operator evaluation. The first step
/// uses F(x_0) for both terms, reducing to a plain projected step.
#[derive(Clone, Debug, Default)]
pub struct OgdaState {
    prev_f: Option<DVector<f64>>,
}

pub fn ogda_step(
    field: &VectorField,
    oracle: &ProjectionOracle,
    x: &DVector<f64>,
    gamma: f64,
    state: &mut OgdaState,
) -> Result<DVector<f64>, ProjectionError> {
    let f_now = field.eval(x);
    // With no memory the two evaluations coincide and the update collapses to
    // a plain projected step; computing it that way keeps it exact.
    let target = match &state.prev_f {
        Some(f_prev) => x - 2.0 * gamma * &f_now + gamma * f_prev,
        None => x - gamma * &f_now,
    };
    let next = oracle.project(&target)?;
    state.prev_f = Some(f_now);
    Ok(next)
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub enum BaselineMethod {
    Gda,
    Eg,
    Ogda,
    /// Lookahead wrapper: run `k` base steps, then pull the anchor toward the
    /// fast iterate by `alpha`.
    La {
        k: usize,
        alpha: f64,
        base: Box<BaselineMethod>,
    },
}

impl BaselineMethod {
    pub fn label(&self) -> String {
        match self {
            BaselineMethod::Gda => "gda".to_string(),
            BaselineMethod::Eg => "eg".to_string(),
            BaselineMethod::Ogda => "ogda".to_string(),
            BaselineMethod::La { k, base, .. } => format!("la{}-{}", k, base.label()),
        }
    }
}

struct LaState {
    anchor: DVector<f64>,
    since_anchor: usize,
}

/// Feasibility slack used to decide whether a Lookahead combination needs
/// re-projection; convex combinations of feasible points only drift by
/// rounding, and skipping the redundant projection keeps alpha = 1 exactly
/// equivalent to the base method.
const LA_FEAS_TOL: f64 = 1e-9;

#[allow(clippy::too_many_arguments)]
fn baseline_step(
    method: &BaselineMethod,
    field: &VectorField,
    oracle: &ProjectionOracle,
    x: &DVector<f64>,
    gamma: f64,
    ogda: &mut OgdaState,
    la: &mut Option<LaState>,
) -> Result<DVector<f64>, ProjectionError> {
    match method {
        BaselineMethod::Gda => gda_step(field, oracle, x, gamma),
        BaselineMethod::Eg => eg_step(field, oracle, x, gamma),
        BaselineMethod::Ogda => ogda_step(field, oracle, x, gamma, ogda),
        BaselineMethod::La { k, alpha, base } => {
            let state = la.get_or_insert_with(|| LaState {
                anchor: x.clone(),
                since_anchor: 0,
            });
            let fast = baseline_step(base, field, oracle, x, gamma, ogda, &mut None)?;
            state.since_anchor += 1;
            if state.since_anchor < *k {
                return Ok(fast);
            }
            let mut pulled = (1.0 - alpha) * &state.anchor + *alpha * &fast;
            if oracle.max_violation(&pulled) > LA_FEAS_TOL {
                pulled = oracle.project(&pulled)?;
            }
            state.anchor = pulled.clone();
            state.since_anchor = 0;
            // The fast optimizer restarts from the pulled-back anchor.
            *ogda = OgdaState::default();
            Ok(pulled)
        }
    }
}

pub fn run_baseline(
    problem: &ProblemInstance,
    method: &BaselineMethod,
    gamma: f64,
    iterations: usize,
    start: Option<&DVector<f64>>,
) -> Result<SolverTrace, SolverError> {
    run_baseline_controlled(
        problem,
        method,
        gamma,
        iterations,
        start,
        &RunControl::unbounded(),
    )
}

pub fn run_baseline_controlled(
    problem: &ProblemInstance,
    method: &BaselineMethod,
    gamma: f64,
    iterations: usize,
    start: Option<&DVector<f64>>,
    control: &RunControl,
) -> Result<SolverTrace, SolverError> {
    let oracle = ProjectionOracle::from_constraints(&problem.constraints)?;
    let mut x = start.unwrap_or(&problem.interior_point).clone();
    if oracle.max_violation(&x) > LA_FEAS_TOL {
        x = oracle.project(&x)?;
    }
    let ctx = MetricContext::for_problem(problem, None);
    let clock = RunClock::start();
    let echo = serde_json::to_string(&(method, gamma, iterations)).unwrap_or_default();
    let mut trace = SolverTrace::new(method.label(), echo);
    trace.records.push(TraceRecord {
        iter: 0,
        outer: 0,
        inner: 0,
        x: x.as_slice().to_vec(),
        y: None,
        lambda: None,
        wall_time_s: clock.elapsed_s(),
        metrics: ctx.compute(&x, None, None, None),
    });
    let mut ogda = OgdaState::default();
    let mut la = None;
    for i in 0..iterations {
        if control.update_budget_exhausted(i) {
            break;
        }
        x = baseline_step(method, &problem.field, &oracle, &x, gamma, &mut ogda, &mut la)?;
        let record = TraceRecord {
            iter: i + 1,
            outer: 0,
            inner: i + 1,
            x: x.as_slice().to_vec(),
            y: None,
            lambda: None,
            wall_time_s: clock.elapsed_s(),
            metrics: ctx.compute(&x, None, None, None),
        };
        let stop = control.should_stop(&record);
        trace.records.push(record);
        if stop {
            break;
        }
    }
    Ok(trace)
}

// ---------------------------------------------------------------------------
// Frank-Wolfe

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub enum FwGamma {
    /// gamma_t = 2 / (2 + t).
    Harmonic,
    /// gamma_t = min(1, nu g_t / (2 c)) for curvature bound c and parameter nu.
    Adaptive { c: f64, nu: f64 },
}

/// Frank-Wolfe on the VI gap: moves toward the LMO point of F(z) and stops
/// once the instantaneous gap g_t = <z - s, F(z)> falls to eps.
pub fn fw_run(
    problem: &ProblemInstance,
    gamma: FwGamma,
    iterations: usize,
    eps: f64,
    start: Option<&DVector<f64>>,
) -> Result<SolverTrace, SolverError> {
    fw_run_controlled(
        problem,
        gamma,
        iterations,
        eps,
        start,
        &RunControl::unbounded(),
    )
}

pub fn fw_run_controlled(
    problem: &ProblemInstance,
    gamma: FwGamma,
    iterations: usize,
    eps: f64,
    start: Option<&DVector<f64>>,
    control: &RunControl,
) -> Result<SolverTrace, SolverError> {
    let lmo = problem.lmo.as_ref().ok_or(SolverError::MissingLmo)?;
    let mut z = start.unwrap_or(&problem.interior_point).clone();
    let ctx = MetricContext::for_problem(problem, None);
    let clock = RunClock::start();
    let echo = serde_json::to_string(&(&gamma, iterations, eps)).unwrap_or_default();
    let mut trace = SolverTrace::new("fw", echo);
    for t in 0..=iterations {
        let f = problem.field.eval(&z);
        let s = lmo(&f);
        let g = ctx.gap_from(&z, &f, &s);
        let mut metrics = ctx.compute(&z, None, None, None);
        metrics.insert(crate::trace::metric::GAP.to_string(), g);
        let record = TraceRecord {
            iter: t,
            outer: 0,
            inner: t,
            x: z.as_slice().to_vec(),
            y: None,
            lambda: None,
            wall_time_s: clock.elapsed_s(),
            metrics,
        };
        let stop = control.should_stop(&record);
        trace.records.push(record);
        if stop || g <= eps || t == iterations || control.update_budget_exhausted(t) {
            break;
        }
        let step = match gamma {
            FwGamma::Harmonic => 2.0 / (2.0 + t as f64),
            FwGamma::Adaptive { c, nu } => (nu * g / (2.0 * c)).min(1.0),
        };
        z = (1.0 - step) * z + step * s;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    #[test]
    fn orthant_projection_clamps() {
        let o = ProjectionOracle::Orthant;
        assert_eq!(
            o.project(&vec2(1.0, -2.0)).unwrap(),
            vec2(1.0, 0.0)
        );
    }

    #[test]
    fn simplex_projection_known_case() {
        // Projection of (1, 0.5) onto the standard simplex is (0.75, 0.25).
        let p = simplex_project(&vec2(1.0, 0.5), 1.0);
        assert!((p - vec2(0.75, 0.25)).amax() < 1e-14);
    }

    #[test]
    fn simplex_projection_interior_fixed_point() {
        let v = vec2(0.25, 0.75);
        let p = simplex_project(&v, 1.0);
        assert!((p - v).amax() < 1e-15);
    }

    #[test]
    fn shifted_simplex_projection_feasible() {
        let blocks = vec![Block { start: 0, len: 3 }];
        let o = ProjectionOracle::ShiftedSimplexBlocks { blocks };
        let v = DVector::from_vec(vec![3.0, -2.5, 0.2]);
        let p = o.project(&v).unwrap();
        assert!(p.sum().abs() < 1e-12);
        assert!(p.iter().all(|&t| t >= -1.0 - 1e-12));
    }

    #[test]
    fn ball_projection_radial() {
        let o = ProjectionOracle::Ball {
            center: vec2(0.0, 0.0),
            radius: 2.0,
        };
        let p = o.project(&vec2(3.0, 4.0)).unwrap();
        assert!((p.norm() - 2.0).abs() < 1e-14);
        assert!((p - vec2(1.2, 1.6)).amax() < 1e-14);
        let inside = vec2(0.5, 0.5);
        assert_eq!(o.project(&inside).unwrap(), inside);
    }

    #[test]
    fn greedy_projection_single_halfspace_exact() {
        // One halfspace x0 + x1 <= 1: greedy is the exact projection.
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_vec(vec![1.0]);
        let (theta, steps) = greedy_projection(&a, &b, &vec2(2.0, 2.0), 1e-10).unwrap();
        assert_eq!(steps, 1);
        assert!((theta - vec2(0.5, 0.5)).amax() < 1e-12);
    }

    #[test]
    fn ogda_first_step_matches_gda() {
        let a = DMatrix::from_row_slice(2, 2, &[0.1, 1.0, -1.0, 0.1]);
        let field = VectorField::affine(a, DVector::zeros(2));
        let oracle = ProjectionOracle::Orthant;
        let x = vec2(1.0, 1.0);
        let mut state = OgdaState::default();
        let og = ogda_step(&field, &oracle, &x, 0.1, &mut state).unwrap();
        let gd = gda_step(&field, &oracle, &x, 0.1).unwrap();
        assert_eq!(og, gd);
        assert!(state.prev_f.is_some());
    }
}
