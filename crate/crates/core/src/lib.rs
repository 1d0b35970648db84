//! Solvers for constrained variational inequalities: find x* in
//! C = {x : phi_i(x) <= 0, C x = d} with <x - x*, F(x*)> >= 0 for all x in C.
//!
//! The centerpiece is an interior-point ADMM scheme ([`acvi_run`]) that splits
//! the equality constraints from the inequalities: an x-subproblem restricted
//! to the affine set, a barrier-smoothed y-subproblem handling the
//! inequalities, and a dual ascent step tying them together, with the barrier
//! weight decaying geometrically across outer iterations. Variants cover an
//! all-barrier formulation ([`vacvi_run`]) and inexact first-order subproblem
//! solves ([`acvi_inexact_run`]). Projection baselines (GDA, extragradient,
//! optimistic GDA, Lookahead) and Frank-Wolfe round out the method set, and
//! [`problems`] ships a benchmark suite of seven constrained VI instances.

pub mod acvi;
pub mod baselines;
pub mod config;
pub mod constraints;
pub mod error;
pub mod fd;
pub mod field;
pub mod linops;
pub mod metrics;
pub mod problem;
pub mod problems;
pub mod rng;
pub mod trace;
pub mod vacvi;

pub use acvi::{acvi_inexact_run, acvi_inexact_run_controlled, acvi_run, acvi_run_controlled};
pub use baselines::{
    fw_run, fw_run_controlled, run_baseline, run_baseline_controlled, BaselineMethod, FwGamma,
    ProjectionOracle,
};
pub use config::{AcviConfig, InexactConfig, InnerOptimizer, InnerSchedule, XSolverMode, YSolverMode};
pub use constraints::{Block, ConstraintSpec, SmoothConvex, StructureTag};
pub use error::SolverError;
pub use field::VectorField;
pub use linops::EqualityProjector;
pub use problem::{validate_problem, ProblemInstance, ValidationReport};
pub use trace::{RunControl, SolverTrace, TraceRecord};
pub use vacvi::{vacvi_run, vacvi_run_controlled};
