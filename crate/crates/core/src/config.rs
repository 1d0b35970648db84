//! Solver configuration types.

use serde::Serialize;
use thiserror::Error;

/// Barrier weight floor; mu is clamped here instead of underflowing to zero.
pub const MU_FLOOR: f64 = 1e-300;

/// Default subproblem tolerance (inf-norm of the stationarity residual).
pub const DEFAULT_TOL_SUBPROBLEM: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("beta must be positive, got {0}")]
    BadBeta(f64),
    #[error("mu_init must be positive, got {0}")]
    BadMu(f64),
    #[error("delta must lie in (0, 1), got {0}")]
    BadDelta(f64),
    #[error("tol_subproblem must be positive, got {0}")]
    BadTol(f64),
    #[error("schedule has no outer iterations")]
    EmptySchedule,
    #[error("inner first-order solver needs at least one step")]
    NoInnerSteps,
}

/// Inner-iteration counts per outer iteration.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub enum InnerSchedule {
    Constant { outers: usize, inners: usize },
    PerOuter(Vec<usize>),
}

impl InnerSchedule {
    pub fn outers(&self) -> usize {
        match self {
            InnerSchedule::Constant { outers, .. } => *outers,
            InnerSchedule::PerOuter(v) => v.len(),
        }
    }

    pub fn inners_at(&self, t: usize) -> usize {
        match self {
            InnerSchedule::Constant { inners, .. } => *inners,
            InnerSchedule::PerOuter(v) => v[t],
        }
    }

    pub fn total_updates(&self) -> usize {
        match self {
            InnerSchedule::Constant { outers, inners } => outers * inners,
            InnerSchedule::PerOuter(v) => v.iter().sum(),
        }
    }

    /// The 2D reference schedule: 19 single-update outers, then one outer
    /// with 31 inner iterations (50 updates).
    pub fn reference_2d() -> Self {
        let mut v = vec![1; 19];
        v.push(31);
        InnerSchedule::PerOuter(v)
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum InnerOptimizer {
    Gda,
    Eg,
}

/// How the x-subproblem (the projected root equation in x) is solved.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub enum XSolverMode {
    /// Direct solve of (I + (1/beta) P_c A) x = rhs; requires an affine field.
    AffineClosedForm,
    /// Damped Newton on the root equation.
    Newton,
    /// Fixed number of first-order steps on the root operator; no tolerance
    /// guarantee.
    InnerFirstOrder {
        optimizer: InnerOptimizer,
        steps: usize,
        step_size: f64,
    },
}

/// How the barrier-prox y-subproblem is solved.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum YSolverMode {
    /// Exploits the structure tag (orthant / box / ball / simplex bounds).
    StructuralClosedForm,
    /// Damped Newton on the prox gradient with a strict-feasibility guard.
    DampedNewton,
}

#[derive(Clone, Debug, Serialize)]
pub struct AcviConfig {
    pub beta: f64,
    /// mu_{-1}: the first outer iteration uses delta * mu_init.
    pub mu_init: f64,
    pub delta: f64,
    pub schedule: InnerSchedule,
    pub x_solver: XSolverMode,
    pub y_solver: YSolverMode,
    pub tol_subproblem: f64,
    /// Defaults to zero.
    pub lambda_init: Option<Vec<f64>>,
    /// Defaults to the problem's interior point.
    pub y_init: Option<Vec<f64>>,
}

impl AcviConfig {
    pub fn new(beta: f64, mu_init: f64, delta: f64, schedule: InnerSchedule) -> Self {
        AcviConfig {
            beta,
            mu_init,
            delta,
            schedule,
            x_solver: XSolverMode::Newton,
            y_solver: YSolverMode::StructuralClosedForm,
            tol_subproblem: DEFAULT_TOL_SUBPROBLEM,
            lambda_init: None,
            y_init: None,
        }
    }

    pub fn with_x_solver(mut self, mode: XSolverMode) -> Self {
        self.x_solver = mode;
        self
    }

    pub fn with_y_solver(mut self, mode: YSolverMode) -> Self {
        self.y_solver = mode;
        self
    }

    pub fn with_start(mut self, y0: Vec<f64>) -> Self {
        self.y_init = Some(y0);
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.beta > 0.0) {
            return Err(ConfigError::BadBeta(self.beta));
        }
        if !(self.mu_init > 0.0) {
            return Err(ConfigError::BadMu(self.mu_init));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(ConfigError::BadDelta(self.delta));
        }
        if !(self.tol_subproblem > 0.0) {
            return Err(ConfigError::BadTol(self.tol_subproblem));
        }
        if self.schedule.outers() == 0 {
            return Err(ConfigError::EmptySchedule);
        }
        if let XSolverMode::InnerFirstOrder { steps, .. } = &self.x_solver {
            if *steps == 0 {
                return Err(ConfigError::NoInnerSteps);
            }
        }
        Ok(())
    }
}

/// Inexact-variant parameters: both subproblems get `steps` warm-started
/// first-order updates instead of exact solves.
#[derive(Clone, Debug, Serialize)]
pub struct InexactConfig {
    pub optimizer: InnerOptimizer,
    pub steps: usize,
    pub eta_x: f64,
    pub eta_y: f64,
}
