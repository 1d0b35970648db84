//! Linear-algebra operators shared by the solvers: the orthogonal projector
//! onto the affine set {x : C x = d} and a damped Newton root finder.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

/// Above this dimension the n x n projector matrix is not materialized and
/// applications go through the rank-p correction instead.
pub const DENSE_PROJECTOR_LIMIT: usize = 2000;

/// Smallest backtracking step accepted before a Newton step is declared
/// stalled: 2^-30.
pub const MIN_BACKTRACK_STEP: f64 = 9.313225746154785e-10;

/// Minimum accepted ratio between the smallest and largest Cholesky pivot of
/// C C^T; below this the equality rows are treated as rank deficient.
pub const RANK_PIVOT_RATIO: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum LinopsError {
    #[error("equality matrix is rank deficient: Cholesky of C C^T failed (p = {p})")]
    RankDeficient { p: usize },
}

#[derive(Debug, Error)]
pub enum NewtonError {
    #[error("newton: residual {residual:.3e} above tolerance {tol:.3e} after {iters} iterations")]
    MaxIterationsExceeded {
        iters: usize,
        tol: f64,
        residual: f64,
    },
    #[error("newton: singular Jacobian at iteration {iter}")]
    SingularJacobian { iter: usize },
}

/// Orthogonal projector onto {x : C x = d}: P_c = I - C^T (C C^T)^-1 C and
/// offset d_c = C^T (C C^T)^-1 d, so the projection of v is P_c v + d_c.
/// With p = 0 the projector is the identity and d_c = 0.
#[derive(Clone, Debug)]
pub struct EqualityProjector {
    n: usize,
    c: DMatrix<f64>,
    d: DVector<f64>,
    chol: Option<Cholesky<f64, Dyn>>,
    dense: Option<DMatrix<f64>>,
    d_c: DVector<f64>,
}

impl EqualityProjector {
    pub fn build(c: DMatrix<f64>, d: DVector<f64>) -> Result<Self, LinopsError> {
        Self::build_with_limit(c, d, DENSE_PROJECTOR_LIMIT)
    }

    /// `dense_limit` controls when the n x n projector is materialized; the
    /// implicit path is exercised by passing 0.
    pub fn build_with_limit(
        c: DMatrix<f64>,
        d: DVector<f64>,
        dense_limit: usize,
    ) -> Result<Self, LinopsError> {
        let p = c.nrows();
        let n = c.ncols();
        assert_eq!(d.len(), p, "equality rhs length must match row count");
        if p == 0 {
            return Ok(EqualityProjector {
                n,
                c,
                d,
                chol: None,
                dense: None,
                d_c: DVector::zeros(n),
            });
        }
        let cct = &c * c.transpose();
        let chol = Cholesky::new(cct).ok_or(LinopsError::RankDeficient { p })?;
        // Rounding can let the factorization of a singular C C^T slip through
        // with a tiny trailing pivot; reject those by pivot ratio (the L
        // diagonal scales like the singular values of C).
        let ldiag = chol.l_dirty().diagonal();
        let dmax = ldiag.amax();
        let dmin = ldiag.iter().copied().fold(f64::INFINITY, f64::min);
        if !(dmin > RANK_PIVOT_RATIO * dmax) {
            return Err(LinopsError::RankDeficient { p });
        }
        let d_c = c.transpose() * chol.solve(&d);
        let dense = if n <= dense_limit {
            let x = chol.solve(&c); // (C C^T)^-1 C, p x n
            Some(DMatrix::identity(n, n) - c.transpose() * x)
        } else {
            None
        };
        Ok(EqualityProjector {
            n,
            c,
            d,
            chol: Some(chol),
            dense,
            d_c,
        })
    }

    /// Projector for an unconstrained problem (P_c = I, d_c = 0).
    pub fn identity(n: usize) -> Self {
        EqualityProjector {
            n,
            c: DMatrix::zeros(0, n),
            d: DVector::zeros(0),
            chol: None,
            dense: None,
            d_c: DVector::zeros(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn num_equalities(&self) -> usize {
        self.c.nrows()
    }

    pub fn has_equalities(&self) -> bool {
        self.num_equalities() > 0
    }

    pub fn d_c(&self) -> &DVector<f64> {
        &self.d_c
    }

    /// P_c v (linear part only).
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(v.len(), self.n);
        match (&self.dense, &self.chol) {
            (Some(pc), _) => pc * v,
            (None, Some(chol)) => v - self.c.transpose() * chol.solve(&(&self.c * v)),
            (None, None) => v.clone(),
        }
    }

    /// P_c v + d_c, the Euclidean projection of v onto {x : C x = d}.
    pub fn affine_project(&self, v: &DVector<f64>) -> DVector<f64> {
        self.apply(v) + &self.d_c
    }

    /// P_c M through the rank-p correction M - C^T ((C C^T)^-1 (C M)); never
    /// forms an n x n product against the dense projector.
    pub fn apply_to_matrix(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        debug_assert_eq!(m.nrows(), self.n);
        match &self.chol {
            Some(chol) => m - self.c.transpose() * chol.solve(&(&self.c * m)),
            None => m.clone(),
        }
    }

    /// Materialized P_c (computed on demand when not stored).
    pub fn dense_projector(&self) -> DMatrix<f64> {
        if let Some(pc) = &self.dense {
            return pc.clone();
        }
        match &self.chol {
            Some(chol) => {
                let x = chol.solve(&self.c);
                DMatrix::identity(self.n, self.n) - self.c.transpose() * x
            }
            None => DMatrix::identity(self.n, self.n),
        }
    }

    /// ||C v - d||_inf, zero when p = 0.
    pub fn equality_residual(&self, v: &DVector<f64>) -> f64 {
        if !self.has_equalities() {
            return 0.0;
        }
        (&self.c * v - &self.d).amax()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Convergence is ||residual||_inf <= tol.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iters: 100,
        }
    }
}

/// Damped Newton on residual(x) = 0 with Armijo-style backtracking on the
/// residual norm (halving factor, floor `MIN_BACKTRACK_STEP`). When `guard`
/// is given, trial points must satisfy it before the residual is evaluated
/// there; `x0` itself must satisfy the guard.
pub fn damped_newton_root(
    residual: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    jacobian: &dyn Fn(&DVector<f64>) -> DMatrix<f64>,
    x0: &DVector<f64>,
    guard: Option<&dyn Fn(&DVector<f64>) -> bool>,
    opts: &NewtonOptions,
) -> Result<DVector<f64>, NewtonError> {
    if let Some(g) = guard {
        assert!(g(x0), "newton warm start violates the feasibility guard");
    }
    let mut x = x0.clone();
    let mut r = residual(&x);
    let mut rnorm = r.norm();
    for iter in 0..opts.max_iters {
        if r.amax() <= opts.tol {
            return Ok(x);
        }
        let j = jacobian(&x);
        let step = j
            .lu()
            .solve(&(-&r))
            .ok_or(NewtonError::SingularJacobian { iter })?;
        let mut s = 1.0;
        loop {
            let trial = &x + s * &step;
            if guard.is_none_or(|g| g(&trial)) {
                let rt = residual(&trial);
                let nt = rt.norm();
                // NaN/inf residuals fail both tests and shrink the step.
                if nt.is_finite() && (nt <= (1.0 - 1e-4 * s) * rnorm || rt.amax() <= opts.tol) {
                    x = trial;
                    r = rt;
                    rnorm = nt;
                    break;
                }
            }
            s *= 0.5;
            if s < MIN_BACKTRACK_STEP {
                return Err(NewtonError::MaxIterationsExceeded {
                    iters: iter,
                    tol: opts.tol,
                    residual: r.amax(),
                });
            }
        }
    }
    if r.amax() <= opts.tol {
        Ok(x)
    } else {
        Err(NewtonError::MaxIterationsExceeded {
            iters: opts.max_iters,
            tol: opts.tol,
            residual: r.amax(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projector_single_row() {
        // C = [1 1], d = 1: P_c = [[0.5, -0.5], [-0.5, 0.5]], d_c = (0.5, 0.5).
        let c = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let d = DVector::from_vec(vec![1.0]);
        let proj = EqualityProjector::build(c, d).unwrap();
        let pc = proj.dense_projector();
        let expect = DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]);
        assert!((pc - expect).amax() < 1e-14);
        assert!((proj.d_c() - DVector::from_vec(vec![0.5, 0.5])).amax() < 1e-14);
    }

    #[test]
    fn projector_identity_when_no_equalities() {
        let proj = EqualityProjector::build(DMatrix::zeros(0, 3), DVector::zeros(0)).unwrap();
        assert!(!proj.has_equalities());
        let v = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        assert_eq!(proj.apply(&v), v);
        assert_eq!(proj.affine_project(&v), v);
        assert_eq!(proj.dense_projector(), DMatrix::identity(3, 3));
    }

    #[test]
    fn rank_deficient_rows_rejected() {
        let c = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0]);
        let d = DVector::zeros(2);
        match EqualityProjector::build(c, d) {
            Err(LinopsError::RankDeficient { p }) => assert_eq!(p, 2),
            other => panic!("expected RankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn implicit_and_dense_application_agree() {
        let c = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
        let d = DVector::from_vec(vec![1.0, 1.0]);
        let dense = EqualityProjector::build(c.clone(), d.clone()).unwrap();
        let implicit = EqualityProjector::build_with_limit(c, d, 0).unwrap();
        let v = DVector::from_vec(vec![0.3, -1.2, 2.0, 0.7]);
        assert!((dense.apply(&v) - implicit.apply(&v)).amax() < 1e-14);
        assert!((dense.affine_project(&v) - implicit.affine_project(&v)).amax() < 1e-14);
        let m = DMatrix::from_row_slice(
            4,
            2,
            &[1.0, 0.5, -0.5, 2.0, 3.0, -1.0, 0.0, 0.25],
        );
        assert!((dense.apply_to_matrix(&m) - implicit.apply_to_matrix(&m)).amax() < 1e-14);
    }

    #[test]
    fn newton_converges_on_scalar_cubic() {
        // x^3 - 8 = 0 from x0 = 3.
        let res = |x: &DVector<f64>| DVector::from_vec(vec![x[0] * x[0] * x[0] - 8.0]);
        let jac = |x: &DVector<f64>| DMatrix::from_row_slice(1, 1, &[3.0 * x[0] * x[0]]);
        let x0 = DVector::from_vec(vec![3.0]);
        let root = damped_newton_root(&res, &jac, &x0, None, &NewtonOptions::default()).unwrap();
        assert!((root[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn newton_linear_residual_one_step() {
        let target = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let t = target.clone();
        let res = move |x: &DVector<f64>| x - &t;
        let jac = |_: &DVector<f64>| DMatrix::identity(3, 3);
        let x0 = DVector::zeros(3);
        let root = damped_newton_root(&res, &jac, &x0, None, &NewtonOptions::default()).unwrap();
        assert!((root - target).amax() < 1e-14);
    }

    #[test]
    fn newton_singular_jacobian_reported() {
        let res = |x: &DVector<f64>| DVector::from_vec(vec![x[0] * x[0] + 1.0]);
        let jac = |_: &DVector<f64>| DMatrix::from_row_slice(1, 1, &[0.0]);
        let x0 = DVector::from_vec(vec![1.0]);
        match damped_newton_root(&res, &jac, &x0, None, &NewtonOptions::default()) {
            Err(NewtonError::SingularJacobian { iter: 0 }) => {}
            other => panic!("expected SingularJacobian, got {other:?}"),
        }
    }

    #[test]
    fn newton_guard_respected_by_trials() {
        use std::sync::atomic::{AtomicBool, Ordering};
        static VIOLATED: AtomicBool = AtomicBool::new(false);
        // Root of 1/x - 2 = 0 is 0.5; full Newton steps from 3 overshoot into
        // x <= 0, which the guard must reject before the residual runs.
        let res = |x: &DVector<f64>| {
            if x[0] <= 0.0 {
                VIOLATED.store(true, Ordering::SeqCst);
            }
            DVector::from_vec(vec![1.0 / x[0] - 2.0])
        };
        let jac = |x: &DVector<f64>| DMatrix::from_row_slice(1, 1, &[-1.0 / (x[0] * x[0])]);
        let guard = |x: &DVector<f64>| x[0] > 0.0;
        let x0 = DVector::from_vec(vec![3.0]);
        let opts = NewtonOptions {
            tol: 1e-12,
            max_iters: 200,
        };
        let root = damped_newton_root(&res, &jac, &x0, Some(&guard), &opts).unwrap();
        assert!((root[0] - 0.5).abs() < 1e-10);
        assert!(
            !VIOLATED.load(Ordering::SeqCst),
            "residual was evaluated at a guard-violating point"
        );
    }
}
