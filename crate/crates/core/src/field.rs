//! Vector fields F : R^n -> R^n defining the variational inequality.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::fd;

pub type EvalFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type JacobianFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Affine structure F(x) = A x + b, kept explicit so solvers can factor the
/// x-subproblem system once per run instead of iterating.
#[derive(Clone, Debug)]
pub struct AffineForm {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

/// An operator for a (possibly constrained) variational inequality. For
/// saddle problems min_{x1} max_{x2} f the convention is
/// F = (grad_{x1} f, -grad_{x2} f).
#[derive(Clone)]
pub struct VectorField {
    dim: usize,
    eval: EvalFn,
    jacobian: Option<JacobianFn>,
    lipschitz_hint: Option<f64>,
    affine: Option<Arc<AffineForm>>,
}

impl VectorField {
    pub fn new(
        dim: usize,
        eval: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        VectorField {
            dim,
            eval: Arc::new(eval),
            jacobian: None,
            lipschitz_hint: None,
            affine: None,
        }
    }

    pub fn with_jacobian(
        mut self,
        jacobian: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jacobian));
        self
    }

    pub fn with_lipschitz_hint(mut self, l: f64) -> Self {
        self.lipschitz_hint = Some(l);
        self
    }

    /// F(x) = A x + b. The closed forms derived from A and b are exact, so the
    /// eval/jacobian closures and the stored structure cannot drift apart.
    pub fn affine(a: DMatrix<f64>, b: DVector<f64>) -> Self {
        assert_eq!(a.nrows(), a.ncols());
        assert_eq!(a.nrows(), b.len());
        let dim = b.len();
        let form = Arc::new(AffineForm { a, b });
        let eval_form = Arc::clone(&form);
        let jac_form = Arc::clone(&form);
        VectorField {
            dim,
            eval: Arc::new(move |x| &eval_form.a * x + &eval_form.b),
            jacobian: Some(Arc::new(move |_| jac_form.a.clone())),
            lipschitz_hint: None,
            affine: Some(form),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.dim);
        (self.eval)(x)
    }

    pub fn has_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    pub fn jacobian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        self.jacobian.as_ref().map(|j| j(x))
    }

    /// Analytic Jacobian when supplied, central differences of eval otherwise.
    pub fn jacobian_or_fd(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.jacobian {
            Some(j) => j(x),
            None => fd::central_jacobian(&|v| self.eval(v), x),
        }
    }

    pub fn lipschitz_hint(&self) -> Option<f64> {
        self.lipschitz_hint
    }

    pub fn affine_form(&self) -> Option<&AffineForm> {
        self.affine.as_deref()
    }
}

impl std::fmt::Debug for VectorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VectorField")
            .field("dim", &self.dim)
            .field("has_jacobian", &self.jacobian.is_some())
            .field("affine", &self.affine.is_some())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_eval_matches_structure() {
        let a = DMatrix::from_row_slice(2, 2, &[0.1, 1.0, -1.0, 0.1]);
        let b = DVector::from_vec(vec![0.5, -0.5]);
        let f = VectorField::affine(a.clone(), b.clone());
        let x = DVector::from_vec(vec![2.0, 3.0]);
        assert_eq!(f.eval(&x), &a * &x + &b);
        assert_eq!(f.jacobian(&x).unwrap(), a);
        assert!(f.affine_form().is_some());
    }

    #[test]
    fn fd_jacobian_fallback_close_on_smooth_field() {
        let f = VectorField::new(2, |x: &DVector<f64>| {
            DVector::from_vec(vec![x[0] * x[0] + x[1], x[0] * x[1]])
        });
        let x = DVector::from_vec(vec![1.3, -0.7]);
        let j = f.jacobian_or_fd(&x);
        let expect = DMatrix::from_row_slice(2, 2, &[2.6, 1.0, -0.7, 1.3]);
        assert!(fd::max_relative_deviation(&j, &expect) < 1e-8);
    }
}
