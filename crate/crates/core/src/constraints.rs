//! Constraint sets: smooth convex inequalities phi_i(x) <= 0 plus linear
//! equalities C x = d, with a structure tag that names the set when it has a
//! shape solvers can exploit in closed form.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::fd;

type ScalarFn = Arc<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type HessFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// One smooth convex inequality phi(x) <= 0.
#[derive(Clone)]
pub struct SmoothConvex {
    value: ScalarFn,
    gradient: GradFn,
    hessian: Option<HessFn>,
}

impl SmoothConvex {
    pub fn new(
        value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        SmoothConvex {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: None,
        }
    }

    pub fn with_hessian(
        mut self,
        hessian: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Self {
        self.hessian = Some(Arc::new(hessian));
        self
    }

    /// phi(x) = coeffs . x + offset; Hessian is zero.
    pub fn affine(coeffs: DVector<f64>, offset: f64) -> Self {
        let n = coeffs.len();
        let c_val = coeffs.clone();
        let c_grad = coeffs;
        SmoothConvex {
            value: Arc::new(move |x| c_val.dot(x) + offset),
            gradient: Arc::new(move |_| c_grad.clone()),
            hessian: Some(Arc::new(move |_| DMatrix::zeros(n, n))),
        }
    }

    /// phi(x) = ||x - center||^2 - radius^2.
    pub fn ball(center: DVector<f64>, radius: f64) -> Self {
        let n = center.len();
        let c_val = center.clone();
        let c_grad = center;
        SmoothConvex {
            value: Arc::new(move |x| {
                let diff = x - &c_val;
                diff.norm_squared() - radius * radius
            }),
            gradient: Arc::new(move |x| 2.0 * (x - &c_grad)),
            hessian: Some(Arc::new(move |_| 2.0 * DMatrix::identity(n, n))),
        }
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(x)
    }

    pub fn has_hessian(&self) -> bool {
        self.hessian.is_some()
    }

    /// Analytic Hessian when supplied, central differences of the gradient
    /// otherwise.
    pub fn hessian_or_fd(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.hessian {
            Some(h) => h(x),
            None => fd::central_jacobian(&|v| self.gradient(v), x),
        }
    }
}

impl std::fmt::Debug for SmoothConvex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SmoothConvex")
            .field("has_hessian", &self.hessian.is_some())
            .finish()
    }
}

/// Contiguous coordinate block [start, start + len).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub start: usize,
    pub len: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Names the shape of the inequality set (equalities are carried separately).
/// `Simplex` blocks are {v >= 0, sum v = 1} per block; `ShiftedSimplex`
/// blocks are {v >= -1, sum v = 0}; both imply the matching equality rows.
#[derive(Clone, Debug)]
pub enum StructureTag {
    Orthant,
    /// Entries may be -inf / +inf for one-sided bounds.
    Box {
        lower: DVector<f64>,
        upper: DVector<f64>,
    },
    EuclideanBall {
        center: DVector<f64>,
        radius: f64,
    },
    Simplex {
        blocks: Vec<Block>,
    },
    ShiftedSimplex {
        blocks: Vec<Block>,
    },
    General,
}

#[derive(Clone, Debug)]
pub struct ConstraintSpec {
    /// p x n, possibly p = 0.
    pub eq_matrix: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub inequalities: Vec<SmoothConvex>,
    pub structure_tag: StructureTag,
}

impl ConstraintSpec {
    /// No constraints at all (m = 0, p = 0).
    pub fn free(n: usize) -> Self {
        ConstraintSpec {
            eq_matrix: DMatrix::zeros(0, n),
            eq_rhs: DVector::zeros(0),
            inequalities: Vec::new(),
            structure_tag: StructureTag::General,
        }
    }

    /// x >= 0 coordinate-wise.
    pub fn orthant(n: usize) -> Self {
        let inequalities = (0..n)
            .map(|i| {
                let mut row = DVector::zeros(n);
                row[i] = -1.0;
                SmoothConvex::affine(row, 0.0)
            })
            .collect();
        ConstraintSpec {
            eq_matrix: DMatrix::zeros(0, n),
            eq_rhs: DVector::zeros(0),
            inequalities,
            structure_tag: StructureTag::Orthant,
        }
    }

    pub fn num_equalities(&self) -> usize {
        self.eq_matrix.nrows()
    }

    pub fn num_inequalities(&self) -> usize {
        self.inequalities.len()
    }

    pub fn dim(&self) -> usize {
        self.eq_matrix.ncols()
    }

    /// max_i phi_i(x), -inf when there are no inequalities.
    pub fn max_inequality(&self, x: &DVector<f64>) -> f64 {
        self.inequalities
            .iter()
            .map(|phi| phi.value(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn strictly_feasible(&self, x: &DVector<f64>) -> bool {
        self.inequalities.iter().all(|phi| phi.value(x) < 0.0)
    }

    /// ||C x - d||_inf, zero when p = 0.
    pub fn equality_residual(&self, x: &DVector<f64>) -> f64 {
        if self.num_equalities() == 0 {
            return 0.0;
        }
        (&self.eq_matrix * x - &self.eq_rhs).amax()
    }

    /// Membership in the set named by the structure tag, up to `tol`.
    /// Returns None for `General` (no independent description available).
    pub fn tag_membership(&self, x: &DVector<f64>, tol: f64) -> Option<bool> {
        match &self.structure_tag {
            StructureTag::Orthant => Some(x.iter().all(|&v| v >= -tol)),
            StructureTag::Box { lower, upper } => Some(
                x.iter()
                    .zip(lower.iter().zip(upper.iter()))
                    .all(|(&v, (&l, &u))| v >= l - tol && v <= u + tol),
            ),
            StructureTag::EuclideanBall { center, radius } => {
                Some((x - center).norm() <= radius + tol)
            }
            StructureTag::Simplex { blocks } => Some(blocks.iter().all(|b| {
                let seg = x.rows(b.start, b.len);
                seg.iter().all(|&v| v >= -tol) && (seg.sum() - 1.0).abs() <= tol
            })),
            StructureTag::ShiftedSimplex { blocks } => Some(blocks.iter().all(|b| {
                let seg = x.rows(b.start, b.len);
                seg.iter().all(|&v| v >= -1.0 - tol) && seg.sum().abs() <= tol
            })),
            StructureTag::General => None,
        }
    }

    /// Membership by the defining functions: phi_i(x) <= tol and
    /// ||C x - d||_inf <= tol.
    pub fn membership(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.inequality_membership(x, tol) && self.equality_residual(x) <= tol
    }

    /// phi_i(x) <= tol for all i, ignoring equality rows.
    pub fn inequality_membership(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.inequalities.iter().all(|phi| phi.value(x) <= tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_inequality_evaluates() {
        let phi = SmoothConvex::affine(DVector::from_vec(vec![-1.0, 0.0]), 0.0);
        let x = DVector::from_vec(vec![2.0, 5.0]);
        assert_eq!(phi.value(&x), -2.0);
        assert_eq!(phi.gradient(&x), DVector::from_vec(vec![-1.0, 0.0]));
        assert_eq!(phi.hessian_or_fd(&x), DMatrix::zeros(2, 2));
    }

    #[test]
    fn ball_inequality_derivatives() {
        let phi = SmoothConvex::ball(DVector::from_vec(vec![1.0, -1.0]), 2.0);
        let x = DVector::from_vec(vec![2.0, 0.5]);
        assert!((phi.value(&x) - (1.0 + 2.25 - 4.0)).abs() < 1e-15);
        assert_eq!(phi.gradient(&x), DVector::from_vec(vec![2.0, 3.0]));
        assert_eq!(phi.hessian_or_fd(&x), 2.0 * DMatrix::identity(2, 2));
    }

    #[test]
    fn orthant_membership_and_tag_agree() {
        let cs = ConstraintSpec::orthant(3);
        let inside = DVector::from_vec(vec![0.5, 0.0, 1.0]);
        let outside = DVector::from_vec(vec![0.5, -0.1, 1.0]);
        assert!(cs.membership(&inside, 1e-12));
        assert_eq!(cs.tag_membership(&inside, 1e-12), Some(true));
        assert!(!cs.membership(&outside, 1e-12));
        assert_eq!(cs.tag_membership(&outside, 1e-12), Some(false));
    }

    #[test]
    fn hessian_fd_fallback() {
        // phi(x) = x0^2 * x1 (not convex; fallback accuracy is what matters).
        let phi = SmoothConvex::new(
            |x: &DVector<f64>| x[0] * x[0] * x[1],
            |x: &DVector<f64>| DVector::from_vec(vec![2.0 * x[0] * x[1], x[0] * x[0]]),
        );
        let x = DVector::from_vec(vec![1.5, 0.5]);
        let h = phi.hessian_or_fd(&x);
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 3.0, 3.0, 0.0]);
        assert!(crate::fd::max_relative_deviation(&h, &expect) < 1e-7);
    }
}
