//! Convergence metrics shared by all run drivers.

use std::collections::BTreeMap;

use nalgebra::DVector;
use thiserror::Error;

use crate::field::VectorField;
use crate::problem::{LmoFn, ProblemInstance};
use crate::trace::metric;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("problem has no linear minimization oracle")]
    MissingLmo,
    #[error("reference solution has zero norm; relative error undefined")]
    ZeroReference,
}

pub fn dist_to_solution(x: &DVector<f64>, x_star: &DVector<f64>) -> f64 {
    (x - x_star).norm()
}

pub fn relative_error(x: &DVector<f64>, x_star: &DVector<f64>) -> Result<f64, MetricError> {
    let denom = x_star.norm();
    if denom == 0.0 {
        return Err(MetricError::ZeroReference);
    }
    Ok((x - x_star).norm() / denom)
}

/// Restricted gap max_{z in C} <F(x), x - z> computed through the problem's
/// LMO; well-defined on compact sets and non-negative at feasible points.
pub fn gap(problem: &ProblemInstance, x: &DVector<f64>) -> Result<f64, MetricError> {
    let lmo = problem.lmo.as_ref().ok_or(MetricError::MissingLmo)?;
    let f = problem.field.eval(x);
    let s = lmo(&f);
    Ok(f.dot(x) - f.dot(&s))
}

/// Per-iteration descent quantity (1/(2 beta)) ||lambda_next - lambda||^2 +
/// (beta/2) ||y_next - y||^2; non-increasing over the inner loop for
/// monotone operators.
pub fn lemma_residual(
    lambda: &DVector<f64>,
    lambda_next: &DVector<f64>,
    y: &DVector<f64>,
    y_next: &DVector<f64>,
    beta: f64,
) -> f64 {
    (lambda_next - lambda).norm_squared() / (2.0 * beta)
        + beta / 2.0 * (y_next - y).norm_squared()
}

/// Resolves once per run which metrics a problem supports and evaluates them
/// per record.
pub struct MetricContext {
    field: VectorField,
    known: Option<DVector<f64>>,
    known_norm: f64,
    lmo: Option<LmoFn>,
    beta: Option<f64>,
}

impl MetricContext {
    pub fn for_problem(problem: &ProblemInstance, beta: Option<f64>) -> Self {
        let known = problem.known_solution.clone();
        let known_norm = known.as_ref().map_or(0.0, |k| k.norm());
        MetricContext {
            field: problem.field.clone(),
            known,
            known_norm,
            lmo: problem.lmo.clone(),
            beta,
        }
    }

    /// Gap evaluated through a precomputed F(x) and LMO point, letting
    /// drivers that already hold both (Frank-Wolfe) avoid re-evaluation.
    pub fn gap_from(&self, x: &DVector<f64>, f_x: &DVector<f64>, s: &DVector<f64>) -> f64 {
        f_x.dot(x) - f_x.dot(s)
    }

    pub fn compute(
        &self,
        x: &DVector<f64>,
        y: Option<&DVector<f64>>,
        prev_pair: Option<(&DVector<f64>, &DVector<f64>)>,
        next_pair: Option<(&DVector<f64>, &DVector<f64>)>,
    ) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        if let Some(k) = &self.known {
            m.insert(metric::DIST_TO_SOLUTION.to_string(), dist_to_solution(x, k));
            if self.known_norm > 0.0 {
                m.insert(
                    metric::RELATIVE_ERROR.to_string(),
                    dist_to_solution(x, k) / self.known_norm,
                );
            }
        }
        if let Some(lmo) = &self.lmo {
            let f = self.field.eval(x);
            let s = lmo(&f);
            m.insert(metric::GAP.to_string(), f.dot(x) - f.dot(&s));
        }
        if let Some(yv) = y {
            m.insert(metric::CONSENSUS_RESIDUAL.to_string(), (x - yv).norm());
        }
        if let Some(beta) = self.beta {
            // (lambda_k, y_k) -> (lambda_{k+1}, y_{k+1}); NaN on the initial
            // record where no previous pair exists.
            let value = match (prev_pair, next_pair) {
                (Some((l0, y0)), Some((l1, y1))) => lemma_residual(l0, l1, y0, y1, beta),
                _ => f64::NAN,
            };
            m.insert(metric::LEMMA_RESIDUAL.to_string(), value);
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn relative_error_zero_reference_rejected() {
        let x = DVector::from_vec(vec![1.0, 2.0]);
        let zero = DVector::zeros(2);
        assert!(matches!(
            relative_error(&x, &zero),
            Err(MetricError::ZeroReference)
        ));
    }

    #[test]
    fn lemma_residual_formula() {
        let l0 = DVector::from_vec(vec![0.0, 0.0]);
        let l1 = DVector::from_vec(vec![0.2, 0.0]);
        let y0 = DVector::from_vec(vec![1.0, 1.0]);
        let y1 = DVector::from_vec(vec![1.0, 0.5]);
        let beta = 0.08;
        let r = lemma_residual(&l0, &l1, &y0, &y1, beta);
        assert!((r - (0.04 / 0.16 + 0.04 * 0.25)).abs() < 1e-15);
    }
}
