//! A benchmark instance: operator, constraint set, reference data, and the
//! validation pass the harness runs before solving.

use std::sync::Arc;

use nalgebra::DVector;

use crate::constraints::ConstraintSpec;
use crate::fd;
use crate::field::VectorField;
use crate::linops::EqualityProjector;
use crate::rng;

/// Linear minimization oracle: r -> argmin_{x in C} <r, x>.
pub type LmoFn = Arc<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;

#[derive(Clone)]
pub struct ProblemInstance {
    pub name: String,
    pub field: VectorField,
    pub constraints: ConstraintSpec,
    /// Strictly feasible point: phi_i < 0 for all i and C x = d.
    pub interior_point: DVector<f64>,
    pub known_solution: Option<DVector<f64>>,
    pub lmo: Option<LmoFn>,
    /// Metric the harness tracks by default for this problem.
    pub default_metric: &'static str,
}

impl std::fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("name", &self.name)
            .field("dim", &self.field.dim())
            .field("equalities", &self.constraints.num_equalities())
            .field("inequalities", &self.constraints.num_inequalities())
            .field("has_solution", &self.known_solution.is_some())
            .field("has_lmo", &self.lmo.is_some())
            .finish()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

const EQ_TOL: f64 = 1e-10;
const BIND_TOL: f64 = 1e-10;
const FD_REL_TOL: f64 = 1e-5;

/// Checks the structural invariants of an instance and returns every
/// violation found. Never mutates the instance.
pub fn validate_problem(p: &ProblemInstance) -> ValidationReport {
    let mut v = Vec::new();
    let n = p.field.dim();

    if p.constraints.dim() != n {
        v.push(format!(
            "constraint dimension {} does not match field dimension {}",
            p.constraints.dim(),
            n
        ));
        return ValidationReport { violations: v };
    }
    if p.interior_point.len() != n {
        v.push(format!(
            "interior_point has length {}, expected {}",
            p.interior_point.len(),
            n
        ));
        return ValidationReport { violations: v };
    }

    // Interior point: strict inequality feasibility and exact equalities.
    for (i, phi) in p.constraints.inequalities.iter().enumerate() {
        if !(phi.value(&p.interior_point) < 0.0) {
            v.push(format!("inequality {} not strict at interior_point", i + 1));
        }
    }
    let eq_res = p.constraints.equality_residual(&p.interior_point);
    if eq_res > EQ_TOL {
        v.push(format!(
            "interior_point equality residual {eq_res:.3e} exceeds {EQ_TOL:.0e}"
        ));
    }

    // Equality matrix must have full row rank.
    if p.constraints.num_equalities() > 0
        && EqualityProjector::build(p.constraints.eq_matrix.clone(), p.constraints.eq_rhs.clone())
            .is_err()
    {
        v.push("equality matrix is rank deficient".to_string());
    }

    // Known solution: feasible, with inequalities allowed to bind.
    if let Some(xs) = &p.known_solution {
        if xs.len() != n {
            v.push(format!(
                "known_solution has length {}, expected {}",
                xs.len(),
                n
            ));
        } else {
            for (i, phi) in p.constraints.inequalities.iter().enumerate() {
                let val = phi.value(xs);
                if val > BIND_TOL {
                    v.push(format!(
                        "inequality {} violated at known_solution ({val:.3e})",
                        i + 1
                    ));
                }
            }
            let res = p.constraints.equality_residual(xs);
            if res > EQ_TOL {
                v.push(format!(
                    "known_solution equality residual {res:.3e} exceeds {EQ_TOL:.0e}"
                ));
            }
        }
    }

    // Derivative consistency spot checks near the interior point.
    let mut rng = rng::seeded(0x76616c6964); // fixed stream; validation must be deterministic
    for _ in 0..5 {
        let point = &p.interior_point + 0.05 * rng::normal_vector(&mut rng, n);
        if p.field.has_jacobian() {
            let analytic = p.field.jacobian(&point).expect("jacobian present");
            let numeric = fd::central_jacobian(&|x| p.field.eval(x), &point);
            let dev = fd::max_relative_deviation(&analytic, &numeric);
            if dev > FD_REL_TOL {
                v.push(format!(
                    "field Jacobian deviates from finite differences by {dev:.3e}"
                ));
                break;
            }
        }
    }
    for (i, phi) in p.constraints.inequalities.iter().enumerate() {
        let point = &p.interior_point + 0.05 * rng::normal_vector(&mut rng, n);
        let analytic = phi.gradient(&point);
        let numeric = fd::central_gradient(&|x| phi.value(x), &point);
        let dev = fd::max_relative_deviation(
            &nalgebra::DMatrix::from_column_slice(n, 1, analytic.as_slice()),
            &nalgebra::DMatrix::from_column_slice(n, 1, numeric.as_slice()),
        );
        if dev > FD_REL_TOL {
            v.push(format!(
                "inequality {} gradient deviates from finite differences by {dev:.3e}",
                i + 1
            ));
        }
    }

    // Structure tag must describe the same set as the defining functions.
    // Simplex-style tags imply their block-sum equality rows; the other tags
    // name only the inequality part, so equality rows are excluded there.
    let tag_covers_equalities = matches!(
        p.constraints.structure_tag,
        crate::constraints::StructureTag::Simplex { .. }
            | crate::constraints::StructureTag::ShiftedSimplex { .. }
    );
    let mut agree = true;
    for trial in 0..20 {
        let scale = if trial % 2 == 0 { 0.1 } else { 2.0 };
        let point = &p.interior_point + scale * rng::normal_vector(&mut rng, n);
        if let Some(by_tag) = p.constraints.tag_membership(&point, 1e-9) {
            let by_fn = if tag_covers_equalities {
                p.constraints.membership(&point, 1e-9)
            } else {
                p.constraints.inequality_membership(&point, 1e-9)
            };
            if by_tag != by_fn {
                agree = false;
                break;
            }
        }
    }
    if !agree {
        v.push("structure tag disagrees with defining constraints".to_string());
    }

    ValidationReport { violations: v }
}
