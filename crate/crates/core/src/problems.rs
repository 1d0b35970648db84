//! The benchmark problem suite: seven constrained VI instances spanning
//! affine fields on polytopes, a ratio game, nonmonotone 2d fields, and a
//! scalar GAN toy, each packaged with its constraint structure, a strictly
//! feasible point, and (where available) the known solution and an LMO.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::constraints::{Block, ConstraintSpec, SmoothConvex, StructureTag};
use crate::field::VectorField;
use crate::linops::EqualityProjector;
use crate::problem::{LmoFn, ProblemInstance};
use crate::rng::{normal, normal_vector, seeded, uniform};
use crate::trace::metric;

#[derive(Debug, Error)]
pub enum ProblemsError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

fn bad(name: &'static str, reason: impl Into<String>) -> ProblemsError {
    ProblemsError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

// ---------------------------------------------------------------------------
// Shared LMO builders

/// LMO over a product of standard simplices: mass on the cheapest coordinate
/// of each block.
fn simplex_lmo(blocks: Vec<Block>, dim: usize) -> LmoFn {
    Arc::new(move |r: &DVector<f64>| {
        let mut s = DVector::zeros(dim);
        for b in &blocks {
            let mut best = b.start;
            for i in b.range() {
                if r[i] < r[best] {
                    best = i;
                }
            }
            s[best] = 1.0;
        }
        s
    })
}

/// LMO over a product of shifted simplices {v >= -1, sum v = 0}: all mass at
/// the cheapest coordinate, -1 elsewhere.
fn shifted_simplex_lmo(blocks: Vec<Block>, dim: usize) -> LmoFn {
    Arc::new(move |r: &DVector<f64>| {
        let mut s = DVector::zeros(dim);
        for b in &blocks {
            let mut best = b.start;
            for i in b.range() {
                s[i] = -1.0;
                if r[i] < r[best] {
                    best = i;
                }
            }
            s[best] = b.len as f64 - 1.0;
        }
        s
    })
}

/// LMO over a Euclidean ball: the boundary point opposite the direction r.
fn ball_lmo(center: DVector<f64>, radius: f64) -> LmoFn {
    Arc::new(move |r: &DVector<f64>| {
        let norm = r.norm();
        if norm == 0.0 {
            center.clone()
        } else {
            &center - (radius / norm) * r
        }
    })
}

// ---------------------------------------------------------------------------
// cbg: constrained bilinear game on the nonnegative orthant

/// Bilinear game with weak damping: F(x) = ((x1 + 10 x2)/10, (-10 x1 + x2)/10)
/// on the nonnegative orthant, unique solution at the origin.
pub fn make_cbg() -> ProblemInstance {
    let a = DMatrix::from_row_slice(2, 2, &[0.1, 1.0, -1.0, 0.1]);
    let field = VectorField::affine(a, DVector::zeros(2));
    ProblemInstance {
        name: "cbg".to_string(),
        field,
        constraints: ConstraintSpec::orthant(2),
        interior_point: DVector::from_vec(vec![1.0, 1.0]),
        known_solution: Some(DVector::zeros(2)),
        lmo: None,
        default_metric: metric::DIST_TO_SOLUTION,
    }
}

// ---------------------------------------------------------------------------
// ratio game: two-player stochastic-game ratio objective on simplices

const RG_R: [f64; 4] = [-0.6, -0.3, 0.6, -0.3];
const RG_S: [f64; 4] = [0.9, 0.5, 0.8, 0.4];

/// Ratio game V(x, y) = <x, R y> / <x, S y> with x minimizing over the
/// 2-simplex and y maximizing over the 2-simplex; S > 0 keeps the denominator
/// positive near the feasible set.
pub fn make_ratio_game() -> ProblemInstance {
    let r = DMatrix::from_row_slice(2, 2, &RG_R);
    let s = DMatrix::from_row_slice(2, 2, &RG_S);

    let (re, se) = (r.clone(), s.clone());
    let eval = move |p: &DVector<f64>| {
        let x = p.rows(0, 2).into_owned();
        let y = p.rows(2, 2).into_owned();
        let u = &re * &y;
        let v = &se * &y;
        let w = re.transpose() * &x;
        let z = se.transpose() * &x;
        let a = x.dot(&u);
        let b = x.dot(&v);
        let gx = &u / b - (a / (b * b)) * &v;
        let hy = &w / b - (a / (b * b)) * &z;
        let mut out = DVector::zeros(4);
        out.rows_mut(0, 2).copy_from(&gx);
        out.rows_mut(2, 2).copy_from(&(-hy));
        out
    };

    let (rj, sj) = (r, s);
    let jac = move |p: &DVector<f64>| {
        let x = p.rows(0, 2).into_owned();
        let y = p.rows(2, 2).into_owned();
        let u = &rj * &y;
        let v = &sj * &y;
        let w = rj.transpose() * &x;
        let z = sj.transpose() * &x;
        let a = x.dot(&u);
        let b = x.dot(&v);
        let b2 = b * b;
        let b3 = b2 * b;
        let gxx = -(&u * v.transpose() + &v * u.transpose()) / b2
            + (2.0 * a / b3) * &v * v.transpose();
        let gxy = &rj / b - (a / b2) * &sj - (&u * z.transpose() + &v * w.transpose()) / b2
            + (2.0 * a / b3) * &v * z.transpose();
        let hyy = -(&w * z.transpose() + &z * w.transpose()) / b2
            + (2.0 * a / b3) * &z * z.transpose();
        let hyx = rj.transpose() / b - (a / b2) * sj.transpose()
            - (&w * v.transpose() + &z * u.transpose()) / b2
            + (2.0 * a / b3) * &z * v.transpose();
        let mut j = DMatrix::zeros(4, 4);
        j.view_mut((0, 0), (2, 2)).copy_from(&gxx);
        j.view_mut((0, 2), (2, 2)).copy_from(&gxy);
        j.view_mut((2, 0), (2, 2)).copy_from(&(-hyx));
        j.view_mut((2, 2), (2, 2)).copy_from(&(-hyy));
        j
    };

    let field = VectorField::new(4, eval).with_jacobian(jac);

    let eq = DMatrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]);
    let blocks = vec![Block { start: 0, len: 2 }, Block { start: 2, len: 2 }];
    let constraints = ConstraintSpec {
        eq_matrix: eq,
        eq_rhs: DVector::from_vec(vec![1.0, 1.0]),
        inequalities: (0..4)
            .map(|i| {
                let mut c = DVector::zeros(4);
                c[i] = -1.0;
                SmoothConvex::affine(c, 0.0)
            })
            .collect(),
        structure_tag: StructureTag::Simplex {
            blocks: blocks.clone(),
        },
    };

    // Interior stationarity gives the game value as the negative root of
    // nu^2 - 14.25 nu - 9 = 0, with p = 3/4 - nu/3 and q = -nu/12; F vanishes
    // exactly at (p, 1-p, q, 1-q).
    let nu = (14.25 - (14.25f64 * 14.25 + 36.0).sqrt()) / 2.0;
    let p = 0.75 - nu / 3.0;
    let q = -nu / 12.0;
    let known = DVector::from_vec(vec![p, 1.0 - p, q, 1.0 - q]);

    ProblemInstance {
        name: "ratio-game".to_string(),
        field,
        constraints,
        interior_point: DVector::from_element(4, 0.5),
        known_solution: Some(known),
        lmo: Some(simplex_lmo(blocks, 4)),
        default_metric: metric::GAP,
    }
}

// ---------------------------------------------------------------------------
// forsaken: nonmonotone 2d field with a forsaken limit cycle

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForsakenVariant {
    /// Euclidean ball of radius 2 around the origin.
    Ball4,
    /// Halfplane z1 >= 0.08, cutting off the attracting cycle on the left.
    X1Min,
    /// Halfplane z2 >= 0.4.
    X2Min,
}

fn forsaken_hp(z: f64) -> f64 {
    0.5 * z - 2.0 * z.powi(3) + z.powi(5)
}

fn forsaken_hpp(z: f64) -> f64 {
    0.5 - 6.0 * z * z + 5.0 * z.powi(4)
}

/// Nonmonotone field F(z) = (z2 - 0.45 + h'(z1), -z1 + h'(z2)) with
/// h'(z) = z/2 - 2 z^3 + z^5; unconstrained dynamics orbit a limit cycle, so
/// the constraint set decides which methods converge.
pub fn make_forsaken(variant: ForsakenVariant) -> ProblemInstance {
    let eval = |z: &DVector<f64>| {
        DVector::from_vec(vec![
            z[1] - 0.45 + forsaken_hp(z[0]),
            -z[0] + forsaken_hp(z[1]),
        ])
    };
    let jac = |z: &DVector<f64>| {
        DMatrix::from_row_slice(2, 2, &[forsaken_hpp(z[0]), 1.0, -1.0, forsaken_hpp(z[1])])
    };
    let field = VectorField::new(2, eval).with_jacobian(jac);

    let (name, constraints, lmo, default_metric): (&str, _, Option<LmoFn>, _) = match variant {
        ForsakenVariant::Ball4 => {
            let center = DVector::zeros(2);
            let radius = 2.0;
            let cs = ConstraintSpec {
                eq_matrix: DMatrix::zeros(0, 2),
                eq_rhs: DVector::zeros(0),
                inequalities: vec![SmoothConvex::ball(center.clone(), radius)],
                structure_tag: StructureTag::EuclideanBall {
                    center: center.clone(),
                    radius,
                },
            };
            (
                "forsaken-ball4",
                cs,
                Some(ball_lmo(center, radius)),
                metric::GAP,
            )
        }
        ForsakenVariant::X1Min => {
            let cs = ConstraintSpec {
                eq_matrix: DMatrix::zeros(0, 2),
                eq_rhs: DVector::zeros(0),
                inequalities: vec![SmoothConvex::affine(
                    DVector::from_vec(vec![-1.0, 0.0]),
                    0.08,
                )],
                structure_tag: StructureTag::Box {
                    lower: DVector::from_vec(vec![0.08, f64::NEG_INFINITY]),
                    upper: DVector::from_element(2, f64::INFINITY),
                },
            };
            ("forsaken-x1min", cs, None, metric::CONSENSUS_RESIDUAL)
        }
        ForsakenVariant::X2Min => {
            let cs = ConstraintSpec {
                eq_matrix: DMatrix::zeros(0, 2),
                eq_rhs: DVector::zeros(0),
                inequalities: vec![SmoothConvex::affine(
                    DVector::from_vec(vec![0.0, -1.0]),
                    0.4,
                )],
                structure_tag: StructureTag::Box {
                    lower: DVector::from_vec(vec![f64::NEG_INFINITY, 0.4]),
                    upper: DVector::from_element(2, f64::INFINITY),
                },
            };
            ("forsaken-x2min", cs, None, metric::CONSENSUS_RESIDUAL)
        }
    };

    ProblemInstance {
        name: name.to_string(),
        field,
        constraints,
        interior_point: DVector::from_element(2, 0.5),
        known_solution: None,
        lmo,
        default_metric,
    }
}

// ---------------------------------------------------------------------------
// toy gan: scalar generator/discriminator moment-matching game

/// Scalar GAN toy: generator g(z) = theta z against quadratic discriminator
/// phi x^2 on frozen samples x ~ N(0, 2) and z ~ N(0, 1); the objective is
/// phi (mean x^2 - theta^2 mean z^2), played on a ball of radius 2.
pub fn make_toy_gan(num_samples: usize, seed: u64) -> Result<ProblemInstance, ProblemsError> {
    if num_samples == 0 {
        return Err(bad("num_samples", "must be at least 1"));
    }
    let mut rng = seeded(seed);
    let sigma = 2.0f64.sqrt();
    let mut mx = 0.0;
    let mut mz = 0.0;
    for _ in 0..num_samples {
        let x = sigma * normal(&mut rng);
        mx += x * x;
    }
    for _ in 0..num_samples {
        let z = normal(&mut rng);
        mz += z * z;
    }
    mx /= num_samples as f64;
    mz /= num_samples as f64;

    let eval = move |p: &DVector<f64>| {
        let (theta, phi) = (p[0], p[1]);
        DVector::from_vec(vec![-2.0 * phi * theta * mz, theta * theta * mz - mx])
    };
    let jac = move |p: &DVector<f64>| {
        let (theta, phi) = (p[0], p[1]);
        DMatrix::from_row_slice(
            2,
            2,
            &[-2.0 * phi * mz, -2.0 * theta * mz, 2.0 * theta * mz, 0.0],
        )
    };
    let field = VectorField::new(2, eval).with_jacobian(jac);

    let center = DVector::zeros(2);
    let radius = 2.0;
    let constraints = ConstraintSpec {
        eq_matrix: DMatrix::zeros(0, 2),
        eq_rhs: DVector::zeros(0),
        inequalities: vec![SmoothConvex::ball(center.clone(), radius)],
        structure_tag: StructureTag::EuclideanBall {
            center: center.clone(),
            radius,
        },
    };

    Ok(ProblemInstance {
        name: "toy-gan".to_string(),
        field,
        constraints,
        interior_point: DVector::zeros(2),
        known_solution: None,
        lmo: Some(ball_lmo(center, radius)),
        default_metric: metric::GAP,
    })
}

// ---------------------------------------------------------------------------
// hbg: high-dimensional bilinear game on a product of simplices

/// Seed for the interior point draw; fixed so every hbg instance of the same
/// size starts identically.
const HBG_INTERIOR_SEED: u64 = 0x6862675f696e74;

/// High-dimensional bilinear game F(x) = A x with
/// A = [[2 eta I, (1 - eta) I], [-(1 - eta) I, 2 eta I]] on the product of two
/// (n/2)-simplices; the unique solution is the uniform point.
pub fn make_hbg(eta: f64, n: usize) -> Result<ProblemInstance, ProblemsError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(bad("eta", format!("must lie in [0, 1], got {eta}")));
    }
    if n < 4 || n % 2 != 0 {
        return Err(bad("n", format!("must be even and at least 4, got {n}")));
    }
    let h = n / 2;
    let mut a = DMatrix::zeros(n, n);
    for i in 0..h {
        a[(i, i)] = 2.0 * eta;
        a[(h + i, h + i)] = 2.0 * eta;
        a[(i, h + i)] = 1.0 - eta;
        a[(h + i, i)] = -(1.0 - eta);
    }
    let field = VectorField::affine(a, DVector::zeros(n));

    let mut eq = DMatrix::zeros(2, n);
    for i in 0..h {
        eq[(0, i)] = 1.0;
        eq[(1, h + i)] = 1.0;
    }
    let blocks = vec![Block { start: 0, len: h }, Block { start: h, len: h }];
    let constraints = ConstraintSpec {
        eq_matrix: eq,
        eq_rhs: DVector::from_element(2, 1.0),
        inequalities: (0..n)
            .map(|i| {
                let mut c = DVector::zeros(n);
                c[i] = -1.0;
                SmoothConvex::affine(c, 0.0)
            })
            .collect(),
        structure_tag: StructureTag::Simplex {
            blocks: blocks.clone(),
        },
    };

    let mut rng = seeded(HBG_INTERIOR_SEED);
    let mut interior = DVector::zeros(n);
    for b in &blocks {
        let mut seg = DVector::from_fn(b.len, |_, _| {
            -uniform(&mut rng).max(f64::MIN_POSITIVE).ln()
        });
        seg /= seg.sum();
        interior.rows_mut(b.start, b.len).copy_from(&seg);
    }

    Ok(ProblemInstance {
        name: "hbg".to_string(),
        field,
        constraints,
        interior_point: interior,
        known_solution: Some(DVector::from_element(n, 1.0 / h as f64)),
        lmo: Some(simplex_lmo(blocks, n)),
        default_metric: metric::RELATIVE_ERROR,
    })
}

// ---------------------------------------------------------------------------
// ghbg / gghbg: general monotone games with random PSD diagonal blocks

/// Power-iteration estimate of the top eigenvalue of a symmetric PSD matrix.
fn top_eigenvalue(a: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> f64 {
    let mut v = normal_vector(rng, a.nrows());
    let mut est = 1.0;
    for _ in 0..50 {
        let w = a * &v;
        est = w.norm();
        if est == 0.0 {
            return 1.0;
        }
        v = w / est;
    }
    est
}

/// Random monotone block field
/// J = [[eta A1, (1 - eta) B], [-(1 - eta) B^T, eta A2]] with spectrally
/// normalized A_i = M_i^T M_i (PSD) and Gaussian B; J + J^T is PSD, so
/// F(x) = J x is monotone with F(0) = 0.
fn random_monotone_field(eta: f64, h: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let m1 = DMatrix::from_fn(h, h, |_, _| normal(rng));
    let m2 = DMatrix::from_fn(h, h, |_, _| normal(rng));
    let b = DMatrix::from_fn(h, h, |_, _| normal(rng));
    let mut a1 = m1.transpose() * &m1;
    let mut a2 = m2.transpose() * &m2;
    a1 /= top_eigenvalue(&a1, rng);
    a2 /= top_eigenvalue(&a2, rng);
    let btb = b.transpose() * &b;
    let bnorm = top_eigenvalue(&btb, rng).sqrt();
    let bn = b / bnorm;

    let n = 2 * h;
    let mut j = DMatrix::zeros(n, n);
    j.view_mut((0, 0), (h, h)).copy_from(&(eta * a1));
    j.view_mut((0, h), (h, h)).copy_from(&((1.0 - eta) * &bn));
    j.view_mut((h, 0), (h, h))
        .copy_from(&(-(1.0 - eta) * bn.transpose()));
    j.view_mut((h, h), (h, h)).copy_from(&(eta * a2));
    j
}

fn check_monotone_params(eta: f64, half_dim: usize) -> Result<(), ProblemsError> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(bad("eta", format!("must lie in [0, 1], got {eta}")));
    }
    if half_dim < 2 {
        return Err(bad("half_dim", format!("must be at least 2, got {half_dim}")));
    }
    Ok(())
}

/// General HBG: random monotone field on a product of two shifted simplices
/// {v >= -1, sum v = 0}; the solution is the origin.
pub fn make_ghbg(eta: f64, half_dim: usize, seed: u64) -> Result<ProblemInstance, ProblemsError> {
    check_monotone_params(eta, half_dim)?;
    let h = half_dim;
    let n = 2 * h;
    let mut rng = seeded(seed);
    let j = random_monotone_field(eta, h, &mut rng);
    let field = VectorField::affine(j, DVector::zeros(n));

    let mut eq = DMatrix::zeros(2, n);
    for i in 0..h {
        eq[(0, i)] = 1.0;
        eq[(1, h + i)] = 1.0;
    }
    let blocks = vec![Block { start: 0, len: h }, Block { start: h, len: h }];
    let constraints = ConstraintSpec {
        eq_matrix: eq,
        eq_rhs: DVector::zeros(2),
        inequalities: (0..n)
            .map(|i| {
                let mut c = DVector::zeros(n);
                c[i] = -1.0;
                SmoothConvex::affine(c, -1.0)
            })
            .collect(),
        structure_tag: StructureTag::ShiftedSimplex {
            blocks: blocks.clone(),
        },
    };

    // Strictly feasible start: centered per-block Gaussians squeezed into
    // max |coord| = 0.9 so every coordinate clears -1 with margin.
    let mut interior = DVector::zeros(n);
    for b in &blocks {
        let mut seg = normal_vector(&mut rng, b.len);
        let mean = seg.sum() / b.len as f64;
        seg.add_scalar_mut(-mean);
        let scale = seg.amax();
        if scale > 0.0 {
            seg *= 0.9 / scale;
        }
        interior.rows_mut(b.start, b.len).copy_from(&seg);
    }

    Ok(ProblemInstance {
        name: "ghbg".to_string(),
        field,
        constraints,
        interior_point: interior,
        known_solution: Some(DVector::zeros(n)),
        lmo: Some(shifted_simplex_lmo(blocks, n)),
        default_metric: metric::DIST_TO_SOLUTION,
    })
}

/// Rows of random equality constraints per block in gghbg.
const GGHBG_EQ_ROWS: usize = 10;
/// Half-width of the gghbg box.
const GGHBG_BOX: f64 = 100.0;

/// General-constraint HBG: the random monotone field boxed into |x_i| <= 100
/// and sliced by 10 random Gaussian equality rows per block (rhs zero), so the
/// origin stays the solution.
pub fn make_gghbg(eta: f64, half_dim: usize, seed: u64) -> Result<ProblemInstance, ProblemsError> {
    check_monotone_params(eta, half_dim)?;
    let h = half_dim;
    let n = 2 * h;
    if h <= GGHBG_EQ_ROWS {
        return Err(bad(
            "half_dim",
            format!("must exceed {GGHBG_EQ_ROWS} to leave equality slack, got {h}"),
        ));
    }
    let mut rng = seeded(seed);
    let j = random_monotone_field(eta, h, &mut rng);
    let field = VectorField::affine(j, DVector::zeros(n));

    let p = 2 * GGHBG_EQ_ROWS;
    let mut eq = DMatrix::zeros(p, n);
    for r in 0..GGHBG_EQ_ROWS {
        for i in 0..h {
            eq[(r, i)] = normal(&mut rng);
        }
    }
    for r in 0..GGHBG_EQ_ROWS {
        for i in 0..h {
            eq[(GGHBG_EQ_ROWS + r, h + i)] = normal(&mut rng);
        }
    }

    let mut inequalities = Vec::with_capacity(2 * n);
    for i in 0..n {
        let mut c = DVector::zeros(n);
        c[i] = 1.0;
        inequalities.push(SmoothConvex::affine(c, -GGHBG_BOX));
        let mut c = DVector::zeros(n);
        c[i] = -1.0;
        inequalities.push(SmoothConvex::affine(c, -GGHBG_BOX));
    }
    let constraints = ConstraintSpec {
        eq_matrix: eq.clone(),
        eq_rhs: DVector::zeros(p),
        inequalities,
        structure_tag: StructureTag::Box {
            lower: DVector::from_element(n, -GGHBG_BOX),
            upper: DVector::from_element(n, GGHBG_BOX),
        },
    };

    // Strictly feasible start: a Gaussian draw projected onto the equality
    // null space, shrunk if any coordinate leaves [-90, 90].
    let proj = EqualityProjector::build_with_limit(eq, DVector::zeros(p), 0).map_err(|_| {
        bad(
            "seed",
            "random equality rows were rank deficient; use a different seed",
        )
    })?;
    let g = normal_vector(&mut rng, n);
    let mut interior = proj.apply(&g);
    let m = interior.amax();
    interior *= (GGHBG_BOX - 10.0) / (GGHBG_BOX - 10.0).max(m);

    Ok(ProblemInstance {
        name: "gghbg".to_string(),
        field,
        constraints,
        interior_point: interior,
        known_solution: Some(DVector::zeros(n)),
        lmo: None,
        default_metric: metric::DIST_TO_SOLUTION,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_game_field_vanishes_at_known_solution() {
        let p = make_ratio_game();
        let star = p.known_solution.as_ref().unwrap();
        assert!(p.field.eval(star).amax() < 1e-12);
    }

    #[test]
    fn hbg_uniform_point_is_block_constant() {
        let p = make_hbg(0.5, 10).unwrap();
        let star = p.known_solution.as_ref().unwrap();
        let f = p.field.eval(star);
        for i in 1..5 {
            assert!((f[i] - f[0]).abs() < 1e-15);
            assert!((f[5 + i] - f[5]).abs() < 1e-15);
        }
        assert!(p.constraints.membership(star, 1e-12));
    }

    #[test]
    fn hbg_interior_is_strictly_feasible_and_reproducible() {
        let p1 = make_hbg(0.3, 8).unwrap();
        let p2 = make_hbg(0.7, 8).unwrap();
        assert!(p1.constraints.strictly_feasible(&p1.interior_point));
        assert_eq!(p1.interior_point, p2.interior_point);
    }

    #[test]
    fn ghbg_is_reproducible_and_feasible() {
        let p1 = make_ghbg(0.5, 5, 7).unwrap();
        let p2 = make_ghbg(0.5, 5, 7).unwrap();
        assert_eq!(
            p1.field.eval(&p1.interior_point),
            p2.field.eval(&p2.interior_point)
        );
        assert!(p1.constraints.strictly_feasible(&p1.interior_point));
        assert!(p1.constraints.equality_residual(&p1.interior_point) < 1e-12);
    }

    #[test]
    fn gghbg_interior_in_null_space() {
        let p = make_gghbg(0.5, 15, 3).unwrap();
        assert!(p.constraints.equality_residual(&p.interior_point) < 1e-10);
        assert!(p.constraints.strictly_feasible(&p.interior_point));
        assert!(p.interior_point.amax() <= 90.0 + 1e-12);
    }

    #[test]
    fn parameter_validation() {
        assert!(make_hbg(0.5, 7).is_err());
        assert!(make_hbg(1.5, 8).is_err());
        assert!(make_ghbg(0.5, 1, 0).is_err());
        assert!(make_toy_gan(0, 1).is_err());
    }
}
