//! Central finite differences, used as Jacobian fallback and by the
//! derivative consistency checks.

use nalgebra::{DMatrix, DVector};

/// Per-coordinate step: cube root of machine epsilon, scaled to the
/// coordinate's magnitude.
fn step(xi: f64) -> f64 {
    f64::EPSILON.cbrt() * (1.0 + xi.abs())
}

pub fn central_gradient(f: &dyn Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    let n = x.len();
    let mut g = DVector::zeros(n);
    let mut xp = x.clone();
    for i in 0..n {
        let h = step(x[i]);
        xp[i] = x[i] + h;
        let fp = f(&xp);
        xp[i] = x[i] - h;
        let fm = f(&xp);
        xp[i] = x[i];
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

pub fn central_jacobian(
    f: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
) -> DMatrix<f64> {
    let n = x.len();
    let m = f(x).len();
    let mut j = DMatrix::zeros(m, n);
    let mut xp = x.clone();
    for col in 0..n {
        let h = step(x[col]);
        xp[col] = x[col] + h;
        let fp = f(&xp);
        xp[col] = x[col] - h;
        let fm = f(&xp);
        xp[col] = x[col];
        for row in 0..m {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

/// Max relative deviation between two same-shaped matrices, with an absolute
/// floor so near-zero entries compare absolutely.
pub fn max_relative_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for (ea, eb) in a.iter().zip(b.iter()) {
        let scale = ea.abs().max(eb.abs()).max(1.0);
        worst = worst.max((ea - eb).abs() / scale);
    }
    worst
}
