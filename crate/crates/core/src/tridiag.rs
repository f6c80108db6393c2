//! Lowest eigenpair of a real symmetric tridiagonal matrix.
//!
//! Bisection on the Sturm count brackets the smallest eigenvalue; inverse
//! iteration with a shift just below it recovers the eigenvector. Shifting
//! from below keeps `T - σI` positive definite, so the unpivoted `LDLᵀ`
//! solve is stable.

use crate::error::{Error, Result};

/// Number of eigenvalues strictly below `x` (negative pivots of `T - xI`).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let pivmin = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = diag[i] - x - coupling;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing every eigenvalue.
pub fn gershgorin(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// Bracket `[lo, hi]` around the smallest eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Bracket {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// Bisects the Sturm count until the bracket is narrower than `tol` or
/// cannot be split further in floating point.
pub fn lowest_eigenvalue(diag: &[f64], off: &[f64], tol: f64) -> Result<Bracket> {
    if diag.is_empty() || off.len() + 1 != diag.len() {
        return Err(Error::contract(format!(
            "tridiagonal shape mismatch: {} diagonal, {} off-diagonal entries",
            diag.len(),
            off.len()
        )));
    }
    let (mut lo, mut hi) = gershgorin(diag, off);
    let pad = f64::EPSILON * lo.abs().max(hi.abs()).max(1.0);
    lo -= pad;
    hi += pad;
    let mut iterations = 0;
    while hi - lo > tol && iterations < 256 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(Bracket { lo, hi, iterations })
}

/// Solves `(T - σI) y = b` by `LDLᵀ`; `None` if a pivot is not positive.
fn solve_shifted_spd(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut pivots = Vec::with_capacity(n);
    let mut lower = vec![0.0; n];
    for i in 0..n {
        let d = if i == 0 {
            diag[0] - shift
        } else {
            lower[i] = off[i - 1] / pivots[i - 1];
            diag[i] - shift - lower[i] * off[i - 1]
        };
        if d.is_nan() || d <= 0.0 {
            return None;
        }
        pivots.push(d);
    }
    let mut y = b.to_vec();
    for i in 1..n {
        y[i] -= lower[i] * y[i - 1];
    }
    y[n - 1] /= pivots[n - 1];
    for i in (0..n - 1).rev() {
        y[i] = y[i] / pivots[i] - lower[i + 1] * y[i + 1];
    }
    Some(y)
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
}

/// Eigenvector for the eigenvalue just above `shift`, unit 2-norm.
///
/// Converged when successive sign-aligned iterates differ by less than
/// `tol` in 2-norm. Returns the vector and the iteration count.
pub fn inverse_iteration(
    diag: &[f64],
    off: &[f64],
    shift: f64,
    max_iter: usize,
    tol: f64,
) -> Result<(Vec<f64>, usize)> {
    let n = diag.len();
    let mut shift = shift;
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut retreats = 0;
    let mut iter = 0;
    while iter < max_iter {
        let Some(mut y) = solve_shifted_spd(diag, off, shift, &x) else {
            // shift landed on or above the eigenvalue; step further below
            retreats += 1;
            if retreats > 60 {
                break;
            }
            shift -= (1e-12 * 2f64.powi(retreats)).max(f64::EPSILON * shift.abs());
            continue;
        };
        iter += 1;
        normalize(&mut y);
        let dot: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        if dot < 0.0 {
            y.iter_mut().for_each(|v| *v = -*v);
        }
        let diff = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        x = y;
        if diff < tol {
            return Ok((x, iter));
        }
    }
    Err(Error::Numeric {
        message: "inverse iteration did not converge".into(),
        iterations: iter,
    })
}
