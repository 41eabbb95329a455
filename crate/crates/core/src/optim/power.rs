//! Power iteration for the Perron root of a nonnegative matrix.
//!
//! Iterates on A + I so that periodic irreducible matrices (pure cycles) still
//! converge; the residual is checked on A itself. Callers handling reducible
//! matrices should restrict to a strongly connected component first.

use super::OptimError;

/// Returns `(lambda, v)` with `|A v - lambda v|_inf <= tol * |v|_inf`. On an
/// irreducible nonnegative matrix, `lambda` approximates the spectral radius.
pub fn power_iteration(
    a: &[Vec<f64>],
    tol: f64,
    max_iters: usize,
) -> Result<(f64, Vec<f64>), OptimError> {
    let n = a.len();
    if n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(OptimError::DimensionMismatch {
            context: "power iteration requires a square matrix",
        });
    }
    for (i, row) in a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(OptimError::BadMatrixEntry { row: i, col: j });
            }
        }
    }
    if n == 1 {
        return Ok((a[0][0], vec![1.0]));
    }

    let mut x = vec![1.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        // y = (A + I) x, normalized in sup norm.
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..n {
                acc += a[i][j] * x[j];
            }
            y[i] = acc;
        }
        let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Ok((0.0, x));
        }
        for v in &mut y {
            *v /= scale;
        }
        x = y;

        // Rayleigh estimate and residual on A itself.
        let mut ax = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += a[i][j] * x[j];
            }
            ax[i] = acc;
        }
        let num: f64 = x.iter().zip(&ax).map(|(u, v)| u * v).sum();
        let den: f64 = x.iter().map(|u| u * u).sum();
        let lambda = num / den;
        residual = x
            .iter()
            .zip(&ax)
            .map(|(u, v)| (v - lambda * u).abs())
            .fold(0.0, f64::max);
        let xnorm = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if residual <= tol * xnorm {
            return Ok((lambda, x));
        }
    }
    Err(OptimError::NoConvergence {
        iterations: max_iters,
        residual,
    })
}
