//! Convex-hull membership with verifiable certificates.
//!
//! Membership of `v` in the hull of a vertex list is decided by minimizing the
//! L1 reconstruction error over convex coefficients, a single LP whose dual
//! solution furnishes a separating functional when the point is outside. Both
//! branches of the certificate can be rechecked by direct arithmetic.

use super::lp::{solve_lp, StandardForm};
use super::OptimError;

/// Outcome of a hull-membership query.
#[derive(Debug, Clone)]
pub enum HullCertificate {
    /// Convex coefficients over the vertex list reconstructing the query point.
    Member { coefficients: Vec<f64> },
    /// A functional with `separator . v >= max_i separator . vertex_i + margin`.
    Separated { separator: Vec<f64>, margin: f64 },
}

impl HullCertificate {
    pub fn is_member(&self) -> bool {
        matches!(self, HullCertificate::Member { .. })
    }

    /// Recomputes the certificate claim by direct arithmetic.
    pub fn verify(&self, v: &[f64], vertices: &[Vec<f64>], tol: f64) -> bool {
        match self {
            HullCertificate::Member { coefficients } => {
                if coefficients.len() != vertices.len() {
                    return false;
                }
                if coefficients.iter().any(|&c| c < -1e-12) {
                    return false;
                }
                let sum: f64 = coefficients.iter().sum();
                if (sum - 1.0).abs() > 1e-9 {
                    return false;
                }
                for (i, &vi) in v.iter().enumerate() {
                    let rec: f64 = coefficients
                        .iter()
                        .zip(vertices)
                        .map(|(c, vert)| c * vert[i])
                        .sum();
                    if (rec - vi).abs() > tol.max(1e-12) * 10.0 {
                        return false;
                    }
                }
                true
            }
            HullCertificate::Separated { separator, margin } => {
                if *margin <= 0.0 {
                    return false;
                }
                let sv: f64 = separator.iter().zip(v).map(|(s, x)| s * x).sum();
                let best: f64 = vertices
                    .iter()
                    .map(|vert| separator.iter().zip(vert).map(|(s, x)| s * x).sum::<f64>())
                    .fold(f64::NEG_INFINITY, f64::max);
                sv >= best + margin - 1e-9
            }
        }
    }
}

/// Decides whether `v` lies in the convex hull of `vertices` up to an absolute
/// tolerance on the L1 reconstruction error.
pub fn hull_membership(
    v: &[f64],
    vertices: &[Vec<f64>],
    tol: f64,
) -> Result<HullCertificate, OptimError> {
    let d = v.len();
    if vertices.is_empty() || vertices.iter().any(|w| w.len() != d) {
        return Err(OptimError::DimensionMismatch {
            context: "hull membership requires nonempty vertices of equal dimension",
        });
    }
    let m = vertices.len();
    // Columns: lambda (m), e+ (d), e- (d).
    let n = m + 2 * d;
    let mut rows = Vec::with_capacity(d + 1);
    for i in 0..d {
        let mut row = vec![0.0; n];
        for (j, vert) in vertices.iter().enumerate() {
            row[j] = vert[i];
        }
        row[m + i] = 1.0;
        row[m + d + i] = -1.0;
        rows.push(row);
    }
    let mut sum_row = vec![0.0; n];
    for cell in sum_row.iter_mut().take(m) {
        *cell = 1.0;
    }
    rows.push(sum_row);
    let mut rhs: Vec<f64> = v.to_vec();
    rhs.push(1.0);
    let mut objective = vec![0.0; n];
    for cell in objective.iter_mut().skip(m) {
        *cell = 1.0;
    }
    let sol = solve_lp(&StandardForm {
        objective,
        rows,
        rhs,
    })?;

    if sol.value <= tol {
        let mut coefficients: Vec<f64> = sol.x[..m].iter().map(|&c| c.max(0.0)).collect();
        let total: f64 = coefficients.iter().sum();
        if total > 0.0 {
            for c in &mut coefficients {
                *c /= total;
            }
        }
        Ok(HullCertificate::Member { coefficients })
    } else {
        let separator: Vec<f64> = sol.duals[..d].to_vec();
        let sv: f64 = separator.iter().zip(v).map(|(s, x)| s * x).sum();
        let best: f64 = vertices
            .iter()
            .map(|vert| separator.iter().zip(vert).map(|(s, x)| s * x).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let margin = sv - best;
        if margin <= 0.0 {
            // The dual should always separate when the L1 distance is positive.
            return Err(OptimError::NumericalStall);
        }
        Ok(HullCertificate::Separated { separator, margin })
    }
}
