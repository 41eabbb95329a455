//! Concave maximization over a polytope by conditional gradient.
//!
//! The solver only touches the feasible region through a linear maximization
//! oracle (one simplex solve per step), so any polytope expressible with linear
//! equalities/inequalities over nonnegative variables works. Away steps over
//! the active vertex set avoid the zig-zagging that plain conditional gradient
//! suffers near faces, which matters for entropy-like objectives whose gradient
//! blows up at the boundary.

use super::lp::{solve_lp, StandardForm};
use super::OptimError;

/// A concave objective with a gradient oracle.
pub trait ConcaveObjective {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], grad: &mut [f64]);
}

/// Feasible region `{ x >= 0 : eq_rows x = eq_rhs, ub_rows x <= ub_rhs }`.
#[derive(Debug, Clone, Default)]
pub struct Polytope {
    pub dim: usize,
    pub eq_rows: Vec<Vec<f64>>,
    pub eq_rhs: Vec<f64>,
    pub ub_rows: Vec<Vec<f64>>,
    pub ub_rhs: Vec<f64>,
}

impl Polytope {
    pub fn new(dim: usize) -> Self {
        Polytope {
            dim,
            ..Default::default()
        }
    }

    pub fn equality(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.dim);
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn upper_bound(&mut self, row: Vec<f64>, rhs: f64) {
        assert_eq!(row.len(), self.dim);
        self.ub_rows.push(row);
        self.ub_rhs.push(rhs);
    }

    /// Linear maximization oracle: a vertex maximizing `dir . x`.
    pub fn maximize_linear(&self, dir: &[f64]) -> Result<Vec<f64>, OptimError> {
        let slacks = self.ub_rows.len();
        let n = self.dim + slacks;
        let mut rows = Vec::with_capacity(self.eq_rows.len() + slacks);
        let mut rhs = Vec::with_capacity(self.eq_rows.len() + slacks);
        for (row, &b) in self.eq_rows.iter().zip(&self.eq_rhs) {
            let mut r = vec![0.0; n];
            r[..self.dim].copy_from_slice(row);
            rows.push(r);
            rhs.push(b);
        }
        for (k, (row, &b)) in self.ub_rows.iter().zip(&self.ub_rhs).enumerate() {
            let mut r = vec![0.0; n];
            r[..self.dim].copy_from_slice(row);
            r[self.dim + k] = 1.0;
            rows.push(r);
            rhs.push(b);
        }
        let mut objective = vec![0.0; n];
        for (c, &d) in objective.iter_mut().zip(dir) {
            *c = -d;
        }
        let sol = solve_lp(&StandardForm {
            objective,
            rows,
            rhs,
        })?;
        Ok(sol.x[..self.dim].to_vec())
    }
}

/// Result of a conditional-gradient run.
#[derive(Debug, Clone)]
pub struct FwOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// Final duality gap `grad . (s - x)`; an upper bound on the suboptimality.
    pub gap: f64,
    pub iterations: usize,
    /// Objective value after each iteration; non-decreasing with line search.
    pub value_trace: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Bisection line search for the concave 1-d section `gamma -> f(x + gamma d)`.
fn line_search(
    obj: &dyn ConcaveObjective,
    x: &[f64],
    d: &[f64],
    gamma_max: f64,
    grad_buf: &mut [f64],
) -> f64 {
    let probe = |gamma: f64, grad_buf: &mut [f64]| -> f64 {
        let point: Vec<f64> = x
            .iter()
            .zip(d)
            .map(|(xi, di)| (xi + gamma * di).max(0.0))
            .collect();
        obj.gradient(&point, grad_buf);
        dot(grad_buf, d)
    };
    let mut lo = 0.0;
    let mut hi = gamma_max;
    if probe(hi, grad_buf) >= 0.0 {
        return hi;
    }
    if probe(lo, grad_buf) <= 0.0 {
        return lo;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if probe(mid, grad_buf) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn vertex_key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|x| (x * 1e10).round() as i64).collect()
}

/// Maximizes a concave objective over a polytope with away-step conditional
/// gradient. Deterministic: the start point is the average of a fixed family of
/// oracle vertices and all tie-breaking is index-based.
pub fn maximize_concave_over_polytope(
    obj: &dyn ConcaveObjective,
    polytope: &Polytope,
    tol: f64,
    max_iters: usize,
) -> Result<FwOutcome, OptimError> {
    let dim = polytope.dim;
    // Seed vertices: the ones direction plus coordinate directions.
    let mut seeds: Vec<Vec<f64>> = vec![vec![1.0; dim]];
    for j in 0..dim.min(8) {
        let mut dir = vec![0.0; dim];
        dir[j] = 1.0;
        seeds.push(dir);
    }
    let mut active: Vec<(Vec<f64>, f64)> = Vec::new();
    for dir in &seeds {
        let v = polytope.maximize_linear(dir)?;
        if !active.iter().any(|(w, _)| vertex_key(w) == vertex_key(&v)) {
            active.push((v, 0.0));
        }
    }
    let k = active.len() as f64;
    for entry in &mut active {
        entry.1 = 1.0 / k;
    }
    let mut x = vec![0.0; dim];
    for (v, w) in &active {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += w * vi;
        }
    }

    let mut grad = vec![0.0; dim];
    let mut grad_buf = vec![0.0; dim];
    let mut gap = f64::INFINITY;
    let mut value_trace = Vec::new();
    for iter in 0..max_iters {
        obj.gradient(&x, &mut grad);
        let s = polytope.maximize_linear(&grad)?;
        let fw_dir: Vec<f64> = s.iter().zip(&x).map(|(si, xi)| si - xi).collect();
        gap = dot(&grad, &fw_dir);
        if gap <= tol {
            return Ok(FwOutcome {
                value: obj.value(&x),
                x,
                gap: gap.max(0.0),
                iterations: iter,
                value_trace,
            });
        }
        // Away vertex: worst active vertex under the current gradient.
        let away_idx = (0..active.len())
            .min_by(|&a, &b| {
                dot(&grad, &active[a].0)
                    .partial_cmp(&dot(&grad, &active[b].0))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("active set is nonempty");
        let away_dir: Vec<f64> = x
            .iter()
            .zip(&active[away_idx].0)
            .map(|(xi, vi)| xi - vi)
            .collect();
        let away_slope = dot(&grad, &away_dir);
        let alpha_away = active[away_idx].1;

        let use_away = away_slope > gap && alpha_away < 1.0 - 1e-12;
        if use_away {
            let gamma_max = alpha_away / (1.0 - alpha_away);
            let gamma = line_search(obj, &x, &away_dir, gamma_max, &mut grad_buf);
            if gamma > 0.0 {
                for (xi, di) in x.iter_mut().zip(&away_dir) {
                    *xi = (*xi + gamma * di).max(0.0);
                }
                let scale = 1.0 + gamma;
                for entry in &mut active {
                    entry.1 *= scale;
                }
                active[away_idx].1 -= gamma;
            }
        } else {
            let gamma = line_search(obj, &x, &fw_dir, 1.0, &mut grad_buf);
            if gamma >= 1.0 - 1e-12 {
                x = s.clone();
                active.clear();
                active.push((s, 1.0));
            } else if gamma > 0.0 {
                for (xi, di) in x.iter_mut().zip(&fw_dir) {
                    *xi = (*xi + gamma * di).max(0.0);
                }
                for entry in &mut active {
                    entry.1 *= 1.0 - gamma;
                }
                let key = vertex_key(&s);
                match active.iter_mut().find(|(w, _)| vertex_key(w) == key) {
                    Some(entry) => entry.1 += gamma,
                    None => active.push((s, gamma)),
                }
            }
        }
        active.retain(|(_, w)| *w > 1e-14);
        value_trace.push(obj.value(&x));
        // Periodically resynchronize x with its convex decomposition.
        if iter % 128 == 127 {
            let total: f64 = active.iter().map(|(_, w)| w).sum();
            if total > 0.0 {
                for entry in &mut active {
                    entry.1 /= total;
                }
            }
            x.fill(0.0);
            for (v, w) in &active {
                for (xi, vi) in x.iter_mut().zip(v) {
                    *xi += w * vi;
                }
            }
        }
    }
    Err(OptimError::NoConvergence {
        iterations: max_iters,
        residual: gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        center: Vec<f64>,
    }

    impl ConcaveObjective for Quadratic {
        fn value(&self, x: &[f64]) -> f64 {
            -x.iter()
                .zip(&self.center)
                .map(|(xi, ci)| (xi - ci) * (xi - ci))
                .sum::<f64>()
        }
        fn gradient(&self, x: &[f64], grad: &mut [f64]) {
            for ((g, xi), ci) in grad.iter_mut().zip(x).zip(&self.center) {
                *g = -2.0 * (xi - ci);
            }
        }
    }

    struct NegEntropy;

    impl ConcaveObjective for NegEntropy {
        fn value(&self, x: &[f64]) -> f64 {
            -x.iter()
                .map(|&xi| if xi > 0.0 { xi * xi.ln() } else { 0.0 })
                .sum::<f64>()
        }
        fn gradient(&self, x: &[f64], grad: &mut [f64]) {
            for (g, &xi) in grad.iter_mut().zip(x) {
                *g = -(xi.max(1e-300).ln() + 1.0);
            }
        }
    }

    fn simplex(dim: usize) -> Polytope {
        let mut p = Polytope::new(dim);
        p.equality(vec![1.0; dim], 1.0);
        p
    }

    #[test]
    fn box_quadratic_finds_interior_center() {
        // Box 0 <= x <= 1 in 3 variables, center strictly inside.
        let mut p = Polytope::new(3);
        for j in 0..3 {
            let mut row = vec![0.0; 3];
            row[j] = 1.0;
            p.upper_bound(row, 1.0);
        }
        let obj = Quadratic {
            center: vec![0.3, 0.7, 0.5],
        };
        let out = maximize_concave_over_polytope(&obj, &p, 1e-10, 20_000).unwrap();
        for (xi, ci) in out.x.iter().zip(&obj.center) {
            assert!((xi - ci).abs() < 1e-5, "x={:?}", out.x);
        }
    }

    #[test]
    fn entropy_over_simplex_is_uniform() {
        for k in [2usize, 3, 5] {
            let p = simplex(k);
            let out = maximize_concave_over_polytope(&NegEntropy, &p, 1e-9, 50_000).unwrap();
            let expect = (k as f64).ln();
            assert!(
                (out.value - expect).abs() < 1e-6,
                "k={k} value={} expect={expect}",
                out.value
            );
            for xi in &out.x {
                assert!((xi - 1.0 / k as f64).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn entropy_over_half_simplex_hits_the_boundary() {
        // One-dimensional calculus on the active boundary x0 = 0.2 gives the
        // optimum (0.2, 0.8) with value -0.2 ln 0.2 - 0.8 ln 0.8.
        let mut p = simplex(2);
        p.upper_bound(vec![1.0, 0.0], 0.2);
        let expect = -(0.2_f64 * 0.2_f64.ln() + 0.8 * 0.8_f64.ln());
        let out = maximize_concave_over_polytope(&NegEntropy, &p, 1e-9, 50_000).unwrap();
        assert!(
            (out.value - expect).abs() < 1e-6,
            "value={} expect={expect}",
            out.value
        );
        assert!((out.x[0] - 0.2).abs() < 1e-5);
        assert!((out.x[1] - 0.8).abs() < 1e-5);
    }

    #[test]
    fn infeasible_polytope_is_reported() {
        let mut p = simplex(2);
        p.equality(vec![1.0, 1.0], 2.0);
        let err = maximize_concave_over_polytope(&NegEntropy, &p, 1e-9, 100).unwrap_err();
        assert!(matches!(err, OptimError::Infeasible));
    }

    #[test]
    fn gap_certifies_suboptimality() {
        let p = simplex(4);
        let out = maximize_concave_over_polytope(&NegEntropy, &p, 1e-8, 50_000).unwrap();
        assert!(out.gap <= 1e-8);
        assert!(out.value <= 4.0_f64.ln() + 1e-9);
        assert!(out.value + out.gap >= 4.0_f64.ln() - 1e-9);
    }

    #[test]
    fn value_sequence_is_non_decreasing() {
        let mut p = simplex(3);
        p.upper_bound(vec![1.0, 0.0, 0.0], 0.15);
        let out = maximize_concave_over_polytope(&NegEntropy, &p, 1e-9, 50_000).unwrap();
        for pair in out.value_trace.windows(2) {
            assert!(
                pair[1] >= pair[0] - 1e-12,
                "line search must not lose value"
            );
        }
    }
}
