//! Dense two-phase simplex for small linear programs in standard form.
//!
//! Minimizes `c . x` subject to `A x = b`, `x >= 0`. Entering column by
//! steepest (Dantzig) pricing with a switch to Bland's rule past a soft
//! iteration cap as the cycling backstop; leaving row by exact minimum ratio
//! with ties broken toward the largest pivot element. The tableau is
//! refactorized from the original data at regular pivot intervals, so
//! round-off cannot accumulate across long degenerate pivot sequences, and
//! the final solution is rechecked against the original rows.

use super::OptimError;

/// `min objective . x  s.t.  rows x = rhs, x >= 0`.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// One multiplier per original row (zero for rows found redundant).
    pub duals: Vec<f64>,
}

const EPS_RC: f64 = 1e-10;
const EPS_PIVOT: f64 = 1e-11;
const FEAS_TOL: f64 = 1e-8;
const REFACTOR_EVERY: usize = 40;

struct Tableau {
    /// Original normalized data `[A | I]`, kept for refactorization.
    t0: Vec<Vec<f64>>,
    b0: Vec<f64>,
    /// Current `B^{-1} [A | I]` and `B^{-1} b`.
    t: Vec<Vec<f64>>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    /// Original row index of each surviving tableau row.
    origin: Vec<usize>,
    pivots_since_refactor: usize,
}

impl Tableau {
    fn new(t0: Vec<Vec<f64>>, b0: Vec<f64>, n: usize) -> Self {
        let m = t0.len();
        Tableau {
            t: t0.clone(),
            rhs: b0.clone(),
            t0,
            b0,
            basis: (n..n + m).collect(),
            origin: (0..m).collect(),
            pivots_since_refactor: 0,
        }
    }

    fn width(&self) -> usize {
        self.t0.first().map_or(0, |r| r.len())
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.t[row][col];
        let width = self.t[row].len();
        for j in 0..width {
            self.t[row][j] /= piv;
        }
        self.rhs[row] /= piv;
        for i in 0..self.t.len() {
            if i == row {
                continue;
            }
            let factor = self.t[i][col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..width {
                self.t[i][j] -= factor * self.t[row][j];
            }
            self.rhs[i] -= factor * self.rhs[row];
            if self.rhs[i].abs() < 1e-14 {
                self.rhs[i] = 0.0;
            }
        }
        self.basis[row] = col;
        self.pivots_since_refactor += 1;
        if self.pivots_since_refactor >= REFACTOR_EVERY {
            self.refactor();
        }
    }

    /// Rebuilds `B^{-1} [A | I]` and `B^{-1} b` from the original data by
    /// Gauss-Jordan with partial pivoting on the current basis columns. Keeps
    /// the tableau exact-to-roundoff regardless of how many pivots ran.
    fn refactor(&mut self) {
        self.pivots_since_refactor = 0;
        let m = self.t.len();
        let width = self.width();
        // Augmented system [B | t0 | b0].
        let mut aug: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let mut row = Vec::with_capacity(m + width + 1);
                for &b in &self.basis {
                    row.push(self.t0[i][b]);
                }
                row.extend_from_slice(&self.t0[i]);
                row.push(self.b0[i]);
                row
            })
            .collect();
        let mut perm: Vec<usize> = (0..m).collect();
        for k in 0..m {
            let pivot_row = (k..m)
                .max_by(|&a, &b| {
                    aug[a][k]
                        .abs()
                        .partial_cmp(&aug[b][k].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("nonempty range");
            if aug[pivot_row][k].abs() < 1e-13 {
                // Numerically singular basis; keep the incremental tableau.
                return;
            }
            aug.swap(k, pivot_row);
            perm.swap(k, pivot_row);
            let piv = aug[k][k];
            for j in k..m + width + 1 {
                aug[k][j] /= piv;
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = aug[i][k];
                if f == 0.0 {
                    continue;
                }
                for j in k..m + width + 1 {
                    aug[i][j] -= f * aug[k][j];
                }
            }
        }
        // Row k of the reduced system carries the tableau row of basis slot k;
        // reorder rows so that row i keeps basis[i] as its unit column.
        let mut new_t = vec![vec![0.0; width]; m];
        let mut new_rhs = vec![0.0; m];
        for k in 0..m {
            new_t[k].copy_from_slice(&aug[k][m..m + width]);
            new_rhs[k] = aug[k][m + width].max(0.0);
        }
        // basis slot k corresponds to the k-th column of B, i.e. basis[k];
        // the reduced rows are already in slot order.
        let reorder: Vec<usize> = (0..m).collect();
        let _ = perm;
        for (slot, &row_idx) in reorder.iter().enumerate() {
            self.t[slot] = new_t[row_idx].clone();
            self.rhs[slot] = new_rhs[row_idx];
        }
    }

    fn drop_row(&mut self, row: usize) {
        self.t.remove(row);
        self.rhs.remove(row);
        self.basis.remove(row);
        self.origin.remove(row);
        self.t0.remove(row);
        self.b0.remove(row);
    }

    /// One simplex phase: minimize `cost` over the allowed column range.
    /// Dantzig pricing first; Bland's rule past the soft cap for termination.
    fn run(&mut self, cost: &[f64], allowed: usize) -> Result<(), OptimError> {
        let m = self.t.len();
        let soft_cap = 500 + 20 * (allowed + m);
        let hard_cap = soft_cap + 4000 + 80 * (allowed + m);
        for iter in 0..hard_cap {
            let bland = iter >= soft_cap;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..allowed {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut rc = cost[j];
                for i in 0..m.min(self.t.len()) {
                    let cb = cost[self.basis[i]];
                    if cb != 0.0 {
                        rc -= cb * self.t[i][j];
                    }
                }
                if rc < -EPS_RC {
                    if bland {
                        entering = Some((j, rc));
                        break;
                    }
                    if entering.is_none_or(|(_, best)| rc < best) {
                        entering = Some((j, rc));
                    }
                }
            }
            let Some((col, _)) = entering else {
                return Ok(());
            };
            // Exact minimum ratio; among near-ties prefer the largest pivot
            // element for numerical stability.
            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.t.len() {
                if self.t[i][col] > EPS_PIVOT {
                    let ratio = self.rhs[i].max(0.0) / self.t[i][col];
                    let better = match leaving {
                        None => true,
                        Some((best_i, best_r)) => {
                            ratio < best_r - 1e-12
                                || ((ratio - best_r).abs() <= 1e-12
                                    && self.t[i][col] > self.t[best_i][col])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((row, _)) = leaving else {
                if self.pivots_since_refactor > 0 {
                    // A clean tableau may restore a usable pivot column.
                    self.refactor();
                    continue;
                }
                return Err(OptimError::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(OptimError::NumericalStall)
    }
}

/// Solves the standard-form program, returning a basic optimal solution and
/// dual multipliers for the original rows.
pub fn solve_lp(lp: &StandardForm) -> Result<LpSolution, OptimError> {
    let m = lp.rows.len();
    let n = lp.objective.len();
    if lp.rhs.len() != m || lp.rows.iter().any(|r| r.len() != n) {
        return Err(OptimError::DimensionMismatch {
            context: "standard form shapes disagree",
        });
    }
    let mut sign = vec![1.0; m];
    let mut t0 = Vec::with_capacity(m);
    let mut b0 = Vec::with_capacity(m);
    for i in 0..m {
        let flip = lp.rhs[i] < 0.0;
        if flip {
            sign[i] = -1.0;
        }
        let mut row = vec![0.0; n + m];
        for j in 0..n {
            row[j] = if flip { -lp.rows[i][j] } else { lp.rows[i][j] };
        }
        row[n + i] = 1.0;
        t0.push(row);
        b0.push(lp.rhs[i].abs());
    }
    let mut tab = Tableau::new(t0, b0, n);

    // Phase 1: drive out the artificials.
    let mut phase1_cost = vec![0.0; n + m];
    for c in phase1_cost.iter_mut().skip(n) {
        *c = 1.0;
    }
    tab.run(&phase1_cost, n)?;
    let infeas: f64 = tab
        .basis
        .iter()
        .zip(&tab.rhs)
        .filter(|(b, _)| **b >= n)
        .map(|(_, v)| v)
        .sum();
    if infeas > FEAS_TOL {
        return Err(OptimError::Infeasible);
    }
    // Pivot basic artificials out on the largest structural entry; tiny pivots
    // would poison the tableau, so rows without a solid entry are treated as
    // redundant and dropped (their right side is zero at this point).
    let mut row = 0;
    while row < tab.t.len() {
        if tab.basis[row] >= n {
            let col = (0..n)
                .filter(|j| !tab.basis.contains(j))
                .max_by(|&a, &b| {
                    tab.t[row][a]
                        .abs()
                        .partial_cmp(&tab.t[row][b].abs())
                        .unwrap_or(std::cmp::Ordering::Equal)
                });
            match col {
                Some(j) if tab.t[row][j].abs() > 1e-7 => tab.pivot(row, j),
                _ => {
                    tab.drop_row(row);
                    continue;
                }
            }
        }
        row += 1;
    }

    // Phase 2 over structural columns only.
    let mut phase2_cost = vec![0.0; n + m];
    phase2_cost[..n].copy_from_slice(&lp.objective);
    tab.run(&phase2_cost, n)?;
    // Read the solution off a freshly refactorized tableau.
    tab.refactor();

    let mut x = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rhs[i].max(0.0);
        }
    }
    // The pivots must not have leaked feasibility; fail loudly if they did.
    let scale = lp
        .rhs
        .iter()
        .chain(lp.rows.iter().flatten())
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    for (row, &b) in lp.rows.iter().zip(&lp.rhs) {
        let ax: f64 = row.iter().zip(&x).map(|(a, v)| a * v).sum();
        if (ax - b).abs() > 1e-7 * scale {
            return Err(OptimError::NumericalStall);
        }
    }
    let value = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();

    // Duals from B^T y = c_B over the surviving rows of the original system.
    let mk = tab.t.len();
    let mut bt = vec![vec![0.0; mk + 1]; mk];
    for (col, &b) in tab.basis.iter().enumerate() {
        for i in 0..mk {
            let orig = tab.origin[i];
            let a = if b < n {
                sign[orig] * lp.rows[orig][b]
            } else {
                // A basic artificial can only linger at level zero.
                if b - n == orig {
                    1.0
                } else {
                    0.0
                }
            };
            bt[col][i] = a;
        }
        bt[col][mk] = if b < n { lp.objective[b] } else { 0.0 };
    }
    let y = gauss_solve(&mut bt);
    let mut duals = vec![0.0; m];
    if let Some(y) = y {
        for i in 0..mk {
            duals[tab.origin[i]] = sign[tab.origin[i]] * y[i];
        }
    }
    Ok(LpSolution { x, value, duals })
}

/// Gaussian elimination with partial pivoting on an augmented square system.
fn gauss_solve(aug: &mut [Vec<f64>]) -> Option<Vec<f64>> {
    let n = aug.len();
    for k in 0..n {
        let pivot_row = (k..n).max_by(|&a, &b| {
            aug[a][k]
                .abs()
                .partial_cmp(&aug[b][k].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if aug[pivot_row][k].abs() < 1e-12 {
            return None;
        }
        aug.swap(k, pivot_row);
        for i in k + 1..n {
            let f = aug[i][k] / aug[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..=n {
                aug[i][j] -= f * aug[k][j];
            }
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = aug[k][n];
        for j in k + 1..n {
            acc -= aug[k][j] * x[j];
        }
        x[k] = acc / aug[k][k];
    }
    Some(x)
}
