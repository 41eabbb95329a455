//! Shared brute-force oracles, independent of the solver paths they check.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

/// Gaussian elimination with partial pivoting; returns None on singularity.
/// Deliberately separate from the library's internal linear algebra.
pub fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    for k in 0..n {
        let pivot = (k..n).max_by(|&i, &j| {
            a[i][k]
                .abs()
                .partial_cmp(&a[j][k].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if a[pivot][k].abs() < 1e-12 {
            return None;
        }
        a.swap(k, pivot);
        b.swap(k, pivot);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut acc = b[k];
        for j in k + 1..n {
            acc -= a[k][j] * x[j];
        }
        x[k] = acc / a[k][k];
    }
    Some(x)
}

/// All size-k index combinations from 0..m, lexicographic.
pub fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > m {
        return out;
    }
    let mut indices: Vec<usize> = (0..k).collect();
    loop {
        out.push(indices.clone());
        let mut i = k;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            indices[i] += 1;
            if indices[i] <= m - (k - i) {
                for j in i + 1..k {
                    indices[j] = indices[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            return out;
        }
    }
}

fn subset_contains(v: &[f64], subset: &[&Vec<f64>], tol: f64) -> bool {
    let d = v.len();
    let k = subset.len();
    // Solve the (d+1) x k barycentric system by normal equations.
    let rows = d + 1;
    let entry = |r: usize, c: usize| -> f64 {
        if r < d {
            subset[c][r]
        } else {
            1.0
        }
    };
    let target = |r: usize| -> f64 {
        if r < d {
            v[r]
        } else {
            1.0
        }
    };
    let mut normal = vec![vec![0.0; k]; k];
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        for j in 0..k {
            normal[i][j] = (0..rows).map(|r| entry(r, i) * entry(r, j)).sum();
        }
        rhs[i] = (0..rows).map(|r| entry(r, i) * target(r)).sum();
    }
    let Some(lambda) = solve_dense(normal, rhs) else {
        return false;
    };
    if lambda.iter().any(|&l| l < -1e-9) {
        return false;
    }
    let mut residual = 0.0_f64;
    for r in 0..rows {
        let mut acc = -target(r);
        for (c, &l) in lambda.iter().enumerate() {
            acc += entry(r, c) * l;
        }
        residual = residual.max(acc.abs());
    }
    residual <= tol.max(1e-9)
}

/// Exhaustive hull membership by Caratheodory: `v` lies in the hull of the
/// vertices iff some subset of at most dim + 1 of them spans a simplex
/// containing it. Exponential and only intended for small vertex lists.
pub fn oracle_hull_member(v: &[f64], vertices: &[Vec<f64>], tol: f64) -> bool {
    let d = v.len();
    let m = vertices.len();
    for size in 1..=(d + 1).min(m) {
        for combo in combinations(m, size) {
            let subset: Vec<&Vec<f64>> = combo.iter().map(|&i| &vertices[i]).collect();
            if subset_contains(v, &subset, tol) {
                return true;
            }
        }
    }
    false
}

/// Weight grid {0, step, 2 step, ..., 1}^n as flat vectors.
pub fn weight_grid(n: usize, step: f64) -> Vec<Vec<f64>> {
    let levels = (1.0 / step).round() as usize + 1;
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * levels);
        for prefix in &out {
            for lvl in 0..levels {
                let mut v = prefix.clone();
                v.push(lvl as f64 * step);
                next.push(v);
            }
        }
        out = next;
    }
    out
}
