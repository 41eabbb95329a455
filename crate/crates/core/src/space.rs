//! Finite metric spaces and real-valued functions on their points.
//!
//! A [`FiniteSpace`] is a labelled point set with a full distance matrix that is
//! validated to be a genuine metric. Delta-neighborhoods of points drive the
//! cluster-set semantics of partially defined maps and the upper-semicontinuous
//! extension operator, so the metric is checked strictly at construction.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

/// Sorted set of point indices.
pub type PointSet = BTreeSet<usize>;

/// Which metric axiom a distance matrix violates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricViolationKind {
    Asymmetry,
    NonzeroDiagonal,
    NonpositiveOffDiagonal,
    TriangleFailure,
}

impl std::fmt::Display for MetricViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            MetricViolationKind::Asymmetry => "asymmetry",
            MetricViolationKind::NonzeroDiagonal => "nonzero diagonal",
            MetricViolationKind::NonpositiveOffDiagonal => "nonpositive off-diagonal",
            MetricViolationKind::TriangleFailure => "triangle inequality failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("distance matrix shape {rows}x{cols} does not match {n} labels")]
    DimensionMismatch { n: usize, rows: usize, cols: usize },
    #[error("{kind} at triple ({i}, {j}, {k})")]
    MetricViolation {
        i: usize,
        j: usize,
        k: usize,
        kind: MetricViolationKind,
    },
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },
    #[error("duplicate label {label:?}")]
    DuplicateLabel { label: String },
    #[error("space must contain at least one point")]
    Empty,
}

/// A finite metric space: labelled points plus a validated distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
}

/// Relative slack for the triangle check, absorbing roundoff in distances that
/// satisfy the inequality exactly in real arithmetic (e.g. chordal distances).
const TRIANGLE_SLACK: f64 = 1e-9;

impl FiniteSpace {
    /// Validates and builds a space. The matrix must be symmetric with zero
    /// diagonal, strictly positive off-diagonal, and satisfy the triangle
    /// inequality for every triple.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Arc<Self>, SpaceError> {
        let n = labels.len();
        if n == 0 {
            return Err(SpaceError::Empty);
        }
        {
            let mut seen = BTreeSet::new();
            for l in &labels {
                if !seen.insert(l.clone()) {
                    return Err(SpaceError::DuplicateLabel { label: l.clone() });
                }
            }
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(SpaceError::DimensionMismatch {
                n,
                rows: dist.len(),
                cols: dist.first().map_or(0, |r| r.len()),
            });
        }
        let mut scale: f64 = 0.0;
        for (i, row) in dist.iter().enumerate() {
            for (j, &d) in row.iter().enumerate() {
                if !d.is_finite() {
                    return Err(SpaceError::NonFinite { index: i * n + j });
                }
                scale = scale.max(d.abs());
                if i == j && d != 0.0 {
                    return Err(SpaceError::MetricViolation {
                        i,
                        j: i,
                        k: i,
                        kind: MetricViolationKind::NonzeroDiagonal,
                    });
                }
                if i != j && d <= 0.0 {
                    return Err(SpaceError::MetricViolation {
                        i,
                        j,
                        k: j,
                        kind: MetricViolationKind::NonpositiveOffDiagonal,
                    });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if (dist[i][j] - dist[j][i]).abs() > TRIANGLE_SLACK * scale.max(1.0) {
                    return Err(SpaceError::MetricViolation {
                        i,
                        j,
                        k: i,
                        kind: MetricViolationKind::Asymmetry,
                    });
                }
            }
        }
        let slack = TRIANGLE_SLACK * scale.max(1.0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if dist[i][k] > dist[i][j] + dist[j][k] + slack {
                        return Err(SpaceError::MetricViolation {
                            i,
                            j,
                            k,
                            kind: MetricViolationKind::TriangleFailure,
                        });
                    }
                }
            }
        }
        Ok(Arc::new(FiniteSpace { labels, dist }))
    }

    /// Number of points.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    /// Closed delta-ball around `x`; always contains `x` itself.
    pub fn neighborhood(&self, x: usize, delta: f64) -> PointSet {
        assert!(delta >= 0.0, "neighborhood radius must be nonnegative");
        (0..self.len())
            .filter(|&y| self.dist[x][y] <= delta)
            .collect()
    }

    /// Smallest off-diagonal distance.
    pub fn min_positive_distance(&self) -> f64 {
        let n = self.len();
        let mut m = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.min(self.dist[i][j]);
                }
            }
        }
        m
    }

    /// Diameter of the space.
    pub fn max_distance(&self) -> f64 {
        self.dist
            .iter()
            .flat_map(|row| row.iter().copied())
            .fold(0.0, f64::max)
    }
}

/// A real-valued function on the points of a space, stored as a dense vector.
/// Every entry must be finite; upper-semicontinuity in the continuum picture is
/// carried by the extension operator, not by this type.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundFunction {
    values: Vec<f64>,
}

impl GroundFunction {
    pub fn new(values: Vec<f64>) -> Result<Self, SpaceError> {
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(SpaceError::NonFinite { index });
        }
        Ok(GroundFunction { values })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        GroundFunction { values: vec![c; n] }
    }

    /// Characteristic function of a point set.
    pub fn indicator(n: usize, set: &PointSet) -> Self {
        let mut values = vec![0.0; n];
        for &i in set {
            if i < n {
                values[i] = 1.0;
            }
        }
        GroundFunction { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn add(&self, other: &GroundFunction) -> GroundFunction {
        assert_eq!(self.len(), other.len());
        GroundFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, lambda: f64) -> GroundFunction {
        GroundFunction {
            values: self.values.iter().map(|v| v * lambda).collect(),
        }
    }

    /// Pointwise order: self >= other everywhere.
    pub fn dominates(&self, other: &GroundFunction) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a >= b)
    }
}
