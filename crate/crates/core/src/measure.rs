//! Positive measures and positive strong submeasures in generator form.
//!
//! A [`Submeasure`] stores a finite nonempty list of nonnegative measure
//! vectors; its value on a function is the maximum of the generator dot
//! products. That single formula carries the whole calculus: sup and sum of
//! submeasures are list union and Minkowski sum of generators, the norm is the
//! evaluation at the constants +-1, and domination reduces to convex-hull
//! membership of generators (support-function duality, which is exact in finite
//! dimension).

use std::collections::BTreeSet;

use thiserror::Error;

use crate::optim::{hull_membership, HullCertificate, OptimError};
use crate::space::{FiniteSpace, GroundFunction, PointSet};

/// Default absolute tolerance for hull-membership decisions.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("weight {value} at point {index} is negative or non-finite")]
    BadWeight { index: usize, value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("a submeasure requires at least one generator")]
    EmptyGenerators,
    #[error("scaling factor {0} is negative")]
    NegativeScalar(f64),
    #[error("point {point} outside the partial domain has no delta-neighbor in it")]
    DomainNotDense { point: usize },
    #[error(transparent)]
    Optim(#[from] OptimError),
}

/// A positive measure on a finite space: a nonnegative weight per point.
#[derive(Debug, Clone, PartialEq)]
pub struct Measure {
    weights: Vec<f64>,
}

impl Measure {
    pub fn new(weights: Vec<f64>) -> Result<Self, MeasureError> {
        for (index, &value) in weights.iter().enumerate() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(MeasureError::BadWeight { index, value });
            }
        }
        Ok(Measure { weights })
    }

    /// The Dirac mass at a point.
    pub fn dirac(n: usize, x: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[x] = 1.0;
        Measure { weights }
    }

    pub fn zero(n: usize) -> Self {
        Measure {
            weights: vec![0.0; n],
        }
    }

    /// Uniform probability measure on a nonempty point set.
    pub fn uniform_on(n: usize, points: &[usize]) -> Self {
        let mut weights = vec![0.0; n];
        let w = 1.0 / points.len() as f64;
        for &p in points {
            weights[p] = w;
        }
        Measure { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn support(&self) -> PointSet {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn dot(&self, phi: &GroundFunction) -> Result<f64, MeasureError> {
        if phi.len() != self.len() {
            return Err(MeasureError::DimensionMismatch {
                expected: self.len(),
                got: phi.len(),
            });
        }
        Ok(self
            .weights
            .iter()
            .zip(phi.values())
            .map(|(w, v)| w * v)
            .sum())
    }

    pub fn add(&self, other: &Measure) -> Measure {
        Measure {
            weights: self
                .weights
                .iter()
                .zip(&other.weights)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, lambda: f64) -> Measure {
        Measure {
            weights: self.weights.iter().map(|w| w * lambda).collect(),
        }
    }
}

/// Outcome of a domination test `mu1 <= mu2`, with a separating function as
/// counterexample witness when the order fails.
#[derive(Debug, Clone)]
pub struct DominationReport {
    pub holds: bool,
    /// A function with `mu1(witness) > mu2(witness) + tol` when `!holds`.
    pub witness: Option<GroundFunction>,
    /// Largest hull-membership margin over the failing generators (0 if holds).
    pub defect: f64,
}

/// A positive strong submeasure: the pointwise maximum of finitely many
/// positive measures.
#[derive(Debug, Clone)]
pub struct Submeasure {
    generators: Vec<Measure>,
    canonical: bool,
}

impl From<Measure> for Submeasure {
    fn from(m: Measure) -> Self {
        Submeasure {
            generators: vec![m],
            canonical: true,
        }
    }
}

impl Submeasure {
    pub fn new(generators: Vec<Measure>) -> Result<Self, MeasureError> {
        if generators.is_empty() {
            return Err(MeasureError::EmptyGenerators);
        }
        let dim = generators[0].len();
        for g in &generators {
            if g.len() != dim {
                return Err(MeasureError::DimensionMismatch {
                    expected: dim,
                    got: g.len(),
                });
            }
        }
        Ok(Submeasure {
            generators,
            canonical: false,
        })
    }

    pub fn dirac(n: usize, x: usize) -> Self {
        Measure::dirac(n, x).into()
    }

    /// The top submeasure `sup_x delta_x`, of mass one on every evaluation of a
    /// nonnegative function's maximum.
    pub fn top(n: usize) -> Self {
        Submeasure {
            generators: (0..n).map(|x| Measure::dirac(n, x)).collect(),
            canonical: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    pub fn generators(&self) -> &[Measure] {
        &self.generators
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    /// `mu(phi) = max over generators of the dot product`.
    pub fn evaluate(&self, phi: &GroundFunction) -> Result<f64, MeasureError> {
        let mut best = f64::NEG_INFINITY;
        for g in &self.generators {
            best = best.max(g.dot(phi)?);
        }
        Ok(best)
    }

    /// Mass, i.e. the evaluation at the constant one.
    pub fn mass(&self) -> f64 {
        self.generators
            .iter()
            .map(Measure::mass)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max(|mu(1)|, |mu(-1)|)`; for positive submeasures this is the largest
    /// generator mass.
    pub fn norm(&self) -> f64 {
        let plus = self.mass();
        let minus = self
            .generators
            .iter()
            .map(|g| -g.mass())
            .fold(f64::NEG_INFINITY, f64::max);
        plus.abs().max(minus.abs())
    }

    /// Removes generators lying in the convex hull of the others. Exact
    /// duplicates collapse first (cheap, keeps the first copy); the remaining
    /// list is scanned in stored order and the first hull-redundant generator
    /// is removed first, so surviving generators keep their relative order.
    pub fn canonicalize(&self) -> Result<Submeasure, MeasureError> {
        self.canonicalize_with_tol(DEFAULT_TOL)
    }

    pub fn canonicalize_with_tol(&self, tol: f64) -> Result<Submeasure, MeasureError> {
        let mut kept = dedupe_exact(&self.generators);
        let mut i = 0;
        while i < kept.len() {
            if kept.len() == 1 {
                break;
            }
            let others: Vec<Vec<f64>> = kept
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, g)| g.weights().to_vec())
                .collect();
            let cert = hull_membership(kept[i].weights(), &others, tol)?;
            if cert.is_member() {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(Submeasure {
            generators: kept,
            canonical: true,
        })
    }

    /// `sup(mu1, mu2)`: generator-list union, so that
    /// `sup(mu1, mu2)(phi) = max(mu1(phi), mu2(phi))` pointwise.
    pub fn sup_combine(&self, other: &Submeasure) -> Result<Submeasure, MeasureError> {
        self.check_dim(other)?;
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        Ok(Submeasure {
            generators,
            canonical: false,
        })
    }

    /// Minkowski sum of the generator lists, so that
    /// `(mu1 + mu2)(phi) = mu1(phi) + mu2(phi)` pointwise.
    pub fn add(&self, other: &Submeasure) -> Result<Submeasure, MeasureError> {
        self.check_dim(other)?;
        let mut generators = Vec::with_capacity(self.generators.len() * other.generators.len());
        for a in &self.generators {
            for b in &other.generators {
                generators.push(a.add(b));
            }
        }
        Ok(Submeasure {
            generators,
            canonical: false,
        })
    }

    pub fn scale(&self, lambda: f64) -> Result<Submeasure, MeasureError> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(MeasureError::NegativeScalar(lambda));
        }
        Ok(Submeasure {
            generators: self.generators.iter().map(|g| g.scale(lambda)).collect(),
            canonical: self.canonical && lambda > 0.0,
        })
    }

    fn check_dim(&self, other: &Submeasure) -> Result<(), MeasureError> {
        if self.dim() != other.dim() {
            return Err(MeasureError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }

    /// Set function: for finite spaces every subset is clopen, so the closed and
    /// open variants coincide with the evaluation at the indicator. The `kind`
    /// parameter is kept for interface fidelity.
    pub fn set_value(&self, a: &PointSet, _kind: SetKind) -> Result<f64, MeasureError> {
        let phi = GroundFunction::indicator(self.dim(), a);
        self.evaluate(&phi)
    }
}

/// Collapses bitwise-identical weight vectors, keeping first occurrences in
/// stored order.
pub fn dedupe_exact(generators: &[Measure]) -> Vec<Measure> {
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    let mut kept = Vec::with_capacity(generators.len());
    for g in generators {
        let key: Vec<u64> = g.weights().iter().map(|w| w.to_bits()).collect();
        if seen.insert(key) {
            kept.push(g.clone());
        }
    }
    kept
}

/// Closed or open set variant of the set function. On a finite space the two
/// coincide; the distinction is documentation, not computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    Closed,
    Open,
}

/// Decides `mu1 <= mu2` as functionals, i.e. `mu1(phi) <= mu2(phi)` for every
/// function `phi`. By support-function duality this holds exactly when every
/// generator of `mu1` lies in the convex hull of the generators of `mu2`; the
/// hull LP dual provides the separating witness otherwise.
pub fn leq(mu1: &Submeasure, mu2: &Submeasure, tol: f64) -> Result<DominationReport, MeasureError> {
    if mu1.dim() != mu2.dim() {
        return Err(MeasureError::DimensionMismatch {
            expected: mu1.dim(),
            got: mu2.dim(),
        });
    }
    let vertices: Vec<Vec<f64>> = mu2
        .generators
        .iter()
        .map(|g| g.weights().to_vec())
        .collect();
    let mut witness = None;
    let mut defect = 0.0_f64;
    for g in &mu1.generators {
        match hull_membership(g.weights(), &vertices, tol)? {
            HullCertificate::Member { .. } => {}
            HullCertificate::Separated { separator, margin } => {
                if witness.is_none() {
                    witness = Some(GroundFunction::new(separator).expect("finite separator"));
                }
                defect = defect.max(margin);
            }
        }
    }
    Ok(DominationReport {
        holds: witness.is_none(),
        witness,
        defect,
    })
}

/// Builds the default weak-convergence test family on an `n`-point space: every
/// coordinate indicator, every complement indicator, and the constants +-1.
pub fn default_test_basis(n: usize) -> Vec<GroundFunction> {
    let mut basis = Vec::with_capacity(2 * n + 2);
    for i in 0..n {
        let single: PointSet = BTreeSet::from([i]);
        basis.push(GroundFunction::indicator(n, &single));
        let complement: PointSet = (0..n).filter(|&j| j != i).collect();
        basis.push(GroundFunction::indicator(n, &complement));
    }
    basis.push(GroundFunction::constant(n, 1.0));
    basis.push(GroundFunction::constant(n, -1.0));
    basis
}

/// Largest evaluation discrepancy over a test family. Zero means agreement on
/// the family only; it certifies equality just on spaces small enough for the
/// family to be separating.
pub fn weak_distance(
    mu1: &Submeasure,
    mu2: &Submeasure,
    basis: Option<&[GroundFunction]>,
) -> Result<f64, MeasureError> {
    let default;
    let basis = match basis {
        Some(b) => b,
        None => {
            default = default_test_basis(mu1.dim());
            &default
        }
    };
    let mut worst = 0.0_f64;
    for phi in basis {
        worst = worst.max((mu1.evaluate(phi)? - mu2.evaluate(phi)?).abs());
    }
    Ok(worst)
}

/// Upper-semicontinuous extension at resolution delta: the value at a point
/// outside `u` is the maximum of `g` over the delta-neighborhood intersected
/// with `u`. Restriction to `u` is the identity.
pub fn usc_extend(
    space: &FiniteSpace,
    u: &PointSet,
    g: &GroundFunction,
    delta: f64,
) -> Result<GroundFunction, MeasureError> {
    if g.len() != space.len() {
        return Err(MeasureError::DimensionMismatch {
            expected: space.len(),
            got: g.len(),
        });
    }
    let mut values = vec![0.0; space.len()];
    for x in 0..space.len() {
        if u.contains(&x) {
            values[x] = g.get(x);
        } else {
            let nb = space.neighborhood(x, delta);
            let mut best = f64::NEG_INFINITY;
            for y in nb.intersection(u) {
                best = best.max(g.get(*y));
            }
            if best == f64::NEG_INFINITY {
                return Err(MeasureError::DomainNotDense { point: x });
            }
            values[x] = best;
        }
    }
    Ok(GroundFunction::new(values).expect("finite extension values"))
}
