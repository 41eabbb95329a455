//! Entropy on the orbit shift of a partially defined self-map.
//!
//! The closure of forward orbits in sequence space is modeled as the vertex
//! shift of the multimap graph: admissible paths follow edges `x -> y` with `y`
//! in the image set of `x`. Topological entropy is the log spectral radius of
//! the adjacency (computed per strongly connected component, with an admissible
//! word count as the cross-checking oracle), measure entropies run over
//! stationary Markov measures parameterized by edge occupation, and the
//! submeasure entropy maximizes the concave conditional entropy over the
//! polytope of dominated stationary marginals.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::invariant::cycle_invariant_measures;
use crate::measure::{leq, Measure, MeasureError, Submeasure, DEFAULT_TOL};
use crate::multimap::{Multimap, MultimapError};
use crate::optim::{
    maximize_concave_over_polytope, power_iteration, ConcaveObjective, OptimError, Polytope,
};
use crate::space::FiniteSpace;

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("the shift is reducible; use the per-component maximum instead")]
    ReducibleGraph,
    #[error("the shift carries no admissible bi-infinite path")]
    EmptyShift,
    #[error("submeasure mass {norm} is not 1 within tolerance")]
    MassNotOne { norm: f64 },
    #[error("no dominated stationary Markov measure of mass 1 (maximal feasible mass {max_feasible_mass})")]
    Infeasible { max_feasible_mass: f64 },
    #[error("invalid Markov data: {reason}")]
    BadMeasure { reason: String },
    #[error("invalid partition: {reason}")]
    BadPartition { reason: String },
    #[error("word count overflow at length {length}")]
    Overflow { length: usize },
    #[error(transparent)]
    Multimap(#[from] MultimapError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Optim(#[from] OptimError),
}

/// The vertex shift of a multimap graph: adjacency, edge list, and the
/// strongly-connected decomposition.
#[derive(Debug, Clone)]
pub struct OrbitShift {
    space: Arc<FiniteSpace>,
    adjacency: Vec<Vec<bool>>,
    edges: Vec<(usize, usize)>,
    components: Vec<Vec<usize>>,
}

/// Builds the orbit shift of a self-map: one edge `x -> y` per image relation.
pub fn orbit_graph(f: &Multimap) -> Result<OrbitShift, MultimapError> {
    if !f.is_self_map() {
        return Err(MultimapError::SpaceMismatch {
            context: "orbit graph requires a self-map",
        });
    }
    let n = f.source().len();
    let mut adjacency = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for x in 0..n {
        for &y in f.images(x) {
            adjacency[x][y] = true;
        }
    }
    for (x, row) in adjacency.iter().enumerate() {
        for (y, &has) in row.iter().enumerate() {
            if has {
                edges.push((x, y));
            }
        }
    }
    let components = strongly_connected_components(&adjacency);
    Ok(OrbitShift {
        space: Arc::clone(f.source()),
        adjacency,
        edges,
        components,
    })
}

/// Iterative Tarjan; components are returned sorted by smallest vertex, each
/// component sorted ascending.
fn strongly_connected_components(adjacency: &[Vec<bool>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let neighbors: Vec<Vec<usize>> = adjacency
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut index = vec![usize::MAX; n];
    let mut lowlink = vec![usize::MAX; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut counter = 0usize;
    let mut components: Vec<Vec<usize>> = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call_stack: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = counter;
        lowlink[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut child)) = call_stack.last_mut() {
            if *child < neighbors[v].len() {
                let w = neighbors[v][*child];
                *child += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    lowlink[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call_stack.push((w, 0));
                } else if on_stack[w] {
                    lowlink[v] = lowlink[v].min(index[w]);
                }
            } else {
                call_stack.pop();
                if let Some(&mut (parent, _)) = call_stack.last_mut() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.sort_unstable();
                    components.push(component);
                }
            }
        }
    }
    components.sort_by_key(|c| c[0]);
    components
}

/// Per-component spectral data.
#[derive(Debug, Clone)]
pub struct ComponentInfo {
    pub vertices: Vec<usize>,
    pub rho: f64,
}

impl OrbitShift {
    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn space(&self) -> &Arc<FiniteSpace> {
        &self.space
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.adjacency[x][y]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn components(&self) -> &[Vec<usize>] {
        &self.components
    }

    pub fn is_irreducible(&self) -> bool {
        self.components.len() == 1 && self.component_has_edge(&self.components[0])
    }

    fn component_has_edge(&self, component: &[usize]) -> bool {
        component
            .iter()
            .any(|&x| component.iter().any(|&y| self.adjacency[x][y]))
    }

    fn component_matrix(&self, component: &[usize]) -> Vec<Vec<f64>> {
        component
            .iter()
            .map(|&x| {
                component
                    .iter()
                    .map(|&y| if self.adjacency[x][y] { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// Spectral radius per strongly connected component; the radius of the
    /// whole shift is the maximum. Power iteration runs on the shifted matrix,
    /// with a word-growth estimate as fallback for pathological cases.
    pub fn component_spectra(&self) -> Result<Vec<ComponentInfo>, EntropyError> {
        let mut out = Vec::with_capacity(self.components.len());
        for component in &self.components {
            let rho = if component.len() == 1 && !self.adjacency[component[0]][component[0]] {
                0.0
            } else {
                let matrix = self.component_matrix(component);
                match power_iteration(&matrix, 1e-13, 500_000) {
                    Ok((lambda, _)) => lambda,
                    Err(OptimError::NoConvergence { .. }) => word_growth_estimate(&matrix),
                    Err(e) => return Err(e.into()),
                }
            };
            out.push(ComponentInfo {
                vertices: component.clone(),
                rho,
            });
        }
        Ok(out)
    }

    pub fn spectral_radius(&self) -> Result<f64, EntropyError> {
        Ok(self
            .component_spectra()?
            .iter()
            .map(|c| c.rho)
            .fold(0.0, f64::max))
    }

    /// Number of admissible paths on `l` vertices.
    pub fn count_words(&self, l: usize) -> Result<u128, EntropyError> {
        assert!(l >= 1);
        let n = self.n();
        let mut counts: Vec<u128> = vec![1; n];
        for _ in 1..l {
            let mut next = vec![0u128; n];
            for x in 0..n {
                let mut acc: u128 = 0;
                for (y, &has) in self.adjacency[x].iter().enumerate() {
                    if has {
                        acc = acc
                            .checked_add(counts[y])
                            .ok_or(EntropyError::Overflow { length: l })?;
                    }
                }
                next[x] = acc;
            }
            counts = next;
        }
        let mut total: u128 = 0;
        for c in counts {
            total = total
                .checked_add(c)
                .ok_or(EntropyError::Overflow { length: l })?;
        }
        Ok(total)
    }

    /// The polytope of edge occupations whose stationary marginal lies in the
    /// convex hull of the given generators. Variables: one occupation per edge,
    /// then one hull coefficient per generator.
    pub fn dominated_stationary_polytope(
        &self,
        generators: &[Measure],
    ) -> (Polytope, Vec<(usize, usize)>) {
        let edges = self.edges.clone();
        let e = edges.len();
        let g = generators.len();
        let dim = e + g;
        let mut polytope = Polytope::new(dim);
        for i in 0..self.n() {
            // Row sums match the hull marginal.
            let mut row_out = vec![0.0; dim];
            for (idx, &(src, _)) in edges.iter().enumerate() {
                if src == i {
                    row_out[idx] = 1.0;
                }
            }
            for (k, chi) in generators.iter().enumerate() {
                row_out[e + k] = -chi.weight(i);
            }
            polytope.equality(row_out, 0.0);
            // Column sums match the same marginal (stationarity).
            let mut row_in = vec![0.0; dim];
            for (idx, &(_, dst)) in edges.iter().enumerate() {
                if dst == i {
                    row_in[idx] = 1.0;
                }
            }
            for (k, chi) in generators.iter().enumerate() {
                row_in[e + k] = -chi.weight(i);
            }
            polytope.equality(row_in, 0.0);
        }
        let mut simplex_row = vec![0.0; dim];
        for slot in simplex_row.iter_mut().skip(e) {
            *slot = 1.0;
        }
        polytope.equality(simplex_row, 1.0);
        (polytope, edges)
    }

    /// Assembles a Markov measure from per-edge occupation values.
    pub fn markov_from_edge_values(
        &self,
        edges: &[(usize, usize)],
        values: &[f64],
    ) -> Result<MarkovMeasure, EntropyError> {
        let n = self.n();
        let mut q = vec![vec![0.0; n]; n];
        for (&(x, y), &v) in edges.iter().zip(values) {
            q[x][y] = if v > 1e-12 { v } else { 0.0 };
        }
        MarkovMeasure::from_edge_occupation(self, q)
    }
}

/// Fallback spectral estimate from the average log growth of word counts.
fn word_growth_estimate(matrix: &[Vec<f64>]) -> f64 {
    let n = matrix.len();
    let mut v = vec![1.0; n];
    let mut logs: Vec<f64> = Vec::new();
    for _ in 0..600 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[i] += matrix[i][j] * v[j];
            }
        }
        let scale = next.iter().fold(0.0_f64, |m, x| m.max(*x));
        if scale == 0.0 {
            return 0.0;
        }
        logs.push(scale.ln());
        for x in &mut next {
            *x /= scale;
        }
        v = next;
    }
    let tail = &logs[logs.len() - 120..];
    (tail.iter().sum::<f64>() / tail.len() as f64).exp()
}

/// How to compute topological entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopEntropyMode {
    /// Log spectral radius over strongly connected components.
    Spectral,
    /// `log(#admissible paths on L vertices) / L`, an upper approximation.
    Words(usize),
}

pub fn top_entropy(shift: &OrbitShift, mode: TopEntropyMode) -> Result<f64, EntropyError> {
    match mode {
        TopEntropyMode::Spectral => {
            let rho = shift.spectral_radius()?;
            if rho <= 0.0 {
                return Err(EntropyError::EmptyShift);
            }
            Ok(rho.ln())
        }
        TopEntropyMode::Words(l) => {
            assert!(l >= 1, "word length must be at least 1");
            let count = shift.count_words(l)?;
            if count == 0 {
                return Err(EntropyError::EmptyShift);
            }
            Ok((count as f64).ln() / l as f64)
        }
    }
}

/// A stationary Markov measure on the orbit graph, stored as its edge
/// occupation. The stationary vector is the common row/column sum and the
/// transition matrix is the row normalization.
#[derive(Debug, Clone)]
pub struct MarkovMeasure {
    q: Vec<Vec<f64>>,
    pi: Vec<f64>,
    p: Vec<Vec<f64>>,
}

const STATIONARITY_TOL: f64 = 1e-9;

impl MarkovMeasure {
    /// Validates nonnegativity, support on graph edges, and equality of row and
    /// column sums (stationarity).
    pub fn from_edge_occupation(
        shift: &OrbitShift,
        q: Vec<Vec<f64>>,
    ) -> Result<Self, EntropyError> {
        let n = shift.n();
        if q.len() != n || q.iter().any(|row| row.len() != n) {
            return Err(EntropyError::BadMeasure {
                reason: "edge occupation shape mismatch".into(),
            });
        }
        for (x, row) in q.iter().enumerate() {
            for (y, &v) in row.iter().enumerate() {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(EntropyError::BadMeasure {
                        reason: format!("occupation at ({x}, {y}) is {v}"),
                    });
                }
                if v > 0.0 && !shift.has_edge(x, y) {
                    return Err(EntropyError::BadMeasure {
                        reason: format!("occupation on missing edge ({x}, {y})"),
                    });
                }
            }
        }
        Self::from_raw(q)
    }

    fn from_raw(q: Vec<Vec<f64>>) -> Result<Self, EntropyError> {
        let n = q.len();
        let mut pi = vec![0.0; n];
        for (i, row) in q.iter().enumerate() {
            pi[i] = row.iter().sum();
        }
        for i in 0..n {
            let col: f64 = (0..n).map(|j| q[j][i]).sum();
            if (col - pi[i]).abs() > STATIONARITY_TOL {
                return Err(EntropyError::BadMeasure {
                    reason: format!(
                        "row/column sums at vertex {i} differ by {:.3e}",
                        (col - pi[i]).abs()
                    ),
                });
            }
        }
        let p = q
            .iter()
            .zip(&pi)
            .map(|(row, &mass)| {
                if mass > 0.0 {
                    row.iter().map(|v| v / mass).collect()
                } else {
                    vec![0.0; n]
                }
            })
            .collect();
        Ok(MarkovMeasure { q, pi, p })
    }

    /// Builds from a stationary vector and a row-stochastic transition matrix.
    pub fn from_transition(
        shift: &OrbitShift,
        pi: Vec<f64>,
        p: Vec<Vec<f64>>,
    ) -> Result<Self, EntropyError> {
        let n = shift.n();
        if pi.len() != n || p.len() != n || p.iter().any(|r| r.len() != n) {
            return Err(EntropyError::BadMeasure {
                reason: "transition shape mismatch".into(),
            });
        }
        for (i, row) in p.iter().enumerate() {
            if pi[i] > 0.0 {
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > STATIONARITY_TOL {
                    return Err(EntropyError::BadMeasure {
                        reason: format!("row {i} sums to {total}"),
                    });
                }
            }
        }
        let q: Vec<Vec<f64>> = p
            .iter()
            .zip(&pi)
            .map(|(row, &mass)| row.iter().map(|v| v * mass).collect())
            .collect();
        Self::from_edge_occupation(shift, q)
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn mass(&self) -> f64 {
        self.pi.iter().sum()
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn edge_occupation(&self) -> &[Vec<f64>] {
        &self.q
    }

    /// The stationary marginal as a measure on the underlying space.
    pub fn marginal(&self) -> Measure {
        Measure::new(self.pi.clone()).expect("stationary vector is nonnegative")
    }

    pub fn stationarity_defect(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| {
                let col: f64 = (0..n).map(|j| self.q[j][i]).sum();
                (col - self.pi[i]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `-sum_ij Q_ij log P_ij`, the Shannon entropy rate weighted by the stationary
/// mass (for probability measures this is the usual Markov entropy).
pub fn markov_entropy(nu: &MarkovMeasure) -> f64 {
    let mut h = 0.0;
    for (row, &mass) in nu.q.iter().zip(&nu.pi) {
        if mass <= 0.0 {
            continue;
        }
        for &v in row {
            if v > 0.0 {
                h += v * (mass / v).ln();
            }
        }
    }
    h
}

/// The maximal-entropy Markov measure of an irreducible shift: transition
/// probabilities from the right Perron eigenvector, stationary vector from the
/// product of left and right eigenvectors. Its entropy is the log spectral
/// radius.
pub fn parry_measure(shift: &OrbitShift) -> Result<MarkovMeasure, EntropyError> {
    if !shift.is_irreducible() {
        return Err(EntropyError::ReducibleGraph);
    }
    parry_on_component(shift, &shift.components[0])
}

fn parry_on_component(
    shift: &OrbitShift,
    component: &[usize],
) -> Result<MarkovMeasure, EntropyError> {
    let matrix = shift.component_matrix(component);
    let transpose: Vec<Vec<f64>> = (0..matrix.len())
        .map(|i| (0..matrix.len()).map(|j| matrix[j][i]).collect())
        .collect();
    let (lambda, right) = power_iteration(&matrix, 1e-13, 500_000)?;
    let (_, left) = power_iteration(&transpose, 1e-13, 500_000)?;
    if lambda <= 0.0 {
        return Err(EntropyError::EmptyShift);
    }
    let m = component.len();
    let norm: f64 = (0..m).map(|i| left[i] * right[i]).sum();
    let n = shift.n();
    let mut q = vec![vec![0.0; n]; n];
    for i in 0..m {
        for j in 0..m {
            if matrix[i][j] > 0.0 {
                let p_ij = right[j] / (lambda * right[i]);
                let pi_i = left[i] * right[i] / norm;
                q[component[i]][component[j]] = pi_i * p_ij;
            }
        }
    }
    MarkovMeasure::from_edge_occupation(shift, q)
}

/// The maximal-entropy Markov measure over all components: the Parry measure of
/// the component with the largest spectral radius, embedded in the full graph.
pub fn max_entropy_markov(shift: &OrbitShift) -> Result<MarkovMeasure, EntropyError> {
    let spectra = shift.component_spectra()?;
    let best = spectra
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.rho
                .partial_cmp(&b.rho)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(ib.cmp(ia))
        })
        .ok_or(EntropyError::EmptyShift)?;
    if best.1.rho <= 0.0 {
        return Err(EntropyError::EmptyShift);
    }
    parry_on_component(shift, &best.1.vertices)
}

/// Compensated accumulator: path enumerations sum millions of near-equal tiny
/// terms, where plain summation loses enough precision to break monotonicity
/// checks at the 1e-10 level.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, value: f64) {
        let y = value - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum
    }
}

/// `H(length-L cylinder distribution) / L` by direct path enumeration; a
/// non-increasing upper approximation of the Markov entropy.
pub fn cylinder_entropy(nu: &MarkovMeasure, l: usize) -> f64 {
    assert!(l >= 1, "cylinder length must be at least 1");
    let mut h = KahanSum::default();
    for (v, &start_mass) in nu.pi.iter().enumerate() {
        if start_mass > 0.0 {
            cylinder_walk(nu, v, 1, l, start_mass, &mut h);
        }
    }
    h.total() / l as f64
}

fn cylinder_walk(
    nu: &MarkovMeasure,
    v: usize,
    depth: usize,
    l: usize,
    prob: f64,
    h: &mut KahanSum,
) {
    if depth == l {
        h.add(-prob * prob.ln());
        return;
    }
    for (w, &p) in nu.p[v].iter().enumerate() {
        if p > 0.0 {
            cylinder_walk(nu, w, depth + 1, l, prob * p, h);
        }
    }
}

/// A finite list of disjoint vertex blocks.
#[derive(Debug, Clone)]
pub struct Partition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self, EntropyError> {
        let mut seen = vec![false; n];
        for block in &blocks {
            for &v in block {
                if v >= n {
                    return Err(EntropyError::BadPartition {
                        reason: format!("vertex {v} out of range"),
                    });
                }
                if seen[v] {
                    return Err(EntropyError::BadPartition {
                        reason: format!("vertex {v} in two blocks"),
                    });
                }
                seen[v] = true;
            }
        }
        Ok(Partition { n, blocks })
    }

    /// The partition into single vertices.
    pub fn vertices(n: usize) -> Self {
        Partition {
            n,
            blocks: (0..n).map(|v| vec![v]).collect(),
        }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    fn block_of(&self) -> Vec<Option<usize>> {
        let mut map = vec![None; self.n];
        for (b, block) in self.blocks.iter().enumerate() {
            for &v in block {
                map[v] = Some(b);
            }
        }
        map
    }

    /// Whether the blocks carry the full mass of the stationary vector.
    pub fn covers(&self, nu: &MarkovMeasure, tol: f64) -> bool {
        let map = self.block_of();
        let covered: f64 = nu
            .pi
            .iter()
            .enumerate()
            .filter(|(v, _)| map[*v].is_some())
            .map(|(_, &w)| w)
            .sum();
        covered >= nu.mass() - tol
    }
}

/// Joint entropy of the block-label sequences of the first `l` coordinates.
fn coarse_joint_entropy(nu: &MarkovMeasure, map: &[Option<usize>], l: usize) -> f64 {
    let mut dist: BTreeMap<Vec<u16>, f64> = BTreeMap::new();
    let mut stack: Vec<(usize, usize, f64, Vec<u16>)> = Vec::new();
    for (v, &mass) in nu.pi.iter().enumerate() {
        if mass > 0.0 {
            if let Some(b) = map[v] {
                stack.push((v, 1, mass, vec![b as u16]));
            }
        }
    }
    while let Some((v, depth, prob, labels)) = stack.pop() {
        if depth == l {
            *dist.entry(labels).or_insert(0.0) += prob;
            continue;
        }
        for (w, &p) in nu.p[v].iter().enumerate() {
            if p > 0.0 {
                if let Some(b) = map[w] {
                    let mut next = labels.clone();
                    next.push(b as u16);
                    stack.push((w, depth + 1, prob * p, next));
                }
            }
        }
    }
    let mut h = KahanSum::default();
    for &p in dist.values() {
        if p > 0.0 {
            h.add(-p * p.ln());
        }
    }
    h.total()
}

/// The L-truncated partition entropy of a Markov measure with respect to a
/// block partition: the conditional increment `H_L - H_{L-1}` of the joint
/// entropies of block-label sequences (`H_1` at L = 1). The increments are
/// non-increasing and converge to the entropy rate of the coarse-grained
/// process; they vanish identically on deterministic dynamics at any L >= 2.
pub fn truncated_partition_entropy(nu: &MarkovMeasure, alpha: &Partition, l: usize) -> f64 {
    assert!(l >= 1);
    let map = alpha.block_of();
    if l == 1 {
        return coarse_joint_entropy(nu, &map, 1);
    }
    coarse_joint_entropy(nu, &map, l) - coarse_joint_entropy(nu, &map, l - 1)
}

/// Conditional entropy of an edge occupation, concave in the occupation
/// variables; hull coefficients ride along with zero gradient.
#[derive(Debug, Clone)]
pub struct ConditionalEntropy {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl ConditionalEntropy {
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Self {
        ConditionalEntropy { n, edges }
    }

    fn row_sums(&self, x: &[f64]) -> Vec<f64> {
        let mut pi = vec![0.0; self.n];
        for (idx, &(src, _)) in self.edges.iter().enumerate() {
            pi[src] += x[idx].max(0.0);
        }
        pi
    }
}

const GRAD_EPS: f64 = 1e-12;

impl ConcaveObjective for ConditionalEntropy {
    fn value(&self, x: &[f64]) -> f64 {
        let pi = self.row_sums(x);
        let mut h = 0.0;
        for (idx, &(src, _)) in self.edges.iter().enumerate() {
            let q = x[idx];
            if q > 0.0 && pi[src] > 0.0 {
                h += q * (pi[src] / q).ln();
            }
        }
        h
    }

    fn gradient(&self, x: &[f64], grad: &mut [f64]) {
        let pi = self.row_sums(x);
        for g in grad.iter_mut() {
            *g = 0.0;
        }
        for (idx, &(src, _)) in self.edges.iter().enumerate() {
            grad[idx] = ((pi[src] + GRAD_EPS) / (x[idx].max(0.0) + GRAD_EPS)).ln();
        }
    }
}

/// Result of the constrained entropy maximization.
#[derive(Debug, Clone)]
pub struct SubmeasureEntropySolve {
    pub value: f64,
    pub gap: f64,
    pub iterations: usize,
    pub measure: MarkovMeasure,
    /// Brute-force 8-step cylinder entropy of the optimizer, reported on
    /// instances with at most five vertices: an independent upper bound on the
    /// optimizer's entropy rate. On larger instances the Markov value stands
    /// as a lower bound for the unrestricted supremum and no cylinder bound is
    /// computed.
    pub cylinder_bound: Option<f64>,
}

/// Default duality-gap target for the concave program.
pub const DEFAULT_ENTROPY_GAP: f64 = 1e-7;

/// Measure-theoretic entropy of a mass-1 submeasure: the maximum Markov entropy
/// over stationary edge occupations whose marginal is dominated by `mu`
/// (equivalently, lies in the convex hull of its generators). The restriction
/// to the Markov class is a model decision; on the instances small enough for
/// brute-force cylinder bounds the gap is checked in tests.
pub fn submeasure_entropy(
    f: &Multimap,
    mu: &Submeasure,
    tol: f64,
) -> Result<SubmeasureEntropySolve, EntropyError> {
    submeasure_entropy_with(f, mu, tol, DEFAULT_ENTROPY_GAP, 400_000)
}

pub fn submeasure_entropy_with(
    f: &Multimap,
    mu: &Submeasure,
    tol: f64,
    gap_tol: f64,
    max_iters: usize,
) -> Result<SubmeasureEntropySolve, EntropyError> {
    let norm = mu.norm();
    if (norm - 1.0).abs() > tol {
        return Err(EntropyError::MassNotOne { norm });
    }
    let shift = orbit_graph(f)?;
    let canonical = mu.canonicalize()?;
    solve_dominated_entropy(&shift, &canonical, gap_tol, max_iters)
}

/// Shared solver: maximize conditional entropy over the dominated stationary
/// polytope at mass one.
pub fn solve_dominated_entropy(
    shift: &OrbitShift,
    canonical: &Submeasure,
    gap_tol: f64,
    max_iters: usize,
) -> Result<SubmeasureEntropySolve, EntropyError> {
    let (mut polytope, edges) = shift.dominated_stationary_polytope(canonical.generators());
    let mut mass_row = vec![0.0; polytope.dim];
    for slot in mass_row.iter_mut().take(edges.len()) {
        *slot = 1.0;
    }
    polytope.equality(mass_row.clone(), 1.0);
    let objective = ConditionalEntropy::new(shift.n(), edges.clone());
    match maximize_concave_over_polytope(&objective, &polytope, gap_tol, max_iters) {
        Ok(solve) => {
            let measure = shift.markov_from_edge_values(&edges, &solve.x[..edges.len()])?;
            let cylinder_bound = if shift.n() <= 5 {
                Some(cylinder_entropy(&measure, 8))
            } else {
                None
            };
            Ok(SubmeasureEntropySolve {
                value: solve.value,
                gap: solve.gap,
                iterations: solve.iterations,
                measure,
                cylinder_bound,
            })
        }
        Err(OptimError::Infeasible) => {
            // Report how much mass the dominated stationary polytope can carry.
            let (relaxed, edges) = shift.dominated_stationary_polytope(canonical.generators());
            let mut dir = vec![0.0; relaxed.dim];
            for slot in dir.iter_mut().take(edges.len()) {
                *slot = 1.0;
            }
            let max_feasible_mass = match relaxed.maximize_linear(&dir) {
                Ok(v) => v[..edges.len()].iter().sum(),
                Err(_) => 0.0,
            };
            Err(EntropyError::Infeasible { max_feasible_mass })
        }
        Err(e) => Err(e.into()),
    }
}

/// The refined per-partition entropy: the supremum of truncated partition
/// entropies over a computed family of dominated invariant Markov measures (the
/// constrained-entropy optimizer, dominated cycle lifts, dominated Parry
/// measures). Exact on generating partitions and deterministic dynamics; a
/// lower bound in general, matching the Markov restriction.
pub fn refined_partition_entropy(
    f: &Multimap,
    mu: &Submeasure,
    alpha: &Partition,
    l: usize,
) -> Result<f64, EntropyError> {
    let shift = orbit_graph(f)?;
    let canonical = mu.canonicalize()?;
    let mut candidates: Vec<MarkovMeasure> = Vec::new();
    if let Ok(solve) = solve_dominated_entropy(&shift, &canonical, DEFAULT_ENTROPY_GAP, 200_000) {
        candidates.push(solve.measure);
    }
    for rho in cycle_invariant_measures(f)? {
        let as_sub: Submeasure = rho.clone().into();
        if leq(&as_sub, &canonical, DEFAULT_TOL)?.holds {
            let n = shift.n();
            let mut q = vec![vec![0.0; n]; n];
            for (x, &w) in rho.weights().iter().enumerate() {
                if w > 0.0 {
                    let y = f.image_point(x).expect("cycle points are single-valued");
                    q[x][y] = w;
                }
            }
            candidates.push(MarkovMeasure::from_edge_occupation(&shift, q)?);
        }
    }
    for info in shift.component_spectra()? {
        if info.rho > 0.0 {
            let parry = parry_on_component(&shift, &info.vertices)?;
            let as_sub: Submeasure = parry.marginal().into();
            if leq(&as_sub, &canonical, DEFAULT_TOL)?.holds {
                candidates.push(parry);
            }
        }
    }
    let mut best = 0.0_f64;
    for nu in &candidates {
        if alpha.covers(nu, 1e-9) {
            best = best.max(truncated_partition_entropy(nu, alpha, l));
        }
    }
    Ok(best)
}

/// Variational check report: topological entropy against the submeasure
/// entropy of the top submeasure, plus the supporting data.
#[derive(Debug, Clone)]
pub struct VariationalReport {
    pub h_top_spectral: f64,
    pub h_submeasure_top: f64,
    pub gap: f64,
    /// Entropy of the sup of computed invariant measures (cycle measures and
    /// per-component Parry marginals).
    pub h_submeasure_invariant: f64,
    pub components: Vec<ComponentInfo>,
    pub passed: bool,
}

/// Checks the variational identity: the submeasure entropy of the top
/// submeasure must equal the topological entropy within `tol`, and likewise for
/// the sup of computed invariant measures.
pub fn variational_check(f: &Multimap, tol: f64) -> Result<VariationalReport, EntropyError> {
    let shift = orbit_graph(f)?;
    let components = shift.component_spectra()?;
    let rho = components.iter().map(|c| c.rho).fold(0.0, f64::max);
    if rho <= 0.0 {
        return Err(EntropyError::EmptyShift);
    }
    let h_top = rho.ln();
    let n = shift.n();
    let top = Submeasure::top(n);
    let solve_top = solve_dominated_entropy(&shift, &top, DEFAULT_ENTROPY_GAP, 400_000)?;

    // The sup of concretely computed invariant measures.
    let mut invariant_generators: Vec<Measure> = cycle_invariant_measures(f)?;
    for info in &components {
        if info.rho > 0.0 {
            let parry = parry_on_component(&shift, &info.vertices)?;
            invariant_generators.push(parry.marginal());
        }
    }
    let h_inv = if invariant_generators.is_empty() {
        0.0
    } else {
        let mu_inv = Submeasure::new(invariant_generators)?.canonicalize()?;
        solve_dominated_entropy(&shift, &mu_inv, DEFAULT_ENTROPY_GAP, 400_000)?.value
    };

    let gap = (solve_top.value - h_top).abs();
    Ok(VariationalReport {
        h_top_spectral: h_top,
        h_submeasure_top: solve_top.value,
        gap,
        h_submeasure_invariant: h_inv,
        components,
        passed: gap <= tol,
    })
}
