//! Seeded random generation of spaces, maps, measures, and test functions.
//!
//! Every sampler is deterministic given the RNG state; scenario reports record
//! the seed so full runs are reproducible byte for byte.

use std::sync::Arc;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::measure::{Measure, Submeasure};
use crate::multimap::Multimap;
use crate::space::{FiniteSpace, GroundFunction};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random points in the unit square with Euclidean distances; resamples points
/// that land closer than a small separation so the metric is comfortably
/// nondegenerate.
pub fn random_space(rng: &mut ChaCha8Rng, n: usize) -> Arc<FiniteSpace> {
    let min_sep = 0.05 / n as f64;
    let mut points: Vec<(f64, f64)> = Vec::with_capacity(n);
    while points.len() < n {
        let candidate = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let ok = points.iter().all(|p| {
            let dx = p.0 - candidate.0;
            let dy = p.1 - candidate.1;
            (dx * dx + dy * dy).sqrt() > min_sep
        });
        if ok {
            points.push(candidate);
        }
    }
    let labels = (0..n).map(|i| format!("x{i}")).collect();
    let dist = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let dx = points[i].0 - points[j].0;
                    let dy = points[i].1 - points[j].1;
                    (dx * dx + dy * dy).sqrt()
                })
                .collect()
        })
        .collect();
    FiniteSpace::new(labels, dist).expect("euclidean distances form a metric")
}

/// A self-map with `n_indet` indeterminacy points whose cluster sets have
/// between 2 and `max_cluster` points; everything else is single-valued.
pub fn random_multimap(
    rng: &mut ChaCha8Rng,
    space: &Arc<FiniteSpace>,
    n_indet: usize,
    max_cluster: usize,
) -> Multimap {
    let n = space.len();
    let mut indet: Vec<usize> = Vec::new();
    while indet.len() < n_indet.min(n) {
        let x = rng.random_range(0..n);
        if !indet.contains(&x) {
            indet.push(x);
        }
    }
    let images: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            if indet.contains(&x) && n >= 2 {
                let size = rng.random_range(2..=max_cluster.clamp(2, n));
                let mut set: Vec<usize> = Vec::new();
                while set.len() < size {
                    let y = rng.random_range(0..n);
                    if !set.contains(&y) {
                        set.push(y);
                    }
                }
                set
            } else {
                vec![rng.random_range(0..n)]
            }
        })
        .collect();
    Multimap::new(Arc::clone(space), Arc::clone(space), images)
        .expect("sampled image table is valid")
}

pub fn random_ground(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> GroundFunction {
    GroundFunction::new((0..n).map(|_| rng.random_range(lo..hi)).collect())
        .expect("sampled values are finite")
}

/// A nonnegative measure of the given mass with support of the given size.
pub fn random_measure(rng: &mut ChaCha8Rng, n: usize, support: usize, mass: f64) -> Measure {
    let support = support.clamp(1, n);
    let mut chosen: Vec<usize> = Vec::new();
    while chosen.len() < support {
        let x = rng.random_range(0..n);
        if !chosen.contains(&x) {
            chosen.push(x);
        }
    }
    let mut weights = vec![0.0; n];
    let mut total = 0.0;
    for &x in &chosen {
        let w = rng.random_range(0.1..1.0);
        weights[x] = w;
        total += w;
    }
    for w in &mut weights {
        *w *= mass / total;
    }
    Measure::new(weights).expect("sampled weights are nonnegative")
}

/// A submeasure with up to `max_generators` generators of equal mass.
pub fn random_submeasure(
    rng: &mut ChaCha8Rng,
    n: usize,
    max_generators: usize,
    mass: f64,
) -> Submeasure {
    let count = rng.random_range(1..=max_generators.max(1));
    let generators = (0..count)
        .map(|_| {
            let support = rng.random_range(1..=n);
            random_measure(rng, n, support, mass)
        })
        .collect();
    Submeasure::new(generators).expect("at least one generator")
}

/// Random stationary edge weights on a directed graph, built as a convex
/// combination of uniform cycle flows found by random walks. Returns `None` if
/// no cycle is reachable (cannot happen when every vertex has an out-edge).
pub fn random_stationary_edge_weights(
    rng: &mut ChaCha8Rng,
    adjacency: &[Vec<bool>],
    cycles: usize,
) -> Option<Vec<Vec<f64>>> {
    let n = adjacency.len();
    let mut q = vec![vec![0.0; n]; n];
    let mut placed = 0;
    for _ in 0..cycles.max(1) * 4 {
        if placed >= cycles {
            break;
        }
        // Random walk until a vertex repeats; the tail is a cycle.
        let mut path = vec![rng.random_range(0..n)];
        loop {
            let here = *path.last().unwrap();
            let outs: Vec<usize> = (0..n).filter(|&j| adjacency[here][j]).collect();
            if outs.is_empty() {
                break;
            }
            let next = outs[rng.random_range(0..outs.len())];
            if let Some(pos) = path.iter().position(|&v| v == next) {
                let cycle = &path[pos..];
                let weight = rng.random_range(0.2..1.0);
                let share = weight / cycle.len() as f64;
                for k in 0..cycle.len() {
                    let a = cycle[k];
                    let b = cycle[(k + 1) % cycle.len()];
                    q[a][b] += share;
                }
                placed += 1;
                break;
            }
            path.push(next);
        }
    }
    if placed == 0 {
        return None;
    }
    let total: f64 = q.iter().flatten().sum();
    for row in &mut q {
        for v in row {
            *v /= total;
        }
    }
    Some(q)
}
