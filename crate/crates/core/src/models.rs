//! Curated model systems used by the scenario runner and the test batteries.
//!
//! Each builder returns a validated space plus a self-map with a documented
//! indeterminacy structure; the numbers are small enough for brute-force
//! cross-checks.

use std::sync::Arc;

use crate::multimap::Multimap;
use crate::space::FiniteSpace;
use crate::transfer::{blowup_construct, BlowupModel, TransferError};

/// A space together with a self-map on it.
#[derive(Debug, Clone)]
pub struct ModelSystem {
    pub space: Arc<FiniteSpace>,
    pub map: Multimap,
}

fn uniform_space(labels: Vec<String>) -> Arc<FiniteSpace> {
    let n = labels.len();
    let dist = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
        .collect();
    FiniteSpace::new(labels, dist).expect("uniform metric is valid")
}

/// Points evenly spaced on [0, 1).
pub fn segment_space(n: usize, prefix: &str) -> Arc<FiniteSpace> {
    let labels = (0..n).map(|i| format!("{prefix}{i}")).collect();
    let pos = |i: usize| i as f64 / n as f64;
    let dist = (0..n)
        .map(|i| (0..n).map(|j| (pos(i) - pos(j)).abs()).collect())
        .collect();
    FiniteSpace::new(labels, dist).expect("segment metric is valid")
}

/// The plane involution with three indeterminacy points, discretized on nine
/// points: e0, e1, e2 are the indeterminacy points, s0, s1, s2 generic points
/// of the three lines through pairs of them, g a fixed generic point, and p, q
/// a swapped generic pair. The cluster image of e_i is the whole line opposite
/// to it: {s_i} plus the other two e's.
pub fn cremona() -> ModelSystem {
    let labels = ["e0", "e1", "e2", "s0", "s1", "s2", "g", "p", "q"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let space = uniform_space(labels);
    let images = vec![
        vec![3, 1, 2], // e0 -> line {s0, e1, e2}
        vec![4, 0, 2], // e1 -> line {s1, e0, e2}
        vec![5, 0, 1], // e2 -> line {s2, e0, e1}
        vec![0],       // s0 -> e0
        vec![1],       // s1 -> e1
        vec![2],       // s2 -> e2
        vec![6],       // g fixed
        vec![8],       // p -> q
        vec![7],       // q -> p
    ];
    let map = Multimap::new(Arc::clone(&space), Arc::clone(&space), images)
        .expect("cremona image table is valid");
    ModelSystem { space, map }
}

/// The identity on the nine cremona points; the genuine composite of the
/// involution with itself, passed explicitly to composition.
pub fn cremona_identity_composite() -> Multimap {
    let m = cremona();
    let n = m.space.len();
    Multimap::deterministic(Arc::clone(&m.space), m.space, (0..n).collect())
        .expect("identity is valid")
}

/// A finite shadow of a transcendental map: the point at infinity has the whole
/// space as cluster image, finite points walk a segment and re-enter at
/// infinity. Index 0 is the infinity point; finite points sit at i/n with the
/// infinity point at 1.
pub fn picard(n: usize) -> ModelSystem {
    assert!(n >= 1, "picard model needs at least one finite point");
    let mut labels = vec!["inf".to_string()];
    labels.extend((0..n).map(|i| format!("z{i}")));
    let mut pos = vec![1.0];
    pos.extend((0..n).map(|i| i as f64 / n as f64));
    let total = n + 1;
    let dist = (0..total)
        .map(|i| (0..total).map(|j| (pos[i] - pos[j]).abs()).collect())
        .collect();
    let space = FiniteSpace::new(labels, dist).expect("picard metric is valid");
    let mut images = vec![(0..total).collect::<Vec<usize>>()];
    for i in 0..n {
        if i + 1 < n {
            images.push(vec![i + 2]); // z_i -> z_{i+1}
        } else {
            images.push(vec![0]); // last finite point escapes to infinity
        }
    }
    let map = Multimap::new(Arc::clone(&space), Arc::clone(&space), images)
        .expect("picard image table is valid");
    ModelSystem { space, map }
}

/// Two symbols, transitions 0 -> {0, 1} and 1 -> {0}.
pub fn golden_mean() -> ModelSystem {
    let space = uniform_space(vec!["a".into(), "b".into()]);
    let map = Multimap::new(
        Arc::clone(&space),
        Arc::clone(&space),
        vec![vec![0, 1], vec![0]],
    )
    .expect("golden mean table is valid");
    ModelSystem { space, map }
}

/// Every point maps to the whole space.
pub fn full_shift(k: usize) -> ModelSystem {
    assert!(k >= 1);
    let labels = (0..k).map(|i| format!("s{i}")).collect();
    let space = uniform_space(labels);
    let images = (0..k).map(|_| (0..k).collect()).collect();
    let map = Multimap::new(Arc::clone(&space), Arc::clone(&space), images)
        .expect("full shift table is valid");
    ModelSystem { space, map }
}

/// Three points walking into a fixed point: 0 -> 1 -> 2 -> 2.
pub fn chain_to_fixed_point() -> ModelSystem {
    let space = segment_space(3, "c");
    let map = Multimap::deterministic(Arc::clone(&space), Arc::clone(&space), vec![1, 2, 2])
        .expect("chain table is valid");
    ModelSystem { space, map }
}

/// A blowup of an m-point segment along the given centers, uniform fiber size.
pub fn blowup_example(
    base_points: usize,
    centers: &[usize],
    fiber_size: usize,
) -> Result<BlowupModel, TransferError> {
    let base = segment_space(base_points, "b");
    let sizes = vec![fiber_size; centers.len()];
    blowup_construct(base, centers, &sizes, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::PointSet;

    #[test]
    fn cremona_indeterminacy_is_the_three_points() {
        let m = cremona();
        let expected: PointSet = [0, 1, 2].into_iter().collect();
        assert_eq!(m.map.indeterminacy(), expected);
    }

    #[test]
    fn cremona_orbit_domain_excludes_line_points() {
        // s_i hits e_i in one step; only the generic points g, p, q have clean
        // forward orbits. Verified by tracing every orbit by hand.
        let m = cremona();
        let expected: PointSet = [6, 7, 8].into_iter().collect();
        assert_eq!(m.map.omega_infinity(None).unwrap(), expected);
    }

    #[test]
    fn picard_has_single_indeterminacy_point() {
        let m = picard(5);
        let expected: PointSet = [0].into_iter().collect();
        assert_eq!(m.map.indeterminacy(), expected);
        assert_eq!(m.map.images(0).len(), 6);
    }

    #[test]
    fn golden_mean_edge_count() {
        let m = golden_mean();
        let edges: usize = (0..2).map(|x| m.map.images(x).len()).sum();
        assert_eq!(edges, 3);
    }

    #[test]
    fn full_shift_is_complete() {
        let m = full_shift(3);
        for x in 0..3 {
            assert_eq!(m.map.images(x).len(), 3);
        }
    }
}
