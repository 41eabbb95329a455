//! Invariant submeasures: Cesaro averaging with exact period detection, the
//! invariance trichotomy, monotone fixed-point constructions from sub- and
//! super-invariant seeds, and lifts to shift-invariant Markov measures.
//!
//! All iterations run over canonicalized generator lists. On a finite space the
//! vectors reachable by repeated pushforward form a finite family (selection
//! maps compose inside a finite semigroup), so the pushforward orbit of a
//! submeasure is eventually exactly periodic: the monotone iterations terminate
//! at genuine fixed points and the Cesaro cluster point is the exact average
//! over one period, not a truncation.

use crate::entropy::{orbit_graph, ConditionalEntropy, MarkovMeasure};
use crate::measure::{
    default_test_basis, leq, weak_distance, DominationReport, Measure, MeasureError, Submeasure,
    DEFAULT_TOL,
};
use crate::multimap::{Multimap, MultimapError};
use crate::optim::{maximize_concave_over_polytope, OptimError};
use crate::space::GroundFunction;
use crate::transfer::{pushforward_with_cap, TransferError, DEFAULT_SELECTION_CAP};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InvariantError {
    #[error("precondition {condition} failed")]
    PreconditionFailed {
        condition: &'static str,
        witness: Option<GroundFunction>,
    },
    #[error("no convergence after {iterations} iterations (last defect {defect:.3e})")]
    NoConvergence { iterations: usize, defect: f64 },
    #[error(transparent)]
    Transfer(#[from] TransferError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Multimap(#[from] MultimapError),
    #[error(transparent)]
    Optim(#[from] OptimError),
    #[error(transparent)]
    Entropy(#[from] crate::entropy::EntropyError),
}

/// Where an iteration traded exactness for boundedness.
#[derive(Debug, Clone, PartialEq)]
pub enum ApproximationEvent {
    /// Nearest generator pair merged by convex midpoint to respect a cap.
    MidpointMerge {
        step: usize,
        before: usize,
        after: usize,
    },
    /// The returned candidate is invariant and dominates the seed, but
    /// minimality among all invariant submeasures is not certified.
    UncertifiedMinimality,
}

impl std::fmt::Display for ApproximationEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ApproximationEvent::MidpointMerge {
                step,
                before,
                after,
            } => write!(
                f,
                "midpoint merge at step {step}: {before} -> {after} generators"
            ),
            ApproximationEvent::UncertifiedMinimality => {
                write!(f, "minimality of the invariant candidate is not certified")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceRow {
    pub step: usize,
    pub generator_count: usize,
    pub mass: f64,
    pub defect: f64,
    pub pruned: bool,
}

/// Per-step iteration log, exportable as CSV.
#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub rows: Vec<TraceRow>,
}

impl IterationTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,generator_count,mass,defect,pruned\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.step, row.generator_count, row.mass, row.defect, row.pruned
            ));
        }
        out
    }
}

/// The invariance trichotomy: pushforward equal, below, above, or incomparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvarianceStatus {
    Invariant,
    Subinvariant,
    Superinvariant,
    None,
}

impl std::fmt::Display for InvarianceStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            InvarianceStatus::Invariant => "invariant",
            InvarianceStatus::Subinvariant => "subinvariant",
            InvarianceStatus::Superinvariant => "superinvariant",
            InvarianceStatus::None => "none",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct InvarianceReport {
    pub status: InvarianceStatus,
    /// Weak distance between the pushforward and the submeasure.
    pub defect: f64,
    /// Separating function for a failing direction, when not invariant.
    pub witness: Option<GroundFunction>,
}

/// Classifies `f_*(mu)` against `mu`. For a single-generator `mu` (a genuine
/// measure), `f_*(mu) <= mu` already forces equality because the pushforward
/// preserves mass, so `subinvariant` can only be reported for proper
/// submeasures.
pub fn check_invariance(
    f: &Multimap,
    mu: &Submeasure,
    tol: f64,
) -> Result<InvarianceReport, InvariantError> {
    let pushed = pushforward_with_cap(f, mu, DEFAULT_SELECTION_CAP)?;
    let down = leq(&pushed, mu, tol)?;
    let up = leq(mu, &pushed, tol)?;
    let status = match (down.holds, up.holds) {
        (true, true) => InvarianceStatus::Invariant,
        (true, false) => InvarianceStatus::Subinvariant,
        (false, true) => InvarianceStatus::Superinvariant,
        (false, false) => InvarianceStatus::None,
    };
    let defect = weak_distance(&pushed, mu, None)?;
    let witness = match status {
        InvarianceStatus::Invariant => None,
        InvarianceStatus::Subinvariant => up.witness,
        _ => down.witness.or(up.witness),
    };
    Ok(InvarianceReport {
        status,
        defect,
        witness,
    })
}

/// Canonicalizes and, if the generator count still exceeds `cap`, merges the
/// nearest generator pairs by convex midpoint until it fits, logging the merge
/// batch. Exact duplicates drop for free; hull reduction by LP runs once on
/// the pre-merge list and once on the merged result, with the nearest-pair
/// search driven by an incrementally maintained distance matrix.
fn prune_to_cap(
    mu: &Submeasure,
    cap: usize,
    step: usize,
    events: &mut Vec<ApproximationEvent>,
) -> Result<(Submeasure, bool), InvariantError> {
    let cap = cap.max(1);
    // Cheap exact-duplicate collapse first; the LP reduction is quadratic in
    // hull calls, so it only runs on lists near the cap, with the final
    // canonicalize after merging covering the rest.
    let deduped = crate::measure::dedupe_exact(mu.generators());
    let current = if deduped.len() <= 2 * cap.max(16) {
        Submeasure::new(deduped)?.canonicalize()?
    } else {
        Submeasure::new(deduped)?
    };
    if current.generator_count() <= cap {
        return Ok((current, false));
    }
    let before = current.generator_count();
    let mut vectors: Vec<Vec<f64>> = current
        .generators()
        .iter()
        .map(|g| g.weights().to_vec())
        .collect();
    let mut alive: Vec<bool> = vec![true; vectors.len()];
    let mut version: Vec<u32> = vec![0; vectors.len()];
    let dist2 =
        |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };
    // Lazy min-heap of candidate pairs, invalidated by version counters when a
    // merge moves a vector.
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    #[derive(PartialEq, PartialOrd)]
    struct Key(f64);
    impl Eq for Key {}
    #[allow(clippy::derive_ord_xor_partial_ord)]
    impl Ord for Key {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.partial_cmp(other).unwrap_or(std::cmp::Ordering::Equal)
        }
    }
    // (distance, index pair, version stamps at insertion)
    type Candidate = (Key, usize, usize, u32, u32);
    let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            heap.push(Reverse((
                Key(dist2(&vectors[i], &vectors[j])),
                i,
                j,
                0,
                0,
            )));
        }
    }
    let mut live = vectors.len();
    while live > cap {
        let (i, j) = loop {
            let Reverse((_, i, j, vi, vj)) = heap.pop().expect("pairs remain above the cap");
            if alive[i] && alive[j] && version[i] == vi && version[j] == vj {
                break (i, j);
            }
        };
        for (slot, value) in vectors[j].clone().into_iter().enumerate() {
            vectors[i][slot] = 0.5 * (vectors[i][slot] + value);
        }
        alive[j] = false;
        version[i] += 1;
        live -= 1;
        for k in 0..vectors.len() {
            if alive[k] && k != i {
                let (a, b) = if k < i { (k, i) } else { (i, k) };
                heap.push(Reverse((
                    Key(dist2(&vectors[a], &vectors[b])),
                    a,
                    b,
                    version[a],
                    version[b],
                )));
            }
        }
    }
    let merged: Vec<Measure> = vectors
        .into_iter()
        .zip(alive)
        .filter(|(_, keep)| *keep)
        .map(|(w, _)| Measure::new(w).expect("midpoints stay nonnegative"))
        .collect();
    let pruned = Submeasure::new(merged)?.canonicalize()?;
    events.push(ApproximationEvent::MidpointMerge {
        step,
        before,
        after: pruned.generator_count(),
    });
    Ok((pruned, true))
}

/// Cesaro averages of the pushforward iterates, with per-step trace.
#[derive(Debug, Clone)]
pub struct CesaroRun {
    pub averages: Vec<Submeasure>,
    pub trace: IterationTrace,
    pub events: Vec<ApproximationEvent>,
}

/// Computes the first `n_max` Cesaro averages `(1/n) sum_{j<n} (f_*)^j(mu0)`.
/// Every average is canonicalized; generator lists are pruned to `prune_cap`
/// (hull-redundant members drop exactly; midpoint merges are logged).
pub fn cesaro_sequence(
    f: &Multimap,
    mu0: &Submeasure,
    n_max: usize,
    prune_cap: usize,
) -> Result<CesaroRun, InvariantError> {
    let mut events = Vec::new();
    let mut trace = IterationTrace::default();
    let mut averages = Vec::with_capacity(n_max);
    let mut iterate = mu0.canonicalize()?;
    let mut sum = iterate.clone();
    let mut previous: Option<Submeasure> = None;
    for n in 1..=n_max {
        let (avg, pruned_avg) = {
            let scaled = sum.scale(1.0 / n as f64)?;
            prune_to_cap(&scaled, prune_cap, n, &mut events)?
        };
        let defect = match &previous {
            Some(p) => weak_distance(&avg, p, None)?,
            None => f64::INFINITY,
        };
        trace.rows.push(TraceRow {
            step: n,
            generator_count: avg.generator_count(),
            mass: avg.mass(),
            defect,
            pruned: pruned_avg,
        });
        previous = Some(avg.clone());
        averages.push(avg);
        if n < n_max {
            let pushed = pushforward_with_cap(f, &iterate, DEFAULT_SELECTION_CAP)?;
            let (next, _) = prune_to_cap(&pushed, prune_cap, n, &mut events)?;
            iterate = next;
            let (next_sum, _) =
                prune_to_cap(&sum.add(&iterate)?, prune_cap.max(64), n, &mut events)?;
            sum = next_sum;
        }
    }
    Ok(CesaroRun {
        averages,
        trace,
        events,
    })
}

/// The exact Cesaro cluster point: the pushforward orbit of `mu0` is detected
/// to be eventually periodic and the cluster point is the average over one
/// period. When no midpoint merge fires, the result satisfies
/// `f_*(cluster) >= cluster` exactly (superadditivity over the shifted period).
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub cluster: Submeasure,
    pub transient: usize,
    pub period: usize,
    pub events: Vec<ApproximationEvent>,
}

fn signature(mu: &Submeasure) -> Vec<Vec<i64>> {
    let mut keys: Vec<Vec<i64>> = mu
        .generators()
        .iter()
        .map(|g| {
            g.weights()
                .iter()
                .map(|w| (w * 1e10).round() as i64)
                .collect()
        })
        .collect();
    keys.sort();
    keys
}

pub fn cesaro_cluster(
    f: &Multimap,
    mu0: &Submeasure,
    n_max: usize,
    prune_cap: usize,
) -> Result<ClusterOutcome, InvariantError> {
    let mut events = Vec::new();
    let mut seen: Vec<Vec<Vec<i64>>> = Vec::new();
    let mut orbit: Vec<Submeasure> = Vec::new();
    let mut iterate = mu0.canonicalize()?;
    for step in 0..n_max {
        let sig = signature(&iterate);
        if let Some(start) = seen.iter().position(|s| *s == sig) {
            let period = step - start;
            let mut sum = orbit[start].clone();
            for item in orbit.iter().take(step).skip(start + 1) {
                let combined = sum.add(item)?;
                let (next, _) = prune_to_cap(&combined, prune_cap, step, &mut events)?;
                sum = next;
            }
            let cluster = sum.scale(1.0 / period as f64)?.canonicalize()?;
            return Ok(ClusterOutcome {
                cluster,
                transient: start,
                period,
                events,
            });
        }
        seen.push(sig);
        orbit.push(iterate.clone());
        let pushed = pushforward_with_cap(f, &iterate, DEFAULT_SELECTION_CAP)?;
        let (next, _) = prune_to_cap(&pushed, prune_cap, step + 1, &mut events)?;
        iterate = next;
    }
    Err(InvariantError::NoConvergence {
        iterations: n_max,
        defect: f64::NAN,
    })
}

/// An invariant-submeasure construction outcome with its certification.
#[derive(Debug, Clone)]
pub struct InvariantOutcome {
    pub submeasure: Submeasure,
    pub iterations: usize,
    pub certificate: InvarianceReport,
    pub trace: IterationTrace,
    pub events: Vec<ApproximationEvent>,
}

fn require(report: DominationReport, condition: &'static str) -> Result<(), InvariantError> {
    if report.holds {
        Ok(())
    } else {
        Err(InvariantError::PreconditionFailed {
            condition,
            witness: report.witness,
        })
    }
}

/// Largest invariant submeasure below a subinvariant seed, as the limit of the
/// plain pushforward iteration. The iteration is monotone decreasing and the
/// reachable generator family is finite, so it reaches its fixed point exactly.
pub fn inv_leq(
    f: &Multimap,
    mu0: &Submeasure,
    tol: f64,
    n_max: usize,
) -> Result<InvariantOutcome, InvariantError> {
    let seed = mu0.canonicalize()?;
    let pushed = pushforward_with_cap(f, &seed, DEFAULT_SELECTION_CAP)?;
    require(leq(&pushed, &seed, tol)?, "f_*(mu0) <= mu0")?;
    let mut trace = IterationTrace::default();
    let mut current = seed;
    for step in 1..=n_max {
        let next = pushforward_with_cap(f, &current, DEFAULT_SELECTION_CAP)?.canonicalize()?;
        let defect = weak_distance(&next, &current, None)?;
        trace.rows.push(TraceRow {
            step,
            generator_count: next.generator_count(),
            mass: next.mass(),
            defect,
            pruned: false,
        });
        if defect <= tol {
            let certificate = check_invariance(f, &next, tol)?;
            return Ok(InvariantOutcome {
                submeasure: next,
                iterations: step,
                certificate,
                trace,
                events: Vec::new(),
            });
        }
        current = next;
    }
    let defect = trace.rows.last().map_or(f64::INFINITY, |r| r.defect);
    Err(InvariantError::NoConvergence {
        iterations: n_max,
        defect,
    })
}

/// An invariant submeasure above a superinvariant seed, by sup-accumulation
/// `mu <- sup(mu, f_*(mu))`. The accumulated hulls grow inside a finite vector
/// family, so the iteration stabilizes at an exactly invariant submeasure; its
/// minimality is reported as uncertified.
pub fn inv_geq(
    f: &Multimap,
    mu0: &Submeasure,
    tol: f64,
    n_max: usize,
) -> Result<InvariantOutcome, InvariantError> {
    let seed = mu0.canonicalize()?;
    let pushed = pushforward_with_cap(f, &seed, DEFAULT_SELECTION_CAP)?;
    require(leq(&seed, &pushed, tol)?, "mu0 <= f_*(mu0)")?;
    let mut trace = IterationTrace::default();
    let mut events = vec![ApproximationEvent::UncertifiedMinimality];
    let mut current = seed;
    for step in 1..=n_max {
        let pushed = pushforward_with_cap(f, &current, DEFAULT_SELECTION_CAP)?;
        let next = current.sup_combine(&pushed)?.canonicalize()?;
        let defect = weak_distance(&next, &current, None)?;
        trace.rows.push(TraceRow {
            step,
            generator_count: next.generator_count(),
            mass: next.mass(),
            defect,
            pruned: false,
        });
        if defect <= tol {
            let certificate = check_invariance(f, &next, tol)?;
            events.dedup();
            return Ok(InvariantOutcome {
                submeasure: next,
                iterations: step,
                certificate,
                trace,
                events,
            });
        }
        current = next;
    }
    let defect = trace.rows.last().map_or(f64::INFINITY, |r| r.defect);
    Err(InvariantError::NoConvergence {
        iterations: n_max,
        defect,
    })
}

/// The ergodic invariant measures of the deterministic restriction of `f` to
/// its good orbit set: the uniform measures on the cycles of that restriction,
/// ordered by their smallest point.
pub fn cycle_invariant_measures(f: &Multimap) -> Result<Vec<Measure>, MultimapError> {
    let omega = f.omega_infinity(None)?;
    let n = f.source().len();
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut on_cycle = vec![false; n];
    for &start in &omega {
        if on_cycle[start] {
            continue;
        }
        // March far enough to land on the cycle of this orbit.
        let mut x = start;
        for _ in 0..n {
            x = f
                .image_point(x)
                .expect("omega points stay in the open domain");
        }
        if on_cycle[x] {
            continue;
        }
        let mut cycle = vec![x];
        let mut y = f.image_point(x).expect("cycle stays in the open domain");
        while y != x {
            cycle.push(y);
            y = f.image_point(y).expect("cycle stays in the open domain");
        }
        for &v in &cycle {
            on_cycle[v] = true;
        }
        cycles.push(cycle);
    }
    cycles.sort_by_key(|c| *c.iter().min().expect("cycles are nonempty"));
    Ok(cycles.iter().map(|c| Measure::uniform_on(n, c)).collect())
}

/// Outcome of lifting an invariant submeasure to a shift-invariant Markov
/// measure on the orbit graph.
#[derive(Debug, Clone)]
pub enum LiftOutcome {
    Lift {
        measure: MarkovMeasure,
        mass: f64,
        /// `norm(mu) - mass`; positive when no dominated stationary marginal
        /// attains the full mass.
        mass_deficit: f64,
    },
    Absent,
}

/// Finds a shift-invariant Markov measure on the orbit graph whose stationary
/// marginal is dominated by `mu`, maximizing mass first and entropy second over
/// the constrained edge-occupation polytope. Requires `mu` invariant; for an
/// invariant submeasure the full mass is always attainable (average the flow of
/// any mass-attaining generator orbit), so the reported deficit is a numerical
/// diagnostic only.
pub fn lift_invariant(
    f: &Multimap,
    mu: &Submeasure,
    tol: f64,
) -> Result<LiftOutcome, InvariantError> {
    let report = check_invariance(f, mu, tol)?;
    if report.status != InvarianceStatus::Invariant {
        return Err(InvariantError::PreconditionFailed {
            condition: "mu must be invariant",
            witness: report.witness,
        });
    }
    dominated_markov_lift(f, mu, tol)
}

/// The lift machinery without the invariance precondition: best dominated
/// stationary Markov measure by (mass, entropy). For non-invariant `mu` the
/// mass deficit can be genuinely positive, and `Absent` is possible when no
/// stationary marginal lies in the generator hull at positive mass.
pub fn dominated_markov_lift(
    f: &Multimap,
    mu: &Submeasure,
    tol: f64,
) -> Result<LiftOutcome, InvariantError> {
    let shift = orbit_graph(f)?;
    let canonical = mu.canonicalize()?;
    let (polytope, edges) = shift.dominated_stationary_polytope(canonical.generators());
    // Mass first.
    let mut mass_dir = vec![0.0; polytope.dim];
    for slot in mass_dir.iter_mut().take(edges.len()) {
        *slot = 1.0;
    }
    let best = match polytope.maximize_linear(&mass_dir) {
        Ok(v) => v,
        Err(OptimError::Infeasible) => return Ok(LiftOutcome::Absent),
        Err(e) => return Err(e.into()),
    };
    let mass: f64 = best[..edges.len()].iter().sum();
    if mass <= tol.max(1e-9) {
        return Ok(LiftOutcome::Absent);
    }
    // Entropy second, over the mass-optimal slice.
    let mut fixed = polytope.clone();
    fixed.equality(mass_dir, mass);
    let objective = ConditionalEntropy::new(shift.n(), edges.clone());
    let solve = maximize_concave_over_polytope(&objective, &fixed, 1e-8, 200_000)?;
    let measure = shift.markov_from_edge_values(&edges, &solve.x[..edges.len()])?;
    Ok(LiftOutcome::Lift {
        measure,
        mass,
        mass_deficit: canonical.norm() - mass,
    })
}

/// Convenience wrapper evaluating a stationary marginal against a submeasure.
pub fn marginal_dominated(pi: &Measure, mu: &Submeasure, tol: f64) -> Result<bool, InvariantError> {
    let as_sub: Submeasure = pi.clone().into();
    Ok(leq(&as_sub, mu, tol)?.holds)
}

/// Shared default: weak-convergence detection tolerance.
pub fn default_tol() -> f64 {
    DEFAULT_TOL
}

/// The default test family used by convergence detection, re-exported for
/// report generation.
pub fn reporting_basis(n: usize) -> Vec<GroundFunction> {
    default_test_basis(n)
}
