//! Transfer operators: pullback of functions, pushforward and pullback of
//! submeasures under partially defined maps, and synthetic blowups.
//!
//! The pushforward of a submeasure never needs more than the pullback of test
//! functions to evaluate: `f_*(mu)(phi) = mu(f^* phi)` with
//! `(f^* phi)(x) = max over images(x) of phi`. Materializing a generator list
//! for the result is done by enumerating selection maps, one choice per
//! indeterminacy point carrying mass; the per-point max distributes over the
//! sum, so the materialized list realizes the evaluation contract exactly.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::measure::{usc_extend, Measure, MeasureError, Submeasure};
use crate::multimap::{Multimap, MultimapError};
use crate::space::{FiniteSpace, GroundFunction, PointSet, SpaceError};

/// Default cap on the number of selection maps enumerated per generator.
pub const DEFAULT_SELECTION_CAP: usize = 10_000;

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("function lives on a space of size {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("selection enumeration needs {required} maps, above the cap {cap}")]
    SelectionExplosion { required: usize, cap: usize },
    #[error("pullback requires a covering degree on the multimap")]
    MissingDegree,
    #[error(
        "the decomposition requires a single measure, got {generators} non-redundant generators"
    )]
    NotAMeasure { generators: usize },
    #[error("bad fiber specification: {reason}")]
    BadFiberSpec { reason: String },
    #[error(transparent)]
    Multimap(#[from] MultimapError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// `(f^* phi)(x) = max over images(x) of phi`; plain composition on the open
/// domain. Monotone and 1-Lipschitz in the sup norm of `phi`.
pub fn pullback_function(
    f: &Multimap,
    phi: &GroundFunction,
) -> Result<GroundFunction, TransferError> {
    if phi.len() != f.target().len() {
        return Err(TransferError::DimensionMismatch {
            expected: f.target().len(),
            got: phi.len(),
        });
    }
    let values = (0..f.source().len())
        .map(|x| {
            f.images(x)
                .iter()
                .map(|&y| phi.get(y))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    Ok(GroundFunction::new(values).expect("finite pullback"))
}

/// Lazy pushforward evaluation `f_*(mu)(phi) = mu(f^* phi)`. Needs no
/// generator materialization and serves as the oracle for the materialized
/// route.
pub fn pushforward_value(
    f: &Multimap,
    mu: &Submeasure,
    phi: &GroundFunction,
) -> Result<f64, TransferError> {
    let pulled = pullback_function(f, phi)?;
    Ok(mu.evaluate(&pulled)?)
}

fn selection_generators(
    f: &Multimap,
    chi: &Measure,
    cap: usize,
) -> Result<Vec<Measure>, TransferError> {
    let n_target = f.target().len();
    // Choice points: indeterminacy points carrying mass, in ascending order.
    let choice_points: Vec<usize> = chi
        .support()
        .into_iter()
        .filter(|&x| !f.is_open(x))
        .collect();
    let mut required: usize = 1;
    for &x in &choice_points {
        required = required.saturating_mul(f.images(x).len());
        if required > cap {
            return Err(TransferError::SelectionExplosion { required, cap });
        }
    }
    // Mass from single-valued points is common to every selection.
    let mut base = vec![0.0; n_target];
    for x in chi.support() {
        if f.is_open(x) {
            base[f.images(x)[0]] += chi.weight(x);
        }
    }
    let mut out = Vec::with_capacity(required);
    let mut odometer = vec![0usize; choice_points.len()];
    loop {
        let mut w = base.clone();
        for (slot, &x) in odometer.iter().zip(&choice_points) {
            w[f.images(x)[*slot]] += chi.weight(x);
        }
        out.push(Measure::new(w).expect("nonnegative pushforward weights"));
        // Lexicographic advance.
        let mut k = choice_points.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            odometer[k] += 1;
            if odometer[k] < f.images(choice_points[k]).len() {
                break;
            }
            odometer[k] = 0;
        }
    }
}

/// Pushforward with the default selection cap.
pub fn pushforward(f: &Multimap, mu: &Submeasure) -> Result<Submeasure, TransferError> {
    pushforward_with_cap(f, mu, DEFAULT_SELECTION_CAP)
}

/// Materializes `f_*(mu)` as a generator list: for each generator, every
/// selection of one image per mass-carrying indeterminacy point contributes its
/// pushforward vector. The result is canonicalized when the total generator
/// count stays at or below `cap`.
pub fn pushforward_with_cap(
    f: &Multimap,
    mu: &Submeasure,
    cap: usize,
) -> Result<Submeasure, TransferError> {
    if mu.dim() != f.source().len() {
        return Err(TransferError::DimensionMismatch {
            expected: f.source().len(),
            got: mu.dim(),
        });
    }
    let mut generators = Vec::new();
    for chi in mu.generators() {
        generators.extend(selection_generators(f, chi, cap)?);
    }
    let total = generators.len();
    let result = Submeasure::new(generators)?;
    if total <= cap {
        Ok(result.canonicalize()?)
    } else {
        Ok(result)
    }
}

/// `(f|_U)_* phi` summed over the degree-many preimages on the open image,
/// extended upper-semicontinuously at resolution `delta` elsewhere.
pub fn covering_pushforward_function(
    f: &Multimap,
    phi: &GroundFunction,
    delta: f64,
) -> Result<GroundFunction, TransferError> {
    let degree = f.degree().ok_or(TransferError::MissingDegree)?;
    if phi.len() != f.source().len() {
        return Err(TransferError::DimensionMismatch {
            expected: f.source().len(),
            got: phi.len(),
        });
    }
    let open_image = f.open_image();
    let mut partial = vec![0.0; f.target().len()];
    for &y in &open_image {
        let preimages = f.open_preimages(y);
        if preimages.len() != degree {
            return Err(MultimapError::DegreeViolation {
                point: y,
                count: preimages.len(),
                degree,
            }
            .into());
        }
        partial[y] = preimages.iter().map(|&x| phi.get(x)).sum();
    }
    let partial = GroundFunction::new(partial).expect("finite sums");
    let extended = usc_extend(f.target(), &open_image, &partial, delta)?;
    Ok(extended)
}

/// Lazy pullback evaluation `f^*(nu)(phi) = nu((f|_U)_* phi extended)`.
pub fn pullback_value(
    f: &Multimap,
    nu: &Submeasure,
    phi: &GroundFunction,
    delta: f64,
) -> Result<f64, TransferError> {
    let pushed = covering_pushforward_function(f, phi, delta)?;
    Ok(nu.evaluate(&pushed)?)
}

/// Materializes the pullback `f^*(nu)` of a submeasure under a finite covering.
/// Satisfies `norm(f^*(nu)) = degree * norm(nu)`.
pub fn pullback_submeasure(
    f: &Multimap,
    nu: &Submeasure,
    delta: f64,
    cap: usize,
) -> Result<Submeasure, TransferError> {
    let degree = f.degree().ok_or(TransferError::MissingDegree)?;
    if nu.dim() != f.target().len() {
        return Err(TransferError::DimensionMismatch {
            expected: f.target().len(),
            got: nu.dim(),
        });
    }
    let n_source = f.source().len();
    let open_image = f.open_image();
    // u_z: indicator sum over the preimages of z.
    let preimage_vector = |z: usize| -> Result<Vec<f64>, TransferError> {
        let pre = f.open_preimages(z);
        if pre.len() != degree {
            return Err(MultimapError::DegreeViolation {
                point: z,
                count: pre.len(),
                degree,
            }
            .into());
        }
        let mut u = vec![0.0; n_source];
        for &x in &pre {
            u[x] = 1.0;
        }
        Ok(u)
    };
    let mut generators = Vec::new();
    for chi in nu.generators() {
        let choice_points: Vec<usize> = chi
            .support()
            .into_iter()
            .filter(|y| !open_image.contains(y))
            .collect();
        let mut choices: Vec<Vec<usize>> = Vec::with_capacity(choice_points.len());
        let mut required: usize = 1;
        for &y in &choice_points {
            let near: Vec<usize> = f
                .target()
                .neighborhood(y, delta)
                .intersection(&open_image)
                .copied()
                .collect();
            if near.is_empty() {
                return Err(MeasureError::DomainNotDense { point: y }.into());
            }
            required = required.saturating_mul(near.len());
            if required > cap {
                return Err(TransferError::SelectionExplosion { required, cap });
            }
            choices.push(near);
        }
        let mut base = vec![0.0; n_source];
        for y in chi.support() {
            if open_image.contains(&y) {
                let u = preimage_vector(y)?;
                for (b, ui) in base.iter_mut().zip(&u) {
                    *b += chi.weight(y) * ui;
                }
            }
        }
        let mut odometer = vec![0usize; choice_points.len()];
        'enumerate: loop {
            let mut w = base.clone();
            for ((slot, &y), near) in odometer.iter().zip(&choice_points).zip(&choices) {
                let u = preimage_vector(near[*slot])?;
                for (wi, ui) in w.iter_mut().zip(&u) {
                    *wi += chi.weight(y) * ui;
                }
            }
            generators.push(Measure::new(w).expect("nonnegative pullback weights"));
            let mut k = choice_points.len();
            loop {
                if k == 0 {
                    break 'enumerate;
                }
                k -= 1;
                odometer[k] += 1;
                if odometer[k] < choices[k].len() {
                    break;
                }
                odometer[k] = 0;
            }
        }
    }
    let total = generators.len();
    let result = Submeasure::new(generators)?;
    if total <= cap {
        Ok(result.canonicalize()?)
    } else {
        Ok(result)
    }
}

/// A synthetic blowup: each center point of the base is replaced by a fiber in
/// the total space, with a single-valued projection down and a fiber-valued
/// inverse up.
#[derive(Debug, Clone)]
pub struct BlowupModel {
    pub base: Arc<FiniteSpace>,
    pub total: Arc<FiniteSpace>,
    pub center: PointSet,
    /// Fiber point indices in the total space, per center point.
    pub fibers: BTreeMap<usize, Vec<usize>>,
    /// Total-space index of each off-center base point.
    pub embedding: BTreeMap<usize, usize>,
    /// The projection pi: total -> base (single-valued everywhere).
    pub projection: Multimap,
    /// The inverse pi^{-1}: base -> total (fiber-valued over the center).
    pub inverse: Multimap,
}

/// Builds a blowup of `base` along `center`, replacing the i-th center point by
/// a fiber of `fiber_sizes[i]` points. Distances on the total space project to
/// base distances, with intra-fiber distance `fiber_epsilon` (default: half the
/// minimum base distance, keeping fibers metrically clustered over their
/// center).
pub fn blowup_construct(
    base: Arc<FiniteSpace>,
    center: &[usize],
    fiber_sizes: &[usize],
    fiber_epsilon: Option<f64>,
) -> Result<BlowupModel, TransferError> {
    if center.is_empty() {
        return Err(TransferError::BadFiberSpec {
            reason: "center must be nonempty".into(),
        });
    }
    if center.len() != fiber_sizes.len() {
        return Err(TransferError::BadFiberSpec {
            reason: format!(
                "{} center points but {} fiber sizes",
                center.len(),
                fiber_sizes.len()
            ),
        });
    }
    if fiber_sizes.contains(&0) {
        return Err(TransferError::BadFiberSpec {
            reason: "fiber sizes must be at least 1".into(),
        });
    }
    let center_set: PointSet = center.iter().copied().collect();
    if center_set.len() != center.len() || center.iter().any(|&a| a >= base.len()) {
        return Err(TransferError::BadFiberSpec {
            reason: "center points must be distinct and in range".into(),
        });
    }
    let epsilon = fiber_epsilon.unwrap_or_else(|| base.min_positive_distance() / 2.0);
    if !(epsilon > 0.0 && epsilon <= base.min_positive_distance()) {
        return Err(TransferError::BadFiberSpec {
            reason: format!("fiber epsilon {epsilon} must lie in (0, min base distance]"),
        });
    }

    let size_of = |a: usize| -> usize {
        center
            .iter()
            .position(|&c| c == a)
            .map(|i| fiber_sizes[i])
            .unwrap_or(1)
    };
    let mut labels = Vec::new();
    let mut project_to = Vec::new();
    let mut fibers: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut embedding: BTreeMap<usize, usize> = BTreeMap::new();
    for a in 0..base.len() {
        if center_set.contains(&a) {
            let k = size_of(a);
            let mut fiber = Vec::with_capacity(k);
            for t in 0..k {
                fiber.push(labels.len());
                labels.push(format!("{}#{t}", base.label(a)));
                project_to.push(a);
            }
            fibers.insert(a, fiber);
        } else {
            embedding.insert(a, labels.len());
            labels.push(base.label(a).to_string());
            project_to.push(a);
        }
    }
    let nz = labels.len();
    let mut dist = vec![vec![0.0; nz]; nz];
    for i in 0..nz {
        for j in 0..nz {
            if i == j {
                continue;
            }
            dist[i][j] = if project_to[i] == project_to[j] {
                epsilon
            } else {
                base.dist(project_to[i], project_to[j])
            };
        }
    }
    let total = FiniteSpace::new(labels, dist)?;

    let projection = Multimap::deterministic(Arc::clone(&total), Arc::clone(&base), project_to)?;
    let inverse_images: Vec<Vec<usize>> = (0..base.len())
        .map(|a| match fibers.get(&a) {
            Some(fiber) => fiber.clone(),
            None => vec![embedding[&a]],
        })
        .collect();
    let inverse = Multimap::new(Arc::clone(&base), Arc::clone(&total), inverse_images)?;
    Ok(BlowupModel {
        base,
        total,
        center: center_set,
        fibers,
        embedding,
        projection,
        inverse,
    })
}

/// Both sides of the blowup mass-splitting identity, evaluated by independent
/// routes: `lhs` materializes the fiber-valued pushforward by brute-force
/// selection enumeration, `rhs` splits the measure off/on the center and adds
/// the fiber-max term.
#[derive(Debug, Clone)]
pub struct BlowupDecomposition {
    pub lhs: f64,
    pub rhs: f64,
    pub off_center: Measure,
    pub on_center: Measure,
}

pub fn blowup_decompose(
    model: &BlowupModel,
    mu: &Submeasure,
    phi: &GroundFunction,
) -> Result<BlowupDecomposition, TransferError> {
    let canon = mu.canonicalize()?;
    if canon.generator_count() != 1 {
        return Err(TransferError::NotAMeasure {
            generators: canon.generator_count(),
        });
    }
    if phi.len() != model.total.len() {
        return Err(TransferError::DimensionMismatch {
            expected: model.total.len(),
            got: phi.len(),
        });
    }
    let chi = &canon.generators()[0];
    let n = model.base.len();
    let mut off = vec![0.0; n];
    let mut on = vec![0.0; n];
    for x in 0..n {
        if model.center.contains(&x) {
            on[x] = chi.weight(x);
        } else {
            off[x] = chi.weight(x);
        }
    }
    let off_center = Measure::new(off).expect("split weights");
    let on_center = Measure::new(on).expect("split weights");

    // lhs: materialized pushforward of the whole measure through the inverse.
    let pushed = pushforward_with_cap(&model.inverse, &canon, DEFAULT_SELECTION_CAP)?;
    let lhs = pushed.evaluate(phi)?;

    // rhs: classical lift of the off-center part plus the fiber-max pairing.
    let mut rhs = 0.0;
    for (&x, &z) in &model.embedding {
        rhs += off_center.weight(x) * phi.get(z);
    }
    for (&a, fiber) in &model.fibers {
        if on_center.weight(a) > 0.0 {
            let fiber_max = fiber
                .iter()
                .map(|&z| phi.get(z))
                .fold(f64::NEG_INFINITY, f64::max);
            rhs += on_center.weight(a) * fiber_max;
        }
    }
    Ok(BlowupDecomposition {
        lhs,
        rhs,
        off_center,
        on_center,
    })
}
