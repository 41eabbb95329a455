//! Partially-defined dynamical maps as point-to-set maps.
//!
//! A [`Multimap`] assigns every source point a nonempty set of target points.
//! Points with a singleton image form the open domain; the rest form the
//! indeterminacy set, and their image sets play the role of cluster sets of the
//! map near an indeterminacy point. Cluster sets are either supplied directly
//! or derived from a partial single-valued map by scanning a delta-neighborhood
//! of each undefined point.

use std::sync::Arc;

use thiserror::Error;

use crate::space::{FiniteSpace, PointSet};

#[derive(Debug, Error)]
pub enum MultimapError {
    #[error("image set of point {point} is empty")]
    EmptyImage { point: usize },
    #[error("image table covers {given} points but the source has {expected}")]
    WrongArity { given: usize, expected: usize },
    #[error("image of point {point} references {target} outside the target space of size {n}")]
    TargetOutOfRange {
        point: usize,
        target: usize,
        n: usize,
    },
    #[error("point {point} outside the partial domain has no delta-neighbor in it")]
    DomainNotDense { point: usize },
    #[error("composition domain is empty or not delta-dense and no explicit composite was given")]
    SparseCompositionDomain,
    #[error("target point {point} of the open image has {count} open-domain preimages, expected degree {degree}")]
    DegreeViolation {
        point: usize,
        count: usize,
        degree: usize,
    },
    #[error("spaces do not match: {context}")]
    SpaceMismatch { context: &'static str },
}

/// A partially-defined map between finite spaces, stored as per-point image
/// sets. `open_domain` is exactly the set of points with singleton images; its
/// complement is the indeterminacy set.
#[derive(Debug, Clone)]
pub struct Multimap {
    source: Arc<FiniteSpace>,
    target: Arc<FiniteSpace>,
    images: Vec<Vec<usize>>,
    open_domain: Vec<bool>,
    degree: Option<usize>,
}

impl Multimap {
    /// Builds a multimap from an image table (one nonempty set per source point).
    pub fn new(
        source: Arc<FiniteSpace>,
        target: Arc<FiniteSpace>,
        images: Vec<Vec<usize>>,
    ) -> Result<Self, MultimapError> {
        if images.len() != source.len() {
            return Err(MultimapError::WrongArity {
                given: images.len(),
                expected: source.len(),
            });
        }
        let mut cleaned = Vec::with_capacity(images.len());
        for (point, set) in images.into_iter().enumerate() {
            if set.is_empty() {
                return Err(MultimapError::EmptyImage { point });
            }
            for &t in &set {
                if t >= target.len() {
                    return Err(MultimapError::TargetOutOfRange {
                        point,
                        target: t,
                        n: target.len(),
                    });
                }
            }
            let mut set = set;
            set.sort_unstable();
            set.dedup();
            cleaned.push(set);
        }
        let open_domain = cleaned.iter().map(|s| s.len() == 1).collect();
        Ok(Multimap {
            source,
            target,
            images: cleaned,
            open_domain,
            degree: None,
        })
    }

    /// Convenience constructor for a totally-defined (single-valued) map.
    pub fn deterministic(
        source: Arc<FiniteSpace>,
        target: Arc<FiniteSpace>,
        map: Vec<usize>,
    ) -> Result<Self, MultimapError> {
        Multimap::new(source, target, map.into_iter().map(|y| vec![y]).collect())
    }

    /// Declares a covering degree. Every target point in the image of the open
    /// domain must have exactly `degree` preimages inside the open domain.
    pub fn with_degree(mut self, degree: usize) -> Result<Self, MultimapError> {
        for (y, count) in self.open_image_preimage_counts() {
            if count != degree {
                return Err(MultimapError::DegreeViolation {
                    point: y,
                    count,
                    degree,
                });
            }
        }
        self.degree = Some(degree);
        Ok(self)
    }

    /// Derives a multimap from a partial single-valued table: points inside the
    /// domain keep their value, points outside receive the cluster set of values
    /// taken on their delta-neighborhood within the domain.
    pub fn from_partial(
        source: Arc<FiniteSpace>,
        target: Arc<FiniteSpace>,
        fine_map: &[Option<usize>],
        delta: f64,
    ) -> Result<Self, MultimapError> {
        if fine_map.len() != source.len() {
            return Err(MultimapError::WrongArity {
                given: fine_map.len(),
                expected: source.len(),
            });
        }
        let mut images = Vec::with_capacity(source.len());
        for x in 0..source.len() {
            match fine_map[x] {
                Some(y) => images.push(vec![y]),
                None => {
                    let cluster: Vec<usize> = source
                        .neighborhood(x, delta)
                        .into_iter()
                        .filter_map(|y| fine_map[y])
                        .collect();
                    if cluster.is_empty() {
                        return Err(MultimapError::DomainNotDense { point: x });
                    }
                    images.push(cluster);
                }
            }
        }
        Multimap::new(source, target, images)
    }

    pub fn source(&self) -> &Arc<FiniteSpace> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteSpace> {
        &self.target
    }

    pub fn degree(&self) -> Option<usize> {
        self.degree
    }

    pub fn images(&self, x: usize) -> &[usize] {
        &self.images[x]
    }

    /// The single image of an open-domain point.
    pub fn image_point(&self, x: usize) -> Option<usize> {
        if self.open_domain[x] {
            Some(self.images[x][0])
        } else {
            None
        }
    }

    pub fn is_open(&self, x: usize) -> bool {
        self.open_domain[x]
    }

    pub fn open_domain(&self) -> PointSet {
        (0..self.source.len())
            .filter(|&x| self.open_domain[x])
            .collect()
    }

    /// I(f): the complement of the open domain.
    pub fn indeterminacy(&self) -> PointSet {
        (0..self.source.len())
            .filter(|&x| !self.open_domain[x])
            .collect()
    }

    /// Image of the open domain.
    pub fn open_image(&self) -> PointSet {
        (0..self.source.len())
            .filter(|&x| self.open_domain[x])
            .map(|x| self.images[x][0])
            .collect()
    }

    fn open_image_preimage_counts(&self) -> Vec<(usize, usize)> {
        let mut counts = vec![0usize; self.target.len()];
        for x in 0..self.source.len() {
            if self.open_domain[x] {
                counts[self.images[x][0]] += 1;
            }
        }
        self.open_image()
            .into_iter()
            .map(|y| (y, counts[y]))
            .collect()
    }

    /// Open-domain preimages of a target point.
    pub fn open_preimages(&self, y: usize) -> Vec<usize> {
        (0..self.source.len())
            .filter(|&x| self.open_domain[x] && self.images[x][0] == y)
            .collect()
    }

    pub fn is_self_map(&self) -> bool {
        Arc::ptr_eq(&self.source, &self.target) || *self.source == *self.target
    }

    /// Points whose forward orbit stays in the open domain for `max_depth`
    /// steps (default: the point count, which is exact on a finite space since
    /// orbits are eventually periodic).
    pub fn omega_infinity(&self, max_depth: Option<usize>) -> Result<PointSet, MultimapError> {
        if !self.is_self_map() {
            return Err(MultimapError::SpaceMismatch {
                context: "omega_infinity requires a self-map",
            });
        }
        // The default depth n is exact by pigeonhole: an orbit that survives n
        // steps has entered a cycle inside the open domain.
        let depth = max_depth.unwrap_or(self.source.len());
        let mut good = PointSet::new();
        'outer: for x in 0..self.source.len() {
            let mut current = x;
            for _ in 0..depth {
                if !self.open_domain[current] {
                    continue 'outer;
                }
                current = self.images[current][0];
            }
            good.insert(x);
        }
        Ok(good)
    }

    /// Plain relation composition: the union of g-images over every f-image.
    /// This is a diagnostic, never the genuine composite.
    pub fn relation_composition(f: &Multimap, g: &Multimap) -> Result<Multimap, MultimapError> {
        if *f.target != *g.source {
            return Err(MultimapError::SpaceMismatch {
                context: "relation composition requires f.target = g.source",
            });
        }
        let images = (0..f.source.len())
            .map(|x| {
                let mut out: Vec<usize> = f.images[x]
                    .iter()
                    .flat_map(|&y| g.images[y].iter().copied())
                    .collect();
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect();
        Multimap::new(Arc::clone(&f.source), Arc::clone(&g.target), images)
    }
}

/// Result of composing two multimaps: the genuine composite plus the relation
/// composition kept as a diagnostic.
#[derive(Debug, Clone)]
pub struct Composition {
    pub composite: Multimap,
    pub relation: Multimap,
}

/// Composes `g` after `f`. When `explicit_composite` is given it is validated
/// for shape and returned; otherwise the genuine composite g(f(x)) is formed on
/// the set of points whose full two-step orbit is single-valued, and extended by
/// delta-neighborhood cluster sets.
pub fn compose_multimaps(
    f: &Multimap,
    g: &Multimap,
    explicit_composite: Option<&Multimap>,
    delta: f64,
) -> Result<Composition, MultimapError> {
    if *f.target != *g.source {
        return Err(MultimapError::SpaceMismatch {
            context: "compose requires f.target = g.source",
        });
    }
    let relation = Multimap::relation_composition(f, g)?;
    if let Some(c) = explicit_composite {
        if *c.source != *f.source || *c.target != *g.target {
            return Err(MultimapError::SpaceMismatch {
                context: "explicit composite must map f.source to g.target",
            });
        }
        return Ok(Composition {
            composite: c.clone(),
            relation,
        });
    }
    let fine_map: Vec<Option<usize>> = (0..f.source.len())
        .map(|x| f.image_point(x).and_then(|y| g.image_point(y)))
        .collect();
    if fine_map.iter().all(|v| v.is_none()) {
        return Err(MultimapError::SparseCompositionDomain);
    }
    let composite = Multimap::from_partial(
        Arc::clone(&f.source),
        Arc::clone(&g.target),
        &fine_map,
        delta,
    )
    .map_err(|e| match e {
        MultimapError::DomainNotDense { .. } => MultimapError::SparseCompositionDomain,
        other => other,
    })?;
    Ok(Composition {
        composite,
        relation,
    })
}
