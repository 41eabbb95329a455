//! Computing with positive strong submeasures on finite metric spaces.
//!
//! A positive strong submeasure is a sublinear, bounded, monotone functional on
//! functions over a space. On a finite space every such functional is the
//! pointwise maximum of a finite family of nonnegative measure vectors, and this
//! crate works exclusively in that generator representation: evaluation is a max
//! of dot products, domination is convex-hull membership, and the pushforward
//! under a partially-defined map is materialized by enumerating selections over
//! the indeterminacy cluster sets.
//!
//! The crate is organized around the pipeline
//! space/multimap construction ([`space`], [`multimap`]) →
//! submeasure algebra ([`measure`]) →
//! transfer operators ([`transfer`]) →
//! invariant constructions ([`invariant`]) →
//! orbit-shift entropy ([`entropy`]),
//! with the numeric kernels (simplex LP, hull certificates, power iteration,
//! conditional gradient) in [`optim`] and curated model systems in [`models`].
//!
//! All types are immutable after construction and all operations are pure, so
//! values can be shared freely across threads.

// Indexed loops over matrices and point sets mirror the formulas they
// implement and stay.
#![allow(clippy::needless_range_loop)]

pub mod entropy;
pub mod invariant;
pub mod measure;
pub mod models;
pub mod multimap;
pub mod optim;
pub mod sampling;
pub mod space;
pub mod transfer;

pub use entropy::{MarkovMeasure, OrbitShift, Partition};
pub use measure::{Measure, Submeasure};
pub use multimap::Multimap;
pub use space::{FiniteSpace, GroundFunction};
pub use transfer::BlowupModel;
