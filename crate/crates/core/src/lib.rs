//! Entanglement geometry of pure many-body states.
//!
//! The pipeline is: build a state ([`states`]), sweep every bipartition into
//! an [`entropy::EntropyTable`], fit an entanglement adjacency matrix to the
//! table ([`eamfit`]), and read off per-site entanglement contours
//! ([`contour`]). The [`cft`] module checks the continuum version of the
//! same construction. All entropies are in nats.

pub mod cft;
pub mod contour;
pub mod eamfit;
pub mod entropy;
pub mod error;
pub mod formats;
pub mod linalg;
pub mod states;

pub use error::{Error, Result};

/// ln 2, the entropy of one maximally entangled qubit pair.
pub const LN2: f64 = std::f64::consts::LN_2;
