//! Document networks from heterogeneous link sources, node-weighted Leiden
//! clustering across resolution sweeps, and per-topic clustering-effectiveness
//! evaluation via purity profiles.
//!
//! The crate is organized around the stages of that pipeline:
//!
//! * [`network`] — the weighted network model and the builders for the four
//!   network variants (pure bipartite, text similarity, mixed, extended
//!   citation).
//! * [`clustering`] — Leiden clustering under the constant Potts model with
//!   node weights, resolution-sweep generation and endpoint calibration.
//! * [`topics`] — hierarchical topic trees, annotation expansion, size bins,
//!   redundancy filtering, and category filtering.
//! * [`effectiveness`] — cluster selection under coverage, purity, and topic
//!   purity profiles.
//! * [`category_eval`] — category-level profiles, top-third counts, and
//!   relative purity differences.
//! * [`synth`] — a planted-topic corpus generator plus brute-force oracles
//!   (exhaustive CPM optimum, purity recount, reference complete linkage)
//!   for ground-truth verification.

pub mod category_eval;
pub mod clustering;
pub mod effectiveness;
pub mod network;
pub mod synth;
pub mod topics;
mod util;

pub use network::{Network, NodeKind, NodeRecord, Variant};
