//! Homogeneous and regular partitions of partite hypergraphs.
//!
//! The crate is organised around five layers:
//!
//! - [`hypercore`]: bit-packed k-partite hypergraphs, bipartite graphs and
//!   weighted tripartite graphs, with density, link and neighbourhood kernels.
//! - [`partitions`]: per-part partitions, common refinements, equalisation and
//!   β-refinement reports.
//! - [`homogenizer`]: the pipeline that turns homogeneous partitions of all
//!   links into an ε-homogeneous equipartition of the whole hypergraph.
//! - [`auditor`]: exact and sampled ground-truth checks (homogeneity,
//!   disagreement pairs, regularity witnesses, VC-dimension).
//! - [`gowers`]: the layered weighted 3-graph whose links have small regular
//!   partitions while the whole graph resists weak regularisation.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled (the default) and plain iterators otherwise.
//! All randomness is derived from a single `u64` seed through [`rng`], per
//! index, so results do not depend on the number of worker threads.

pub mod auditor;
pub mod bits;
pub mod error;
pub mod gowers;
pub mod homogenizer;
pub mod hypercore;
pub mod par;
pub mod partitions;
pub mod rng;

pub use bits::VertexSet;
pub use error::{Error, Result};
pub use hypercore::{BipartiteGraph, KPartiteHypergraph, WeightedBipartite, WeightedTripartite};
pub use partitions::{LayeredPartition, PartPartition, RefinementReport};

/// Numeric slack used when comparing real-valued thresholds against integer
/// counts (`(1 - 0.1) * 120` must compare equal to `108`).
pub const TOL: f64 = 1e-9;

/// `ceil` that ignores floating-point noise just above an integer.
pub fn ceil_tol(x: f64) -> f64 {
    (x - TOL).ceil()
}

/// `floor` that ignores floating-point noise just below an integer.
pub fn floor_tol(x: f64) -> f64 {
    (x + TOL).floor()
}
