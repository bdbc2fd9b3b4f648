//! Hypergraph and weighted-graph data model.

mod bipartite;
mod cover;
mod hypergraph;
mod weighted;

pub use bipartite::BipartiteGraph;
pub use cover::partite_cover;
pub use hypergraph::unrank;
pub use hypergraph::KPartiteHypergraph;
pub use weighted::{WeightedBipartite, WeightedTripartite};

use crate::bits::VertexSet;
use crate::error::Result;

/// Anything with a bipartite weight function (0/1 or weighted).
pub trait BipartiteDensity: Sync {
    fn shape(&self) -> (usize, usize);
    fn weight(&self, x: usize, y: usize) -> f64;
    fn box_density(&self, xs: &VertexSet, ys: &VertexSet) -> Result<f64>;
}

/// Anything with a tripartite weight function (0/1 or weighted).
pub trait TripartiteDensity: Sync {
    fn shape(&self) -> [usize; 3];
    fn weight(&self, a: usize, b: usize, c: usize) -> f64;
    fn box_density(&self, sets: [&VertexSet; 3]) -> Result<f64>;
}
