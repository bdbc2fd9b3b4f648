//! From homogeneous link partitions to an ε-homogeneous equipartition.
//!
//! [`similarity_partition`] regroups one side of a bipartite graph into
//! equal blocks of near-identical neighbourhoods, [`tuple_partition`] groups
//! (k-1)-tuples by the neighbourhood they see in a target part, and
//! [`homogeneous_partition`] runs the tuple step once per part and equalises
//! the common refinement of the resulting neighbourhoods.

mod oracle;
mod params;
mod similarity;
mod pipeline;
mod tuples;
mod twins;

pub use oracle::{
    ExhaustiveOracle, GreedyOracle, LinkPartition, LinkPartitionOracle, Provenance, TableOracle,
    EXHAUSTIVE_SIDE_CAP,
};
pub use params::{
    excellence_threshold, gamma_prime, tuple_link_eps, paper_q, similarity_shape, composed_link_eps,
    Mode, ToleranceParams, DEFAULT_MAX_ANCHORS,
};
pub use similarity::{max_intra_sym_diff, similarity_partition, SimilarityReport, EXACT_PARTICIPATION_LIMIT};
pub use pipeline::{
    audit_hypothesis, homogeneous_partition, HomogenizeOptions, HomogenizeReport, HypothesisAudit, PartStep,
};
pub use tuples::{tuple_partition, TuplePartition};
pub use twins::{twin_diagnostics, TwinParams, TwinReport, TwinSample};
