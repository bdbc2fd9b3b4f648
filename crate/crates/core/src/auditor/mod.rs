//! Ground-truth checks for every definition the pipelines rely on.

mod disagreement;
mod homogeneity;
mod regularity;
mod vc;

pub use disagreement::{disagreement_bound, disagreement_pairs, DisagreementCounts};
pub use homogeneity::{
    bipartite_homogeneity, cover_homogeneity_audit, homogeneity_audit, is_homogeneous,
    weighted_homogeneity_audit, BipartiteHomogeneity, HomogeneityReport, TupleRecord,
};
pub use regularity::{
    bipartite_regularity_witness, min_subset, verify_bipartite_witness, verify_tripartite_witness,
    weak_regularity_witness, RegularityWitness, SearchMode, Witness, EXACT_PAIR_CAP, EXACT_SIDE_CAP,
};
pub use vc::{slicewise_vc, vc_dimension, VcDimension};
