//! A layered weighted 3-graph whose links all have small regular
//! partitions while the whole graph resists weak regularisation.
//!
//! [`build_sequence`] fixes the interval counts `m_0 < m_1 < … < m_t`,
//! [`orthogonal_family`] draws near-independent bipartitions of each
//! refinement step, and [`build_weighted`] assembles the level graphs `G_r`
//! and the weighted graph `Σ_r 2^{-r} (G_r × C_r)`. Link certificates,
//! quasirandomness audits, the refinement cascade and unweighted sampling
//! check the construction from several directions.

mod cascade;
mod certificates;
mod construction;
mod family;
mod quasirandom;
mod sampling;
mod sequence;

pub use cascade::{
    refinement_cascade, BetaSchedule, CascadeReport, CascadeWitness, LevelReport, Side, DEFAULT_WITNESS_CAP,
};
pub use certificates::{
    constant_block_exceptions, link_certificate, verify_certificate, CertificateCheck, CertificateKind,
    LinkCertificate,
};
pub use construction::{build_weighted, from_families, level_graph, GowersConstruction, IntervalLayering, FAMILY_ATTEMPTS};
pub use family::{
    draw_family, imbalance_energy, item1_applies, item2_margin, orthogonal_family, AgreementCheck, Item1Check,
    Item2Report, OrthogonalFamily,
};
pub use quasirandom::{
    interval_band_audit, level_quasirandomness, quasirandomness_audit, BandTolerances, CodegreeCheck,
    CodegreeCondition, DegreeCondition, IntervalBandReport, LevelQuasirandomReport, QuasirandomReport,
};
pub use sampling::{
    concentration_report, sample_unweighted, BoxCheck, ConcentrationReport, SampledGraph, ALLOWED_MISSES, SUB_BOXES,
};
pub use sequence::{build_sequence, m_sequence, paper_t, phi, s0, GowersMode, GowersParams, Growth, ToyOverrides};
