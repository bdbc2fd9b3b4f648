use crate::auditor::{bipartite_regularity_witness, RegularityWitness, SearchMode};
use crate::bits::VertexSet;
use crate::error::{Error, Result};
use crate::gowers::construction::GowersConstruction;
use crate::hypercore::WeightedBipartite;
use crate::partitions::{common_refinement, PartPartition};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CertificateKind {
    /// Trivial partition; the link is a scaled quasirandom graph.
    Quasirandom,
    /// Level intervals; every block pair is complete or empty.
    ConstantBoxes,
    /// Neighbourhood atoms against the layers of `C`.
    LayerConstant,
}

impl CertificateKind {
    pub fn name(self) -> &'static str {
        match self {
            CertificateKind::Quasirandom => "quasirandom",
            CertificateKind::ConstantBoxes => "constant-boxes",
            CertificateKind::LayerConstant => "layer-constant",
        }
    }

    pub fn is_exact(self) -> bool {
        self != CertificateKind::Quasirandom
    }
}

/// A partition of the link of `(part, vertex)`; `left` is on the lower
/// remaining part, `right` on the higher one.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkCertificate {
    pub part: usize,
    pub vertex: usize,
    pub kind: CertificateKind,
    pub left: PartPartition,
    pub right: PartPartition,
    /// Block-count bound the certificate must respect.
    pub size_bound: u64,
}

impl LinkCertificate {
    /// Larger of the two block counts.
    pub fn size(&self) -> usize {
        self.left.block_count().max(self.right.block_count())
    }

    pub fn within_bound(&self) -> bool {
        self.size() as u64 <= self.size_bound
    }
}

pub fn link_certificate(c: &GowersConstruction, part: usize, v: usize) -> Result<LinkCertificate> {
    let n = c.n();
    if part >= 3 {
        return Err(Error::InvalidParameter(format!("no part {part}")));
    }
    if v >= n {
        return Err(Error::OutOfRange { part, index: v, size: n });
    }
    let p = &c.params;
    let t = c.t();
    if part == 2 {
        let r = c.layering.layer(v);
        if p.quasirandom_layer(r) {
            return Ok(LinkCertificate {
                part,
                vertex: v,
                kind: CertificateKind::Quasirandom,
                left: PartPartition::trivial(0, n),
                right: PartPartition::trivial(1, n),
                size_bound: 1,
            });
        }
        return Ok(LinkCertificate {
            part,
            vertex: v,
            kind: CertificateKind::ConstantBoxes,
            left: c.layering.partition(r, 0),
            right: c.layering.partition(r, 1),
            size_bound: p.s0.saturating_mul(p.s0),
        });
    }
    // v ∈ A links B × C, v ∈ B links A × C
    let other = 1 - part;
    let neighbourhoods: Vec<VertexSet> = (1..=t)
        .map(|r| {
            let g = c.graph(r);
            VertexSet::from_fn(other, n, |u| if part == 0 { g.has_edge(v, u) } else { g.has_edge(u, v) })
        })
        .collect();
    Ok(LinkCertificate {
        part,
        vertex: v,
        kind: CertificateKind::LayerConstant,
        left: common_refinement(other, n, &neighbourhoods)?,
        right: c.layering.layers(),
        size_bound: 1u64.checked_shl(t as u32).unwrap_or(u64::MAX),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateCheck {
    pub kind: CertificateKind,
    pub within_bound: bool,
    /// Block pairs inspected (exact kinds).
    pub block_pairs: usize,
    /// Block pairs carrying more than one weight value.
    pub exceptions: usize,
    /// Sampled search on the whole link (quasirandom kind).
    pub witness: Option<RegularityWitness>,
    pub pass: bool,
}

/// Counts block pairs of `(left, right)` on which `link` is not constant.
pub fn constant_block_exceptions(link: &WeightedBipartite, left: &PartPartition, right: &PartPartition) -> (usize, usize) {
    let (bl, br) = (left.block_count() + 1, right.block_count() + 1);
    let mut first: Vec<Option<f64>> = vec![None; bl * br];
    let mut bad = vec![false; bl * br];
    for x in 0..link.n_x() {
        let lx = left.label(x) as usize;
        for y in 0..link.n_y() {
            let cell = lx * br + right.label(y) as usize;
            let w = link.weight(x, y);
            match first[cell] {
                None => first[cell] = Some(w),
                Some(f) if f.to_bits() != w.to_bits() => bad[cell] = true,
                _ => {}
            }
        }
    }
    (first.iter().filter(|f| f.is_some()).count(), bad.iter().filter(|&&b| b).count())
}

/// Exact kinds: every block pair has one weight. Quasirandom kind: no
/// irregularity witness at `delta` within `budget` sampled draws.
pub fn verify_certificate(
    c: &GowersConstruction,
    cert: &LinkCertificate,
    delta: f64,
    budget: usize,
    seed: u64,
) -> Result<CertificateCheck> {
    let link = c.weighted.link(cert.part, cert.vertex)?;
    let within_bound = cert.within_bound();
    if cert.kind.is_exact() {
        let (block_pairs, exceptions) = constant_block_exceptions(&link, &cert.left, &cert.right);
        return Ok(CertificateCheck {
            kind: cert.kind,
            within_bound,
            block_pairs,
            exceptions,
            witness: None,
            pass: within_bound && exceptions == 0,
        });
    }
    let xs = VertexSet::full(0, link.n_x());
    let ys = VertexSet::full(1, link.n_y());
    let s = rng::indexed(rng::derive(seed, "certificate"), (cert.part * c.n() + cert.vertex) as u64);
    let w = bipartite_regularity_witness(&link, &xs, &ys, delta, SearchMode::Sampled { budget }, s)?;
    Ok(CertificateCheck {
        kind: cert.kind,
        within_bound,
        block_pairs: 1,
        exceptions: 0,
        pass: within_bound && w.found.is_none(),
        witness: Some(w),
    })
}
