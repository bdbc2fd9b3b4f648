use std::collections::HashMap;

use crate::auditor::bipartite_homogeneity;
use crate::bits::xor_count;
use crate::error::{Error, Result};
use crate::hypercore::{BipartiteGraph, KPartiteHypergraph};
use crate::partitions::PartPartition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Planted,
    Greedy,
    Exhaustive,
    ExternalFile,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Planted => "planted",
            Provenance::Greedy => "greedy",
            Provenance::Exhaustive => "exhaustive",
            Provenance::ExternalFile => "external-file",
        }
    }
}

/// Partitions of the two free parts of a link, lower part index on the left.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkPartition {
    pub left: PartPartition,
    pub right: PartPartition,
}

/// Source of small homogeneous partitions of links.
pub trait LinkPartitionOracle: Sync {
    fn provenance(&self) -> Provenance;

    /// Partition of the link of `pins` (k - 2 vertices in distinct parts).
    fn link_partition(&self, h: &KPartiteHypergraph, pins: &[(usize, usize)]) -> Result<LinkPartition>;
}

fn free_parts(k: usize, pins: &[(usize, usize)]) -> Result<(usize, usize)> {
    let mut pinned = vec![false; k];
    for &(p, _) in pins {
        if p >= k {
            return Err(Error::InvalidParameter(format!("no part {p}")));
        }
        if pinned[p] {
            return Err(Error::DuplicatePart { part: p });
        }
        pinned[p] = true;
    }
    let free: Vec<usize> = (0..k).filter(|&p| !pinned[p]).collect();
    if free.len() != 2 {
        return Err(Error::Mismatch(format!("{} pins for a {k}-graph", pins.len())));
    }
    Ok((free[0], free[1]))
}

fn key(pins: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut k = pins.to_vec();
    k.sort_unstable();
    k
}

/// Partitions looked up by pins, with an optional per-part fallback used
/// for every pin tuple without an explicit entry.
#[derive(Clone, Debug)]
pub struct TableOracle {
    provenance: Provenance,
    per_part: Option<Vec<PartPartition>>,
    entries: HashMap<Vec<(usize, usize)>, LinkPartition>,
}

impl TableOracle {
    /// Same partition of each part for every link.
    pub fn uniform(provenance: Provenance, per_part: Vec<PartPartition>) -> Self {
        Self { provenance, per_part: Some(per_part), entries: HashMap::new() }
    }

    pub fn explicit(provenance: Provenance) -> Self {
        Self { provenance, per_part: None, entries: HashMap::new() }
    }

    pub fn insert(&mut self, pins: &[(usize, usize)], partition: LinkPartition) {
        self.entries.insert(key(pins), partition);
    }

    pub fn per_part(&self) -> Option<&[PartPartition]> {
        self.per_part.as_deref()
    }

    /// Explicit entries in pin order.
    pub fn entries(&self) -> Vec<(&Vec<(usize, usize)>, &LinkPartition)> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }
}

impl LinkPartitionOracle for TableOracle {
    fn provenance(&self) -> Provenance {
        self.provenance
    }

    fn link_partition(&self, h: &KPartiteHypergraph, pins: &[(usize, usize)]) -> Result<LinkPartition> {
        let (p, q) = free_parts(h.k(), pins)?;
        if let Some(e) = self.entries.get(&key(pins)) {
            return Ok(e.clone());
        }
        match &self.per_part {
            Some(parts) => Ok(LinkPartition {
                left: parts[p].clone().with_part(0),
                right: parts[q].clone().with_part(1),
            }),
            None => Err(Error::Oracle(format!("no partition recorded for pins {pins:?}"))),
        }
    }
}

/// Leader clustering of rows: each vertex joins the first leader within
/// `radius` (Hamming), else founds a new block.
fn leader_clusters(g: &BipartiteGraph, radius: usize, part: usize) -> PartPartition {
    let mut leaders: Vec<usize> = Vec::new();
    let mut labels = Vec::with_capacity(g.n_x());
    for x in 0..g.n_x() {
        match leaders.iter().position(|&l| xor_count(g.row(l), g.row(x)) <= radius) {
            Some(i) => labels.push(i as u32 + 1),
            None => {
                leaders.push(x);
                labels.push(leaders.len() as u32);
            }
        }
    }
    PartPartition::new(part, labels).expect("leader labels are contiguous")
}

/// Greedy heuristic: cluster each side by neighbourhood similarity with a
/// shrinking radius until the pair is homogeneous, failing if more than
/// `r` blocks are needed.
#[derive(Clone, Debug)]
pub struct GreedyOracle {
    pub link_eps: f64,
    pub r: usize,
}

impl GreedyOracle {
    pub fn partition_graph(&self, g: &BipartiteGraph) -> Result<LinkPartition> {
        let gt = g.transpose();
        let mut radius_x = (self.link_eps * g.n_y() as f64) as usize;
        let mut radius_y = (self.link_eps * g.n_x() as f64) as usize;
        loop {
            let left = leader_clusters(g, radius_x, 0);
            let right = leader_clusters(&gt, radius_y, 1);
            if left.block_count() > self.r || right.block_count() > self.r {
                return Err(Error::Oracle(format!(
                    "greedy split needs {}x{} blocks, above r = {}",
                    left.block_count(),
                    right.block_count(),
                    self.r
                )));
            }
            if bipartite_homogeneity(g, &left, &right, self.link_eps)?.pass {
                return Ok(LinkPartition { left, right });
            }
            if radius_x == 0 && radius_y == 0 {
                return Err(Error::Oracle("exact row classes are not homogeneous".into()));
            }
            radius_x /= 2;
            radius_y /= 2;
        }
    }
}

impl LinkPartitionOracle for GreedyOracle {
    fn provenance(&self) -> Provenance {
        Provenance::Greedy
    }

    fn link_partition(&self, h: &KPartiteHypergraph, pins: &[(usize, usize)]) -> Result<LinkPartition> {
        self.partition_graph(&h.link(pins)?)
    }
}

/// Exhaustive search over all pairs of partitions with at most `r` blocks,
/// in order of total block count; sides of at most 12 vertices.
#[derive(Clone, Debug)]
pub struct ExhaustiveOracle {
    pub link_eps: f64,
    pub r: usize,
    /// Maximum number of partition pairs audited.
    pub work_cap: u64,
}

pub const EXHAUSTIVE_SIDE_CAP: usize = 12;

/// Restricted growth strings of length `n` with at most `r` blocks.
fn set_partitions(n: usize, r: usize, part: usize, cap: u64) -> Result<Vec<PartPartition>> {
    let mut out = Vec::new();
    let mut labels = vec![1u32; n];
    fn rec(
        i: usize,
        max: u32,
        r: u32,
        labels: &mut Vec<u32>,
        out: &mut Vec<PartPartition>,
        part: usize,
        cap: u64,
    ) -> bool {
        if out.len() as u64 > cap {
            return false;
        }
        if i == labels.len() {
            out.push(PartPartition::new(part, labels.clone()).expect("contiguous"));
            return true;
        }
        for l in 1..=(max + 1).min(r) {
            labels[i] = l;
            if !rec(i + 1, max.max(l), r, labels, out, part, cap) {
                return false;
            }
        }
        true
    }
    if n == 0 {
        return Ok(vec![PartPartition::trivial(part, 0)]);
    }
    if !rec(1, 1, r as u32, &mut labels, &mut out, part, cap) {
        return Err(Error::Oracle(format!("more than {cap} partitions of {n} vertices")));
    }
    out.sort_by_key(|p| p.block_count());
    Ok(out)
}

impl ExhaustiveOracle {
    pub fn partition_graph(&self, g: &BipartiteGraph) -> Result<LinkPartition> {
        if g.n_x() > EXHAUSTIVE_SIDE_CAP || g.n_y() > EXHAUSTIVE_SIDE_CAP {
            return Err(Error::ExactCapExceeded { sizes: vec![g.n_x(), g.n_y()] });
        }
        let lefts = set_partitions(g.n_x(), self.r, 0, self.work_cap)?;
        let rights = set_partitions(g.n_y(), self.r, 1, self.work_cap)?;
        let mut work = 0u64;
        for total in 2..=2 * self.r {
            for l in lefts.iter().filter(|l| l.block_count() <= total) {
                let want = total - l.block_count();
                for rp in rights.iter().filter(|rp| rp.block_count() == want) {
                    work += 1;
                    if work > self.work_cap {
                        return Err(Error::Oracle(format!("work cap {} reached", self.work_cap)));
                    }
                    if bipartite_homogeneity(g, l, rp, self.link_eps)?.pass {
                        return Ok(LinkPartition { left: l.clone(), right: rp.clone() });
                    }
                }
            }
        }
        Err(Error::Oracle(format!("no {}-homogeneous pair with at most {} blocks", self.link_eps, self.r)))
    }
}

impl LinkPartitionOracle for ExhaustiveOracle {
    fn provenance(&self) -> Provenance {
        Provenance::Exhaustive
    }

    fn link_partition(&self, h: &KPartiteHypergraph, pins: &[(usize, usize)]) -> Result<LinkPartition> {
        self.partition_graph(&h.link(pins)?)
    }
}
