use rand::Rng;

use crate::auditor::{bipartite_homogeneity, is_homogeneous};
use crate::error::{Error, Result};
use crate::homogenizer::oracle::LinkPartition;
use crate::homogenizer::params::{gamma_prime, similarity_shape, Mode};
use crate::hypercore::BipartiteGraph;
use crate::partitions::PartPartition;
use crate::{par, rng, TOL};

/// Blocks above this size estimate triple participation from sampled pairs.
pub const EXACT_PARTICIPATION_LIMIT: usize = 4096;
const PARTICIPATION_SAMPLES: usize = 512;

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityReport {
    /// `X'_0` is label 0; `X'_1..X'_q` are labels `1..`.
    pub partition: PartPartition,
    pub mode: Mode,
    pub gamma: f64,
    pub m: usize,
    pub q: usize,
    /// `q` minus the number of blocks actually produced.
    pub shortfall: usize,
    pub bad_blocks: Vec<u32>,
    /// `(block label, representative)` for every good block.
    pub representatives: Vec<(u32, usize)>,
    pub evicted: Vec<usize>,
    /// Normalized non-homogeneous mass of the input at `γ'`.
    pub input_mass: f64,
    pub input_homogeneous: bool,
    /// Largest `|N(x) Δ N(x')|` over pairs inside one output block.
    pub max_intra: usize,
}

impl SimilarityReport {
    pub fn exceptional_size(&self) -> usize {
        self.partition.exceptional_size()
    }

    /// Equal block sizes, `|X'_0| ≤ γn` and intra-block spread `≤ γn`.
    pub fn contract_holds(&self, n_y: usize) -> bool {
        let n_x = self.partition.len() as f64;
        let sizes = self.partition.block_sizes();
        sizes[1..].iter().all(|&s| s == self.m)
            && self.exceptional_size() as f64 <= self.gamma * n_x + TOL
            && self.max_intra as f64 <= self.gamma * n_y as f64 + TOL
    }
}

/// Largest symmetric difference of left neighbourhoods inside any regular
/// block, by full pairwise scan.
pub fn max_intra_sym_diff(g: &BipartiteGraph, p: &PartPartition) -> usize {
    let members = p.members();
    let per_block: Vec<usize> = par::map_slice(&members[1..], |b| {
        let mut best = 0;
        for (i, &x) in b.iter().enumerate() {
            for &y in &b[i + 1..] {
                best = best.max(g.sym_diff(x, y));
            }
        }
        best
    });
    per_block.into_iter().max().unwrap_or(0)
}

/// Vertex of `block` with the fewest triples `(x, x', y)`,
/// `y ∈ N(x) Δ N(x')`; ties go to the lower index.
fn representative(g: &BipartiteGraph, block: &[usize], seed: u64, label: u32) -> usize {
    let scores: Vec<u64> = if block.len() <= EXACT_PARTICIPATION_LIMIT {
        par::map_slice(block, |&x| block.iter().map(|&y| g.sym_diff(x, y) as u64).sum())
    } else {
        par::map_range(block.len(), |i| {
            let mut r = rng::stream(seed, "participation", ((label as u64) << 32) | i as u64);
            (0..PARTICIPATION_SAMPLES)
                .map(|_| g.sym_diff(block[i], block[r.random_range(0..block.len())]) as u64)
                .sum()
        })
    };
    let best = (0..block.len()).min_by_key(|&i| (scores[i], block[i])).unwrap();
    block[best]
}

/// Turns a homogeneous partition of `G` into a partition of the left side
/// whose regular blocks all have size `m` and consist of vertices with
/// nearly equal neighbourhoods.
pub fn similarity_partition(
    g: &BipartiteGraph,
    given: &LinkPartition,
    gamma: f64,
    r: usize,
    mode: Mode,
    seed: u64,
) -> Result<SimilarityReport> {
    let (n_x, n_y) = (g.n_x(), g.n_y());
    if given.left.len() != n_x || given.right.len() != n_y {
        return Err(Error::Mismatch(format!(
            "given partition covers {}x{}, graph is {n_x}x{n_y}",
            given.left.len(),
            given.right.len()
        )));
    }
    let (m, q) = similarity_shape(gamma, r, n_x, mode)?;
    let gp = gamma_prime(gamma);
    let audit = bipartite_homogeneity(g, &given.left, &given.right, gp)?;

    // a left block is bad if its non-homogeneous right mass exceeds γ²n/16
    let limit = gamma * gamma / 16.0 * n_y as f64 + TOL;
    let mut bad_mass = vec![0u64; given.left.block_count() + 1];
    for &(l, _, cells, edges) in &audit.pairs {
        if !is_homogeneous(edges as f64 / cells as f64, gp) {
            let right_size = cells / given.left.block_sizes()[l as usize] as u64;
            bad_mass[l as usize] += right_size;
        }
    }
    let members = given.left.members();
    let mut labels = vec![0u32; n_x];
    let mut bad_blocks = Vec::new();
    let mut representatives = Vec::new();
    let mut evicted = Vec::new();
    let mut next = 1u32;
    let evict_at = gamma * n_y as f64 / 2.0 - TOL;
    for (l, block) in members.iter().enumerate().skip(1) {
        let l = l as u32;
        if bad_mass[l as usize] as f64 > limit {
            bad_blocks.push(l);
            continue;
        }
        let rep = representative(g, block, seed, l);
        representatives.push((l, rep));
        let mut kept = Vec::with_capacity(block.len());
        for &x in block {
            if g.sym_diff(x, rep) as f64 >= evict_at {
                evicted.push(x);
            } else {
                kept.push(x);
            }
        }
        for chunk in kept.chunks_exact(m) {
            if next as usize > q {
                break;
            }
            for &x in chunk {
                labels[x] = next;
            }
            next += 1;
        }
    }
    let produced = next as usize - 1;
    let partition = PartPartition::new(0, labels)?;
    let max_intra = max_intra_sym_diff(g, &partition);
    Ok(SimilarityReport {
        partition,
        mode,
        gamma,
        m,
        q,
        shortfall: q - produced,
        bad_blocks,
        representatives,
        evicted,
        input_mass: audit.normalized_mass,
        input_homogeneous: audit.pass,
        max_intra,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial_pair(n: usize) -> LinkPartition {
        LinkPartition { left: PartPartition::trivial(0, n), right: PartPartition::trivial(1, n) }
    }

    #[test]
    fn complete_graph_trace() {
        let g = BipartiteGraph::from_fn(120, 120, |_, _| true);
        let r = similarity_partition(&g, &trivial_pair(120), 0.3, 1, Mode::Paper, 0).unwrap();
        assert_eq!((r.q, r.m), (7, 12));
        assert_eq!(r.partition.block_count(), 7);
        assert_eq!(r.exceptional_size(), 36);
        assert_eq!(r.max_intra, 0);
        assert_eq!(r.shortfall, 0);
        assert!(r.contract_holds(120));
    }

    #[test]
    fn planted_boxes_meet_contract() {
        let n = 60;
        let g = BipartiteGraph::from_fn(n, n, |x, y| (x % 3 == 0) ^ (y < 20));
        let left = PartPartition::from_raw(0, &(0..n).map(|x| (x % 3 == 0) as u32).collect::<Vec<_>>(), None);
        let right = PartPartition::from_raw(1, &(0..n).map(|y| (y < 20) as u32).collect::<Vec<_>>(), None);
        for gamma in [0.1, 0.2, 0.3] {
            let r = similarity_partition(&g, &LinkPartition { left: left.clone(), right: right.clone() }, gamma, 2, Mode::Practical, 1)
                .unwrap();
            assert!(r.contract_holds(n), "gamma {gamma}: {r:?}");
            assert_eq!(r.shortfall, 0);
        }
    }

    #[test]
    fn non_homogeneous_input_is_reported() {
        let g = BipartiteGraph::from_fn(30, 30, |x, y| (x + y) % 2 == 0);
        let r = similarity_partition(&g, &trivial_pair(30), 0.3, 1, Mode::Practical, 0).unwrap();
        assert!(!r.input_homogeneous);
        assert_eq!(r.bad_blocks, vec![1]);
        assert_eq!(r.shortfall, r.q);
    }
}
