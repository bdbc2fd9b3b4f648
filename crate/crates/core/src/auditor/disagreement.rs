use crate::bits::{and_count, VertexSet};
use crate::error::Result;
use crate::hypercore::KPartiteHypergraph;
use crate::par;
use crate::partitions::LayeredPartition;

/// Ordered `(edge, non-edge)` pairs that differ in exactly one coordinate,
/// with both differing vertices in one block of that coordinate's part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisagreementCounts {
    /// `T_i` over block tuples made only of regular blocks.
    pub regular: Vec<u64>,
    /// Pairs whose block tuple touches an exceptional block.
    pub exceptional: Vec<u64>,
}

impl DisagreementCounts {
    pub fn total(&self) -> u64 {
        self.regular.iter().sum()
    }
}

/// `ε²(1 - ε) n^{k+1} / s`.
pub fn disagreement_bound(eps: f64, n: usize, k: usize, s: usize) -> f64 {
    eps * eps * (1.0 - eps) * (n as f64).powi(k as i32 + 1) / s as f64
}

pub fn disagreement_pairs(h: &KPartiteHypergraph, p: &LayeredPartition) -> Result<DisagreementCounts> {
    p.check_sizes(h.sizes())?;
    let k = h.k();
    let mut regular = vec![0u64; k];
    let mut exceptional = vec![0u64; k];
    for i in 0..k {
        let (g, order) = h.with_target_last(i)?;
        let target = p.part(i);
        let blocks: Vec<(u32, VertexSet)> = target.nonempty_blocks();
        let others: Vec<&crate::partitions::PartPartition> =
            order[..k - 1].iter().map(|&j| p.part(j)).collect();
        let per_fiber: Vec<(u64, u64)> = par::map_range(g.fiber_count(), |fi| {
            let prefix = g.fiber_prefix(fi);
            let off_exceptional = prefix.iter().zip(&others).any(|(&v, q)| q.label(v) == 0);
            let row = g.fiber(fi);
            let (mut reg, mut exc) = (0u64, 0u64);
            for (label, set) in &blocks {
                let edges = and_count(row, set.words()) as u64;
                let pairs = edges * (set.count() as u64 - edges);
                if *label == 0 || off_exceptional {
                    exc += pairs;
                } else {
                    reg += pairs;
                }
            }
            (reg, exc)
        });
        for (r, e) in per_fiber {
            regular[i] += r;
            exceptional[i] += e;
        }
    }
    Ok(DisagreementCounts { regular, exceptional })
}
