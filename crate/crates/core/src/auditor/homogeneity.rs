use crate::bits::VertexSet;
use crate::error::{Error, Result};
use crate::hypercore::{partite_cover, BipartiteGraph, KPartiteHypergraph, WeightedTripartite};
use crate::par;
use crate::partitions::{LayeredPartition, PartPartition};
use crate::TOL;

/// `d ∈ [0, ε] ∪ [1 - ε, 1]`.
#[inline]
pub fn is_homogeneous(density: f64, eps: f64) -> bool {
    density <= eps + TOL || density >= 1.0 - eps - TOL
}

/// Exact homogeneity audit of a layered partition.
///
/// Records are kept only for block tuples with at least one cell, i.e.
/// every tuple of nonempty blocks; labels are stored flat, `k` per record.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneityReport {
    pub eps: f64,
    pub k: usize,
    /// Set when weights are fractional; homogeneity is then an extension of
    /// the 0/1 definition.
    pub weighted: bool,
    labels: Vec<u32>,
    cells: Vec<u64>,
    sums: Vec<f64>,
    pub mass: u64,
    pub total: u64,
    pub normalized_mass: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TupleRecord<'a> {
    pub labels: &'a [u32],
    pub cells: u64,
    /// Edge count, or weight sum for weighted audits.
    pub weight: f64,
    pub density: f64,
    pub homogeneous: bool,
}

impl HomogeneityReport {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn record(&self, i: usize) -> TupleRecord<'_> {
        let density = self.sums[i] / self.cells[i] as f64;
        TupleRecord {
            labels: &self.labels[i * self.k..(i + 1) * self.k],
            cells: self.cells[i],
            weight: self.sums[i],
            density,
            homogeneous: is_homogeneous(density, self.eps),
        }
    }

    pub fn records(&self) -> impl Iterator<Item = TupleRecord<'_>> + '_ {
        (0..self.len()).map(|i| self.record(i))
    }

    pub fn failing(&self) -> impl Iterator<Item = TupleRecord<'_>> + '_ {
        self.records().filter(|r| !r.homogeneous)
    }

    fn finish(eps: f64, k: usize, weighted: bool, labels: Vec<u32>, cells: Vec<u64>, sums: Vec<f64>) -> Self {
        let total: u64 = cells.iter().sum();
        let mass: u64 = cells
            .iter()
            .zip(&sums)
            .filter(|(&c, &s)| !is_homogeneous(s / c as f64, eps))
            .map(|(&c, _)| c)
            .sum();
        let normalized_mass = mass as f64 / total as f64;
        Self {
            eps,
            k,
            weighted,
            labels,
            cells,
            sums,
            mass,
            total,
            pass: normalized_mass <= eps + TOL,
            normalized_mass,
        }
    }
}

/// Nonempty blocks of each part, as `(label, size)`.
fn blocks_of(p: &PartPartition) -> Vec<(u32, usize)> {
    p.block_sizes()
        .into_iter()
        .enumerate()
        .filter(|&(_, s)| s > 0)
        .map(|(l, s)| (l as u32, s))
        .collect()
}

struct TupleIndex {
    k: usize,
    /// Per part, label -> position among nonempty blocks.
    pos: Vec<Vec<usize>>,
    blocks: Vec<Vec<(u32, usize)>>,
    /// Number of block tuples per first-part block.
    stride: usize,
}

impl TupleIndex {
    fn new(p: &LayeredPartition) -> Self {
        let blocks: Vec<Vec<(u32, usize)>> = p.parts().iter().map(blocks_of).collect();
        let pos = p
            .parts()
            .iter()
            .zip(&blocks)
            .map(|(part, bs)| {
                let mut pos = vec![usize::MAX; part.block_count() + 1];
                for (i, &(l, _)) in bs.iter().enumerate() {
                    pos[l as usize] = i;
                }
                pos
            })
            .collect();
        let stride = blocks[1..].iter().map(|b| b.len()).product();
        Self { k: p.k(), pos, blocks, stride }
    }

    /// Position of a block tuple within the slab of its first-part block.
    #[inline]
    fn offset(&self, labels: impl Iterator<Item = u32>) -> usize {
        labels
            .enumerate()
            .fold(0, |acc, (i, l)| acc * self.blocks[i + 1].len() + self.pos[i + 1][l as usize])
    }

    /// Flattens slabs into records.
    fn emit(&self, slabs: Vec<Vec<f64>>) -> (Vec<u32>, Vec<u64>, Vec<f64>) {
        let mut labels = Vec::new();
        let mut cells = Vec::new();
        let mut sums = Vec::new();
        for (first, slab) in slabs.into_iter().enumerate() {
            for (off, s) in slab.into_iter().enumerate() {
                let mut rest = off;
                let mut tuple = vec![0u32; self.k];
                let mut c = self.blocks[0][first].1 as u64;
                for part in (1..self.k).rev() {
                    let nb = self.blocks[part].len();
                    let (l, size) = self.blocks[part][rest % nb];
                    tuple[part] = l;
                    c *= size as u64;
                    rest /= nb;
                }
                tuple[0] = self.blocks[0][first].0;
                labels.extend(tuple);
                cells.push(c);
                sums.push(s);
            }
        }
        (labels, cells, sums)
    }
}

/// Exact ε-homogeneity audit; parallel over blocks of the first part.
pub fn homogeneity_audit(h: &KPartiteHypergraph, p: &LayeredPartition, eps: f64) -> Result<HomogeneityReport> {
    p.check_sizes(h.sizes())?;
    let k = h.k();
    let idx = TupleIndex::new(p);
    let members0 = p.part(0).members();
    let last = p.part(k - 1);
    let radices: Vec<usize> = h.sizes()[1..k - 1].to_vec();
    let inner_fibers: usize = radices.iter().product();
    let slabs: Vec<Vec<f64>> = par::map_slice(&idx.blocks[0], |&(l0, _)| {
        let mut counts = vec![0u64; idx.stride];
        let mut prefix = vec![0usize; k - 1];
        for &a in &members0[l0 as usize] {
            prefix[0] = a;
            for fi in 0..inner_fibers {
                let mut rest = fi;
                for j in (1..k - 1).rev() {
                    prefix[j] = rest % radices[j - 1];
                    rest /= radices[j - 1];
                }
                let row = h.fiber(h.fiber_index(&prefix));
                let mut base = 0usize;
                for (j, &v) in prefix.iter().enumerate().skip(1) {
                    let part = p.part(j);
                    base = base * idx.blocks[j].len() + idx.pos[j][part.label(v) as usize];
                }
                let nb_last = idx.blocks[k - 1].len();
                for (wi, &w) in row.iter().enumerate() {
                    let mut w = w;
                    while w != 0 {
                        let v = wi * 64 + w.trailing_zeros() as usize;
                        w &= w - 1;
                        counts[base * nb_last + idx.pos[k - 1][last.label(v) as usize]] += 1;
                    }
                }
            }
        }
        counts.into_iter().map(|c| c as f64).collect()
    });
    let (labels, cells, sums) = idx.emit(slabs);
    Ok(HomogeneityReport::finish(eps, k, false, labels, cells, sums))
}

/// Homogeneity audit of a weighted 3-graph by the same band test. Weight
/// sums are accumulated in index order, so reports are bit-stable.
pub fn weighted_homogeneity_audit(
    h: &WeightedTripartite,
    p: &LayeredPartition,
    eps: f64,
) -> Result<HomogeneityReport> {
    p.check_sizes(&h.sizes())?;
    if p.k() != 3 {
        return Err(Error::Mismatch(format!("{} partitions for a 3-graph", p.k())));
    }
    let idx = TupleIndex::new(p);
    let members0 = p.part(0).members();
    let [_, nb, nc] = h.sizes();
    let slabs: Vec<Vec<f64>> = par::map_slice(&idx.blocks[0], |&(l0, _)| {
        let mut sums = vec![0.0f64; idx.stride];
        for &a in &members0[l0 as usize] {
            for b in 0..nb {
                for c in 0..nc {
                    let off = idx.offset([p.part(1).label(b), p.part(2).label(c)].into_iter());
                    sums[off] += h.weight(a, b, c);
                }
            }
        }
        sums
    });
    let (labels, cells, sums) = idx.emit(slabs);
    Ok(HomogeneityReport::finish(eps, 3, true, labels, cells, sums))
}

/// Audit of a non-partite k-graph through its partite cover, with the same
/// partition on every copy; block tuples that repeat a block are included.
pub fn cover_homogeneity_audit(
    n: usize,
    k: usize,
    edges: &[Vec<usize>],
    partition: &PartPartition,
    eps: f64,
) -> Result<HomogeneityReport> {
    let cover = partite_cover(n, k, edges)?;
    let layered = LayeredPartition::new(
        (0..k).map(|i| partition.clone().with_part(i)).collect(),
    )?;
    homogeneity_audit(&cover, &layered, eps)
}

/// Homogeneity of a bipartite graph under a pair of partitions.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteHomogeneity {
    pub eps: f64,
    /// `(left label, right label, cells, edges)` for nonempty block pairs.
    pub pairs: Vec<(u32, u32, u64, u64)>,
    pub mass: u64,
    pub normalized_mass: f64,
    pub pass: bool,
}

impl BipartiteHomogeneity {
    pub fn pair_is_homogeneous(&self, i: usize) -> bool {
        let (_, _, c, e) = self.pairs[i];
        is_homogeneous(e as f64 / c as f64, self.eps)
    }
}

pub fn bipartite_homogeneity(
    g: &BipartiteGraph,
    left: &PartPartition,
    right: &PartPartition,
    eps: f64,
) -> Result<BipartiteHomogeneity> {
    if left.len() != g.n_x() || right.len() != g.n_y() {
        return Err(Error::Mismatch(format!(
            "partitions of sizes {}x{} for a {}x{} graph",
            left.len(),
            right.len(),
            g.n_x(),
            g.n_y()
        )));
    }
    let rb: Vec<(u32, VertexSet)> = right.nonempty_blocks();
    let lsizes = left.block_sizes();
    let width = rb.len();
    let mut counts = vec![0u64; (left.block_count() + 1) * width];
    for x in 0..g.n_x() {
        let l = left.label(x) as usize;
        for (j, (_, set)) in rb.iter().enumerate() {
            counts[l * width + j] += crate::bits::and_count(g.row(x), set.words()) as u64;
        }
    }
    let mut pairs = Vec::new();
    let mut mass = 0u64;
    for (l, &ls) in lsizes.iter().enumerate() {
        if ls == 0 {
            continue;
        }
        for (j, (rl, set)) in rb.iter().enumerate() {
            let cells = (ls * set.count()) as u64;
            let e = counts[l * width + j];
            if !is_homogeneous(e as f64 / cells as f64, eps) {
                mass += cells;
            }
            pairs.push((l as u32, *rl, cells, e));
        }
    }
    let normalized_mass = mass as f64 / (g.n_x() * g.n_y()) as f64;
    Ok(BipartiteHomogeneity {
        eps,
        pairs,
        mass,
        normalized_mass,
        pass: normalized_mass <= eps + TOL,
    })
}
