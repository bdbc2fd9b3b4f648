//! Partition algebra over a single part.
//!
//! Label `0` is reserved for the exceptional block, which may be empty;
//! regular blocks carry labels `1..=block_count` and are all nonempty.

use std::collections::HashMap;

use crate::bits::VertexSet;
use crate::error::{Error, Result};
use crate::TOL;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartPartition {
    part: usize,
    labels: Vec<u32>,
    blocks: usize,
}

impl PartPartition {
    /// Validates that regular labels are contiguous `1..=max` and nonempty.
    pub fn new(part: usize, labels: Vec<u32>) -> Result<Self> {
        let max = labels.iter().copied().max().unwrap_or(0) as usize;
        let mut seen = vec![false; max + 1];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(missing) = (1..=max).find(|&l| !seen[l]) {
            return Err(Error::InvalidParameter(format!(
                "part {part}: block label {missing} is unused (labels must be contiguous)"
            )));
        }
        Ok(Self { part, labels, blocks: max })
    }

    /// Relabels arbitrary labels to `1..` in order of first appearance;
    /// `exceptional` (if given) maps to 0.
    pub fn from_raw(part: usize, raw: &[u32], exceptional: Option<u32>) -> Self {
        let mut map: HashMap<u32, u32> = HashMap::new();
        let mut labels = Vec::with_capacity(raw.len());
        for &r in raw {
            if Some(r) == exceptional {
                labels.push(0);
                continue;
            }
            let next = map.len() as u32 + 1;
            labels.push(*map.entry(r).or_insert(next));
        }
        Self { part, blocks: map.len(), labels }
    }

    pub fn trivial(part: usize, n: usize) -> Self {
        Self { part, labels: vec![1; n], blocks: usize::from(n > 0) }
    }

    pub fn singletons(part: usize, n: usize) -> Self {
        Self { part, labels: (1..=n as u32).collect(), blocks: n }
    }

    /// `count` consecutive intervals of equal length; requires `count | n`.
    pub fn intervals(part: usize, n: usize, count: usize) -> Result<Self> {
        if count == 0 || !n.is_multiple_of(count) {
            return Err(Error::Divisibility(format!(
                "{n} vertices cannot be split into {count} equal intervals"
            )));
        }
        let len = n / count;
        Ok(Self {
            part,
            labels: (0..n).map(|v| (v / len) as u32 + 1).collect(),
            blocks: count,
        })
    }

    /// Regular blocks from explicit member lists; unlisted vertices are
    /// exceptional.
    pub fn from_blocks(part: usize, n: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut labels = vec![0u32; n];
        let mut used = vec![false; n];
        for (i, b) in blocks.iter().enumerate() {
            if b.is_empty() {
                return Err(Error::InvalidParameter(format!("part {part}: block {} is empty", i + 1)));
            }
            for &v in b {
                if v >= n {
                    return Err(Error::OutOfRange { part, index: v, size: n });
                }
                if used[v] {
                    return Err(Error::InvalidParameter(format!(
                        "part {part}: vertex {v} appears in two blocks"
                    )));
                }
                used[v] = true;
                labels[v] = i as u32 + 1;
            }
        }
        Ok(Self { part, labels, blocks: blocks.len() })
    }

    pub fn part(&self) -> usize {
        self.part
    }

    pub fn with_part(mut self, part: usize) -> Self {
        self.part = part;
        self
    }

    /// Universe size.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    #[inline]
    pub fn label(&self, v: usize) -> u32 {
        self.labels[v]
    }

    /// Number of regular (non-exceptional) blocks.
    pub fn block_count(&self) -> usize {
        self.blocks
    }

    /// Sizes indexed by label; entry 0 is the exceptional block.
    pub fn block_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.blocks + 1];
        for &l in &self.labels {
            sizes[l as usize] += 1;
        }
        sizes
    }

    pub fn exceptional_size(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 0).count()
    }

    /// Members indexed by label; entry 0 is the exceptional block.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks + 1];
        for (v, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(v);
        }
        out
    }

    pub fn block(&self, label: u32) -> VertexSet {
        VertexSet::from_fn(self.part, self.len(), |v| self.labels[v] == label)
    }

    /// Every nonempty block as a set, exceptional first when present.
    pub fn nonempty_blocks(&self) -> Vec<(u32, VertexSet)> {
        let sizes = self.block_sizes();
        (0..=self.blocks as u32)
            .filter(|&l| sizes[l as usize] > 0)
            .map(|l| (l, self.block(l)))
            .collect()
    }

    /// All regular blocks have the same size.
    pub fn is_equitable(&self) -> bool {
        let sizes = self.block_sizes();
        sizes[1..].windows(2).all(|w| w[0] == w[1])
    }
}

/// One partition per part.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredPartition {
    parts: Vec<PartPartition>,
}

impl LayeredPartition {
    pub fn new(parts: Vec<PartPartition>) -> Result<Self> {
        for (i, p) in parts.iter().enumerate() {
            if p.part() != i {
                return Err(Error::Mismatch(format!(
                    "partition in slot {i} belongs to part {}",
                    p.part()
                )));
            }
        }
        Ok(Self { parts })
    }

    pub fn k(&self) -> usize {
        self.parts.len()
    }

    pub fn part(&self, i: usize) -> &PartPartition {
        &self.parts[i]
    }

    pub fn parts(&self) -> &[PartPartition] {
        &self.parts
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.len()).collect()
    }

    pub fn block_counts(&self) -> Vec<usize> {
        self.parts.iter().map(|p| p.block_count()).collect()
    }

    /// Checks that part sizes match a hypergraph's.
    pub fn check_sizes(&self, sizes: &[usize]) -> Result<()> {
        if self.sizes() != sizes {
            return Err(Error::Mismatch(format!(
                "partition sizes {:?} do not match part sizes {:?}",
                self.sizes(),
                sizes
            )));
        }
        Ok(())
    }
}

/// Nonempty Venn atoms of `sets` over `0..n`, numbered by first appearance.
pub fn common_refinement(part: usize, n: usize, sets: &[VertexSet]) -> Result<PartPartition> {
    if let Some(s) = sets.iter().find(|s| s.universe() != n) {
        return Err(Error::Mismatch(format!(
            "set over universe {} refined over {n}",
            s.universe()
        )));
    }
    let words = sets.len().div_ceil(64);
    let mut ids: HashMap<Vec<u64>, u32> = HashMap::new();
    let mut labels = Vec::with_capacity(n);
    for v in 0..n {
        let mut sig = vec![0u64; words];
        for (i, s) in sets.iter().enumerate() {
            if s.contains(v) {
                sig[i / 64] |= 1 << (i % 64);
            }
        }
        let next = ids.len() as u32 + 1;
        labels.push(*ids.entry(sig).or_insert(next));
    }
    Ok(PartPartition { part, labels, blocks: ids.len() })
}

/// Common refinement of several partitions of the same part.
pub fn meet(parts: &[&PartPartition]) -> Result<PartPartition> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidParameter("meet of no partitions".into()))?;
    let n = first.len();
    if parts.iter().any(|p| p.len() != n) {
        return Err(Error::Mismatch("partitions over different universes".into()));
    }
    let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
    let mut labels = Vec::with_capacity(n);
    for v in 0..n {
        let sig: Vec<u32> = parts.iter().map(|p| p.label(v)).collect();
        let next = ids.len() as u32 + 1;
        labels.push(*ids.entry(sig).or_insert(next));
    }
    Ok(PartPartition { part: first.part, labels, blocks: ids.len() })
}

/// Splits every block into chunks of exactly `m`. Leftovers (and any
/// existing exceptional vertices) are pooled in label-then-index order and
/// chunked again; the final remainder, of size `< m`, becomes label 0.
pub fn equalize(p: &PartPartition, m: usize) -> Result<PartPartition> {
    let n = p.len();
    if m == 0 {
        return Err(Error::InvalidParameter("block size must be at least 1".into()));
    }
    if m > n {
        return Err(Error::BlockTooLarge { m, size: n });
    }
    let members = p.members();
    let mut labels = vec![0u32; n];
    let mut next = 1u32;
    let mut pool: Vec<usize> = members[0].clone();
    for block in &members[1..] {
        let full = block.len() / m * m;
        for chunk in block[..full].chunks(m) {
            for &v in chunk {
                labels[v] = next;
            }
            next += 1;
        }
        pool.extend_from_slice(&block[full..]);
    }
    let full = pool.len() / m * m;
    for chunk in pool[..full].chunks(m) {
        for &v in chunk {
            labels[v] = next;
        }
        next += 1;
    }
    Ok(PartPartition { part: p.part, labels, blocks: next as usize - 1 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockVerdict {
    pub label: u32,
    pub size: usize,
    /// Coarse block holding at least `(1 - β)` of this block, if any.
    pub parent: Option<u32>,
    /// Largest overlap with a single coarse block.
    pub best_overlap: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefinementReport {
    pub beta: f64,
    pub verdicts: Vec<BlockVerdict>,
    pub unmatched: usize,
    pub unmatched_fraction: f64,
    pub refines: bool,
}

/// `P ⊂_β A`: `|P ∩ A| ≥ (1 - β)|P|`.
pub fn beta_contained(overlap: usize, size: usize, beta: f64) -> bool {
    overlap as f64 >= (1.0 - beta) * size as f64 - TOL
}

/// Does `fine` β-refine `coarse`? Every nonempty block (the exceptional
/// one included) counts as a block on both sides.
pub fn beta_refines(fine: &PartPartition, coarse: &PartPartition, beta: f64) -> Result<RefinementReport> {
    if !(0.0..0.5).contains(&beta) {
        return Err(Error::BetaOutOfRange(beta));
    }
    if fine.len() != coarse.len() {
        return Err(Error::Mismatch(format!(
            "universes of size {} and {}",
            fine.len(),
            coarse.len()
        )));
    }
    let width = coarse.block_count() + 1;
    let mut overlap = vec![0usize; (fine.block_count() + 1) * width];
    for v in 0..fine.len() {
        overlap[fine.label(v) as usize * width + coarse.label(v) as usize] += 1;
    }
    let sizes = fine.block_sizes();
    let mut verdicts = Vec::new();
    for (l, &size) in sizes.iter().enumerate() {
        if size == 0 {
            continue;
        }
        let row = &overlap[l * width..(l + 1) * width];
        let (best_label, &best) = row
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .unwrap();
        verdicts.push(BlockVerdict {
            label: l as u32,
            size,
            parent: beta_contained(best, size, beta).then_some(best_label as u32),
            best_overlap: best,
        });
    }
    let unmatched = verdicts.iter().filter(|v| v.parent.is_none()).count();
    let unmatched_fraction = unmatched as f64 / verdicts.len().max(1) as f64;
    Ok(RefinementReport {
        beta,
        unmatched,
        unmatched_fraction,
        refines: unmatched as f64 <= beta * verdicts.len() as f64 + TOL,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sizes_of(p: &PartPartition) -> Vec<usize> {
        p.block_sizes()
    }

    #[test]
    fn identical_sets_give_two_atoms() {
        let s = VertexSet::from_indices(0, 6, [1, 3]).unwrap();
        let p = common_refinement(0, 6, &[s.clone(), s]).unwrap();
        assert_eq!(p.block_count(), 2);
    }

    #[test]
    fn atoms_match_signature_oracle() {
        let a = VertexSet::from_indices(0, 8, [0, 1, 2, 3]).unwrap();
        let b = VertexSet::from_indices(0, 8, [2, 3, 4, 5]).unwrap();
        let p = common_refinement(0, 8, &[a, b]).unwrap();
        let m = p.members();
        assert_eq!(m[1..].to_vec(), vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]]);
    }

    #[test]
    fn equalize_even_blocks() {
        let p = PartPartition::from_blocks(0, 12, &[(0..6).collect(), (6..12).collect()]).unwrap();
        let e = equalize(&p, 3).unwrap();
        assert_eq!(sizes_of(&e), vec![0, 3, 3, 3, 3]);
    }

    #[test]
    fn equalize_pools_leftovers() {
        let p = PartPartition::from_blocks(0, 12, &[(0..5).collect(), (5..12).collect()]).unwrap();
        let e = equalize(&p, 3).unwrap();
        assert_eq!(sizes_of(&e), vec![0, 3, 3, 3, 3]);
        // the pooled block holds the two leftovers of block 1 and one of block 2
        assert_eq!(e.members()[4], vec![3, 4, 11]);
    }

    #[test]
    fn equalize_rejects_oversized_block() {
        let p = PartPartition::trivial(0, 4);
        assert_eq!(equalize(&p, 5).unwrap_err(), Error::BlockTooLarge { m: 5, size: 4 });
        assert!(equalize(&p, 0).is_err());
    }

    #[test]
    fn straddling_block_is_unmatched() {
        let coarse = PartPartition::from_blocks(0, 10, &[(0..6).collect(), (6..10).collect()]).unwrap();
        let fine = PartPartition::trivial(0, 10);
        let r = beta_refines(&fine, &coarse, 0.3).unwrap();
        assert_eq!(r.verdicts[0].parent, None);
        assert_eq!(r.verdicts[0].best_overlap, 6);
        let r = beta_refines(&fine, &coarse, 0.4).unwrap();
        assert_eq!(r.verdicts[0].parent, Some(1));
    }

    #[test]
    fn refinement_and_identity() {
        let a = PartPartition::intervals(0, 12, 3).unwrap();
        let f = PartPartition::intervals(0, 12, 6).unwrap();
        assert!(beta_refines(&a, &a, 0.0).unwrap().refines);
        assert!(beta_refines(&f, &a, 0.0).unwrap().refines);
        assert_eq!(beta_refines(&a, &f, 0.49).unwrap().unmatched, 3);
        assert_eq!(beta_refines(&a, &a, 0.5).unwrap_err(), Error::BetaOutOfRange(0.5));
    }

    fn arb_partition(n: usize, max_blocks: u32) -> impl Strategy<Value = PartPartition> {
        proptest::collection::vec(0..max_blocks, n)
            .prop_map(|raw| PartPartition::from_raw(0, &raw, None))
    }

    proptest! {
        #[test]
        fn refinement_is_idempotent(p in arb_partition(20, 5)) {
            let blocks: Vec<VertexSet> = p.nonempty_blocks().into_iter().map(|(_, s)| s).collect();
            let r = common_refinement(0, 20, &blocks).unwrap();
            let again: Vec<VertexSet> = r.nonempty_blocks().into_iter().map(|(_, s)| s).collect();
            prop_assert_eq!(common_refinement(0, 20, &again).unwrap(), r.clone());
            prop_assert!(beta_refines(&r, &p, 0.0).unwrap().refines);
            prop_assert!(beta_refines(&p, &r, 0.0).unwrap().refines);
        }

        #[test]
        fn venn_bound(raw in proptest::collection::vec(proptest::collection::vec(any::<bool>(), 16), 0..5)) {
            let sets: Vec<VertexSet> = raw
                .iter()
                .map(|bits| VertexSet::from_fn(0, 16, |v| bits[v]))
                .collect();
            let p = common_refinement(0, 16, &sets).unwrap();
            prop_assert!(p.block_count() <= 1 << sets.len());
            for s in &sets {
                for (_, b) in p.nonempty_blocks() {
                    let inter = b.intersection_count(s);
                    prop_assert!(inter == 0 || inter == b.count());
                }
            }
        }

        #[test]
        fn equalize_preserves_vertices(p in arb_partition(40, 6), m in 1usize..12) {
            let e = equalize(&p, m).unwrap();
            let sizes = e.block_sizes();
            prop_assert_eq!(sizes.iter().sum::<usize>(), 40);
            prop_assert!(sizes[1..].iter().all(|&s| s == m));
            prop_assert!(sizes[0] < m);
        }

        #[test]
        fn beta_monotone(p in arb_partition(30, 6), q in arb_partition(30, 3), b in 0.0f64..0.49) {
            let r = beta_refines(&p, &q, b).unwrap();
            if r.refines {
                for step in [0.0, 0.1, 0.2, 0.3, 0.4, 0.49] {
                    if step >= b {
                        prop_assert!(beta_refines(&p, &q, step).unwrap().refines);
                    }
                }
            }
        }

        #[test]
        fn zero_refinement_is_transitive(c in arb_partition(24, 3), a in arb_partition(24, 3), b in arb_partition(24, 3)) {
            let mid = meet(&[&c, &a]).unwrap();
            let fine = meet(&[&mid, &b]).unwrap();
            prop_assert!(beta_refines(&fine, &mid, 0.0).unwrap().refines);
            prop_assert!(beta_refines(&mid, &c, 0.0).unwrap().refines);
            prop_assert!(beta_refines(&fine, &c, 0.0).unwrap().refines);
        }
    }
}
