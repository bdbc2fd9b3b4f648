use crate::bits::{and_count, words_for, VertexSet};
use crate::error::{Error, Result};
use crate::hypercore::{BipartiteGraph, TripartiteDensity};
use crate::par;

/// A k-partite k-graph with parts `0..k`.
///
/// Edges are stored as one bit row per *fiber*: for every prefix tuple over
/// parts `0..k-1` there is a row of bits over the last part. Neighbourhoods
/// in the last part are therefore plain word slices, and symmetric
/// differences of neighbourhoods are popcounts of XORs.
#[derive(Clone, PartialEq, Eq)]
pub struct KPartiteHypergraph {
    sizes: Vec<usize>,
    words: usize,
    fibers: Vec<u64>,
}

impl std::fmt::Debug for KPartiteHypergraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KPartiteHypergraph")
            .field("sizes", &self.sizes)
            .field("edges", &self.edge_count())
            .finish()
    }
}

/// Calls `f` with every tuple of the product `lists[0] × lists[1] × ...`,
/// in lexicographic order.
pub(crate) fn for_each_tuple(lists: &[Vec<usize>], mut f: impl FnMut(&[usize])) {
    if lists.iter().any(|l| l.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; lists.len()];
    let mut tuple: Vec<usize> = lists.iter().map(|l| l[0]).collect();
    loop {
        f(&tuple);
        let mut d = lists.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < lists[d].len() {
                tuple[d] = lists[d][idx[d]];
                break;
            }
            idx[d] = 0;
            tuple[d] = lists[d][0];
        }
    }
}

impl KPartiteHypergraph {
    /// The empty hypergraph on the given parts.
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "uniformity must be at least 2, got {}",
                sizes.len()
            )));
        }
        if let Some(p) = sizes.iter().position(|&n| n == 0) {
            return Err(Error::InvalidParameter(format!("part {p} is empty")));
        }
        let words = words_for(*sizes.last().unwrap());
        let fibers: usize = sizes[..sizes.len() - 1].iter().product();
        Ok(Self {
            sizes,
            words,
            fibers: vec![0; fibers * words],
        })
    }

    /// Builds the hypergraph whose edges are the tuples accepted by `f`.
    /// Evaluated in parallel over fibers; `f` must be pure.
    pub fn from_fn<F>(sizes: Vec<usize>, f: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> bool + Sync + Send,
    {
        let mut h = Self::new(sizes)?;
        let k = h.k();
        let last = h.sizes[k - 1];
        let words = h.words;
        let sizes = h.sizes.clone();
        par::for_each_chunk_mut(&mut h.fibers, words, |fi, row| {
            let mut tuple = unrank(&sizes[..k - 1], fi);
            tuple.push(0);
            for v in 0..last {
                tuple[k - 1] = v;
                if f(&tuple) {
                    row[v / 64] |= 1 << (v % 64);
                }
            }
        });
        Ok(h)
    }

    pub fn from_edges<'a, I>(sizes: Vec<usize>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [usize]>,
    {
        let mut h = Self::new(sizes)?;
        for e in edges {
            h.check_tuple(e)?;
            h.set(e, true);
        }
        Ok(h)
    }

    pub(crate) fn set(&mut self, tuple: &[usize], present: bool) {
        let k = self.k();
        let fi = self.fiber_index(&tuple[..k - 1]);
        let v = tuple[k - 1];
        let w = &mut self.fibers[fi * self.words + v / 64];
        if present {
            *w |= 1 << (v % 64);
        } else {
            *w &= !(1 << (v % 64));
        }
    }

    fn check_tuple(&self, tuple: &[usize]) -> Result<()> {
        if tuple.len() != self.k() {
            return Err(Error::MalformedEdge {
                edge: tuple.to_vec(),
                reason: format!("expected {} coordinates", self.k()),
            });
        }
        for (part, (&i, &n)) in tuple.iter().zip(&self.sizes).enumerate() {
            if i >= n {
                return Err(Error::OutOfRange {
                    part,
                    index: i,
                    size: n,
                });
            }
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn part_size(&self, part: usize) -> usize {
        self.sizes[part]
    }

    pub fn cells(&self) -> u64 {
        self.sizes.iter().map(|&n| n as u64).product()
    }

    /// Number of prefix tuples over parts `0..k-1`.
    pub fn fiber_count(&self) -> usize {
        self.sizes[..self.k() - 1].iter().product()
    }

    pub fn words_per_fiber(&self) -> usize {
        self.words
    }

    /// Row-major rank of a prefix tuple.
    pub fn fiber_index(&self, prefix: &[usize]) -> usize {
        prefix
            .iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn fiber_prefix(&self, index: usize) -> Vec<usize> {
        unrank(&self.sizes[..self.k() - 1], index)
    }

    /// Bit row over the last part for the given fiber.
    pub fn fiber(&self, index: usize) -> &[u64] {
        &self.fibers[index * self.words..(index + 1) * self.words]
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        let k = self.k();
        let fi = self.fiber_index(&tuple[..k - 1]);
        let v = tuple[k - 1];
        (self.fibers[fi * self.words + v / 64] >> (v % 64)) & 1 == 1
    }

    pub fn edge_count(&self) -> u64 {
        self.fibers.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// All edges in lexicographic order.
    pub fn edges(&self) -> Vec<Vec<usize>> {
        let k = self.k();
        let mut out = Vec::new();
        for fi in 0..self.fiber_count() {
            let row = self.fiber(fi);
            if row.iter().all(|&w| w == 0) {
                continue;
            }
            let prefix = self.fiber_prefix(fi);
            let set = VertexSet::from_words(k - 1, self.sizes[k - 1], row.to_vec());
            for v in set.iter() {
                let mut e = prefix.clone();
                e.push(v);
                out.push(e);
            }
        }
        out
    }

    fn check_subsets(&self, subsets: &[VertexSet]) -> Result<()> {
        if subsets.len() != self.k() {
            return Err(Error::Mismatch(format!(
                "expected {} subsets, got {}",
                self.k(),
                subsets.len()
            )));
        }
        for (part, s) in subsets.iter().enumerate() {
            if s.universe() != self.sizes[part] {
                return Err(Error::Mismatch(format!(
                    "subset for part {part} has universe {}, part has {}",
                    s.universe(),
                    self.sizes[part]
                )));
            }
            if s.is_empty() {
                return Err(Error::EmptySubset { part });
            }
        }
        Ok(())
    }

    /// Number of edges inside the sub-box `subsets[0] × ... × subsets[k-1]`.
    pub fn edges_in(&self, subsets: &[VertexSet]) -> Result<u64> {
        self.check_subsets(subsets)?;
        let k = self.k();
        let lists: Vec<Vec<usize>> = subsets[..k - 1].iter().map(|s| s.to_vec()).collect();
        let last = subsets[k - 1].words();
        let mut total = 0u64;
        for_each_tuple(&lists, |prefix| {
            total += and_count(self.fiber(self.fiber_index(prefix)), last) as u64;
        });
        Ok(total)
    }

    /// Edge fraction of the sub-box.
    pub fn density(&self, subsets: &[VertexSet]) -> Result<f64> {
        let e = self.edges_in(subsets)?;
        let cells: f64 = subsets.iter().map(|s| s.count() as f64).product();
        Ok(e as f64 / cells)
    }

    pub fn full_sets(&self) -> Vec<VertexSet> {
        self.sizes
            .iter()
            .enumerate()
            .map(|(p, &n)| VertexSet::full(p, n))
            .collect()
    }

    /// Neighbourhood of a (k-1)-tuple in the `target` part. `rest` lists one
    /// vertex for each other part, in increasing part order.
    pub fn neighborhood(&self, rest: &[usize], target: usize) -> Result<VertexSet> {
        let k = self.k();
        if target >= k {
            return Err(Error::InvalidParameter(format!("no part {target}")));
        }
        if rest.len() != k - 1 {
            return Err(Error::Mismatch(format!(
                "expected {} coordinates, got {}",
                k - 1,
                rest.len()
            )));
        }
        let mut tuple = Vec::with_capacity(k);
        tuple.extend_from_slice(&rest[..target]);
        tuple.push(0);
        tuple.extend_from_slice(&rest[target..]);
        for (part, (&i, &n)) in tuple.iter().zip(&self.sizes).enumerate() {
            if part != target && i >= n {
                return Err(Error::OutOfRange {
                    part,
                    index: i,
                    size: n,
                });
            }
        }
        if target == k - 1 {
            let row = self.fiber(self.fiber_index(rest)).to_vec();
            return Ok(VertexSet::from_words(target, self.sizes[target], row));
        }
        Ok(VertexSet::from_fn(target, self.sizes[target], |v| {
            tuple[target] = v;
            self.contains(&tuple)
        }))
    }

    /// Link of `k-2` pinned vertices: the bipartite graph between the two
    /// unpinned parts (lower part index on the left).
    pub fn link(&self, pins: &[(usize, usize)]) -> Result<BipartiteGraph> {
        let k = self.k();
        if pins.len() != k - 2 {
            return Err(Error::Mismatch(format!(
                "expected {} pins, got {}",
                k - 2,
                pins.len()
            )));
        }
        let mut pinned = vec![None; k];
        for &(part, v) in pins {
            if part >= k {
                return Err(Error::InvalidParameter(format!("no part {part}")));
            }
            if pinned[part].is_some() {
                return Err(Error::DuplicatePart { part });
            }
            if v >= self.sizes[part] {
                return Err(Error::OutOfRange {
                    part,
                    index: v,
                    size: self.sizes[part],
                });
            }
            pinned[part] = Some(v);
        }
        let free: Vec<usize> = (0..k).filter(|&p| pinned[p].is_none()).collect();
        let (p, q) = (free[0], free[1]);
        let base: Vec<usize> = pinned.iter().map(|v| v.unwrap_or(0)).collect();
        if q == k - 1 {
            let rows = (0..self.sizes[p])
                .map(|x| {
                    let mut prefix = base[..k - 1].to_vec();
                    prefix[p] = x;
                    self.fiber(self.fiber_index(&prefix)).to_vec()
                })
                .collect();
            return Ok(BipartiteGraph::from_raw_rows(self.sizes[p], self.sizes[q], rows));
        }
        Ok(BipartiteGraph::from_fn(self.sizes[p], self.sizes[q], |x, y| {
            let mut t = base.clone();
            t[p] = x;
            t[q] = y;
            self.contains(&t)
        }))
    }

    /// The same hypergraph with `target` moved to the last position; the
    /// other parts keep their relative order. Returns the new part order.
    pub fn with_target_last(&self, target: usize) -> Result<(KPartiteHypergraph, Vec<usize>)> {
        let k = self.k();
        if target >= k {
            return Err(Error::InvalidParameter(format!("no part {target}")));
        }
        let order: Vec<usize> = (0..k).filter(|&p| p != target).chain([target]).collect();
        if target == k - 1 {
            return Ok((self.clone(), order));
        }
        let sizes: Vec<usize> = order.iter().map(|&p| self.sizes[p]).collect();
        let ord = order.clone();
        let h = KPartiteHypergraph::from_fn(sizes, |t| {
            let mut orig = vec![0; k];
            for (i, &p) in ord.iter().enumerate() {
                orig[p] = t[i];
            }
            self.contains(&orig)
        })?;
        Ok((h, order))
    }
}

/// Row-major unrank over the given radices.
pub fn unrank(radices: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; radices.len()];
    for (slot, &n) in out.iter_mut().zip(radices).rev() {
        *slot = index % n;
        index /= n;
    }
    out
}

impl TripartiteDensity for KPartiteHypergraph {
    fn shape(&self) -> [usize; 3] {
        assert_eq!(self.k(), 3, "tripartite view of a {}-graph", self.k());
        [self.sizes[0], self.sizes[1], self.sizes[2]]
    }

    fn weight(&self, a: usize, b: usize, c: usize) -> f64 {
        if self.contains(&[a, b, c]) {
            1.0
        } else {
            0.0
        }
    }

    fn box_density(&self, sets: [&VertexSet; 3]) -> Result<f64> {
        self.density(&[sets[0].clone(), sets[1].clone(), sets[2].clone()])
    }
}
