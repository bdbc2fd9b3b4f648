use crate::bits::{and_count, words_for, xor_count, VertexSet};
use crate::error::{Error, Result};
use crate::hypercore::BipartiteDensity;

/// Bipartite graph between a left class `X` (part 0) and a right class `Y`
/// (part 1), one bit row over `Y` per left vertex.
#[derive(Clone, PartialEq, Eq)]
pub struct BipartiteGraph {
    n_x: usize,
    n_y: usize,
    words: usize,
    rows: Vec<u64>,
}

impl std::fmt::Debug for BipartiteGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "BipartiteGraph({}x{}, {} edges)",
            self.n_x,
            self.n_y,
            self.edge_count()
        )
    }
}

impl BipartiteGraph {
    pub fn empty(n_x: usize, n_y: usize) -> Self {
        let words = words_for(n_y);
        Self {
            n_x,
            n_y,
            words,
            rows: vec![0; n_x * words],
        }
    }

    pub fn from_fn(n_x: usize, n_y: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Self::empty(n_x, n_y);
        for x in 0..n_x {
            for y in 0..n_y {
                if f(x, y) {
                    g.rows[x * g.words + y / 64] |= 1 << (y % 64);
                }
            }
        }
        g
    }

    pub(crate) fn from_raw_rows(n_x: usize, n_y: usize, rows: Vec<Vec<u64>>) -> Self {
        let words = words_for(n_y);
        let mut flat = Vec::with_capacity(n_x * words);
        for r in rows {
            debug_assert_eq!(r.len(), words);
            flat.extend(r);
        }
        Self {
            n_x,
            n_y,
            words,
            rows: flat,
        }
    }

    pub fn from_edges<I: IntoIterator<Item = (usize, usize)>>(
        n_x: usize,
        n_y: usize,
        edges: I,
    ) -> Result<Self> {
        let mut g = Self::empty(n_x, n_y);
        for (x, y) in edges {
            if x >= n_x {
                return Err(Error::OutOfRange { part: 0, index: x, size: n_x });
            }
            if y >= n_y {
                return Err(Error::OutOfRange { part: 1, index: y, size: n_y });
            }
            g.rows[x * g.words + y / 64] |= 1 << (y % 64);
        }
        Ok(g)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    #[inline]
    pub fn row(&self, x: usize) -> &[u64] {
        &self.rows[x * self.words..(x + 1) * self.words]
    }

    #[inline]
    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        (self.rows[x * self.words + y / 64] >> (y % 64)) & 1 == 1
    }

    pub fn neighborhood(&self, x: usize) -> VertexSet {
        VertexSet::from_words(1, self.n_y, self.row(x).to_vec())
    }

    pub fn degree(&self, x: usize) -> usize {
        self.row(x).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `|N(x) Δ N(x')|`.
    #[inline]
    pub fn sym_diff(&self, x: usize, x2: usize) -> usize {
        xor_count(self.row(x), self.row(x2))
    }

    /// `|N(x) ∩ N(x')|`.
    #[inline]
    pub fn codegree(&self, x: usize, x2: usize) -> usize {
        and_count(self.row(x), self.row(x2))
    }

    pub fn edge_count(&self) -> u64 {
        self.rows.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn transpose(&self) -> BipartiteGraph {
        BipartiteGraph::from_fn(self.n_y, self.n_x, |y, x| self.has_edge(x, y))
    }

    pub fn edges_between(&self, xs: &VertexSet, ys: &VertexSet) -> u64 {
        xs.iter().map(|x| and_count(self.row(x), ys.words()) as u64).sum()
    }

    pub fn density(&self, xs: &VertexSet, ys: &VertexSet) -> Result<f64> {
        check_pair(self.n_x, self.n_y, xs, ys)?;
        Ok(self.edges_between(xs, ys) as f64 / (xs.count() as f64 * ys.count() as f64))
    }
}

pub(crate) fn check_pair(n_x: usize, n_y: usize, xs: &VertexSet, ys: &VertexSet) -> Result<()> {
    if xs.universe() != n_x || ys.universe() != n_y {
        return Err(Error::Mismatch(format!(
            "subsets over {}x{} for a {}x{} graph",
            xs.universe(),
            ys.universe(),
            n_x,
            n_y
        )));
    }
    if xs.is_empty() {
        return Err(Error::EmptySubset { part: 0 });
    }
    if ys.is_empty() {
        return Err(Error::EmptySubset { part: 1 });
    }
    Ok(())
}

impl BipartiteDensity for BipartiteGraph {
    fn shape(&self) -> (usize, usize) {
        (self.n_x, self.n_y)
    }

    fn weight(&self, x: usize, y: usize) -> f64 {
        if self.has_edge(x, y) {
            1.0
        } else {
            0.0
        }
    }

    fn box_density(&self, xs: &VertexSet, ys: &VertexSet) -> Result<f64> {
        self.density(xs, ys)
    }
}
