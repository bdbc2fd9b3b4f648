use crate::error::{Error, Result};
use crate::gowers::family::{orthogonal_family, OrthogonalFamily};
use crate::gowers::sequence::GowersParams;
use crate::hypercore::{BipartiteGraph, WeightedTripartite};
use crate::partitions::PartPartition;
use crate::{par, rng};

/// Attempts per level when drawing orthogonal families.
pub const FAMILY_ATTEMPTS: usize = 64;

/// Nested interval partitions of `A` and `B` (both `[n]`) into `m_r`
/// intervals, and the layers `C_1..C_t` of `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalLayering {
    pub n: usize,
    pub m: Vec<u64>,
}

impl IntervalLayering {
    pub fn new(n: usize, m: Vec<u64>) -> Result<Self> {
        let t = m.len() - 1;
        if t == 0 {
            return Err(Error::InvalidParameter("need at least one layer".into()));
        }
        let mt = *m.last().unwrap();
        if mt > n as u64 || !(n as u64).is_multiple_of(mt) || !n.is_multiple_of(t) {
            return Err(Error::Divisibility(format!(
                "n = {n} must be a multiple of m_t = {mt} and of t = {t}"
            )));
        }
        Ok(Self { n, m })
    }

    pub fn t(&self) -> usize {
        self.m.len() - 1
    }

    pub fn interval_len(&self, r: usize) -> usize {
        self.n / self.m[r] as usize
    }

    /// Interval of level `r` containing `v` (0-based).
    pub fn interval(&self, r: usize, v: usize) -> usize {
        v / self.interval_len(r)
    }

    /// Position of `v`'s level-`r` interval inside its level-`(r-1)` parent.
    pub fn sub_index(&self, r: usize, v: usize) -> usize {
        self.interval(r, v) % (self.m[r] / self.m[r - 1]) as usize
    }

    /// Layer `r ∈ 1..=t` of `c ∈ C`.
    pub fn layer(&self, c: usize) -> usize {
        c / (self.n / self.t()) + 1
    }

    /// Interval partition of level `r` on `part`, labels `1..=m_r`.
    pub fn partition(&self, r: usize, part: usize) -> PartPartition {
        let len = self.interval_len(r);
        PartPartition::new(part, (0..self.n).map(|v| (v / len) as u32 + 1).collect())
            .expect("interval labels are contiguous")
    }

    /// `{C_1, ..., C_t}` on part 2.
    pub fn layers(&self) -> PartPartition {
        PartPartition::new(2, (0..self.n).map(|c| self.layer(c) as u32).collect())
            .expect("layer labels are contiguous")
    }
}

/// `ab ∈ G_r` for `a ∈ A_i`, `b ∈ B_j` iff `(k_a ∈ X_j, k_b ∈ X_i)` or
/// `(k_a ∈ Y_j, k_b ∈ Y_i)`, with `k` the sub-interval positions.
pub fn level_graph(layering: &IntervalLayering, r: usize, family: &OrthogonalFamily) -> Result<BipartiteGraph> {
    let m = layering.m[r - 1] as usize;
    let big = (layering.m[r] / layering.m[r - 1]) as usize;
    if family.m != m || family.size != big {
        return Err(Error::Mismatch(format!(
            "level {r} needs a family of {m} partitions of [{big}], got {} of [{}]",
            family.m, family.size
        )));
    }
    let n = layering.n;
    let rows: Vec<Vec<u64>> = par::map_range(n, |a| {
        let i = layering.interval(r - 1, a);
        let ka = layering.sub_index(r, a);
        let b_side = crate::bits::VertexSet::from_fn(1, n, |b| {
            let j = layering.interval(r - 1, b);
            let kb = layering.sub_index(r, b);
            family.in_x(j, ka) == family.in_x(i, kb)
        });
        b_side.words().to_vec()
    });
    Ok(BipartiteGraph::from_raw_rows(n, n, rows))
}

#[derive(Clone, Debug)]
pub struct GowersConstruction {
    pub params: GowersParams,
    pub layering: IntervalLayering,
    /// Family of level `r` at index `r - 1`.
    pub families: Vec<OrthogonalFamily>,
    /// `G_r` at index `r - 1`.
    pub graphs: Vec<BipartiteGraph>,
    pub weighted: WeightedTripartite,
}

impl GowersConstruction {
    pub fn n(&self) -> usize {
        self.layering.n
    }

    pub fn t(&self) -> usize {
        self.layering.t()
    }

    pub fn graph(&self, r: usize) -> &BipartiteGraph {
        &self.graphs[r - 1]
    }
}

/// Weighted 3-graph `Σ_r 2^{-r} (G_r × C_r)` with fresh families.
pub fn build_weighted(params: &GowersParams, n: usize, seed: u64) -> Result<GowersConstruction> {
    let layering = IntervalLayering::new(n, params.m.clone())?;
    let fseed = rng::derive(seed, "families");
    let families = (1..=layering.t())
        .map(|r| {
            let m = params.m[r - 1] as usize;
            let big = (params.m[r] / params.m[r - 1]) as usize;
            orthogonal_family(m, big, rng::indexed(fseed, r as u64), FAMILY_ATTEMPTS)
        })
        .collect::<Result<Vec<_>>>()?;
    from_families(params, n, families)
}

/// Assembles the construction from given families (e.g. read from disk).
pub fn from_families(params: &GowersParams, n: usize, families: Vec<OrthogonalFamily>) -> Result<GowersConstruction> {
    let layering = IntervalLayering::new(n, params.m.clone())?;
    if families.len() != layering.t() {
        return Err(Error::Mismatch(format!("{} families for {} levels", families.len(), layering.t())));
    }
    let graphs = (1..=layering.t())
        .map(|r| level_graph(&layering, r, &families[r - 1]))
        .collect::<Result<Vec<_>>>()?;
    let weighted = WeightedTripartite::from_fn([n, n, n], |a, b, c| {
        let r = layering.layer(c);
        if graphs[r - 1].has_edge(a, b) {
            0.5f64.powi(r as i32)
        } else {
            0.0
        }
    })?;
    Ok(GowersConstruction { params: params.clone(), layering, families, graphs, weighted })
}
