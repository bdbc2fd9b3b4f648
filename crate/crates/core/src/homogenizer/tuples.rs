use rand::Rng;

use crate::bits::{xor_count, VertexSet};
use crate::error::{Error, Result};
use crate::homogenizer::params::{Mode, ToleranceParams};
use crate::hypercore::KPartiteHypergraph;
use crate::{par, rng, TOL};

/// Partition `E_0 ∪ E_1 ∪ ... ∪ E_t` of the product of all parts except
/// `target`. Tuples are indexed row-major over the source parts in
/// increasing part order, which is also lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct TuplePartition {
    pub target: usize,
    /// Source parts followed by the target.
    pub order: Vec<usize>,
    /// Sizes of the source parts, in `order`.
    pub source_sizes: Vec<usize>,
    pub target_size: usize,
    pub mode: Mode,
    /// Class per tuple; 0 is `E_0`.
    pub labels: Vec<u32>,
    /// Anchor tuple index of each class `1..=t` (slot 0 unused).
    pub anchors: Vec<usize>,
    pub anchor_neighborhoods: Vec<VertexSet>,
    /// Anchors drawn, including those whose class came out empty.
    pub anchors_drawn: usize,
    /// Allowed `|E_0|`: `ε` times the number of tuples.
    pub budget: f64,
    /// Assignment radius `εn/2`.
    pub radius: f64,
}

impl TuplePartition {
    pub fn tuple_count(&self) -> usize {
        self.labels.len()
    }

    pub fn class_count(&self) -> usize {
        self.anchors.len() - 1
    }

    pub fn exceptional_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 0).count()
    }

    /// Members of each class; entry 0 is `E_0`.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.class_count() + 1];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l as usize].push(i);
        }
        out
    }

    /// Coordinates of a tuple, in source-part order.
    pub fn tuple(&self, index: usize) -> Vec<usize> {
        crate::hypercore::unrank(&self.source_sizes, index)
    }

    /// Largest distance to the class anchor and largest pairwise distance
    /// within a class, by full scan.
    pub fn spread(&self, h: &KPartiteHypergraph) -> Result<(usize, usize)> {
        let (g, _) = h.with_target_last(self.target)?;
        let classes = self.classes();
        let per: Vec<(usize, usize)> = par::map_range(classes.len() - 1, |c| {
            let members = &classes[c + 1];
            let anchor = g.fiber(self.anchors[c + 1]);
            let mut to_anchor = 0;
            let mut pairwise = 0;
            for (i, &e) in members.iter().enumerate() {
                let row = g.fiber(e);
                to_anchor = to_anchor.max(xor_count(row, anchor));
                for &f in &members[i + 1..] {
                    pairwise = pairwise.max(xor_count(row, g.fiber(f)));
                }
            }
            (to_anchor, pairwise)
        });
        Ok(per.into_iter().fold((0, 0), |a, b| (a.0.max(b.0), a.1.max(b.1))))
    }
}

/// Tuples whose target neighbourhoods lie within `εn/2` of an anchor.
///
/// Practical mode draws anchors one at a time, uniformly among the still
/// uncovered tuples, until the uncovered count is within budget. Paper mode
/// draws the formula's number of anchors uniformly from all tuples, and
/// refuses when that number exceeds `max_anchors`. Either way a tuple joins
/// the lowest-index anchor within range.
pub fn tuple_partition(
    h: &KPartiteHypergraph,
    target: usize,
    params: &ToleranceParams,
    seed: u64,
) -> Result<TuplePartition> {
    if h.k() != params.k {
        return Err(Error::Mismatch(format!("params for k = {}, graph has k = {}", params.k, h.k())));
    }
    let (g, order) = h.with_target_last(target)?;
    let k = g.k();
    let n = g.part_size(k - 1);
    let count = g.fiber_count();
    let radius = params.eps * n as f64 / 2.0;
    let within = |a: usize, b: usize| xor_count(g.fiber(a), g.fiber(b)) as f64 <= radius + TOL;
    let budget = params.eps * count as f64;
    let mut labels = vec![0u32; count];
    let mut anchors = vec![usize::MAX];
    let mut drawn = 0usize;

    match params.mode {
        Mode::Practical => {
            let mut uncovered: Vec<usize> = (0..count).collect();
            while uncovered.len() as f64 > budget + TOL {
                if drawn == params.max_anchors {
                    return Err(Error::Coverage {
                        uncovered: uncovered.len(),
                        budget,
                        anchors: drawn,
                    });
                }
                let mut r = rng::stream(seed, "anchor", drawn as u64);
                let anchor = uncovered[r.random_range(0..uncovered.len())];
                drawn += 1;
                let label = anchors.len() as u32;
                anchors.push(anchor);
                let hit: Vec<bool> = par::map_slice(&uncovered, |&e| within(e, anchor));
                let mut rest = Vec::with_capacity(uncovered.len());
                for (&e, hit) in uncovered.iter().zip(hit) {
                    if hit {
                        labels[e] = label;
                    } else {
                        rest.push(e);
                    }
                }
                uncovered = rest;
            }
        }
        Mode::Paper => {
            let t = params.paper_anchor_count().ceil();
            if !t.is_finite() || t > params.max_anchors as f64 {
                return Err(Error::Infeasible(format!(
                    "paper mode needs {t:.3e} anchors (cap {}); use practical mode",
                    params.max_anchors
                )));
            }
            let t = t as usize;
            let picks: Vec<usize> = (0..t)
                .map(|i| rng::stream(seed, "anchor", i as u64).random_range(0..count))
                .collect();
            drawn = t;
            let assigned: Vec<u32> = par::map_range(count, |e| {
                picks.iter().position(|&a| within(e, a)).map_or(0, |i| i as u32 + 1)
            });
            // compact: classes keep anchor order, empty ones are dropped
            let mut remap = vec![0u32; t + 1];
            let mut used = vec![false; t + 1];
            for &a in &assigned {
                used[a as usize] = true;
            }
            for i in 1..=t {
                if used[i] {
                    remap[i] = anchors.len() as u32;
                    anchors.push(picks[i - 1]);
                }
            }
            for (l, a) in labels.iter_mut().zip(assigned) {
                *l = remap[a as usize];
            }
        }
    }
    let anchor_neighborhoods = anchors[1..]
        .iter()
        .map(|&a| VertexSet::from_words(target, n, g.fiber(a).to_vec()))
        .collect();
    let source_sizes = order[..k - 1].iter().map(|&p| h.part_size(p)).collect();
    Ok(TuplePartition {
        target,
        order,
        source_sizes,
        target_size: n,
        mode: params.mode,
        labels,
        anchors,
        anchor_neighborhoods,
        anchors_drawn: drawn,
        budget,
        radius,
    })
}
