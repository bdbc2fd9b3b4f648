use crate::error::Result;
use crate::hypercore::{BipartiteGraph, KPartiteHypergraph};
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VcDimension {
    pub dimension: usize,
    /// A set of size `cap` is shattered, so the true value may be larger.
    pub at_least: bool,
}

/// Largest set of right vertices shattered by left neighbourhoods, up to
/// `cap`. Shattered sets are down-closed, so a depth-first search over sets
/// in increasing index order only ever extends shattered sets.
fn shatter_right(g: &BipartiteGraph, cap: usize) -> usize {
    let nx = g.n_x();
    if nx == 0 {
        return 0;
    }
    let cap = cap.min(20).min(usize::BITS as usize - 1);
    let mut best = 0;
    let mut patterns = vec![0u32; nx];
    let mut seen = vec![false; 1 << cap.max(1)];
    dfs(g, 0, 0, cap, &mut patterns, &mut seen, &mut best);
    best
}

fn dfs(
    g: &BipartiteGraph,
    start: usize,
    depth: usize,
    cap: usize,
    patterns: &mut [u32],
    seen: &mut [bool],
    best: &mut usize,
) {
    if depth >= cap || *best >= cap {
        return;
    }
    let ny = g.n_y();
    let need = 1usize << (depth + 1);
    if g.n_x() < need {
        return;
    }
    for y in start..ny {
        if depth + 1 + (ny - y - 1) <= *best {
            return;
        }
        // extend every witness pattern by adjacency to y
        let mut distinct = 0usize;
        for x in 0..g.n_x() {
            let p = patterns[x] | (u32::from(g.has_edge(x, y)) << depth);
            if !seen[p as usize] {
                seen[p as usize] = true;
                distinct += 1;
            }
        }
        for x in 0..g.n_x() {
            let p = patterns[x] | (u32::from(g.has_edge(x, y)) << depth);
            seen[p as usize] = false;
        }
        if distinct == need {
            *best = (*best).max(depth + 1);
            for x in 0..g.n_x() {
                patterns[x] |= u32::from(g.has_edge(x, y)) << depth;
            }
            dfs(g, y + 1, depth + 1, cap, patterns, seen, best);
            for p in patterns.iter_mut() {
                *p &= !(1u32 << depth);
            }
            if *best >= cap {
                return;
            }
        }
    }
}

/// VC-dimension of a bipartite graph: the larger of the two directions
/// (sets on one side, witnesses on the other).
pub fn vc_dimension(g: &BipartiteGraph, cap: usize) -> VcDimension {
    let d = shatter_right(g, cap).max(shatter_right(&g.transpose(), cap));
    VcDimension { dimension: d, at_least: d >= cap }
}

/// Maximum VC-dimension over all links of `k - 2` pinned vertices.
pub fn slicewise_vc(h: &KPartiteHypergraph, cap: usize) -> Result<VcDimension> {
    let k = h.k();
    let mut pin_sets: Vec<Vec<(usize, usize)>> = Vec::new();
    for p in 0..k {
        for q in p + 1..k {
            let pinned: Vec<usize> = (0..k).filter(|&i| i != p && i != q).collect();
            let radices: Vec<usize> = pinned.iter().map(|&i| h.part_size(i)).collect();
            let total: usize = radices.iter().product();
            for idx in 0..total {
                let vals = crate::hypercore::unrank(&radices, idx);
                pin_sets.push(pinned.iter().copied().zip(vals).collect());
            }
        }
    }
    let dims: Vec<Result<usize>> = par::map_slice(&pin_sets, |pins| {
        Ok(vc_dimension(&h.link(pins)?, cap).dimension)
    });
    let mut d = 0;
    for r in dims {
        d = d.max(r?);
    }
    Ok(VcDimension { dimension: d, at_least: d >= cap })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_and_empty_are_zero() {
        assert_eq!(vc_dimension(&BipartiteGraph::from_fn(4, 4, |_, _| true), 5).dimension, 0);
        assert_eq!(vc_dimension(&BipartiteGraph::empty(4, 4), 5).dimension, 0);
    }

    #[test]
    fn matching_and_half_graph_are_one() {
        assert_eq!(vc_dimension(&BipartiteGraph::from_fn(4, 4, |x, y| x == y), 5).dimension, 1);
        assert_eq!(vc_dimension(&BipartiteGraph::from_fn(6, 6, |x, y| x <= y), 5).dimension, 1);
    }

    #[test]
    fn power_set_graph_shatters_everything() {
        // left vertex x is adjacent to the bits of x
        let g = BipartiteGraph::from_fn(16, 4, |x, y| x >> y & 1 == 1);
        let d = vc_dimension(&g, 6);
        assert_eq!(d.dimension, 4);
        assert!(!d.at_least);
        assert!(vc_dimension(&g, 3).at_least);
    }

    #[test]
    fn empty_hypergraph_has_zero_slicewise_vc() {
        let h = KPartiteHypergraph::new(vec![3, 3, 3]).unwrap();
        assert_eq!(slicewise_vc(&h, 4).unwrap().dimension, 0);
    }
}
