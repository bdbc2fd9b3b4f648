use rand::Rng;

use crate::bits::VertexSet;
use crate::error::{Error, Result};
use crate::hypercore::{BipartiteDensity, TripartiteDensity};
use crate::{ceil_tol, par, rng};

/// Largest block the exact bipartite search enumerates.
pub const EXACT_SIDE_CAP: usize = 22;
/// Largest combined size of the two enumerated blocks in the exact
/// tripartite search; the third block is solved by sorting.
pub const EXACT_PAIR_CAP: usize = 24;

const SAMPLE_CHUNK: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exact,
    Sampled { budget: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    /// One subset per part, in part order.
    pub subsets: Vec<VertexSet>,
    pub inner: f64,
    pub outer: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularityWitness {
    pub eps: f64,
    pub mode: SearchMode,
    pub outer: f64,
    pub found: Option<Witness>,
    /// Subset choices (exact) or draws (sampled) examined.
    pub examined: u64,
    /// Largest deviation seen, from the search's own sums.
    pub max_deviation: f64,
}

impl RegularityWitness {
    /// Exact searches decide; sampled searches only prove irregularity.
    pub fn conclusive(&self) -> bool {
        self.found.is_some() || self.mode == SearchMode::Exact
    }
}

/// Smallest admissible subset size, `⌈ε n⌉` but at least 1.
pub fn min_subset(eps: f64, n: usize) -> usize {
    (ceil_tol(eps * n as f64) as usize).clamp(1, n.max(1))
}

/// `(sum, chosen indices)` of the `z` largest (or smallest) entries; ties
/// broken by index.
fn extreme(values: &[f64], z: usize, largest: bool) -> (f64, Vec<usize>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    if largest {
        idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    } else {
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    }
    idx.truncate(z);
    let sum = idx.iter().map(|&i| values[i]).sum();
    (sum, idx)
}

fn mask_members(mask: u64, items: &[usize]) -> impl Iterator<Item = usize> + '_ {
    items.iter().enumerate().filter(move |(i, _)| mask >> i & 1 == 1).map(|(_, &v)| v)
}

#[derive(Clone, Debug)]
struct Best {
    dev: f64,
    masks: (u64, u64),
    third: Vec<usize>,
}

fn better(a: Option<Best>, b: Option<Best>) -> Option<Best> {
    match (a, b) {
        (Some(a), Some(b)) => Some(if b.dev > a.dev { b } else { a }),
        (a, None) => a,
        (None, b) => b,
    }
}

fn check_blocks(shape: &[usize], blocks: &[&VertexSet]) -> Result<()> {
    for (part, (b, &n)) in blocks.iter().zip(shape).enumerate() {
        if b.universe() != n {
            return Err(Error::Mismatch(format!(
                "block for part {part} has universe {}, part has {n}",
                b.universe()
            )));
        }
        if b.is_empty() {
            return Err(Error::EmptySubset { part });
        }
    }
    Ok(())
}

/// Searches for `X ⊆ A', Y ⊆ B', Z ⊆ C'` of at least an ε-fraction each with
/// `|d(X,Y,Z) - d(A',B',C')| > ε`.
pub fn weak_regularity_witness<H: TripartiteDensity + ?Sized>(
    h: &H,
    blocks: [&VertexSet; 3],
    eps: f64,
    mode: SearchMode,
    seed: u64,
) -> Result<RegularityWitness> {
    check_blocks(&h.shape(), &blocks)?;
    let outer = h.box_density(blocks)?;
    match mode {
        SearchMode::Exact => exact_tripartite(h, blocks, eps, outer),
        SearchMode::Sampled { budget } => {
            sampled(blocks.to_vec(), eps, outer, budget, seed, |s| h.box_density([&s[0], &s[1], &s[2]]))
                .map(|w| RegularityWitness { mode, ..w })
        }
    }
}

fn exact_tripartite<H: TripartiteDensity + ?Sized>(
    h: &H,
    blocks: [&VertexSet; 3],
    eps: f64,
    outer: f64,
) -> Result<RegularityWitness> {
    let sizes: Vec<usize> = blocks.iter().map(|b| b.count()).collect();
    let big = (0..3).rev().max_by_key(|&i| sizes[i]).unwrap();
    let small: Vec<usize> = (0..3).filter(|&i| i != big).collect();
    let (p, q) = (small[0], small[1]);
    if sizes[p] + sizes[q] > EXACT_PAIR_CAP {
        return Err(Error::ExactCapExceeded { sizes });
    }
    let mp = blocks[p].to_vec();
    let mq = blocks[q].to_vec();
    let mr = blocks[big].to_vec();
    let (np, nq, nr) = (mp.len(), mq.len(), mr.len());
    // w[(i * nq + j) * nr + l] is the weight of the cell with roles (p, q, big)
    let mut w = vec![0.0f64; np * nq * nr];
    let mut cell = [0usize; 3];
    for (i, &x) in mp.iter().enumerate() {
        for (j, &y) in mq.iter().enumerate() {
            for (l, &z) in mr.iter().enumerate() {
                cell[p] = x;
                cell[q] = y;
                cell[big] = z;
                w[(i * nq + j) * nr + l] = h.weight(cell[0], cell[1], cell[2]);
            }
        }
    }
    let (zp, zq, zr) = (
        min_subset(eps, np),
        min_subset(eps, nq),
        min_subset(eps, nr),
    );
    let results: Vec<(Option<Best>, u64)> = par::map_range(1usize << np, |xm| {
        let xm = xm as u64;
        let cx = xm.count_ones() as usize;
        if cx < zp {
            return (None, 0);
        }
        let mut u = vec![0.0f64; nq * nr];
        for i in (0..np).filter(|&i| xm >> i & 1 == 1) {
            for (acc, &v) in u.iter_mut().zip(&w[i * nq * nr..(i + 1) * nq * nr]) {
                *acc += v;
            }
        }
        let mut best: Option<Best> = None;
        let mut seen = 0u64;
        let mut s = vec![0.0f64; nr];
        for ym in 0..(1u64 << nq) {
            let cy = ym.count_ones() as usize;
            if cy < zq {
                continue;
            }
            seen += 1;
            s.iter_mut().for_each(|v| *v = 0.0);
            for j in (0..nq).filter(|&j| ym >> j & 1 == 1) {
                for (acc, &v) in s.iter_mut().zip(&u[j * nr..(j + 1) * nr]) {
                    *acc += v;
                }
            }
            let denom = (cx * cy * zr) as f64;
            for largest in [true, false] {
                let (sum, idx) = extreme(&s, zr, largest);
                let dev = (sum / denom - outer).abs();
                if best.as_ref().is_none_or(|b| dev > b.dev) {
                    best = Some(Best { dev, masks: (xm, ym), third: idx });
                }
            }
        }
        (best, seen)
    });
    let examined = results.iter().map(|r| r.1).sum();
    let best = results.into_iter().fold(None, |acc, (b, _)| better(acc, b));
    let max_deviation = best.as_ref().map_or(0.0, |b| b.dev);
    let found = match best {
        Some(b) if b.dev > eps => {
            let n = |i: usize| blocks[i].universe();
            let mut subsets = vec![VertexSet::empty(0, 0); 3];
            subsets[p] = VertexSet::from_indices(p, n(p), mask_members(b.masks.0, &mp))?;
            subsets[q] = VertexSet::from_indices(q, n(q), mask_members(b.masks.1, &mq))?;
            subsets[big] = VertexSet::from_indices(big, n(big), b.third.iter().map(|&l| mr[l]))?;
            let inner = h.box_density([&subsets[0], &subsets[1], &subsets[2]])?;
            let deviation = (inner - outer).abs();
            (deviation > eps).then_some(Witness { subsets, inner, outer, deviation })
        }
        _ => None,
    };
    Ok(RegularityWitness {
        eps,
        mode: SearchMode::Exact,
        outer,
        found,
        examined,
        max_deviation,
    })
}

/// Random subsets: every member kept with probability `max(ε, 1/2)`,
/// undersized draws rejected. Draws are evaluated in fixed chunks and the
/// lowest-index witness wins, so the result does not depend on scheduling.
fn sampled<F>(
    blocks: Vec<&VertexSet>,
    eps: f64,
    outer: f64,
    budget: usize,
    seed: u64,
    density: F,
) -> Result<RegularityWitness>
where
    F: Fn(&[VertexSet]) -> Result<f64> + Sync,
{
    let keep = eps.max(0.5);
    let mins: Vec<usize> = blocks.iter().map(|b| min_subset(eps, b.count())).collect();
    let members: Vec<Vec<usize>> = blocks.iter().map(|b| b.to_vec()).collect();
    let draw = |d: usize| -> Result<Option<(f64, Vec<VertexSet>)>> {
        let mut r = rng::stream(seed, "regularity-draw", d as u64);
        let mut subsets = Vec::with_capacity(blocks.len());
        for (i, b) in blocks.iter().enumerate() {
            let s = VertexSet::from_indices(
                b.part(),
                b.universe(),
                members[i].iter().copied().filter(|_| r.random::<f64>() < keep),
            )?;
            if s.count() < mins[i] {
                return Ok(None);
            }
            subsets.push(s);
        }
        let inner = density(&subsets)?;
        Ok(Some((inner, subsets)))
    };
    let mut max_deviation = 0.0f64;
    let mut examined = 0u64;
    let mut start = 0;
    while start < budget {
        let len = SAMPLE_CHUNK.min(budget - start);
        let chunk: Vec<Result<Option<(f64, Vec<VertexSet>)>>> = par::map_range(len, |i| draw(start + i));
        examined += len as u64;
        for res in chunk {
            if let Some((inner, subsets)) = res? {
                let deviation = (inner - outer).abs();
                max_deviation = max_deviation.max(deviation);
                if deviation > eps {
                    return Ok(RegularityWitness {
                        eps,
                        mode: SearchMode::Sampled { budget },
                        outer,
                        found: Some(Witness { subsets, inner, outer, deviation }),
                        examined,
                        max_deviation,
                    });
                }
            }
        }
        start += len;
    }
    Ok(RegularityWitness {
        eps,
        mode: SearchMode::Sampled { budget },
        outer,
        found: None,
        examined,
        max_deviation,
    })
}

/// Bipartite analogue: `X ⊆ xs, Y ⊆ ys` of at least an ε-fraction each with
/// `|d(X,Y) - d(xs,ys)| > ε`.
pub fn bipartite_regularity_witness<G: BipartiteDensity + ?Sized>(
    g: &G,
    xs: &VertexSet,
    ys: &VertexSet,
    eps: f64,
    mode: SearchMode,
    seed: u64,
) -> Result<RegularityWitness> {
    let (nx, ny) = g.shape();
    check_blocks(&[nx, ny], &[xs, ys])?;
    let outer = g.box_density(xs, ys)?;
    match mode {
        SearchMode::Exact => exact_bipartite(g, xs, ys, eps, outer),
        SearchMode::Sampled { budget } => {
            sampled(vec![xs, ys], eps, outer, budget, seed, |s| g.box_density(&s[0], &s[1]))
        }
    }
}

fn exact_bipartite<G: BipartiteDensity + ?Sized>(
    g: &G,
    xs: &VertexSet,
    ys: &VertexSet,
    eps: f64,
    outer: f64,
) -> Result<RegularityWitness> {
    let (cx, cy) = (xs.count(), ys.count());
    if cx.min(cy) > EXACT_SIDE_CAP {
        return Err(Error::ExactCapExceeded { sizes: vec![cx, cy] });
    }
    // enumerate the smaller side, sort the other
    let enum_left = cx <= cy;
    let (small, large) = if enum_left { (xs.to_vec(), ys.to_vec()) } else { (ys.to_vec(), xs.to_vec()) };
    let w = |i: usize, l: usize| {
        if enum_left {
            g.weight(small[i], large[l])
        } else {
            g.weight(large[l], small[i])
        }
    };
    let (ns, nl) = (small.len(), large.len());
    let table: Vec<f64> = (0..ns).flat_map(|i| (0..nl).map(move |l| (i, l))).map(|(i, l)| w(i, l)).collect();
    let (zs, zl) = (min_subset(eps, ns), min_subset(eps, nl));
    let results: Vec<Option<Best>> = par::map_range(1usize << ns, |m| {
        let m = m as u64;
        let c = m.count_ones() as usize;
        if c < zs {
            return None;
        }
        let mut s = vec![0.0f64; nl];
        for i in (0..ns).filter(|&i| m >> i & 1 == 1) {
            for (acc, &v) in s.iter_mut().zip(&table[i * nl..(i + 1) * nl]) {
                *acc += v;
            }
        }
        let denom = (c * zl) as f64;
        let mut best: Option<Best> = None;
        for largest in [true, false] {
            let (sum, idx) = extreme(&s, zl, largest);
            let dev = (sum / denom - outer).abs();
            if best.as_ref().is_none_or(|b| dev > b.dev) {
                best = Some(Best { dev, masks: (m, 0), third: idx });
            }
        }
        best
    });
    let examined = results.iter().filter(|r| r.is_some()).count() as u64;
    let best = results.into_iter().fold(None, better);
    let max_deviation = best.as_ref().map_or(0.0, |b| b.dev);
    let found = match best {
        Some(b) if b.dev > eps => {
            let s_set: Vec<usize> = mask_members(b.masks.0, &small).collect();
            let l_set: Vec<usize> = b.third.iter().map(|&l| large[l]).collect();
            let (xv, yv) = if enum_left { (s_set, l_set) } else { (l_set, s_set) };
            let x = VertexSet::from_indices(xs.part(), xs.universe(), xv)?;
            let y = VertexSet::from_indices(ys.part(), ys.universe(), yv)?;
            let inner = g.box_density(&x, &y)?;
            let deviation = (inner - outer).abs();
            (deviation > eps).then_some(Witness { subsets: vec![x, y], inner, outer, deviation })
        }
        _ => None,
    };
    Ok(RegularityWitness {
        eps,
        mode: SearchMode::Exact,
        outer,
        found,
        examined,
        max_deviation,
    })
}

/// Recomputes a tripartite witness from scratch: subset sizes, containment,
/// and both densities, which must match the reported values exactly.
pub fn verify_tripartite_witness<H: TripartiteDensity + ?Sized>(
    h: &H,
    blocks: [&VertexSet; 3],
    eps: f64,
    w: &Witness,
) -> Result<bool> {
    if w.subsets.len() != 3 {
        return Ok(false);
    }
    for (s, b) in w.subsets.iter().zip(blocks) {
        if !s.is_subset(b) || s.count() < min_subset(eps, b.count()) {
            return Ok(false);
        }
    }
    let inner = h.box_density([&w.subsets[0], &w.subsets[1], &w.subsets[2]])?;
    let outer = h.box_density(blocks)?;
    let deviation = (inner - outer).abs();
    Ok(inner.to_bits() == w.inner.to_bits()
        && outer.to_bits() == w.outer.to_bits()
        && deviation.to_bits() == w.deviation.to_bits()
        && deviation > eps)
}

pub fn verify_bipartite_witness<G: BipartiteDensity + ?Sized>(
    g: &G,
    xs: &VertexSet,
    ys: &VertexSet,
    eps: f64,
    w: &Witness,
) -> Result<bool> {
    if w.subsets.len() != 2 {
        return Ok(false);
    }
    for (s, b) in w.subsets.iter().zip([xs, ys]) {
        if !s.is_subset(b) || s.count() < min_subset(eps, b.count()) {
            return Ok(false);
        }
    }
    let inner = g.box_density(&w.subsets[0], &w.subsets[1])?;
    let outer = g.box_density(xs, ys)?;
    let deviation = (inner - outer).abs();
    Ok(inner.to_bits() == w.inner.to_bits()
        && outer.to_bits() == w.outer.to_bits()
        && deviation.to_bits() == w.deviation.to_bits()
        && deviation > eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypercore::{BipartiteGraph, KPartiteHypergraph, WeightedBipartite};

    fn full3(n: usize) -> [VertexSet; 3] {
        [VertexSet::full(0, n), VertexSet::full(1, n), VertexSet::full(2, n)]
    }

    #[test]
    fn complete_graph_has_no_witness() {
        let h = KPartiteHypergraph::from_fn(vec![4, 4, 4], |_| true).unwrap();
        let f = full3(4);
        let r = weak_regularity_witness(&h, [&f[0], &f[1], &f[2]], 0.1, SearchMode::Exact, 0).unwrap();
        assert!(r.found.is_none());
        assert!(r.conclusive());
    }

    #[test]
    fn empty_corner_is_found() {
        let h = KPartiteHypergraph::from_fn(vec![4, 4, 4], |t| !(t[0] < 2 && t[1] < 2)).unwrap();
        let f = full3(4);
        let r = weak_regularity_witness(&h, [&f[0], &f[1], &f[2]], 0.2, SearchMode::Exact, 0).unwrap();
        let w = r.found.expect("witness");
        assert_eq!(w.outer, 0.75);
        assert!(w.deviation > 0.2);
        assert!(verify_tripartite_witness(&h, [&f[0], &f[1], &f[2]], 0.2, &w).unwrap());
    }

    #[test]
    fn exact_cap_enforced() {
        let h = KPartiteHypergraph::new(vec![13, 13, 13]).unwrap();
        let f = full3(13);
        assert!(matches!(
            weak_regularity_witness(&h, [&f[0], &f[1], &f[2]], 0.1, SearchMode::Exact, 0),
            Err(Error::ExactCapExceeded { .. })
        ));
    }

    #[test]
    fn sampled_search_is_sound() {
        let h = KPartiteHypergraph::from_fn(vec![8, 8, 8], |t| t[0] < 4).unwrap();
        let f = full3(8);
        let r = weak_regularity_witness(&h, [&f[0], &f[1], &f[2]], 0.1, SearchMode::Sampled { budget: 500 }, 3)
            .unwrap();
        let w = r.found.expect("witness");
        assert!(verify_tripartite_witness(&h, [&f[0], &f[1], &f[2]], 0.1, &w).unwrap());
    }

    #[test]
    fn bipartite_split_halves() {
        let g = BipartiteGraph::from_fn(6, 6, |x, _| x < 3);
        let (xs, ys) = (VertexSet::full(0, 6), VertexSet::full(1, 6));
        let r = bipartite_regularity_witness(&g, &xs, &ys, 0.25, SearchMode::Exact, 0).unwrap();
        let w = r.found.unwrap();
        assert_eq!(w.deviation, 0.5);
        assert!(verify_bipartite_witness(&g, &xs, &ys, 0.25, &w).unwrap());
        let c = BipartiteGraph::from_fn(6, 6, |_, _| true);
        assert!(bipartite_regularity_witness(&c, &xs, &ys, 0.01, SearchMode::Exact, 0).unwrap().found.is_none());
    }

    #[test]
    fn constant_weight_pair_is_regular() {
        let g = WeightedBipartite::from_fn(5, 7, |_, _| 0.125).unwrap();
        let (xs, ys) = (VertexSet::full(0, 5), VertexSet::full(1, 7));
        let r = bipartite_regularity_witness(&g, &xs, &ys, 0.01, SearchMode::Exact, 0).unwrap();
        assert!(r.found.is_none());
        assert_eq!(r.max_deviation, 0.0);
    }
}
