use rand::Rng;

use crate::bits::VertexSet;
use crate::error::Result;
use crate::hypercore::{KPartiteHypergraph, WeightedTripartite};
use crate::{rng, TOL};

/// Random sub-boxes checked besides the full box.
pub const SUB_BOXES: usize = 100;
/// Boxes allowed outside the band.
pub const ALLOWED_MISSES: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct BoxCheck {
    pub sizes: [usize; 3],
    pub weighted: f64,
    pub sampled: f64,
    /// Standard deviation of the sampled density, `√(Σ w(1-w)) / N`.
    pub sigma: f64,
    /// Hoeffding bound `2 exp(-2 (3σN)² / N)` on leaving the band.
    pub hoeffding_tail: f64,
    pub in_band: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConcentrationReport {
    /// Full box first, then the random sub-boxes.
    pub boxes: Vec<BoxCheck>,
    pub misses: usize,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct SampledGraph {
    pub hypergraph: KPartiteHypergraph,
    pub report: ConcentrationReport,
}

/// One independent coin per cell: `(a, b, c)` is an edge iff
/// `unit(seed, cell) < w(a, b, c)`.
pub fn sample_unweighted(h: &WeightedTripartite, seed: u64) -> Result<SampledGraph> {
    let coins = rng::derive(seed, "cells");
    let hypergraph = KPartiteHypergraph::from_fn(h.sizes().to_vec(), |t| {
        rng::unit(coins, h.index(t[0], t[1], t[2]) as u64) < h.weight(t[0], t[1], t[2])
    })?;
    let report = concentration_report(h, &hypergraph, seed)?;
    Ok(SampledGraph { hypergraph, report })
}

fn check_box(h: &WeightedTripartite, s: &KPartiteHypergraph, sets: [&VertexSet; 3]) -> Result<BoxCheck> {
    let (bs, cs) = (sets[1].to_vec(), sets[2].to_vec());
    let (mut sum, mut var) = (0.0, 0.0);
    for a in sets[0].iter() {
        for &b in &bs {
            for &c in &cs {
                let w = h.weight(a, b, c);
                sum += w;
                var += w * (1.0 - w);
            }
        }
    }
    let cells = (sets[0].count() * bs.len() * cs.len()) as f64;
    let weighted = sum / cells;
    let sampled = s.density(&[sets[0].clone(), sets[1].clone(), sets[2].clone()])?;
    let sigma = var.sqrt() / cells;
    let dev = 3.0 * sigma * cells;
    Ok(BoxCheck {
        sizes: [sets[0].count(), bs.len(), cs.len()],
        weighted,
        sampled,
        sigma,
        hoeffding_tail: (2.0 * (-2.0 * dev * dev / cells).exp()).min(1.0),
        in_band: (sampled - weighted).abs() <= 3.0 * sigma + TOL,
    })
}

/// Full box plus [`SUB_BOXES`] boxes that keep each vertex with
/// probability ½; passes with at most [`ALLOWED_MISSES`] boxes outside
/// `weighted ± 3σ`.
pub fn concentration_report(h: &WeightedTripartite, s: &KPartiteHypergraph, seed: u64) -> Result<ConcentrationReport> {
    let sizes = h.sizes();
    let mut boxes = Vec::with_capacity(SUB_BOXES + 1);
    let full = h.full_sets();
    boxes.push(check_box(h, s, [&full[0], &full[1], &full[2]])?);
    for i in 0..SUB_BOXES {
        let mut r = rng::stream(seed, "boxes", i as u64);
        let sets: Vec<VertexSet> = (0..3)
            .map(|p| {
                let v = VertexSet::from_fn(p, sizes[p], |_| r.random_bool(0.5));
                if v.is_empty() { VertexSet::full(p, sizes[p]) } else { v }
            })
            .collect();
        boxes.push(check_box(h, s, [&sets[0], &sets[1], &sets[2]])?);
    }
    let misses = boxes.iter().filter(|b| !b.in_band).count();
    Ok(ConcentrationReport { boxes, misses, pass: misses <= ALLOWED_MISSES })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extreme_weights_are_deterministic() {
        let h = WeightedTripartite::from_fn([4, 5, 6], |a, b, _| if a == b { 1.0 } else { 0.0 }).unwrap();
        for seed in 0..5 {
            let s = sample_unweighted(&h, seed).unwrap();
            for a in 0..4 {
                for b in 0..5 {
                    for c in 0..6 {
                        assert_eq!(s.hypergraph.contains(&[a, b, c]), a == b);
                    }
                }
            }
            assert_eq!(s.report.misses, 0);
        }
    }

    #[test]
    fn layered_weights_concentrate() {
        let n = 30;
        let h = WeightedTripartite::from_fn([n, n, n], |a, b, c| {
            if (a + b) % 2 == 0 { 0.5f64.powi((c / 10 + 1) as i32) } else { 0.0 }
        })
        .unwrap();
        let s = sample_unweighted(&h, 3).unwrap();
        assert_eq!(s.report.boxes.len(), SUB_BOXES + 1);
        assert!(s.report.pass, "misses {}", s.report.misses);
        let full = &s.report.boxes[0];
        assert!(full.sigma > 0.0 && full.hoeffding_tail < 1.0);
    }

    #[test]
    fn same_seed_same_sample() {
        let h = WeightedTripartite::from_fn([6, 6, 6], |a, b, c| ((a + b + c) % 3) as f64 / 2.0 * 0.9).unwrap();
        let x = sample_unweighted(&h, 9).unwrap();
        let y = sample_unweighted(&h, 9).unwrap();
        assert_eq!(x.hypergraph, y.hypergraph);
        assert_eq!(x.report, y.report);
    }
}
