use std::fmt;
use std::str::FromStr;

use homopart::homogenizer::{Provenance, TableOracle};
use homopart::{rng, Error, KPartiteHypergraph, LayeredPartition, PartPartition, Result};
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    /// Every part split into `r` blocks; each block tuple is complete or empty.
    PlantedBoxes,
    /// `H(t) = G(t_0, t_1)` with `G` a union of two disjoint boxes.
    Product,
    /// `r` equal intervals per part; an edge iff the interval indices sum
    /// to at least `⌈k(r-1)/2⌉`.
    IntervalThreshold,
    /// Independent cells of the given density; nothing planted.
    UniformRandom,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::PlantedBoxes => "planted-boxes",
            Family::Product => "product",
            Family::IntervalThreshold => "interval-threshold",
            Family::UniformRandom => "uniform-random",
        }
    }

    pub fn is_planted(self) -> bool {
        self != Family::UniformRandom
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Family::PlantedBoxes, Family::Product, Family::IntervalThreshold, Family::UniformRandom]
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown family {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceSpec {
    pub k: usize,
    /// Vertices per part.
    pub n: usize,
    pub family: Family,
    /// Bound on the planted link partition size.
    pub r: usize,
    /// Box density for planted boxes, cell density for uniform random.
    pub density: f64,
    pub seed: u64,
}

impl InstanceSpec {
    pub fn new(family: Family, k: usize, n: usize, r: usize, seed: u64) -> Self {
        Self { k, n, family, r, density: 0.5, seed }
    }
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub spec: InstanceSpec,
    pub hypergraph: KPartiteHypergraph,
    /// Per-part partitions inducing a 0-homogeneous partition of every link.
    pub planted: Option<LayeredPartition>,
}

impl Instance {
    pub fn oracle(&self) -> Option<TableOracle> {
        self.planted
            .as_ref()
            .map(|p| TableOracle::uniform(Provenance::Planted, p.parts().to_vec()))
    }
}

fn check(spec: &InstanceSpec) -> Result<()> {
    if spec.k < 2 {
        return Err(Error::InvalidParameter(format!("k must be at least 2, got {}", spec.k)));
    }
    if spec.n == 0 {
        return Err(Error::InvalidParameter("parts must be nonempty".into()));
    }
    if !(0.0..=1.0).contains(&spec.density) {
        return Err(Error::InvalidParameter(format!("density {} outside [0, 1]", spec.density)));
    }
    if spec.family.is_planted() {
        if spec.r == 0 {
            return Err(Error::InvalidParameter(format!("{} needs r >= 1", spec.family)));
        }
        if spec.r > spec.n {
            return Err(Error::InvalidParameter(format!("r = {} exceeds n = {}", spec.r, spec.n)));
        }
    }
    if spec.family == Family::Product && spec.r < 3 {
        return Err(Error::InvalidParameter("product instances plant 3 blocks per side; need r >= 3".into()));
    }
    if spec.family == Family::Product && spec.n < 3 {
        return Err(Error::InvalidParameter("product instances need n >= 3".into()));
    }
    Ok(())
}

/// `r` nonempty blocks over a shuffled vertex order.
fn random_blocks(n: usize, r: usize, seed: u64, part: usize) -> Vec<u32> {
    let mut g = rng::stream(seed, "blocks", part as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut g);
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(&mut g);
    let mut cuts = cuts[..r - 1].to_vec();
    cuts.sort_unstable();
    cuts.push(n);
    let mut labels = vec![0u32; n];
    let mut block = 0;
    for (pos, &v) in order.iter().enumerate() {
        while pos >= cuts[block] {
            block += 1;
        }
        labels[v] = block as u32;
    }
    labels
}

fn layered(raw: Vec<Vec<u32>>) -> Result<LayeredPartition> {
    LayeredPartition::new(raw.iter().enumerate().map(|(p, l)| PartPartition::from_raw(p, l, None)).collect())
}

fn planted_boxes(spec: &InstanceSpec) -> Result<Instance> {
    let (k, n, r) = (spec.k, spec.n, spec.r);
    let raw: Vec<Vec<u32>> = (0..k).map(|p| random_blocks(n, r, spec.seed, p)).collect();
    let coins = rng::derive(spec.seed, "boxes");
    let hypergraph = KPartiteHypergraph::from_fn(vec![n; k], |t| {
        let idx = t.iter().enumerate().fold(0u64, |acc, (p, &v)| acc * r as u64 + raw[p][v] as u64);
        rng::unit(coins, idx) < spec.density
    })?;
    Ok(Instance { spec: spec.clone(), hypergraph, planted: Some(layered(raw)?) })
}

fn product(spec: &InstanceSpec) -> Result<Instance> {
    let (k, n) = (spec.k, spec.n);
    // two disjoint boxes per side; 0 marks the remainder
    let side = |part: usize| -> Vec<u32> {
        let mut g = rng::stream(spec.seed, "product", part as u64);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut g);
        let lo = (n / 6).max(1);
        let hi = (n / 3).max(lo);
        let a = g.random_range(lo..=hi);
        let b = g.random_range(lo..=hi).min(n - a - 1).max(1);
        let mut labels = vec![0u32; n];
        for &v in &order[..a] {
            labels[v] = 1;
        }
        for &v in &order[a..a + b] {
            labels[v] = 2;
        }
        labels
    };
    let (x, y) = (side(0), side(1));
    let hypergraph = KPartiteHypergraph::from_fn(vec![n; k], |t| {
        let (a, b) = (x[t[0]], y[t[1]]);
        a != 0 && a == b
    })?;
    let mut raw = vec![x, y];
    raw.extend((2..k).map(|_| vec![0u32; n]));
    Ok(Instance { spec: spec.clone(), hypergraph, planted: Some(layered(raw)?) })
}

fn interval_threshold(spec: &InstanceSpec) -> Result<Instance> {
    let (k, n, r) = (spec.k, spec.n, spec.r);
    let interval: Vec<u32> = (0..n).map(|v| (v * r / n) as u32).collect();
    let theta = (k * (r - 1)).div_ceil(2) as u32;
    let hypergraph =
        KPartiteHypergraph::from_fn(vec![n; k], |t| t.iter().map(|&v| interval[v]).sum::<u32>() >= theta)?;
    Ok(Instance { spec: spec.clone(), hypergraph, planted: Some(layered(vec![interval; k])?) })
}

fn uniform_random(spec: &InstanceSpec) -> Result<Instance> {
    let coins = rng::derive(spec.seed, "cells");
    let n = spec.n;
    let hypergraph = KPartiteHypergraph::from_fn(vec![n; spec.k], |t| {
        let idx = t.iter().fold(0u64, |acc, &v| acc * n as u64 + v as u64);
        rng::unit(coins, idx) < spec.density
    })?;
    Ok(Instance { spec: spec.clone(), hypergraph, planted: None })
}

pub fn generate(spec: &InstanceSpec) -> Result<Instance> {
    check(spec)?;
    match spec.family {
        Family::PlantedBoxes => planted_boxes(spec),
        Family::Product => product(spec),
        Family::IntervalThreshold => interval_threshold(spec),
        Family::UniformRandom => uniform_random(spec),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use homopart::auditor::{bipartite_homogeneity, slicewise_vc};
    use homopart::homogenizer::LinkPartitionOracle;

    fn planted_links_are_exact(inst: &Instance) {
        let h = &inst.hypergraph;
        let oracle = inst.oracle().unwrap();
        let n = inst.spec.n;
        for pinned in 0..h.k() {
            for v in 0..n {
                let pins = [(pinned, v)];
                let lp = oracle.link_partition(h, &pins).unwrap();
                let g = h.link(&pins).unwrap();
                let audit = bipartite_homogeneity(&g, &lp.left, &lp.right, 0.0).unwrap();
                assert!(audit.pass && audit.normalized_mass == 0.0);
                assert!(lp.left.block_count() <= inst.spec.r && lp.right.block_count() <= inst.spec.r);
            }
        }
    }

    #[test]
    fn planted_families_have_exact_link_partitions() {
        for family in [Family::PlantedBoxes, Family::Product, Family::IntervalThreshold] {
            for seed in 0..3 {
                let inst = generate(&InstanceSpec::new(family, 3, 20, 3, seed)).unwrap();
                planted_links_are_exact(&inst);
            }
        }
    }

    #[test]
    fn product_links_through_the_third_part_repeat_g() {
        let inst = generate(&InstanceSpec::new(Family::Product, 3, 60, 3, 7)).unwrap();
        let h = &inst.hypergraph;
        let g = h.link(&[(2, 0)]).unwrap();
        for c in 1..60 {
            assert_eq!(h.link(&[(2, c)]).unwrap(), g);
        }
        let p = inst.planted.unwrap();
        assert!(p.part(0).block_count() <= 3 && p.part(1).block_count() <= 3);
        assert_eq!(p.part(2).block_count(), 1);
    }

    #[test]
    fn uniform_random_vc_grows() {
        let vc = |n: usize| {
            let mut spec = InstanceSpec::new(Family::UniformRandom, 3, n, 0, 11);
            spec.density = 0.5;
            slicewise_vc(&generate(&spec).unwrap().hypergraph, 8).unwrap().dimension
        };
        let (a, c) = (vc(6), vc(10));
        assert!(a <= vc(8) && vc(8) <= c && a < c, "{a} {c}");
    }

    #[test]
    fn planted_needs_positive_r() {
        let e = generate(&InstanceSpec::new(Family::PlantedBoxes, 3, 10, 0, 1)).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter(_)));
        assert!(generate(&InstanceSpec::new(Family::Product, 3, 10, 2, 1)).is_err());
        assert!(generate(&InstanceSpec::new(Family::UniformRandom, 3, 10, 0, 1)).is_ok());
    }

    #[test]
    fn same_seed_same_instance() {
        let spec = InstanceSpec::new(Family::PlantedBoxes, 3, 30, 4, 5);
        assert_eq!(generate(&spec).unwrap().hypergraph, generate(&spec).unwrap().hypergraph);
        let other = InstanceSpec { seed: 6, ..spec };
        assert_ne!(generate(&other).unwrap().hypergraph, generate(&spec).unwrap().hypergraph);
    }

    #[test]
    fn family_names_round_trip() {
        for f in [Family::PlantedBoxes, Family::Product, Family::IntervalThreshold, Family::UniformRandom] {
            assert_eq!(f.name().parse::<Family>().unwrap(), f);
        }
        assert!("boxes".parse::<Family>().is_err());
    }
}
