use rand::Rng;

use crate::bits::{xor_count, VertexSet};
use crate::error::{Error, Result};
use crate::{par, rng, TOL};

/// Size and intersection bands of a family.
#[derive(Clone, Debug, PartialEq)]
pub struct Item1Check {
    /// False when `M < ln³(4m²)`, where the bands are not claimed.
    pub applies: bool,
    /// `M^{2/3}`.
    pub band: f64,
    /// Largest `||X_i| - M/2|` (the same for `Y_i`).
    pub max_size_dev: f64,
    /// Largest deviation of a pairwise intersection from `M/4`.
    pub max_intersection_dev: f64,
    pub holds: bool,
}

/// Agreement counts `z_{j,j'}`: partitions putting `j, j'` on the same side.
#[derive(Clone, Debug, PartialEq)]
pub struct AgreementCheck {
    pub max_z: usize,
    /// Pairs with `z > 3m/4`.
    pub violations: u64,
    pub holds: bool,
}

/// Partitions `(X_i, Y_i)` of `[M]`, `i = 1..m`, stored as `X_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrthogonalFamily {
    pub m: usize,
    pub size: usize,
    pub xs: Vec<VertexSet>,
    pub item1: Item1Check,
    pub agreement: AgreementCheck,
    pub attempts: usize,
}

impl OrthogonalFamily {
    /// Family from explicit `X_i` sets; checks are recomputed.
    pub fn from_sets(size: usize, xs: Vec<VertexSet>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidParameter("a family needs at least one partition".into()));
        }
        if let Some(x) = xs.iter().find(|x| x.universe() != size) {
            return Err(Error::Mismatch(format!("set over {} in a family over {size}", x.universe())));
        }
        let m = xs.len();
        let item1 = item1_check(m, size, &xs);
        let agreement = agreement_check(m, size, &xs);
        Ok(Self { m, size, xs, item1, agreement, attempts: 1 })
    }

    pub fn y(&self, i: usize) -> VertexSet {
        self.xs[i].complement()
    }

    pub fn in_x(&self, i: usize, j: usize) -> bool {
        self.xs[i].contains(j)
    }

    pub fn accepted(&self) -> bool {
        self.item1.holds && self.agreement.holds
    }

    /// `(Σ_{X_i} λ, Σ_{Y_i} λ)` for every `i`.
    pub fn margins(&self, lambda: &[f64]) -> Vec<(f64, f64)> {
        self.xs
            .iter()
            .map(|x| {
                let mut sx = 0.0;
                let mut sy = 0.0;
                for (j, &l) in lambda.iter().enumerate() {
                    if x.contains(j) {
                        sx += l;
                    } else {
                        sy += l;
                    }
                }
                (sx, sy)
            })
            .collect()
    }
}

/// Whether the size/intersection bands are claimed at this `(m, M)`.
pub fn item1_applies(m: usize, size: usize) -> bool {
    size as f64 >= (4.0 * (m * m) as f64).ln().powi(3)
}

fn item1_check(m: usize, size: usize, xs: &[VertexSet]) -> Item1Check {
    let big = size as f64;
    let band = big.powf(2.0 / 3.0);
    let counts: Vec<usize> = xs.iter().map(|x| x.count()).collect();
    let max_size_dev = counts.iter().map(|&c| (c as f64 - big / 2.0).abs()).fold(0.0, f64::max);
    let per: Vec<f64> = par::map_range(m, |i| {
        let mut worst = 0.0f64;
        for i2 in i + 1..m {
            let xx = xs[i].intersection_count(&xs[i2]) as f64;
            let (ci, ci2) = (counts[i] as f64, counts[i2] as f64);
            for v in [xx, ci - xx, ci2 - xx, big - ci - ci2 + xx] {
                worst = worst.max((v - big / 4.0).abs());
            }
        }
        worst
    });
    let max_intersection_dev = per.into_iter().fold(0.0, f64::max);
    let applies = item1_applies(m, size);
    Item1Check {
        applies,
        band,
        max_size_dev,
        max_intersection_dev,
        holds: !applies || (max_size_dev <= band + TOL && max_intersection_dev <= band + TOL),
    }
}

fn agreement_check(m: usize, size: usize, xs: &[VertexSet]) -> AgreementCheck {
    // column j: bit i set when j ∈ X_i
    let cols: Vec<VertexSet> = (0..size).map(|j| VertexSet::from_fn(0, m, |i| xs[i].contains(j))).collect();
    let limit = 0.75 * m as f64 + TOL;
    let per: Vec<(usize, u64)> = par::map_range(size, |j| {
        let mut max_z = 0;
        let mut bad = 0;
        for j2 in j + 1..size {
            let z = m - xor_count(cols[j].words(), cols[j2].words());
            max_z = max_z.max(z);
            if z as f64 > limit {
                bad += 1;
            }
        }
        (max_z, bad)
    });
    let max_z = per.iter().map(|p| p.0).max().unwrap_or(0);
    let violations = per.iter().map(|p| p.1).sum();
    AgreementCheck { max_z, violations, holds: violations == 0 }
}

/// One uniformly random family, with its checks recorded.
pub fn draw_family(m: usize, size: usize, seed: u64, attempt: u64) -> Result<OrthogonalFamily> {
    if size < 2 || m == 0 {
        return Err(Error::InvalidParameter(format!("need M >= 2 and m >= 1, got M = {size}, m = {m}")));
    }
    let base = rng::indexed(rng::derive(seed, "family"), attempt);
    let xs: Vec<VertexSet> = (0..m)
        .map(|i| {
            let mut r = rng::stream(base, "partition", i as u64);
            VertexSet::from_fn(0, size, |_| r.random_bool(0.5))
        })
        .collect();
    let mut fam = OrthogonalFamily::from_sets(size, xs)?;
    fam.attempts = attempt as usize + 1;
    Ok(fam)
}

/// Rejection-samples until both checks hold.
pub fn orthogonal_family(m: usize, size: usize, seed: u64, max_attempts: usize) -> Result<OrthogonalFamily> {
    let mut last = None;
    for a in 0..max_attempts {
        let fam = draw_family(m, size, seed, a as u64)?;
        if fam.accepted() {
            return Ok(fam);
        }
        last = Some(fam);
    }
    let stats = match last {
        Some(f) => format!(
            "m = {m}, M = {size}; last draw: item 1 {} (size dev {:.2}, intersection dev {:.2}, band {:.2}), \
             max agreement {} vs limit {:.2}, {} violating pairs",
            if f.item1.applies { if f.item1.holds { "held" } else { "failed" } } else { "not claimed" },
            f.item1.max_size_dev,
            f.item1.max_intersection_dev,
            f.item1.band,
            f.agreement.max_z,
            0.75 * m as f64,
            f.agreement.violations
        ),
        None => "no attempts allowed".into(),
    };
    Err(Error::AttemptsExhausted { attempts: max_attempts, stats })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Item2Report {
    /// Indices `i` with `min(Σ_{X_i} λ, Σ_{Y_i} λ) > ε`.
    pub qualifying: Vec<usize>,
    pub count: usize,
    pub hypothesis_violations: Vec<String>,
    /// Hypotheses hold and the family satisfies the agreement bound.
    pub guaranteed: bool,
    pub meets_bound: bool,
}

impl Item2Report {
    /// A guaranteed bound that failed: impossible unless the code is wrong.
    pub fn contradiction(&self) -> bool {
        self.guaranteed && !self.meets_bound
    }
}

/// Counts indices where `λ` is split with margin `ε` on both sides.
pub fn item2_margin(family: &OrthogonalFamily, lambda: &[f64], eps: f64, zeta: f64, eta: f64) -> Result<Item2Report> {
    if lambda.len() != family.size {
        return Err(Error::Mismatch(format!("{} weights for a family over {}", lambda.len(), family.size)));
    }
    let mut v = Vec::new();
    if lambda.iter().any(|&l| l < 0.0 || l.is_nan()) {
        v.push("negative weight".to_string());
    }
    let sum: f64 = lambda.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        v.push(format!("weights sum to {sum}"));
    }
    let max = lambda.iter().copied().fold(0.0, f64::max);
    if max > 1.0 - zeta + TOL {
        v.push(format!("max weight {max} exceeds 1 - zeta = {}", 1.0 - zeta));
    }
    if zeta > 0.5 {
        v.push(format!("zeta = {zeta} exceeds 1/2"));
    }
    if !(eta > 0.0 && eps > 0.0) {
        v.push("eta and eps must be positive".into());
    }
    if (1.0 - eta) * (1.0 - 4.0 * eps) < 1.0 - zeta + zeta * zeta - TOL {
        v.push(format!("(1 - eta)(1 - 4 eps) < 1 - zeta + zeta^2 at eps = {eps}, zeta = {zeta}, eta = {eta}"));
    }
    let qualifying: Vec<usize> = family
        .margins(lambda)
        .into_iter()
        .enumerate()
        .filter(|(_, (x, y))| x.min(*y) > eps)
        .map(|(i, _)| i)
        .collect();
    let count = qualifying.len();
    Ok(Item2Report {
        qualifying,
        count,
        guaranteed: v.is_empty() && family.agreement.holds,
        meets_bound: count as f64 + TOL >= eta * family.m as f64,
        hypothesis_violations: v,
    })
}

/// `Σ_i g_i(λ)²`, the quantity bounded under the agreement condition.
pub fn imbalance_energy(family: &OrthogonalFamily, lambda: &[f64]) -> f64 {
    family.margins(lambda).iter().map(|(x, y)| (x - y) * (x - y)).sum()
}
