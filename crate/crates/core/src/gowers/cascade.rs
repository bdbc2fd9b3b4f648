use crate::auditor::{min_subset, verify_tripartite_witness, Witness};
use crate::bits::VertexSet;
use crate::error::{Error, Result};
use crate::gowers::construction::GowersConstruction;
use crate::partitions::{beta_contained, beta_refines, LayeredPartition, RefinementReport};

/// Default cap on extracted witnesses per level.
pub const DEFAULT_WITNESS_CAP: usize = 16;

/// `β_r = 7^r β₀`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaSchedule {
    pub base: f64,
}

impl BetaSchedule {
    /// `β₀ = ε^{1/4}`.
    pub fn paper(eps: f64) -> Self {
        Self { base: eps.powf(0.25) }
    }

    /// `β₀ = 0.001`, which keeps `β_3 = 0.343 < 1/2`.
    pub fn toy() -> Self {
        Self { base: 0.001 }
    }

    pub fn beta(&self, r: usize) -> f64 {
        self.base * 7f64.powi(r as i32)
    }

    /// `ε^{1/4} ≤ β_r ≤ 1/72`, the range the refinement step assumes.
    pub fn in_proven_range(&self, r: usize, eps: f64) -> bool {
        let b = self.beta(r);
        b >= eps.powf(0.25) - crate::TOL && b <= 1.0 / 72.0 + crate::TOL
    }
}

/// Side whose block straddles the finer intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CascadeWitness {
    pub r: usize,
    pub side: Side,
    /// Candidate block labels `(s, u, ℓ)` on `(A, B, C)`.
    pub labels: [u32; 3],
    /// Level-`(r-1)` intervals `(i, h)` holding the straddling block and its partner.
    pub intervals: (usize, usize),
    /// Whether the `X`-half of the partner block was used.
    pub x_half: bool,
    /// Sub-triple on which the level graph is complete.
    pub complete: [VertexSet; 3],
    /// Sub-triple on which it is empty.
    pub empty: [VertexSet; 3],
    pub d_complete: f64,
    pub d_empty: f64,
    /// `d_complete - d_empty`, recomputed from the weights.
    pub gap: f64,
    /// Larger-deviation sub-triple against the block triple, when it exceeds ε.
    pub witness: Option<Witness>,
    pub verified: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelReport {
    pub r: usize,
    pub beta: f64,
    /// `β_r ≥ 1/2`: refinement is undefined and the level is skipped.
    pub exhausted: bool,
    pub in_proven_range: bool,
    pub a_refines: Option<RefinementReport>,
    pub b_refines: Option<RefinementReport>,
    /// Blocks `β_{r-1}`-inside a level-`(r-1)` interval but in no child.
    pub straddling: usize,
    pub witnesses: Vec<CascadeWitness>,
    /// Extraction stopped at the cap.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CascadeReport {
    pub eps: f64,
    pub schedule: BetaSchedule,
    /// Nonempty blocks of each part have sizes within a factor of two.
    pub balanced: bool,
    pub levels: Vec<LevelReport>,
}

impl CascadeReport {
    pub fn witnesses(&self) -> impl Iterator<Item = &CascadeWitness> {
        self.levels.iter().flat_map(|l| l.witnesses.iter())
    }

    /// First level at which either side fails to refine.
    pub fn first_failure(&self) -> Option<usize> {
        self.levels
            .iter()
            .find(|l| {
                l.a_refines.as_ref().is_some_and(|r| !r.refines) || l.b_refines.as_ref().is_some_and(|r| !r.refines)
            })
            .map(|l| l.r)
    }
}

/// Walks the levels, checking `β_r`-refinement of the interval partitions and
/// extracting irregular triples wherever a block straddles child intervals.
pub fn refinement_cascade(
    c: &GowersConstruction,
    candidate: &LayeredPartition,
    eps: f64,
    schedule: BetaSchedule,
    witness_cap: usize,
) -> Result<CascadeReport> {
    let n = c.n();
    if candidate.k() != 3 || candidate.sizes() != vec![n, n, n] {
        return Err(Error::Mismatch(format!(
            "candidate has sizes {:?}, construction has {n} per part",
            candidate.sizes()
        )));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    let blocks: Vec<Vec<(u32, VertexSet)>> = (0..3).map(|p| candidate.part(p).nonempty_blocks()).collect();
    let balanced = blocks.iter().all(|bs| {
        let min = bs.iter().map(|b| b.1.count()).min().unwrap_or(0);
        let max = bs.iter().map(|b| b.1.count()).max().unwrap_or(0);
        max <= 2 * min
    });
    let mut levels = Vec::new();
    for r in 1..=c.t() {
        let beta = schedule.beta(r);
        let in_proven_range = schedule.in_proven_range(r - 1, eps);
        if beta >= 0.5 {
            levels.push(LevelReport {
                r,
                beta,
                exhausted: true,
                in_proven_range,
                a_refines: None,
                b_refines: None,
                straddling: 0,
                witnesses: Vec::new(),
                truncated: false,
            });
            continue;
        }
        let a_refines = beta_refines(candidate.part(0), &c.layering.partition(r, 0), beta)?;
        let b_refines = beta_refines(candidate.part(1), &c.layering.partition(r, 1), beta)?;
        let mut ex = Extractor { c, eps, r, beta_prev: schedule.beta(r - 1), beta, blocks: &blocks, out: Vec::new(), cap: witness_cap, straddling: 0, truncated: false };
        ex.run(Side::A)?;
        ex.run(Side::B)?;
        levels.push(LevelReport {
            r,
            beta,
            exhausted: false,
            in_proven_range,
            a_refines: Some(a_refines),
            b_refines: Some(b_refines),
            straddling: ex.straddling,
            truncated: ex.truncated,
            witnesses: ex.out,
        });
    }
    Ok(CascadeReport { eps, schedule, balanced, levels })
}

struct Extractor<'a> {
    c: &'a GowersConstruction,
    eps: f64,
    r: usize,
    beta_prev: f64,
    beta: f64,
    blocks: &'a [Vec<(u32, VertexSet)>],
    out: Vec<CascadeWitness>,
    cap: usize,
    straddling: usize,
    truncated: bool,
}

impl Extractor<'_> {
    /// Level-`(r-1)` interval `i` with `block ⊂_{β_{r-1}} S_i`, if any.
    fn parent(&self, block: &VertexSet) -> Option<usize> {
        let lay = &self.c.layering;
        let m = lay.m[self.r - 1] as usize;
        let mut counts = vec![0usize; m];
        for v in block.iter() {
            counts[lay.interval(self.r - 1, v)] += 1;
        }
        (0..m).find(|&i| beta_contained(counts[i], block.count(), self.beta_prev))
    }

    fn run(&mut self, side: Side) -> Result<()> {
        let c = self.c;
        let lay = &c.layering;
        let r = self.r;
        let big = (lay.m[r] / lay.m[r - 1]) as usize;
        let fam = &c.families[r - 1];
        let (own, other) = match side {
            Side::A => (0, 1),
            Side::B => (1, 0),
        };
        let zs: Vec<(u32, VertexSet, VertexSet)> = self.blocks[2]
            .iter()
            .filter_map(|(l, rb)| {
                let z = VertexSet::from_fn(2, c.n(), |x| rb.contains(x) && lay.layer(x) == r);
                (!z.is_empty() && z.count() >= min_subset(self.eps, rb.count())).then(|| (*l, rb.clone(), z))
            })
            .collect();
        for (s_label, p) in &self.blocks[own] {
            let Some(i) = self.parent(p) else { continue };
            // μ_j = |P ∩ S_{i,j}| / |P|
            let mut mu = vec![0usize; big];
            for v in p.iter() {
                if lay.interval(r - 1, v) == i {
                    mu[lay.sub_index(r, v)] += 1;
                }
            }
            if mu.iter().any(|&x| beta_contained(x, p.count(), self.beta)) {
                continue;
            }
            self.straddling += 1;
            let total: usize = mu.iter().sum();
            let lambda: Vec<f64> = mu.iter().map(|&x| x as f64 / total as f64).collect();
            let margins = fam.margins(&lambda);
            for (h, &(sx, sy)) in margins.iter().enumerate() {
                if sx.min(sy) <= 2.0 * self.eps {
                    continue;
                }
                let half = |x: bool| {
                    VertexSet::from_fn(own, c.n(), |v| {
                        p.contains(v) && lay.interval(r - 1, v) == i && fam.in_x(h, lay.sub_index(r, v)) == x
                    })
                };
                let (vx, vy) = (half(true), half(false));
                let need_v = min_subset(self.eps, p.count());
                if vx.count() < need_v || vy.count() < need_v {
                    continue;
                }
                for (u_label, q) in &self.blocks[other] {
                    if self.parent(q) != Some(h) {
                        continue;
                    }
                    let w_half = |x: bool| {
                        VertexSet::from_fn(other, c.n(), |v| {
                            q.contains(v) && lay.interval(r - 1, v) == h && fam.in_x(i, lay.sub_index(r, v)) == x
                        })
                    };
                    let need_w = min_subset(self.eps, q.count());
                    let (wx, wy) = (w_half(true), w_half(false));
                    let (x_half, w) = if wx.count() >= need_w {
                        (true, wx)
                    } else if wy.count() >= need_w {
                        (false, wy)
                    } else {
                        continue;
                    };
                    let (v_full, v_void) = if x_half { (&vx, &vy) } else { (&vy, &vx) };
                    for (l_label, rb, z) in &zs {
                        if self.out.len() >= self.cap {
                            self.truncated = true;
                            return Ok(());
                        }
                        let order = |v: &VertexSet| match side {
                            Side::A => [v.clone(), w.clone(), z.clone()],
                            Side::B => [w.clone(), v.clone(), z.clone()],
                        };
                        let outer_sets = match side {
                            Side::A => [p, q, rb],
                            Side::B => [q, p, rb],
                        };
                        let labels = match side {
                            Side::A => [*s_label, *u_label, *l_label],
                            Side::B => [*u_label, *s_label, *l_label],
                        };
                        let complete = order(v_full);
                        let empty = order(v_void);
                        let d_complete = c.weighted.density([&complete[0], &complete[1], &complete[2]])?;
                        let d_empty = c.weighted.density([&empty[0], &empty[1], &empty[2]])?;
                        let outer = c.weighted.density(outer_sets)?;
                        let (dev_c, dev_e) = ((d_complete - outer).abs(), (d_empty - outer).abs());
                        let (sets, inner, deviation) =
                            if dev_c >= dev_e { (&complete, d_complete, dev_c) } else { (&empty, d_empty, dev_e) };
                        let witness = (deviation > self.eps).then(|| Witness {
                            subsets: sets.to_vec(),
                            inner,
                            outer,
                            deviation,
                        });
                        let verified = match &witness {
                            Some(wt) => verify_tripartite_witness(&c.weighted, outer_sets, self.eps, wt)?,
                            None => false,
                        };
                        self.out.push(CascadeWitness {
                            r,
                            side,
                            labels,
                            intervals: (i, h),
                            x_half,
                            gap: d_complete - d_empty,
                            complete,
                            empty,
                            d_complete,
                            d_empty,
                            witness,
                            verified,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gowers::construction::build_weighted;
    use crate::gowers::sequence::{build_sequence, GowersMode};
    use crate::partitions::PartPartition;

    fn toy(n: usize) -> GowersConstruction {
        let p = build_sequence(0.1, 0.1, GowersMode::Toy, None).unwrap();
        build_weighted(&p, n, 7).unwrap()
    }

    fn trivial(n: usize) -> LayeredPartition {
        LayeredPartition::new((0..3).map(|p| PartPartition::trivial(p, n)).collect()).unwrap()
    }

    #[test]
    fn finest_intervals_refine_every_level() {
        let c = toy(48);
        let cand = LayeredPartition::new(vec![
            c.layering.partition(3, 0),
            c.layering.partition(3, 1),
            PartPartition::singletons(2, 48),
        ])
        .unwrap();
        let rep = refinement_cascade(&c, &cand, 0.1, BetaSchedule { base: 0.0 }, 4).unwrap();
        for l in &rep.levels {
            let (a, b) = (l.a_refines.as_ref().unwrap(), l.b_refines.as_ref().unwrap());
            assert!(a.refines && b.refines && a.unmatched == 0 && b.unmatched == 0);
            assert!(l.witnesses.is_empty());
        }
        assert_eq!(rep.first_failure(), None);
    }

    #[test]
    fn trivial_candidate_yields_half_gap_at_level_one() {
        let c = toy(48);
        let rep = refinement_cascade(&c, &trivial(48), 0.1, BetaSchedule::toy(), DEFAULT_WITNESS_CAP).unwrap();
        assert_eq!(rep.first_failure(), Some(1));
        let l1 = &rep.levels[0];
        assert!(!l1.witnesses.is_empty());
        for w in &l1.witnesses {
            assert_eq!(w.gap, 0.5);
            assert_eq!(w.d_complete, 0.5);
            assert_eq!(w.d_empty, 0.0);
            assert!(w.verified);
        }
        // the trivial block is inside no level-1 interval, so nothing straddles later
        assert!(rep.levels[1..].iter().all(|l| l.witnesses.is_empty()));
    }

    #[test]
    fn witness_sets_follow_the_boxes() {
        let c = toy(48);
        let rep = refinement_cascade(&c, &trivial(48), 0.1, BetaSchedule::toy(), 64).unwrap();
        for w in rep.witnesses() {
            let g = c.graph(w.r);
            for a in w.complete[0].iter() {
                assert!(w.complete[1].iter().all(|b| g.has_edge(a, b)));
            }
            for a in w.empty[0].iter() {
                assert!(w.empty[1].iter().all(|b| !g.has_edge(a, b)));
            }
            assert!(w.complete[2].iter().all(|z| c.layering.layer(z) == w.r));
        }
    }

    #[test]
    fn schedule_values() {
        let s = BetaSchedule::paper(1e-4);
        assert!((s.beta(2) - 4.9).abs() < 1e-12);
        assert!(!s.in_proven_range(2, 1e-4));
        assert!((BetaSchedule::toy().beta(3) - 0.343).abs() < 1e-12);
        let rep = refinement_cascade(&toy(24), &trivial(24), 1e-4, s, 4).unwrap();
        assert!(rep.levels.iter().all(|l| l.exhausted));
    }

    #[test]
    fn cap_truncates() {
        let c = toy(48);
        let rep = refinement_cascade(&c, &trivial(48), 0.1, BetaSchedule::toy(), 1).unwrap();
        assert_eq!(rep.levels[0].witnesses.len(), 1);
        assert!(rep.levels[0].truncated);
    }
}
