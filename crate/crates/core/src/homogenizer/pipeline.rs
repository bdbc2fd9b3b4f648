use crate::auditor::{bipartite_homogeneity, homogeneity_audit, HomogeneityReport};
use crate::bits::VertexSet;
use crate::error::{Error, Result};
use crate::homogenizer::oracle::LinkPartitionOracle;
use crate::homogenizer::params::{composed_link_eps, Mode, ToleranceParams, DEFAULT_MAX_ANCHORS};
use crate::homogenizer::tuples::{tuple_partition, TuplePartition};
use crate::hypercore::{unrank, KPartiteHypergraph};
use crate::partitions::{common_refinement, equalize, LayeredPartition, PartPartition};
use crate::{floor_tol, par, rng};

#[derive(Clone, Debug, PartialEq)]
pub struct HomogenizeOptions {
    pub mode: Mode,
    /// Link partition size bound.
    pub r: usize,
    pub max_anchors: usize,
    /// Block size; defaults to `max(1, ⌊ε²n / (8kp)⌋)`.
    pub block_size: Option<usize>,
    /// Audit the oracle's link partitions at the composed link tolerance.
    pub audit_hypothesis: bool,
}

impl Default for HomogenizeOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Practical,
            r: 2,
            max_anchors: DEFAULT_MAX_ANCHORS,
            block_size: None,
            audit_hypothesis: false,
        }
    }
}

/// What happened on one part.
#[derive(Clone, Debug, PartialEq)]
pub struct PartStep {
    pub target: usize,
    pub classes: usize,
    pub exceptional_tuples: usize,
    pub anchors_drawn: usize,
    /// Atoms of the common refinement of the class neighbourhoods.
    pub atoms: usize,
    pub block_size: usize,
    pub blocks: usize,
    pub exceptional: usize,
    /// `8kp / ε²`.
    pub size_bound: f64,
    /// `log2` of the atom budget `2^t`.
    pub atom_budget_log2: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisAudit {
    pub link_eps: f64,
    pub links: usize,
    /// Links whose partition is not `link_eps`-homogeneous.
    pub inhomogeneous: usize,
    /// Links whose partition has more than `r` blocks on a side.
    pub oversized: usize,
    pub max_mass: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct HomogenizeReport {
    pub eps: f64,
    /// Tuple-step tolerance `ε² / (8k)`.
    pub tuple_eps: f64,
    pub mode: Mode,
    pub partition: LayeredPartition,
    pub steps: Vec<PartStep>,
    pub tuples: Vec<TuplePartition>,
    pub audit: HomogeneityReport,
    pub hypothesis: Option<HypothesisAudit>,
}

/// Lowest-index member of each class `1..=t`.
fn class_representatives(tp: &TuplePartition) -> Vec<usize> {
    let mut reps = vec![usize::MAX; tp.class_count() + 1];
    for (e, &l) in tp.labels.iter().enumerate() {
        if reps[l as usize] == usize::MAX {
            reps[l as usize] = e;
        }
    }
    reps[1..].to_vec()
}

/// Audits the oracle on every link of `h`.
pub fn audit_hypothesis(
    h: &KPartiteHypergraph,
    oracle: &dyn LinkPartitionOracle,
    link_eps: f64,
    r: usize,
) -> Result<HypothesisAudit> {
    let k = h.k();
    let mut results = Vec::new();
    for p in 0..k {
        for q in p + 1..k {
            let pinned: Vec<usize> = (0..k).filter(|&j| j != p && j != q).collect();
            let radii: Vec<usize> = pinned.iter().map(|&j| h.part_size(j)).collect();
            let count: usize = radii.iter().product();
            let per: Vec<Result<(bool, bool, f64)>> = par::map_range(count, |v| {
                let pins: Vec<(usize, usize)> = pinned.iter().copied().zip(unrank(&radii, v)).collect();
                let g = h.link(&pins)?;
                let lp = oracle.link_partition(h, &pins)?;
                let audit = bipartite_homogeneity(&g, &lp.left, &lp.right, link_eps)?;
                let oversized = lp.left.block_count() > r || lp.right.block_count() > r;
                Ok((audit.pass, oversized, audit.normalized_mass))
            });
            for x in per {
                results.push(x?);
            }
        }
    }
    let inhomogeneous = results.iter().filter(|x| !x.0).count();
    let oversized = results.iter().filter(|x| x.1).count();
    Ok(HypothesisAudit {
        link_eps,
        links: results.len(),
        inhomogeneous,
        oversized,
        max_mass: results.iter().map(|x| x.2).fold(0.0, f64::max),
        pass: inhomogeneous == 0 && oversized == 0,
    })
}

/// Equipartition of every part built from `k` tuple partitions at
/// `ε² / (8k)`, followed by an exact `ε`-homogeneity audit.
///
/// The oracle is consulted only when `audit_hypothesis` is set; the
/// construction itself needs only neighbourhoods.
pub fn homogeneous_partition(
    h: &KPartiteHypergraph,
    oracle: Option<&dyn LinkPartitionOracle>,
    eps: f64,
    options: &HomogenizeOptions,
    seed: u64,
) -> Result<HomogenizeReport> {
    let k = h.k();
    let tuple_eps = eps * eps / (8.0 * k as f64);
    let params = ToleranceParams::new(tuple_eps, k, options.r, options.mode)?
        .with_max_anchors(options.max_anchors);
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    let hypothesis = match (options.audit_hypothesis, oracle) {
        (true, Some(o)) => Some(audit_hypothesis(h, o, composed_link_eps(eps, k), options.r)?),
        (true, None) => {
            return Err(Error::InvalidParameter("hypothesis audit needs an oracle".into()));
        }
        (false, _) => None,
    };
    let tuple_seed = rng::derive(seed, "tuple");
    let mut parts = Vec::with_capacity(k);
    let mut steps = Vec::with_capacity(k);
    let mut tuples = Vec::with_capacity(k);
    for i in 0..k {
        let n = h.part_size(i);
        let tp = tuple_partition(h, i, &params, rng::indexed(tuple_seed, i as u64))?;
        let (g, _) = h.with_target_last(i)?;
        let sets: Vec<VertexSet> = class_representatives(&tp)
            .into_iter()
            .map(|e| VertexSet::from_words(i, n, g.fiber(e).to_vec()))
            .collect();
        let atoms = common_refinement(i, n, &sets)?;
        let p = atoms.block_count();
        let m = match options.block_size {
            Some(m) => m,
            None => (floor_tol(eps * eps * n as f64 / (8.0 * k as f64 * p as f64)) as usize).max(1),
        };
        let part: PartPartition = equalize(&atoms, m)?;
        steps.push(PartStep {
            target: i,
            classes: tp.class_count(),
            exceptional_tuples: tp.exceptional_count(),
            anchors_drawn: tp.anchors_drawn,
            atoms: p,
            block_size: m,
            blocks: part.block_count(),
            exceptional: part.exceptional_size(),
            size_bound: 8.0 * k as f64 * p as f64 / (eps * eps),
            atom_budget_log2: tp.class_count(),
        });
        parts.push(part);
        tuples.push(tp);
    }
    let partition = LayeredPartition::new(parts)?;
    let audit = homogeneity_audit(h, &partition, eps)?;
    Ok(HomogenizeReport {
        eps,
        tuple_eps,
        mode: options.mode,
        partition,
        steps,
        tuples,
        audit,
        hypothesis,
    })
}
