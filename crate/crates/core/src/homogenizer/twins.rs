use crate::error::{Error, Result};
use crate::homogenizer::oracle::{LinkPartition, LinkPartitionOracle};
use crate::homogenizer::params::{excellence_threshold, similarity_shape, Mode, ToleranceParams};
use crate::homogenizer::similarity::similarity_partition;
use crate::hypercore::{unrank, KPartiteHypergraph};
use crate::{par, rng, TOL};

/// Parameters of the similarity partitions behind the twin relations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwinParams {
    pub gamma: f64,
    pub r: usize,
    pub mode: Mode,
}

impl From<&ToleranceParams> for TwinParams {
    fn from(p: &ToleranceParams) -> Self {
        Self { gamma: p.gamma(), r: p.r, mode: p.mode }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwinSample {
    /// Tuple index in source order.
    pub tuple: usize,
    pub coords: Vec<usize>,
    /// Number of `i`-twins for each coordinate `i` (0 when `i`-bad).
    pub twins: Vec<usize>,
    pub chain_count: u128,
    pub excellent: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TwinReport {
    pub target: usize,
    pub order: Vec<usize>,
    pub gamma: f64,
    pub m: usize,
    pub q: usize,
    /// Exact fraction of `i`-good tuples for each source coordinate.
    pub good_fraction: Vec<f64>,
    pub threshold: f64,
    pub samples: Vec<TwinSample>,
    pub excellent_fraction: f64,
}

/// Similarity labels of every `(coordinate, pins)` link, computed once.
struct TwinTable {
    sizes: Vec<usize>,
    /// `labels[i][v]`: label of each vertex of coordinate `i` for pins `v`.
    labels: Vec<Vec<Vec<u32>>>,
}

impl TwinTable {
    fn pins_rank(&self, i: usize, coords: &[usize]) -> usize {
        let mut r = 0;
        for (j, (&c, &s)) in coords.iter().zip(&self.sizes).enumerate() {
            if j != i {
                r = r * s + c;
            }
        }
        r
    }

    #[cfg(test)]
    fn label(&self, i: usize, coords: &[usize]) -> u32 {
        self.labels[i][self.pins_rank(i, coords)][coords[i]]
    }

    /// `i`-twins of a tuple, itself included; empty when it is `i`-bad.
    fn twins(&self, i: usize, coords: &[usize]) -> Vec<usize> {
        let row = &self.labels[i][self.pins_rank(i, coords)];
        let l = row[coords[i]];
        if l == 0 {
            return Vec::new();
        }
        (0..row.len()).filter(|&x| row[x] == l).collect()
    }

    /// Chains `e_1, ..., e_{j+1} = e` with consecutive `i`-twins for
    /// `i < j`.
    fn chains(&self, coords: &mut Vec<usize>, j: usize) -> u128 {
        if j == 0 {
            return 1;
        }
        let i = j - 1;
        let keep = coords[i];
        let mut total = 0;
        for x in self.twins(i, coords) {
            coords[i] = x;
            total += self.chains(coords, i);
        }
        coords[i] = keep;
        total
    }
}

fn build_table(
    h: &KPartiteHypergraph,
    g: &KPartiteHypergraph,
    order: &[usize],
    oracle: &dyn LinkPartitionOracle,
    params: TwinParams,
    seed: u64,
) -> Result<TwinTable> {
    let k = g.k();
    let target = order[k - 1];
    let sizes: Vec<usize> = g.sizes()[..k - 1].to_vec();
    let mut labels = Vec::with_capacity(k - 1);
    for i in 0..k - 1 {
        let radii: Vec<usize> = (0..k - 1).filter(|&j| j != i).map(|j| sizes[j]).collect();
        let count = radii.iter().product::<usize>();
        let per: Vec<Result<Vec<u32>>> = par::map_range(count, |v| {
            let rest = unrank(&radii, v);
            let pins: Vec<(usize, usize)> = (0..k - 1)
                .filter(|&j| j != i)
                .zip(rest)
                .map(|(j, x)| (order[j], x))
                .collect();
            let mut link = h.link(&pins)?;
            let mut given = oracle.link_partition(h, &pins)?;
            if order[i] > target {
                link = link.transpose();
                given = LinkPartition {
                    left: given.right.with_part(0),
                    right: given.left.with_part(1),
                };
            }
            let s = rng::indexed(rng::indexed(seed, i as u64), v as u64);
            let rep = similarity_partition(&link, &given, params.gamma, params.r, params.mode, s)?;
            Ok(rep.partition.labels().to_vec())
        });
        labels.push(per.into_iter().collect::<Result<Vec<_>>>()?);
    }
    Ok(TwinTable { sizes, labels })
}

/// Twin census of the tuple step with `target` as the neighbourhood part:
/// exact `i`-good fractions, plus chain-twin counts for the sampled tuples
/// (indices in source order, as in [`super::TuplePartition`]).
pub fn twin_diagnostics(
    h: &KPartiteHypergraph,
    target: usize,
    oracle: &dyn LinkPartitionOracle,
    params: TwinParams,
    sample: &[usize],
    seed: u64,
) -> Result<TwinReport> {
    let (g, order) = h.with_target_last(target)?;
    let k = g.k();
    let n = g.part_size(k - 1);
    let table = build_table(h, &g, &order, oracle, params, seed)?;
    let tuples = g.fiber_count();
    if let Some(&bad) = sample.iter().find(|&&e| e >= tuples) {
        return Err(Error::OutOfRange { part: target, index: bad, size: tuples });
    }
    let good_fraction = (0..k - 1)
        .map(|i| {
            let good: usize = table.labels[i]
                .iter()
                .map(|row| row.iter().filter(|&&l| l != 0).count())
                .sum();
            good as f64 / tuples as f64
        })
        .collect();
    let (m, q) = similarity_shape(params.gamma, params.r, g.part_size(0), params.mode)?;
    let threshold = excellence_threshold(params.gamma, q, n, k);
    let samples: Vec<TwinSample> = par::map_slice(sample, |&e| {
        let mut coords = unrank(&table.sizes, e);
        let twins = (0..k - 1).map(|i| table.twins(i, &coords).len()).collect();
        let chain_count = table.chains(&mut coords, k - 1);
        TwinSample {
            tuple: e,
            coords,
            twins,
            chain_count,
            excellent: chain_count as f64 + TOL >= threshold,
        }
    });
    let excellent = samples.iter().filter(|s| s.excellent).count();
    let excellent_fraction = if samples.is_empty() { 0.0 } else { excellent as f64 / samples.len() as f64 };
    Ok(TwinReport {
        target,
        order,
        gamma: params.gamma,
        m,
        q,
        good_fraction,
        threshold,
        samples,
        excellent_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homogenizer::oracle::{Provenance, TableOracle};
    use crate::partitions::PartPartition;

    fn halves(part: usize, n: usize) -> PartPartition {
        PartPartition::from_raw(part, &(0..n).map(|x| (x >= n / 2) as u32).collect::<Vec<_>>(), None)
    }

    fn product(n: usize) -> (KPartiteHypergraph, TableOracle) {
        let h = KPartiteHypergraph::from_fn(vec![n, n, n], |t| (t[0] < n / 2) == (t[1] < n / 2)).unwrap();
        let oracle = TableOracle::uniform(
            Provenance::Planted,
            vec![halves(0, n), halves(1, n), PartPartition::trivial(2, n)],
        );
        (h, oracle)
    }

    const PARAMS: TwinParams = TwinParams { gamma: 0.5, r: 2, mode: Mode::Practical };

    #[test]
    fn product_graph_by_hand() {
        // m = 2, q = 6: the first half of each coordinate splits into six
        // pairs, the second half is exceptional
        let (h, oracle) = product(24);
        let all: Vec<usize> = (0..24 * 24).collect();
        let rep = twin_diagnostics(&h, 2, &oracle, PARAMS, &all, 0).unwrap();
        assert_eq!((rep.m, rep.q), (2, 6));
        assert_eq!(rep.good_fraction, vec![0.5, 0.5]);
        assert!((rep.threshold - 4.0).abs() < 1e-12);
        for s in &rep.samples {
            let inside = s.coords[0] < 12 && s.coords[1] < 12;
            assert_eq!(s.chain_count, if inside { 4 } else { 0 }, "{s:?}");
            assert_eq!(s.excellent, inside);
        }
        assert!((rep.excellent_fraction - 0.25).abs() < 1e-12);
    }

    #[test]
    fn chain_count_matches_direct_enumeration() {
        let n = 12;
        let h = KPartiteHypergraph::from_fn(vec![n, n, n], |t| (t[0] * 5 + t[1] * 3 + t[2] * 7) % 4 == 0).unwrap();
        let oracle = TableOracle::uniform(
            Provenance::Planted,
            vec![halves(0, n), halves(1, n), halves(2, n)],
        );
        let params = TwinParams { gamma: 0.5, r: 2, mode: Mode::Practical };
        for target in 0..3 {
            let (g, _) = h.with_target_last(target).unwrap();
            let sizes = g.sizes()[..2].to_vec();
            let (_, order) = h.with_target_last(target).unwrap();
            let table = build_table(&h, &g, &order, &oracle, params, 1).unwrap();
            let label = |i: usize, c: &[usize]| table.label(i, c);
            let twins = |i: usize, a: &[usize], b: &[usize]| {
                let la = label(i, a);
                la != 0 && la == label(i, b) && (0..2).all(|j| j == i || a[j] == b[j])
            };
            let sample: Vec<usize> = vec![0, 17, 40, 77, 143];
            let rep = twin_diagnostics(&h, target, &oracle, params, &sample, 1).unwrap();
            for s in &rep.samples {
                let e = &s.coords;
                let mut direct = 0u128;
                for e1 in 0..sizes[0] * sizes[1] {
                    let e1 = unrank(&sizes, e1);
                    // e_2 takes coordinate 0 from e and coordinate 1 from e_1
                    let e2 = vec![e[0], e1[1]];
                    if twins(0, &e1, &e2) && twins(1, &e2, e) {
                        direct += 1;
                    }
                }
                assert_eq!(s.chain_count, direct, "target {target}, tuple {e:?}");
            }
        }
    }

    #[test]
    fn out_of_range_sample_is_rejected() {
        let (h, oracle) = product(24);
        assert!(twin_diagnostics(&h, 2, &oracle, PARAMS, &[24 * 24], 0).is_err());
    }
}
