//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if a criterion outside `EXPECTED_RED` fails.

use std::collections::HashSet;
use std::io::Write as _;
use std::time::{Duration, Instant};

use homopart::auditor::{
    disagreement_bound, disagreement_pairs, homogeneity_audit, is_homogeneous, vc_dimension,
    verify_tripartite_witness,
};
use homopart::gowers::{
    draw_family, item1_applies, item2_margin, link_certificate, refinement_cascade, sample_unweighted,
    verify_certificate, BetaSchedule, CertificateKind, GowersConstruction, GowersMode, ToyOverrides,
    DEFAULT_WITNESS_CAP, SUB_BOXES,
};
use homopart::homogenizer::{
    homogeneous_partition, similarity_partition, tuple_partition, HomogenizeOptions, LinkPartition, Mode,
    ToleranceParams,
};
use homopart::partitions::beta_refines;
use homopart::{rng, BipartiteGraph, KPartiteHypergraph, LayeredPartition, PartPartition, VertexSet};
use homopart_workbench::formats::{write_audit, write_khg, write_part, AuditFile};
use homopart_workbench::gowers_io::{write_cascade, write_certificates, write_concentration, GowersSettings};
use homopart_workbench::{generate, Family, InstanceSpec};
use rand::seq::SliceRandom;
use rand::Rng;
use sha2::{Digest, Sha256};

/// Unattainable at the stated parameters; run faithfully, reported red.
const EXPECTED_RED: &[usize] = &[5];

struct Sink(Sha256);

impl Sink {
    fn new() -> Self {
        Sink(Sha256::new())
    }

    fn add(&mut self, bytes: impl AsRef<[u8]>) {
        let b = bytes.as_ref();
        self.0.update((b.len() as u64).to_le_bytes());
        self.0.update(b);
    }

    fn hex(self) -> String {
        hex::encode(self.0.finalize())
    }
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn labels_bytes(p: &PartPartition) -> Vec<u8> {
    p.labels().iter().flat_map(|l| l.to_le_bytes()).collect()
}

fn toy(n: usize, seed: u64, s0: Option<u64>) -> (GowersSettings, GowersConstruction) {
    let settings = GowersSettings {
        eps: 0.1,
        delta: 0.1,
        mode: GowersMode::Toy,
        toy: Some(ToyOverrides { s0, ..Default::default() }),
        n,
        seed,
    };
    let c = settings.build().expect("toy construction");
    (settings, c)
}

/// Neighbourhoods of the left side as 128-bit masks.
fn rows128(g: &BipartiteGraph) -> Vec<u128> {
    (0..g.n_x())
        .map(|x| (0..g.n_y()).filter(|&y| g.has_edge(x, y)).fold(0u128, |m, y| m | 1 << y))
        .collect()
}

fn criterion1(sink: &mut Sink) -> Verdict {
    let n = 120;
    let gammas = [0.1, 0.2, 0.3];
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    for s in 0..50u64 {
        let r = 1 + (s % 4) as usize;
        let gamma = gammas[(s % 3) as usize];
        let inst = generate(&InstanceSpec::new(Family::PlantedBoxes, 2, n, r, 1000 + s)).unwrap();
        let g = inst.hypergraph.link(&[]).unwrap();
        let planted = inst.planted.unwrap();
        let given = LinkPartition { left: planted.part(0).clone(), right: planted.part(1).clone() };
        let rep = similarity_partition(&g, &given, gamma, r, Mode::Practical, s).unwrap();
        let labels = rep.partition.labels();
        let rows = rows128(&g);
        let blocks = labels.iter().copied().max().unwrap_or(0) as usize;
        let mut members = vec![Vec::new(); blocks + 1];
        for (x, &l) in labels.iter().enumerate() {
            members[l as usize].push(x);
        }
        let sizes: HashSet<usize> = members[1..].iter().map(Vec::len).collect();
        let mut intra = 0;
        for b in &members[1..] {
            for (i, &x) in b.iter().enumerate() {
                for &y in &b[i + 1..] {
                    intra = intra.max((rows[x] ^ rows[y]).count_ones() as usize);
                }
            }
        }
        let x0 = members[0].len();
        let bound = gamma * n as f64 + 1e-9;
        worst = worst.max(intra as f64 / (gamma * n as f64));
        if sizes.len() > 1 || x0 as f64 > bound || intra as f64 > bound {
            violations.push(format!("seed {s}: sizes {sizes:?}, |X0| {x0}, spread {intra}"));
        }
        sink.add(labels_bytes(&rep.partition));
    }
    verdict(
        violations.is_empty(),
        format!("50 instances, {} violations, max spread/(γn) {worst:.3} {:?}", violations.len(), violations.first()),
    )
}

fn criterion2(sink: &mut Sink) -> Verdict {
    let (n, eps) = (60usize, 0.2);
    let mut violations = Vec::new();
    let mut max_e0 = 0;
    for s in 0..20u64 {
        let family = if s % 2 == 0 { Family::Product } else { Family::PlantedBoxes };
        let h = generate(&InstanceSpec::new(family, 3, n, 3, 2000 + s)).unwrap().hypergraph;
        let target = (s % 3) as usize;
        let params = ToleranceParams::new(eps, 3, 3, Mode::Practical).unwrap();
        let tp = tuple_partition(&h, target, &params, s).unwrap();
        let sources: Vec<usize> = (0..3).filter(|&p| p != target).collect();
        let masks: Vec<u64> = (0..n * n)
            .map(|idx| {
                let mut t = [0usize; 3];
                t[sources[0]] = idx / n;
                t[sources[1]] = idx % n;
                (0..n).fold(0u64, |m, v| {
                    t[target] = v;
                    if h.contains(&t) {
                        m | 1 << v
                    } else {
                        m
                    }
                })
            })
            .collect();
        let e0 = tp.labels.iter().filter(|&&l| l == 0).count();
        max_e0 = max_e0.max(e0);
        let mut classes = vec![Vec::new(); tp.class_count() + 1];
        for (idx, &l) in tp.labels.iter().enumerate() {
            classes[l as usize].push(masks[idx]);
        }
        let mut spread = 0;
        for c in &classes[1..] {
            for (i, &a) in c.iter().enumerate() {
                for &b in &c[i + 1..] {
                    spread = spread.max((a ^ b).count_ones());
                }
            }
        }
        if e0 as f64 > eps * (n * n) as f64 || spread as f64 > eps * n as f64 + 1e-9 {
            violations.push(format!("seed {s}: |E0| {e0}, spread {spread}"));
        }
        sink.add(tp.labels.iter().flat_map(|l| l.to_le_bytes()).collect::<Vec<u8>>());
        sink.add(tp.anchors.iter().flat_map(|a| (*a as u64).to_le_bytes()).collect::<Vec<u8>>());
    }
    verdict(
        violations.is_empty(),
        format!("20 instances, {} violations, max |E0| {max_e0} of budget {}", violations.len(), eps * (n * n) as f64),
    )
}

/// Normalized inhomogeneous mass by direct cell enumeration.
fn brute_mass(h: &KPartiteHypergraph, p: &LayeredPartition, eps: f64) -> (u64, u64) {
    let n = h.sizes();
    let w: Vec<usize> = p.parts().iter().map(|q| q.block_count() + 1).collect();
    let mut cells = vec![0u64; w[0] * w[1] * w[2]];
    let mut edges = vec![0u64; cells.len()];
    for a in 0..n[0] {
        for b in 0..n[1] {
            for c in 0..n[2] {
                let i = (p.part(0).label(a) as usize * w[1] + p.part(1).label(b) as usize) * w[2]
                    + p.part(2).label(c) as usize;
                cells[i] += 1;
                edges[i] += h.contains(&[a, b, c]) as u64;
            }
        }
    }
    let mass = cells
        .iter()
        .zip(&edges)
        .filter(|(&c, &e)| c > 0 && !is_homogeneous(e as f64 / c as f64, eps))
        .map(|(&c, _)| c)
        .sum();
    (mass, cells.iter().sum())
}

fn criterion3(sink: &mut Sink) -> Verdict {
    let eps = 0.2;
    let families = [Family::PlantedBoxes, Family::IntervalThreshold, Family::Product];
    let mut violations = Vec::new();
    let mut max_mass = 0.0f64;
    let mut max_ratio = 0.0f64;
    for s in 0..20u64 {
        let n = if s % 2 == 0 { 60 } else { 120 };
        let family = families[(s % 3) as usize];
        let r = if family == Family::Product { 3 } else { 1 + (s % 3) as usize };
        let inst = generate(&InstanceSpec::new(family, 3, n, r, 3000 + s)).unwrap();
        let oracle = inst.oracle().unwrap();
        let opts = HomogenizeOptions { r, audit_hypothesis: true, ..Default::default() };
        let rep = homogeneous_partition(&inst.hypergraph, Some(&oracle), eps, &opts, s).unwrap();
        let audit = homogeneity_audit(&inst.hypergraph, &rep.partition, eps).unwrap();
        let (mass, total) = brute_mass(&inst.hypergraph, &rep.partition, eps);
        let normalized = mass as f64 / total as f64;
        max_mass = max_mass.max(normalized);
        let within: Vec<bool> = rep
            .steps
            .iter()
            .map(|st| {
                let blocks = rep.partition.part(st.target).block_count() as f64;
                max_ratio = max_ratio.max(blocks / st.size_bound);
                blocks <= st.size_bound
            })
            .collect();
        let hyp = rep.hypothesis.as_ref().is_some_and(|h| h.pass);
        if !(audit.pass && mass == audit.mass && normalized <= eps && within.iter().all(|&b| b) && hyp) {
            violations.push(format!("seed {s}: mass {normalized}, audit {}, blocks {within:?}, hypothesis {hyp}", audit.pass));
        }
        sink.add(write_part(&rep.partition, None));
        sink.add(write_audit(&AuditFile::from_homogeneity(&audit), None));
    }
    verdict(
        violations.is_empty(),
        format!(
            "20 instances, {} violations, max mass {max_mass}, max blocks/budget {max_ratio:.3}",
            violations.len()
        ),
    )
}

fn brute_disagreements(h: &KPartiteHypergraph, p: &LayeredPartition) -> u64 {
    let n = h.sizes();
    let mut total = 0;
    for e in h.edges() {
        for i in 0..3 {
            for v in 0..n[i] {
                if v == e[i] || p.part(i).label(v) != p.part(i).label(e[i]) {
                    continue;
                }
                let mut f = e.clone();
                f[i] = v;
                total += !h.contains(&f) as u64;
            }
        }
    }
    total
}

fn criterion4(sink: &mut Sink) -> Verdict {
    let mut counterexamples = 0;
    let mut mismatches = 0;
    let mut failing = 0;
    for s in 0..200u64 {
        let mut g = rng::stream(4000, "instance", s);
        let n = [2, 4, 6][(s % 3) as usize];
        let p: f64 = g.random();
        let coins: Vec<bool> = (0..n * n * n).map(|_| g.random_bool(p)).collect();
        let h = KPartiteHypergraph::from_fn(vec![n; 3], |t| coins[(t[0] * n + t[1]) * n + t[2]]).unwrap();
        let parts: Vec<PartPartition> = (0..3)
            .map(|q| {
                let mut order: Vec<usize> = (0..n).collect();
                order.shuffle(&mut g);
                let mut labels = vec![2u32; n];
                for &v in &order[..n / 2] {
                    labels[v] = 1;
                }
                PartPartition::new(q, labels).unwrap()
            })
            .collect();
        let part = LayeredPartition::new(parts).unwrap();
        let t = disagreement_pairs(&h, &part).unwrap();
        let brute = brute_disagreements(&h, &part);
        mismatches += (t.total() != brute) as usize;
        for eps in [0.2, 0.25] {
            let audit = homogeneity_audit(&h, &part, eps).unwrap();
            if !audit.pass {
                failing += 1;
                if (brute as f64) < disagreement_bound(eps, n, 3, 2) - 1e-9 {
                    counterexamples += 1;
                }
            }
            sink.add(format!("{s} {eps} {} {} {brute}", audit.mass, audit.pass));
        }
    }
    verdict(
        counterexamples == 0 && mismatches == 0,
        format!("200 instances, {failing} failing audits, {counterexamples} counterexamples, {mismatches} count mismatches"),
    )
}

/// Columns of a family as bit masks over `m ≤ 64` partitions.
fn columns(xs: &[VertexSet], size: usize) -> Vec<u64> {
    (0..size).map(|j| xs.iter().enumerate().fold(0u64, |c, (i, x)| c | (x.contains(j) as u64) << i)).collect()
}

fn criterion5(sink: &mut Sink) -> Verdict {
    const ATTEMPTS: usize = 8;
    let (m, size) = (30usize, 2000usize);
    let mut attempts = Vec::new();
    let mut disagreements = 0;
    let mut item2_failures = 0;
    let mut accepted = 0;
    let mut min_max_z = usize::MAX;
    for seed in 0..100u64 {
        let mut used = None;
        for a in 0..ATTEMPTS {
            let f = draw_family(m, size, seed, a as u64).unwrap();
            let cols = columns(&f.xs, size);
            let mut max_z = 0;
            for j in 0..size {
                for j2 in j + 1..size {
                    max_z = max_z.max(m - (cols[j] ^ cols[j2]).count_ones() as usize);
                }
            }
            min_max_z = min_max_z.min(max_z);
            let agreement = max_z as f64 <= 0.75 * m as f64;
            let band = (size as f64).powf(2.0 / 3.0);
            let half = size as f64 / 2.0;
            let mut item1 = f.xs.iter().all(|x| (x.count() as f64 - half).abs() <= band);
            for i in 0..m {
                for i2 in i + 1..m {
                    let both = cols.iter().filter(|&&c| c >> i & 1 == 1 && c >> i2 & 1 == 1).count() as f64;
                    item1 &= (both - size as f64 / 4.0).abs() <= band;
                }
            }
            let item1 = item1 || !item1_applies(m, size);
            if agreement != f.agreement.holds || item1 != f.item1.holds || max_z != f.agreement.max_z {
                disagreements += 1;
            }
            sink.add(format!("{seed} {a} {max_z} {} {}", f.item1.max_size_dev, f.item1.max_intersection_dev));
            if f.accepted() {
                used = Some(a + 1);
                accepted += 1;
                let mut g = rng::stream(5000 + seed, "lambda", 0);
                for l in 0..50 {
                    let support = 2 + l * 40;
                    let mut lambda = vec![0.0; size];
                    for _ in 0..support {
                        lambda[g.random_range(0..size)] += 1.0;
                    }
                    let total: f64 = lambda.iter().sum();
                    lambda.iter_mut().for_each(|x| *x /= total);
                    let rep = item2_margin(&f, &lambda, 0.05, 0.5, 0.06).unwrap();
                    if rep.hypothesis_violations.is_empty() && !rep.meets_bound {
                        item2_failures += 1;
                    }
                }
                break;
            }
        }
        attempts.push(used.unwrap_or(usize::MAX));
    }
    attempts.sort_unstable();
    let median = attempts[attempts.len() / 2 - 1].max(attempts[attempts.len() / 2]);
    let median_text = if median == usize::MAX { format!("> {ATTEMPTS}") } else { median.to_string() };
    verdict(
        disagreements == 0 && item2_failures == 0 && median <= 4,
        format!(
            "{accepted} of 100 seeds accepted within {ATTEMPTS} draws, median attempts {median_text}, \
             smallest max agreement {min_max_z} vs limit {}, {disagreements} check mismatches, {item2_failures} item-2 failures",
            0.75 * m as f64
        ),
    )
}

/// Exact check that every block pair of an exact certificate carries one weight.
fn block_constant(c: &GowersConstruction, part: usize, v: usize, left: &PartPartition, right: &PartPartition) -> bool {
    let n = c.n();
    let mut seen = std::collections::HashMap::new();
    for x in 0..n {
        for y in 0..n {
            let w = match part {
                0 => c.weighted.weight(v, x, y),
                1 => c.weighted.weight(x, v, y),
                _ => c.weighted.weight(x, y, v),
            };
            let key = (left.label(x), right.label(y));
            if *seen.entry(key).or_insert(w) != w {
                return false;
            }
        }
    }
    true
}

fn criterion6(sink: &mut Sink) -> Verdict {
    let n = 120;
    let (_, c) = toy(n, 1, None);
    let t = c.t();
    let mut problems = Vec::new();
    let len = n / t;
    let bad_weights = (0..n * n * n)
        .filter(|&i| {
            let w = c.weighted.weights()[i];
            let r = (i % n) / len + 1;
            w != 0.0 && w != 0.5f64.powi(r as i32)
        })
        .count();
    if bad_weights > 0 {
        problems.push(format!("{bad_weights} cells off {{0, 2^-r}}"));
    }
    for r in 1..=t {
        let (fine, coarse) = (n / c.params.m[r] as usize, n / c.params.m[r - 1] as usize);
        let nested = (0..n).all(|v| (v / fine * fine) / coarse == v / coarse && (v / fine * fine + fine - 1) / coarse == v / coarse);
        let lib = (0..2).all(|p| {
            beta_refines(&c.layering.partition(r, p), &c.layering.partition(r - 1, p), 0.0).unwrap().refines
        });
        if !(nested && lib) {
            problems.push(format!("level {r} does not refine level {}", r - 1));
        }
    }
    let mut rows = Vec::new();
    let mut exact_fail = 0;
    for part in 0..3 {
        for v in 0..n {
            let cert = link_certificate(&c, part, v).unwrap();
            let check = verify_certificate(&c, &cert, c.params.delta, 10_000, 1).unwrap();
            let constant = block_constant(&c, part, v, &cert.left, &cert.right);
            if cert.kind.is_exact() && !(check.pass && check.exceptions == 0 && constant) {
                exact_fail += 1;
            }
            rows.push((cert, check));
        }
    }
    let exact = rows.iter().filter(|r| r.0.kind.is_exact()).count();
    sink.add(write_certificates(n, &rows, None));

    // smaller s0 so the last level is quasirandom
    let (_, q) = toy(n, 1, Some(4));
    let mut quasi = 0;
    let mut witnesses = 0;
    let mut qrows = Vec::new();
    for part in 0..3 {
        for v in 0..n {
            let cert = link_certificate(&q, part, v).unwrap();
            if cert.kind != CertificateKind::Quasirandom {
                continue;
            }
            quasi += 1;
            let check = verify_certificate(&q, &cert, q.params.delta, 10_000, 1).unwrap();
            let w = check.witness.as_ref().unwrap();
            if w.found.is_some() || w.examined < 10_000 {
                witnesses += 1;
            }
            qrows.push((cert, check));
        }
    }
    sink.add(write_certificates(n, &qrows, None));
    if exact_fail > 0 {
        problems.push(format!("{exact_fail} exact certificates failed"));
    }
    if witnesses > 0 || quasi == 0 {
        problems.push(format!("{witnesses} quasirandom certificates with a witness, {quasi} checked"));
    }
    verdict(
        problems.is_empty() && rows.len() == 360,
        format!(
            "{} certificates, {exact} exact all block-constant: {}, {quasi} quasirandom (s0 = 4) with {witnesses} witnesses in 10^4 draws {problems:?}",
            rows.len(),
            exact_fail == 0
        ),
    )
}

fn box_density(c: &GowersConstruction, sets: &[VertexSet]) -> f64 {
    let (a, b, cc) = (sets[0].to_vec(), sets[1].to_vec(), sets[2].to_vec());
    let mut sum = 0.0;
    for &x in &a {
        for &y in &b {
            for &z in &cc {
                sum += c.weighted.weight(x, y, z);
            }
        }
    }
    sum / (a.len() * b.len() * cc.len()) as f64
}

fn criterion7(sink: &mut Sink) -> Verdict {
    let n = 120;
    let (settings, c) = toy(n, 1, None);
    let candidate = LayeredPartition::new((0..3).map(|p| PartPartition::trivial(p, n)).collect()).unwrap();
    let report = refinement_cascade(&c, &candidate, settings.eps, BetaSchedule::toy(), DEFAULT_WITNESS_CAP).unwrap();
    sink.add(write_cascade(&report, None));
    let threshold = 0.5f64.powi(c.t() as i32);
    let mut total = 0;
    let mut reverified = 0;
    let mut best = 0.0f64;
    for w in report.witnesses() {
        total += 1;
        let blocks: Vec<VertexSet> = (0..3).map(|p| candidate.part(p).block(w.labels[p])).collect();
        let ok = w.witness.as_ref().is_some_and(|x| {
            let lib = verify_tripartite_witness(&c.weighted, [&blocks[0], &blocks[1], &blocks[2]], settings.eps, x).unwrap();
            let inner = box_density(&c, &x.subsets);
            let outer = box_density(&c, &blocks);
            let dev = (inner - outer).abs();
            best = best.max(dev);
            lib && inner.to_bits() == x.inner.to_bits() && dev.to_bits() == x.deviation.to_bits()
        });
        let gap_ok = box_density(&c, &w.complete) == w.d_complete && box_density(&c, &w.empty) == w.d_empty;
        reverified += (ok && gap_ok && w.verified) as usize;
    }
    verdict(
        total > 0 && reverified == total && best >= threshold,
        format!("{total} witnesses, {reverified} re-verified bit-for-bit, best deviation {best} vs 2^-t = {threshold}"),
    )
}

fn criterion8(sink: &mut Sink) -> Verdict {
    let n = 120;
    let (_, c) = toy(n, 1, None);
    let mut worst = 0;
    let mut problems = Vec::new();
    for seed in 0..10u64 {
        let s = sample_unweighted(&c.weighted, seed).unwrap();
        let rep = &s.report;
        let (mut sum, mut var, mut hits) = (0.0, 0.0, 0u64);
        for a in 0..n {
            for b in 0..n {
                for z in 0..n {
                    let w = c.weighted.weight(a, b, z);
                    sum += w;
                    var += w * (1.0 - w);
                    hits += s.hypergraph.contains(&[a, b, z]) as u64;
                    if (w == 0.0 && s.hypergraph.contains(&[a, b, z])) || (w == 1.0 && !s.hypergraph.contains(&[a, b, z])) {
                        problems.push(format!("seed {seed}: degenerate cell ({a}, {b}, {z}) flipped"));
                    }
                }
            }
        }
        let cells = (n * n * n) as f64;
        let sigma = var.sqrt() / cells;
        let full = &rep.boxes[0];
        let dev = (hits as f64 / cells - sum / cells).abs();
        if (dev <= 3.0 * sigma + 1e-9) != full.in_band || full.sampled != hits as f64 / cells {
            problems.push(format!("seed {seed}: full box disagrees with the oracle"));
        }
        worst = worst.max(rep.misses);
        if rep.boxes.len() != SUB_BOXES + 1 || rep.misses > 3 {
            problems.push(format!("seed {seed}: {} misses of {}", rep.misses, rep.boxes.len()));
        }
        sink.add(write_khg(&s.hypergraph, None));
        sink.add(write_concentration(rep, None));
    }
    verdict(problems.is_empty(), format!("10 runs, worst {worst} boxes outside 3σ of 101 {problems:?}"))
}

/// Largest shattered set on either side, by enumeration of all subsets.
fn brute_vc(g: &BipartiteGraph) -> usize {
    let side = |nx: usize, ny: usize, edge: &dyn Fn(usize, usize) -> bool| {
        let mut best = 0;
        for s in 0u32..1 << ny {
            let d = s.count_ones() as usize;
            if d <= best {
                continue;
            }
            let patterns: HashSet<u32> =
                (0..nx).map(|x| (0..ny).filter(|&y| s >> y & 1 == 1 && edge(x, y)).fold(0, |m, y| m | 1 << y)).collect();
            if patterns.len() == 1 << d {
                best = d;
            }
        }
        best
    };
    let a = side(g.n_x(), g.n_y(), &|x, y| g.has_edge(x, y));
    let b = side(g.n_y(), g.n_x(), &|y, x| g.has_edge(x, y));
    a.max(b)
}

fn criterion9(sink: &mut Sink) -> Verdict {
    let mut problems = Vec::new();
    for n in 1..=6 {
        for (name, g, want) in [
            ("complete", BipartiteGraph::from_fn(n, n, |_, _| true), 0),
            ("empty", BipartiteGraph::empty(n, n), 0),
        ] {
            if vc_dimension(&g, 8).dimension != want {
                problems.push(format!("{name} {n}"));
            }
        }
        if n >= 3 {
            let matching = BipartiteGraph::from_fn(n, n, |x, y| x == y);
            let half = BipartiteGraph::from_fn(n, n, |x, y| x <= y);
            if vc_dimension(&matching, 8).dimension != 1 || vc_dimension(&half, 8).dimension != 1 {
                problems.push(format!("matching or half graph {n}"));
            }
        }
    }
    let mut disagreements = 0;
    let mut histogram = [0usize; 4];
    for s in 0..1000u64 {
        let mut r = rng::stream(9000, "graph", s);
        let (nx, ny) = (r.random_range(1..=5), r.random_range(1..=5));
        let p: f64 = r.random();
        let g = BipartiteGraph::from_fn(nx, ny, |_, _| r.random_bool(p));
        let (got, want) = (vc_dimension(&g, 8).dimension, brute_vc(&g));
        disagreements += (got != want) as usize;
        histogram[want.min(3)] += 1;
        sink.add([got as u8]);
    }
    if disagreements > 0 {
        problems.push(format!("{disagreements} disagreements with the shatter oracle"));
    }
    verdict(
        problems.is_empty(),
        format!("named families exact, 1000 random graphs ({histogram:?} by dimension), {disagreements} disagreements {problems:?}"),
    )
}

type Criterion = fn(&mut Sink) -> Verdict;

const CRITERIA: [(usize, &str, Criterion, u64); 9] = [
    (1, "similarity partition contract", criterion1, 5),
    (2, "tuple partition contract", criterion2, 30),
    (3, "homogeneous partition end to end", criterion3, 300),
    (4, "disagreement bound", criterion4, 60),
    (5, "orthogonal family generator at (30, 2000)", criterion5, 60),
    (6, "construction soundness", criterion6, 120),
    (7, "cascade witnesses", criterion7, 60),
    (8, "sampling concentration", criterion8, 60),
    (9, "VC oracles", criterion9, 120),
];

fn report(id: usize, name: &str, pass: bool, detail: &str) {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{} criterion {id:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }).unwrap();
    out.flush().unwrap();
}

fn main() {
    let mut failed = Vec::new();
    let mut digests = Vec::new();
    for (id, name, f, limit) in CRITERIA {
        let mut sink = Sink::new();
        let start = Instant::now();
        let v = f(&mut sink);
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(limit);
        let pass = v.pass && in_time;
        report(id, name, pass, &format!("{} [{:.2} s of {limit} s]", v.detail, elapsed.as_secs_f64()));
        if !pass {
            failed.push(id);
        }
        if id <= 8 {
            digests.push(sink.hex());
        }
    }

    let mut mismatched = Vec::new();
    for threads in [1, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let rerun: Vec<String> = pool.install(|| {
            CRITERIA[..8]
                .iter()
                .map(|(_, _, f, _)| {
                    let mut sink = Sink::new();
                    f(&mut sink);
                    sink.hex()
                })
                .collect()
        });
        for (i, (a, b)) in digests.iter().zip(&rerun).enumerate() {
            if a != b {
                mismatched.push(format!("criterion {} at {threads} threads", i + 1));
            }
        }
    }
    let pass10 = mismatched.is_empty();
    report(
        10,
        "determinism",
        pass10,
        &format!("criteria 1-8 artifact digests at 1, 4, 8 threads vs default pool: {} mismatches {mismatched:?}", mismatched.len()),
    );
    if !pass10 {
        failed.push(10);
    }

    let unexpected: Vec<usize> = failed.iter().copied().filter(|id| !EXPECTED_RED.contains(id)).collect();
    println!(
        "acceptance: {} of 10 pass; red: {failed:?} (expected red: {EXPECTED_RED:?})",
        10 - failed.len()
    );
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
