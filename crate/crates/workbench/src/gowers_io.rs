use std::fmt::Write as _;

use homopart::gowers::{
    build_sequence, build_weighted, from_families, CascadeReport, CertificateCheck, ConcentrationReport,
    GowersConstruction, GowersMode, GowersParams, Growth, LinkCertificate, OrthogonalFamily, Side, ToyOverrides,
};
use homopart::{Error, Result, VertexSet};
use serde::{Deserialize, Serialize};

/// Everything needed to rebuild a construction.
#[derive(Clone, Debug, PartialEq)]
pub struct GowersSettings {
    pub eps: f64,
    pub delta: f64,
    pub mode: GowersMode,
    pub toy: Option<ToyOverrides>,
    pub n: usize,
    pub seed: u64,
}

impl GowersSettings {
    pub fn params(&self) -> Result<GowersParams> {
        build_sequence(self.eps, self.delta, self.mode, self.toy.clone())
    }

    pub fn build(&self) -> Result<GowersConstruction> {
        build_weighted(&self.params()?, self.n, self.seed)
    }
}

pub fn growth_name(g: Growth) -> String {
    match g {
        Growth::Exponential => "exponential".into(),
        Growth::Constant(c) => format!("constant:{c}"),
    }
}

pub fn parse_growth(s: &str) -> Result<Growth> {
    match s.strip_prefix("constant:") {
        Some(c) => c
            .parse()
            .map(Growth::Constant)
            .map_err(|_| Error::InvalidParameter(format!("bad growth constant {c:?}"))),
        None if s == "exponential" => Ok(Growth::Exponential),
        None => Err(Error::InvalidParameter(format!("unknown growth {s:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyMeta {
    pub m: usize,
    pub size: usize,
    /// `X_i` as a 0/1 string over `[M]`.
    pub xs: Vec<String>,
    pub item1_applies: bool,
    pub item1_holds: bool,
    pub agreement_holds: bool,
    pub attempts: usize,
}

/// Layering metadata written next to the weighted graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GowersMeta {
    pub manifest: String,
    pub mode: String,
    pub eps: f64,
    pub delta: f64,
    pub n: usize,
    pub seed: u64,
    pub t: usize,
    pub s0: u64,
    pub s0_override: Option<u64>,
    pub growth: String,
    pub m: Vec<u64>,
    pub relaxations: Vec<String>,
    pub families: Vec<FamilyMeta>,
}

fn bitstring(x: &VertexSet) -> String {
    (0..x.universe()).map(|j| if x.contains(j) { '1' } else { '0' }).collect()
}

impl GowersMeta {
    pub fn new(settings: &GowersSettings, c: &GowersConstruction, manifest: &str) -> Self {
        let p = &c.params;
        Self {
            manifest: manifest.into(),
            mode: p.mode.name().into(),
            eps: p.eps,
            delta: p.delta,
            n: c.n(),
            seed: settings.seed,
            t: p.t,
            s0: p.s0,
            s0_override: settings.toy.as_ref().and_then(|t| t.s0),
            growth: growth_name(p.growth),
            m: p.m.clone(),
            relaxations: p.relaxations.clone(),
            families: c
                .families
                .iter()
                .map(|f| FamilyMeta {
                    m: f.m,
                    size: f.size,
                    xs: f.xs.iter().map(bitstring).collect(),
                    item1_applies: f.item1.applies,
                    item1_holds: f.item1.holds,
                    agreement_holds: f.agreement.holds,
                    attempts: f.attempts,
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes") + "\n"
    }

    pub fn settings(&self) -> Result<GowersSettings> {
        let mode = match self.mode.as_str() {
            "paper" => GowersMode::Paper,
            "toy" => GowersMode::Toy,
            other => return Err(Error::InvalidParameter(format!("unknown mode {other:?}"))),
        };
        let toy = (mode == GowersMode::Toy).then(|| -> Result<ToyOverrides> {
            Ok(ToyOverrides { t: self.t, growth: parse_growth(&self.growth)?, s0: self.s0_override })
        });
        Ok(GowersSettings { eps: self.eps, delta: self.delta, mode, toy: toy.transpose()?, n: self.n, seed: self.seed })
    }

    /// Rebuilds from the stored families, without drawing.
    pub fn construction(&self) -> Result<GowersConstruction> {
        let params = self.settings()?.params()?;
        if params.m != self.m {
            return Err(Error::Mismatch(format!("stored m-sequence {:?}, rebuilt {:?}", self.m, params.m)));
        }
        let families = self
            .families
            .iter()
            .map(|f| {
                let xs = f
                    .xs
                    .iter()
                    .map(|s| {
                        if s.len() != f.size || s.bytes().any(|b| b != b'0' && b != b'1') {
                            return Err(Error::Mismatch(format!("family set {s:?} is not a 0/1 string of length {}", f.size)));
                        }
                        Ok(VertexSet::from_fn(0, f.size, |j| s.as_bytes()[j] == b'1'))
                    })
                    .collect::<Result<Vec<_>>>()?;
                OrthogonalFamily::from_sets(f.size, xs)
            })
            .collect::<Result<Vec<_>>>()?;
        from_families(&params, self.n, families)
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

pub fn write_certificates(n: usize, rows: &[(LinkCertificate, CertificateCheck)], digest: Option<&str>) -> String {
    let failed = rows.iter().filter(|r| !r.1.pass).count();
    let mut out = format!("certificates {n} {} {failed}\n", rows.len());
    if let Some(d) = digest {
        writeln!(out, "# manifest {d}").unwrap();
    }
    for (cert, check) in rows {
        let (examined, witness) = match &check.witness {
            Some(w) => (w.examined.to_string(), if w.found.is_some() { "witness" } else { "no-witness-in-budget" }),
            None => ("-".into(), "-"),
        };
        writeln!(
            out,
            "{} {} {} {} {} {} {} {} {} {examined} {witness} {}",
            cert.part,
            cert.vertex,
            cert.kind.name(),
            cert.left.block_count(),
            cert.right.block_count(),
            cert.size(),
            cert.size_bound,
            check.block_pairs,
            check.exceptions,
            verdict(check.pass)
        )
        .unwrap();
    }
    out
}

pub fn write_concentration(r: &ConcentrationReport, digest: Option<&str>) -> String {
    let mut out = format!("concentration {} {} {}\n", r.boxes.len(), r.misses, verdict(r.pass));
    if let Some(d) = digest {
        writeln!(out, "# manifest {d}").unwrap();
    }
    for b in &r.boxes {
        let [x, y, z] = b.sizes;
        let band = if b.in_band { "in" } else { "out" };
        writeln!(out, "{x} {y} {z} {} {} {} {} {band}", b.weighted, b.sampled, b.sigma, b.hoeffding_tail).unwrap();
    }
    out
}

fn set_list(s: &VertexSet) -> String {
    s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

pub fn write_cascade(r: &CascadeReport, digest: Option<&str>) -> String {
    let mut out = format!("cascade {} {} {}\n", r.eps, r.schedule.base, r.balanced);
    if let Some(d) = digest {
        writeln!(out, "# manifest {d}").unwrap();
    }
    let ok = |x: &Option<homopart::RefinementReport>| match x {
        Some(x) => verdict(x.refines).to_string(),
        None => "-".into(),
    };
    for l in &r.levels {
        writeln!(
            out,
            "level {} {} {} {} {} {} {} {} {}",
            l.r,
            l.beta,
            l.exhausted,
            l.in_proven_range,
            ok(&l.a_refines),
            ok(&l.b_refines),
            l.straddling,
            l.witnesses.len(),
            l.truncated
        )
        .unwrap();
        for w in &l.witnesses {
            let side = match w.side {
                Side::A => "A",
                Side::B => "B",
            };
            let dev = w.witness.as_ref().map_or("-".to_string(), |x| x.deviation.to_string());
            writeln!(
                out,
                "witness {} {side} {} {} {} {} {} {} {} {} {} {dev} {}",
                w.r,
                w.labels[0],
                w.labels[1],
                w.labels[2],
                w.intervals.0,
                w.intervals.1,
                w.x_half,
                w.d_complete,
                w.d_empty,
                w.gap,
                w.verified
            )
            .unwrap();
            for (tag, sets) in [("complete", &w.complete), ("empty", &w.empty)] {
                writeln!(out, "  {tag} {} {} {}", set_list(&sets[0]), set_list(&sets[1]), set_list(&sets[2])).unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings() -> GowersSettings {
        GowersSettings { eps: 0.1, delta: 0.1, mode: GowersMode::Toy, toy: Some(ToyOverrides::default()), n: 24, seed: 5 }
    }

    #[test]
    fn metadata_rebuilds_the_same_graph() {
        let s = settings();
        let c = s.build().unwrap();
        let meta = GowersMeta::new(&s, &c, "d");
        let back: GowersMeta = serde_json::from_str(&meta.to_json()).unwrap();
        assert_eq!(back, meta);
        assert_eq!(back.settings().unwrap(), s);
        let rebuilt = back.construction().unwrap();
        assert_eq!(rebuilt.weighted.weights(), c.weighted.weights());
        assert_eq!(rebuilt.graphs, c.graphs);
    }

    #[test]
    fn growth_names() {
        for g in [Growth::Exponential, Growth::Constant(5)] {
            assert_eq!(parse_growth(&growth_name(g)).unwrap(), g);
        }
        assert!(parse_growth("constant:x").is_err());
    }
}
