use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use homopart::auditor::{disagreement_pairs, homogeneity_audit, slicewise_vc};
use homopart::gowers::{
    link_certificate, refinement_cascade, sample_unweighted, verify_certificate, BetaSchedule, GowersMode, Growth,
    ToyOverrides, DEFAULT_WITNESS_CAP,
};
use homopart::homogenizer::{homogeneous_partition, HomogenizeOptions, LinkPartitionOracle, Mode};
use homopart::{Error, LayeredPartition, PartPartition};
use homopart_workbench::formats::{self, AuditFile, FormatError};
use homopart_workbench::gowers_io::{self, GowersMeta, GowersSettings};
use homopart_workbench::{generate, Family, InstanceSpec, RunManifest};

#[derive(Parser)]
#[command(name = "homopart", version, about = "Homogeneous partitions of partite hypergraphs")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, global = true)]
    eps: Option<f64>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Paper,
    Practical,
    Toy,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    PlantedBoxes,
    Product,
    IntervalThreshold,
    UniformRandom,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::PlantedBoxes => Family::PlantedBoxes,
            FamilyArg::Product => Family::Product,
            FamilyArg::IntervalThreshold => Family::IntervalThreshold,
            FamilyArg::UniformRandom => Family::UniformRandom,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and, for planted families, its link partitions.
    Gen {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
    },
    /// Build an ε-homogeneous equipartition and audit it.
    Homogenize {
        #[arg(long)]
        input: PathBuf,
        /// Link partitions to audit as the hypothesis.
        #[arg(long)]
        links: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long)]
        block_size: Option<usize>,
        #[arg(long, default_value_t = homopart::homogenizer::DEFAULT_MAX_ANCHORS)]
        max_anchors: usize,
    },
    /// Exact homogeneity audit of a given partition.
    Audit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        /// Also count disagreement pairs.
        #[arg(long)]
        disagreements: bool,
    },
    /// Slicewise VC-dimension.
    Vc {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 8)]
        cap: usize,
    },
    /// Layered weighted construction.
    Gowers {
        #[command(subcommand)]
        command: GowersCommand,
    },
    /// Time the main kernels at the current thread count.
    Bench {
        #[arg(long, default_value_t = 60)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum GowersCommand {
    /// Draw families and write the weighted graph with its metadata.
    Build {
        /// Same as `--mode toy`.
        #[arg(long)]
        toy: bool,
        #[arg(long, default_value_t = 3)]
        t: usize,
        #[arg(long, default_value_t = 120)]
        n: usize,
        /// Toy threshold in place of ⌈4/δ⁴⌉.
        #[arg(long)]
        s0: Option<u64>,
        /// Constant growth in place of max(⌊e^{m/16}⌋, 2).
        #[arg(long)]
        growth: Option<u64>,
    },
    /// Certificates for every link, each verified.
    Links {
        /// Directory written by `gowers build`.
        #[arg(long)]
        input: PathBuf,
        /// Sampled draws per quasirandom-kind certificate.
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// One coin per cell, with a concentration report.
    Sample {
        #[arg(long)]
        input: PathBuf,
    },
    /// Refinement cascade against a candidate partition.
    Cascade {
        #[arg(long)]
        input: PathBuf,
        /// Candidate; defaults to one block per part.
        #[arg(long)]
        partition: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_WITNESS_CAP)]
        cap: usize,
    },
}

/// Exit 1 with a report, or 2 for bad input.
enum Failure {
    Verification(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parsed<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

struct Run {
    manifest: RunManifest,
    out: PathBuf,
    start: Instant,
}

impl Run {
    fn new(cli: &Cli, command: &str, mode: &str) -> Result<Self, Failure> {
        fs::create_dir_all(&cli.out)?;
        Ok(Self { manifest: RunManifest::new(command, mode, cli.seed), out: cli.out.clone(), start: Instant::now() })
    }

    fn param(&mut self, key: &str, value: impl ToString) {
        self.manifest.param(key, value);
    }

    fn input(&mut self, role: &str, bytes: &[u8]) {
        self.manifest.input(role, bytes);
    }

    fn digest(&self) -> String {
        self.manifest.digest.clone()
    }

    fn write(&mut self, name: &str, text: &str) -> Result<(), Failure> {
        self.manifest.write_artifact(&self.out, name, text.as_bytes())?;
        Ok(())
    }

    fn finish(mut self) -> Result<(), Failure> {
        self.manifest.timing.elapsed_ms = self.start.elapsed().as_secs_f64() * 1e3;
        self.manifest.timing.threads = rayon::current_num_threads();
        self.manifest.save(&self.out)?;
        Ok(())
    }
}

fn homogenize_mode(cli: &Cli) -> Result<Mode, Failure> {
    match cli.mode {
        None | Some(ModeArg::Practical) => Ok(Mode::Practical),
        Some(ModeArg::Paper) => Ok(Mode::Paper),
        Some(ModeArg::Toy) => Err(Failure::Usage("toy mode applies to `gowers` only".into())),
    }
}

fn cmd_gen(cli: &Cli, family: FamilyArg, k: usize, n: usize, r: usize, density: f64) -> Outcome {
    let family = Family::from(family);
    let spec = InstanceSpec { k, n, family, r, density, seed: cli.seed };
    let mut run = Run::new(cli, "gen", "practical")?;
    for (key, v) in [("family", family.name().to_string()), ("k", k.to_string()), ("n", n.to_string())] {
        run.param(key, v);
    }
    run.param("r", r);
    run.param("density", density);
    let inst = generate(&spec)?;
    let d = run.digest();
    run.write("instance.khg", &formats::write_khg(&inst.hypergraph, Some(&d)))?;
    if let Some(oracle) = inst.oracle() {
        run.write("instance.links", &formats::write_links(&inst.hypergraph, &oracle, Some(&d))?)?;
    }
    if let Some(p) = &inst.planted {
        run.write("planted.part", &formats::write_part(p, Some(&d)))?;
    }
    let edges = inst.hypergraph.edge_count();
    run.finish()?;
    Ok(format!("generated {} instance: k = {k}, n = {n}, {edges} edges", family.name()))
}

fn cmd_homogenize(
    cli: &Cli,
    input: &Path,
    links: Option<&Path>,
    r: usize,
    block_size: Option<usize>,
    max_anchors: usize,
) -> Outcome {
    let mode = homogenize_mode(cli)?;
    let eps = cli.eps.unwrap_or(0.2);
    let text = read(input)?;
    let h = parsed(input, formats::parse_khg(&text))?;
    let mut run = Run::new(cli, "homogenize", mode.name())?;
    run.input("instance", text.as_bytes());
    run.param("eps", eps);
    run.param("r", r);
    run.param("max_anchors", max_anchors);
    if let Some(m) = block_size {
        run.param("block_size", m);
    }
    let oracle = match links {
        Some(p) => {
            let t = read(p)?;
            run.input("links", t.as_bytes());
            Some(parsed(p, formats::parse_links(&t))?)
        }
        None => None,
    };
    let options = HomogenizeOptions { mode, r, max_anchors, block_size, audit_hypothesis: oracle.is_some() };
    let d = run.digest();
    let dyn_oracle = oracle.as_ref().map(|o| o as &dyn LinkPartitionOracle);
    let report = match homogeneous_partition(&h, dyn_oracle, eps, &options, cli.seed) {
        Ok(r) => r,
        Err(Error::Coverage { uncovered, budget, anchors }) => {
            let tuples = h.cells() / h.part_size(0) as u64;
            let msg = format!(
                "coverage-failure uncovered {uncovered} budget {budget} anchors {anchors} uncovered_mass {}\n",
                uncovered as f64 / tuples as f64
            );
            run.write("failure.txt", &format!("# manifest {d}\n{msg}"))?;
            run.finish()?;
            return Err(Failure::Verification(msg.trim_end().into()));
        }
        Err(e) => return Err(e.into()),
    };
    run.write("partition.part", &formats::write_part(&report.partition, Some(&d)))?;
    run.write("homogeneity.audit", &formats::write_audit(&AuditFile::from_homogeneity(&report.audit), Some(&d)))?;
    let mut summary = format!("# manifest {d}\n");
    for s in &report.steps {
        summary += &format!(
            "part {} classes {} exceptional_tuples {} anchors {} atoms {} block_size {} blocks {} exceptional {} size_bound {}\n",
            s.target, s.classes, s.exceptional_tuples, s.anchors_drawn, s.atoms, s.block_size, s.blocks, s.exceptional, s.size_bound
        );
    }
    if let Some(hyp) = &report.hypothesis {
        summary += &format!(
            "hypothesis link_eps {} links {} inhomogeneous {} oversized {} max_mass {} {}\n",
            hyp.link_eps,
            hyp.links,
            hyp.inhomogeneous,
            hyp.oversized,
            hyp.max_mass,
            if hyp.pass { "pass" } else { "fail" }
        );
    }
    run.write("report.txt", &summary)?;
    run.finish()?;
    let line = format!(
        "homogeneity mass {} at eps {eps}: {}",
        report.audit.normalized_mass,
        if report.audit.pass { "pass" } else { "fail" }
    );
    if report.audit.pass {
        Ok(line)
    } else {
        Err(Failure::Verification(line))
    }
}

fn cmd_audit(cli: &Cli, input: &Path, partition: &Path, disagreements: bool) -> Outcome {
    let eps = cli.eps.unwrap_or(0.2);
    let text = read(input)?;
    let h = parsed(input, formats::parse_khg(&text))?;
    let ptext = read(partition)?;
    let p = parsed(partition, formats::parse_part(&ptext))?;
    let mut run = Run::new(cli, "audit", "exact")?;
    run.input("instance", text.as_bytes());
    run.input("partition", ptext.as_bytes());
    run.param("eps", eps);
    run.param("disagreements", disagreements);
    let d = run.digest();
    let report = homogeneity_audit(&h, &p, eps)?;
    run.write("homogeneity.audit", &formats::write_audit(&AuditFile::from_homogeneity(&report), Some(&d)))?;
    if disagreements {
        let t = disagreement_pairs(&h, &p)?;
        let s = p.block_counts().into_iter().max().unwrap_or(1);
        let bound = homopart::auditor::disagreement_bound(eps, h.part_size(0), h.k(), s);
        let mut out = format!("# manifest {d}\ndisagreement total {} bound {bound}\n", t.total());
        for (i, (a, b)) in t.regular.iter().zip(&t.exceptional).enumerate() {
            out += &format!("coordinate {i} regular {a} exceptional {b}\n");
        }
        run.write("disagreement.txt", &out)?;
    }
    run.finish()?;
    let line = format!("homogeneity mass {}: {}", report.normalized_mass, if report.pass { "pass" } else { "fail" });
    if report.pass {
        Ok(line)
    } else {
        Err(Failure::Verification(line))
    }
}

fn cmd_vc(cli: &Cli, input: &Path, cap: usize) -> Outcome {
    let text = read(input)?;
    let h = parsed(input, formats::parse_khg(&text))?;
    let mut run = Run::new(cli, "vc", "exact")?;
    run.input("instance", text.as_bytes());
    run.param("cap", cap);
    let vc = slicewise_vc(&h, cap)?;
    let d = run.digest();
    let line = format!("slicewise-vc {}{}", vc.dimension, if vc.at_least { " at-least" } else { "" });
    run.write("vc.txt", &format!("# manifest {d}\n{line}\n"))?;
    run.finish()?;
    Ok(line)
}

fn load_construction(input: &Path) -> Result<(String, GowersMeta), Failure> {
    let path = input.join("gowers.json");
    let text = read(&path)?;
    let meta: GowersMeta =
        serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok((text, meta))
}

fn cmd_gowers(cli: &Cli, command: &GowersCommand) -> Outcome {
    match command {
        GowersCommand::Build { toy, t, n, s0, growth } => {
            let paper = cli.mode == Some(ModeArg::Paper) && !toy;
            if cli.mode == Some(ModeArg::Practical) {
                return Err(Failure::Usage("gowers takes --mode paper or --mode toy".into()));
            }
            let mode = if paper { GowersMode::Paper } else { GowersMode::Toy };
            let overrides = (!paper).then(|| ToyOverrides {
                t: *t,
                growth: growth.map_or(Growth::Exponential, Growth::Constant),
                s0: *s0,
            });
            let settings = GowersSettings {
                eps: cli.eps.unwrap_or(0.1),
                delta: cli.delta.unwrap_or(0.1),
                mode,
                toy: overrides,
                n: *n,
                seed: cli.seed,
            };
            let mut run = Run::new(cli, "gowers build", mode.name())?;
            run.param("eps", settings.eps);
            run.param("delta", settings.delta);
            run.param("n", n);
            if !paper {
                run.param("t", t);
                run.param("s0", s0.map_or("paper".into(), |v| v.to_string()));
                run.param("growth", growth.map_or("exponential".into(), |v| v.to_string()));
            }
            let c = settings.build()?;
            let d = run.digest();
            run.write("gowers.w3g", &formats::write_w3g(&c.weighted, Some(&d)))?;
            run.write("gowers.json", &GowersMeta::new(&settings, &c, &d).to_json())?;
            run.finish()?;
            Ok(format!("built t = {} m = {:?} n = {n}, {} weighted cells", c.t(), c.params.m, c.weighted.support_count()))
        }
        GowersCommand::Links { input, budget } => {
            let (text, meta) = load_construction(input)?;
            let c = meta.construction()?;
            let mut run = Run::new(cli, "gowers links", &meta.mode)?;
            run.input("metadata", text.as_bytes());
            run.param("budget", budget);
            let delta = cli.delta.unwrap_or(meta.delta);
            run.param("delta", delta);
            let mut rows = Vec::with_capacity(3 * c.n());
            for part in 0..3 {
                for v in 0..c.n() {
                    let cert = link_certificate(&c, part, v)?;
                    let check = verify_certificate(&c, &cert, delta, *budget, cli.seed)?;
                    rows.push((cert, check));
                }
            }
            let d = run.digest();
            run.write("certificates.txt", &gowers_io::write_certificates(c.n(), &rows, Some(&d)))?;
            run.finish()?;
            let failed = rows.iter().filter(|r| !r.1.pass).count();
            let line = format!("{} certificates, {failed} failed", rows.len());
            if failed == 0 {
                Ok(line)
            } else {
                Err(Failure::Verification(line))
            }
        }
        GowersCommand::Sample { input } => {
            let (text, meta) = load_construction(input)?;
            let c = meta.construction()?;
            let mut run = Run::new(cli, "gowers sample", &meta.mode)?;
            run.input("metadata", text.as_bytes());
            let s = sample_unweighted(&c.weighted, cli.seed)?;
            let d = run.digest();
            run.write("sample.khg", &formats::write_khg(&s.hypergraph, Some(&d)))?;
            run.write("concentration.txt", &gowers_io::write_concentration(&s.report, Some(&d)))?;
            run.finish()?;
            let line = format!("{} of {} boxes outside the 3-sigma band", s.report.misses, s.report.boxes.len());
            if s.report.pass {
                Ok(line)
            } else {
                Err(Failure::Verification(line))
            }
        }
        GowersCommand::Cascade { input, partition, cap } => {
            let (text, meta) = load_construction(input)?;
            let c = meta.construction()?;
            let mut run = Run::new(cli, "gowers cascade", &meta.mode)?;
            run.input("metadata", text.as_bytes());
            let eps = cli.eps.unwrap_or(meta.eps);
            run.param("eps", eps);
            run.param("cap", cap);
            let candidate = match partition {
                Some(p) => {
                    let t = read(p)?;
                    run.input("partition", t.as_bytes());
                    parsed(p, formats::parse_part(&t))?
                }
                None => LayeredPartition::new((0..3).map(|p| PartPartition::trivial(p, c.n())).collect())?,
            };
            let schedule = if meta.mode == "paper" { BetaSchedule::paper(eps) } else { BetaSchedule::toy() };
            let report = refinement_cascade(&c, &candidate, eps, schedule, *cap)?;
            let d = run.digest();
            run.write("cascade.txt", &gowers_io::write_cascade(&report, Some(&d)))?;
            run.finish()?;
            let found = report.witnesses().count();
            let unverified = report.witnesses().filter(|w| !w.verified).count();
            let line = format!("{found} witnesses, {unverified} failed re-verification");
            if unverified == 0 {
                Ok(line)
            } else {
                Err(Failure::Verification(line))
            }
        }
    }
}

fn cmd_bench(cli: &Cli, n: usize) -> Outcome {
    let mut run = Run::new(cli, "bench", "practical")?;
    run.param("n", n);
    let eps = cli.eps.unwrap_or(0.2);
    let inst = generate(&InstanceSpec::new(Family::PlantedBoxes, 3, n, 3, cli.seed))?;
    let mut lines = Vec::new();
    let mut time = |name: &str, f: &mut dyn FnMut() -> Result<(), Error>| -> Result<(), Failure> {
        let t = Instant::now();
        f()?;
        lines.push(format!("{name} {:.3} ms", t.elapsed().as_secs_f64() * 1e3));
        Ok(())
    };
    let planted = inst.planted.clone().expect("planted family");
    time("homogeneity_audit", &mut || homogeneity_audit(&inst.hypergraph, &planted, eps).map(drop))?;
    time("homogeneous_partition", &mut || {
        homogeneous_partition(&inst.hypergraph, None, eps, &HomogenizeOptions::default(), cli.seed).map(drop)
    })?;
    time("slicewise_vc", &mut || slicewise_vc(&inst.hypergraph, 6).map(drop))?;
    let settings = GowersSettings {
        eps: 0.1,
        delta: 0.1,
        mode: GowersMode::Toy,
        toy: Some(ToyOverrides::default()),
        n: 48,
        seed: cli.seed,
    };
    let mut built = None;
    time("gowers_build", &mut || {
        built = Some(settings.build()?);
        Ok(())
    })?;
    let c = built.expect("built");
    time("sample_unweighted", &mut || sample_unweighted(&c.weighted, cli.seed).map(drop))?;
    let threads = rayon::current_num_threads();
    let text = format!("bench threads {threads}\n{}\n", lines.join("\n"));
    run.write("bench.txt", &text)?;
    run.finish()?;
    Ok(text.trim_end().to_string())
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Gen { family, k, n, r, density } => cmd_gen(cli, *family, *k, *n, *r, *density),
        Command::Homogenize { input, links, r, block_size, max_anchors } => {
            cmd_homogenize(cli, input, links.as_deref(), *r, *block_size, *max_anchors)
        }
        Command::Audit { input, partition, disagreements } => cmd_audit(cli, input, partition, *disagreements),
        Command::Vc { input, cap } => cmd_vc(cli, input, *cap),
        Command::Gowers { command } => cmd_gowers(cli, command),
        Command::Bench { n } => cmd_bench(cli, *n),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(v) = std::env::var("HOMOPART_THREADS") {
        match v.parse::<usize>() {
            Ok(t) if t > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
            }
            _ => {
                eprintln!("error: HOMOPART_THREADS must be a positive integer, got {v:?}");
                return ExitCode::from(2);
            }
        }
    }
    match dispatch(&cli) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(line)) => {
            println!("{line}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
