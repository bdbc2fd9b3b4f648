//! Line-oriented ASCII formats. Lines starting with `#` are comments;
//! writers put `# manifest <digest>` right after the header.

use std::fmt::Write as _;
use std::str::FromStr;

use homopart::auditor::HomogeneityReport;
use homopart::homogenizer::{LinkPartition, LinkPartitionOracle, Provenance, TableOracle};
use homopart::hypercore::unrank;
use homopart::{KPartiteHypergraph, LayeredPartition, PartPartition, WeightedTripartite};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("byte {offset}: {message}")]
pub struct FormatError {
    pub offset: usize,
    pub message: String,
}

pub type FormatResult<T> = std::result::Result<T, FormatError>;

fn err<T>(offset: usize, message: impl Into<String>) -> FormatResult<T> {
    Err(FormatError { offset, message: message.into() })
}

#[derive(Clone, Copy, Debug)]
struct Token<'a> {
    offset: usize,
    text: &'a str,
}

impl Token<'_> {
    fn parse<T: FromStr>(&self, what: &str) -> FormatResult<T> {
        self.text
            .parse()
            .or_else(|_| err(self.offset, format!("expected {what}, found {:?}", self.text)))
    }
}

struct Line<'a> {
    offset: usize,
    tokens: Vec<Token<'a>>,
}

/// Non-comment, non-blank lines with byte offsets.
fn lines(src: &str) -> FormatResult<Vec<Line<'_>>> {
    if let Some(i) = src.bytes().position(|b| !b.is_ascii()) {
        return err(i, "non-ASCII byte");
    }
    let mut out = Vec::new();
    let mut offset = 0;
    for raw in src.split('\n') {
        let start = offset;
        offset += raw.len() + 1;
        if raw.starts_with('#') {
            continue;
        }
        let mut tokens = Vec::new();
        let mut pos = 0;
        for piece in raw.split([' ', '\t', '\r']) {
            if !piece.is_empty() {
                tokens.push(Token { offset: start + pos, text: piece });
            }
            pos += piece.len() + 1;
        }
        if !tokens.is_empty() {
            out.push(Line { offset: start, tokens });
        }
    }
    Ok(out)
}

fn header<'a, 'b>(lines: &'b [Line<'a>], tag: &str) -> FormatResult<&'b [Token<'a>]> {
    let Some(first) = lines.first() else {
        return err(0, format!("missing `{tag}` header"));
    };
    if first.tokens[0].text != tag {
        return err(first.offset, format!("expected `{tag}` header, found {:?}", first.tokens[0].text));
    }
    Ok(&first.tokens[1..])
}

fn end_of(src: &str) -> usize {
    src.len()
}

/// Digest recorded by a writer, if any.
pub fn manifest_digest(src: &str) -> Option<&str> {
    src.lines().find_map(|l| l.strip_prefix("# manifest ")).map(str::trim)
}

fn stamp(out: &mut String, digest: Option<&str>) {
    if let Some(d) = digest {
        writeln!(out, "# manifest {d}").unwrap();
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn write_khg(h: &KPartiteHypergraph, digest: Option<&str>) -> String {
    let mut out = format!("khg {} {}\n", h.k(), join(h.sizes()));
    stamp(&mut out, digest);
    for e in h.edges() {
        out.push_str(&join(e));
        out.push('\n');
    }
    out
}

pub fn parse_khg(src: &str) -> FormatResult<KPartiteHypergraph> {
    let lines = lines(src)?;
    let head = header(&lines, "khg")?;
    let Some(k_tok) = head.first() else {
        return err(lines[0].offset, "header needs k");
    };
    let k: usize = k_tok.parse("uniformity k")?;
    if k < 2 {
        return err(k_tok.offset, "k must be at least 2");
    }
    if head.len() != k + 1 {
        return err(lines[0].offset, format!("header needs {k} part sizes, found {}", head.len() - 1));
    }
    let sizes = head[1..].iter().map(|t| t.parse("part size")).collect::<FormatResult<Vec<usize>>>()?;
    if let Some(t) = head[1..].iter().zip(&sizes).find(|(_, &s)| s == 0) {
        return err(t.0.offset, "part sizes must be positive");
    }
    let mut seen = std::collections::HashSet::new();
    let mut edges: Vec<Vec<usize>> = Vec::new();
    for line in &lines[1..] {
        if line.tokens.len() != k {
            return err(line.offset, format!("edge needs {k} indices, found {}", line.tokens.len()));
        }
        let mut e = Vec::with_capacity(k);
        for (p, t) in line.tokens.iter().enumerate() {
            let v: usize = t.parse("vertex index")?;
            if v >= sizes[p] {
                return err(t.offset, format!("index {v} out of range for part {p} of size {}", sizes[p]));
            }
            e.push(v);
        }
        if !seen.insert(e.clone()) {
            return err(line.offset, "duplicate edge");
        }
        edges.push(e);
    }
    let h = KPartiteHypergraph::from_edges(sizes, edges.iter().map(Vec::as_slice))
        .map_err(|x| FormatError { offset: 0, message: x.to_string() })?;
    Ok(h)
}

pub fn write_w3g(h: &WeightedTripartite, digest: Option<&str>) -> String {
    let [na, nb, nc] = h.sizes();
    let mut out = format!("w3g {na} {nb} {nc}\n");
    stamp(&mut out, digest);
    for a in 0..na {
        for b in 0..nb {
            for c in 0..nc {
                let w = h.weight(a, b, c);
                if w != 0.0 {
                    writeln!(out, "{a} {b} {c} {w}").unwrap();
                }
            }
        }
    }
    out
}

pub fn parse_w3g(src: &str) -> FormatResult<WeightedTripartite> {
    let lines = lines(src)?;
    let head = header(&lines, "w3g")?;
    if head.len() != 3 {
        return err(lines[0].offset, "header needs three part sizes");
    }
    let mut sizes = [0usize; 3];
    for (s, t) in sizes.iter_mut().zip(head) {
        *s = t.parse("part size")?;
    }
    let mut h = WeightedTripartite::zeros(sizes);
    let mut seen = vec![false; sizes.iter().product()];
    for line in &lines[1..] {
        if line.tokens.len() != 4 {
            return err(line.offset, format!("cell needs `a b c w`, found {} fields", line.tokens.len()));
        }
        let mut idx = [0usize; 3];
        for p in 0..3 {
            let t = line.tokens[p];
            idx[p] = t.parse("vertex index")?;
            if idx[p] >= sizes[p] {
                return err(t.offset, format!("index {} out of range for part {p} of size {}", idx[p], sizes[p]));
            }
        }
        let wt = line.tokens[3];
        let w: f64 = wt.parse("weight")?;
        if !(0.0..=1.0).contains(&w) {
            return err(wt.offset, format!("weight {w} outside [0, 1]"));
        }
        let cell = h.index(idx[0], idx[1], idx[2]);
        if seen[cell] {
            return err(line.offset, "duplicate cell");
        }
        seen[cell] = true;
        h.set(idx[0], idx[1], idx[2], w).map_err(|e| FormatError { offset: wt.offset, message: e.to_string() })?;
    }
    Ok(h)
}

pub fn write_part(p: &LayeredPartition, digest: Option<&str>) -> String {
    let mut out = format!("part {}\n", p.k());
    stamp(&mut out, digest);
    for q in p.parts() {
        out.push_str(&join(q.labels()));
        out.push('\n');
    }
    out
}

fn labels_of(tokens: &[Token<'_>], part: usize, offset: usize) -> FormatResult<PartPartition> {
    let labels = tokens.iter().map(|t| t.parse("block label")).collect::<FormatResult<Vec<u32>>>()?;
    PartPartition::new(part, labels).map_err(|e| FormatError { offset, message: e.to_string() })
}

pub fn parse_part(src: &str) -> FormatResult<LayeredPartition> {
    let lines = lines(src)?;
    let head = header(&lines, "part")?;
    if head.len() != 1 {
        return err(lines[0].offset, "header is `part k`");
    }
    let k: usize = head[0].parse("part count")?;
    if lines.len() != k + 1 {
        return err(end_of(src), format!("expected {k} label lines, found {}", lines.len() - 1));
    }
    let parts = lines[1..]
        .iter()
        .enumerate()
        .map(|(p, l)| labels_of(&l.tokens, p, l.offset))
        .collect::<FormatResult<Vec<_>>>()?;
    LayeredPartition::new(parts).map_err(|e| FormatError { offset: 0, message: e.to_string() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditRecord {
    pub labels: Vec<u32>,
    pub density: f64,
    pub homogeneous: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditFile {
    pub kind: String,
    pub eps: f64,
    pub pass: bool,
    /// Normalized non-homogeneous mass.
    pub mass: f64,
    pub records: Vec<AuditRecord>,
}

impl AuditFile {
    pub fn from_homogeneity(report: &HomogeneityReport) -> Self {
        Self {
            kind: if report.weighted { "weighted-homogeneity" } else { "homogeneity" }.into(),
            eps: report.eps,
            pass: report.pass,
            mass: report.normalized_mass,
            records: report
                .records()
                .map(|r| AuditRecord { labels: r.labels.to_vec(), density: r.density, homogeneous: r.homogeneous })
                .collect(),
        }
    }
}

pub fn write_audit(a: &AuditFile, digest: Option<&str>) -> String {
    let verdict = if a.pass { "pass" } else { "fail" };
    let mut out = format!("audit {} {} {verdict} {}\n", a.kind, a.eps, a.mass);
    stamp(&mut out, digest);
    for r in &a.records {
        let v = if r.homogeneous { "homogeneous" } else { "inhomogeneous" };
        writeln!(out, "{} {} {v}", join(&r.labels), r.density).unwrap();
    }
    out
}

pub fn parse_audit(src: &str) -> FormatResult<AuditFile> {
    let lines = lines(src)?;
    let head = header(&lines, "audit")?;
    if head.len() != 4 {
        return err(lines[0].offset, "header is `audit <kind> <eps> <pass|fail> <mass>`");
    }
    let pass = match head[2].text {
        "pass" => true,
        "fail" => false,
        other => return err(head[2].offset, format!("expected pass or fail, found {other:?}")),
    };
    let mut records = Vec::new();
    let mut width = None;
    for line in &lines[1..] {
        let n = line.tokens.len();
        if n < 3 || width.is_some_and(|w| w != n) {
            return err(line.offset, "record is `labels… density verdict` with a fixed label count");
        }
        width = Some(n);
        let labels = line.tokens[..n - 2].iter().map(|t| t.parse("block label")).collect::<FormatResult<_>>()?;
        let density: f64 = line.tokens[n - 2].parse("density")?;
        let homogeneous = match line.tokens[n - 1].text {
            "homogeneous" => true,
            "inhomogeneous" => false,
            other => return err(line.tokens[n - 1].offset, format!("unknown verdict {other:?}")),
        };
        records.push(AuditRecord { labels, density, homogeneous });
    }
    Ok(AuditFile {
        kind: head[0].text.to_string(),
        eps: head[1].parse("eps")?,
        pass,
        mass: head[3].parse("mass")?,
        records,
    })
}

/// Every pin tuple of every pair of free parts, asked of `oracle`.
pub fn write_links(
    h: &KPartiteHypergraph,
    oracle: &dyn LinkPartitionOracle,
    digest: Option<&str>,
) -> homopart::Result<String> {
    let k = h.k();
    let mut out = format!("links {k} {}\n", join(h.sizes()));
    stamp(&mut out, digest);
    for p in 0..k {
        for q in p + 1..k {
            let pinned: Vec<usize> = (0..k).filter(|&j| j != p && j != q).collect();
            let radii: Vec<usize> = pinned.iter().map(|&j| h.part_size(j)).collect();
            for idx in 0..radii.iter().product::<usize>() {
                let pins: Vec<(usize, usize)> = pinned.iter().copied().zip(unrank(&radii, idx)).collect();
                let lp = oracle.link_partition(h, &pins)?;
                let key = join(pins.iter().map(|(a, b)| format!("{a}:{b}")));
                let sep = if key.is_empty() { "" } else { " " };
                writeln!(out, "{key}{sep}| {} | {}", join(lp.left.labels()), join(lp.right.labels())).unwrap();
            }
        }
    }
    Ok(out)
}

pub fn parse_links(src: &str) -> FormatResult<TableOracle> {
    let lines = lines(src)?;
    let head = header(&lines, "links")?;
    let Some(k_tok) = head.first() else {
        return err(lines[0].offset, "header needs k");
    };
    let k: usize = k_tok.parse("uniformity k")?;
    if head.len() != k + 1 || k < 2 {
        return err(lines[0].offset, "header is `links k n_1 … n_k`");
    }
    let sizes = head[1..].iter().map(|t| t.parse("part size")).collect::<FormatResult<Vec<usize>>>()?;
    let mut oracle = TableOracle::explicit(Provenance::ExternalFile);
    for line in &lines[1..] {
        let bars: Vec<usize> = (0..line.tokens.len()).filter(|&i| line.tokens[i].text == "|").collect();
        if bars.len() != 2 {
            return err(line.offset, "entry is `pins… | left labels | right labels`");
        }
        let mut pins = Vec::new();
        let mut pinned = vec![false; k];
        for t in &line.tokens[..bars[0]] {
            let Some((a, b)) = t.text.split_once(':') else {
                return err(t.offset, format!("pin must be `part:vertex`, found {:?}", t.text));
            };
            let part: usize = Token { offset: t.offset, text: a }.parse("pin part")?;
            let v: usize = Token { offset: t.offset + a.len() + 1, text: b }.parse("pin vertex")?;
            if part >= k || v >= sizes[part] || pinned[part] {
                return err(t.offset, format!("invalid pin {}", t.text));
            }
            pinned[part] = true;
            pins.push((part, v));
        }
        let free: Vec<usize> = (0..k).filter(|&j| !pinned[j]).collect();
        if free.len() != 2 {
            return err(line.offset, format!("{} pins in a {k}-graph", pins.len()));
        }
        let left = labels_of(&line.tokens[bars[0] + 1..bars[1]], 0, line.tokens[bars[0]].offset)?;
        let right = labels_of(&line.tokens[bars[1] + 1..], 1, line.tokens[bars[1]].offset)?;
        if left.len() != sizes[free[0]] || right.len() != sizes[free[1]] {
            return err(line.offset, "label count does not match the free part sizes");
        }
        oracle.insert(&pins, LinkPartition { left, right });
    }
    Ok(oracle)
}
