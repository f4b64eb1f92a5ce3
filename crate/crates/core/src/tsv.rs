//! Tab-separated stage files: pair lists and projections.
//!
//! Floats are written in Rust's shortest round-trip form, so a file read
//! back gives bit-identical values.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pairdata::{Label, PairDataset, Pos, SplitTag, WordPair};
use crate::reduce::{Projection, ProjectionMethod};
use crate::vectorize::{Construction, LabeledCloud};

pub const PAIRS_HEADER: &str = "word1\tword2\tpos\tlabel\tsplit";
pub const PROJECTION_HEADER: &str = "x\ty\tlabel\tsplit\tword1\tword2";
const CLOUD_PREFIX: &str = "label\tsplit\tword1\tword2";

/// Writes through a sibling temp file and a rename, so readers never see a
/// half-written file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn pairs_to_string(data: &PairDataset) -> String {
    let mut out = format!("{PAIRS_HEADER}\n");
    for p in data.pairs() {
        let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}", p.word1, p.word2, p.pos, p.label, p.split);
    }
    out
}

pub fn write_pairs(path: &Path, data: &PairDataset) -> Result<()> {
    write_atomic(path, pairs_to_string(data).as_bytes())
}

fn fields<'a>(path: &Path, lineno: usize, line: &'a str, n: usize) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != n {
        return Err(Error::parse(path, lineno, format!("expected {n} fields, found {}", f.len())));
    }
    Ok(f)
}

fn check_header(path: &Path, text: &str, header: &str) -> Result<()> {
    match text.lines().find(|l| !l.starts_with('#')) {
        Some(h) if h == header => Ok(()),
        _ => Err(Error::parse(path, 1, format!("missing header {header:?}"))),
    }
}

/// Reads a file written by [`write_pairs`]. Words are kept verbatim.
pub fn read_pairs(path: &Path, name: &str) -> Result<PairDataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    check_header(path, &text, PAIRS_HEADER)?;
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.is_empty() {
            continue;
        }
        let f = fields(path, i + 1, line, 5)?;
        let bad = |m: Error| Error::parse(path, i + 1, m.to_string());
        let pos: Pos = f[2].parse().map_err(bad)?;
        let label: Label = f[3].parse().map_err(bad)?;
        let split: SplitTag = f[4].parse().map_err(bad)?;
        pairs.push(WordPair::verbatim(f[0].to_owned(), f[1].to_owned(), pos, label, split).map_err(bad)?);
    }
    Ok(PairDataset::from_pairs(name, pairs))
}

/// The first line is a `#` comment recording method and parameter digest.
pub fn projection_to_string(p: &Projection) -> String {
    let mut out = format!("# method={} params={}\n{PROJECTION_HEADER}\n", p.method, p.params_digest);
    for i in 0..p.len() {
        let sp = &p.source_pairs[i];
        let _ = writeln!(
            out,
            "{:?}\t{:?}\t{}\t{}\t{}\t{}",
            p.coords.get(i, 0),
            p.coords.get(i, 1),
            p.labels[i],
            p.split_tags[i],
            sp.word1,
            sp.word2
        );
    }
    out
}

pub fn write_projection(path: &Path, p: &Projection) -> Result<()> {
    if p.coords.cols() != 2 {
        return Err(Error::Param(format!("projection has {} columns, expected 2", p.coords.cols())));
    }
    write_atomic(path, projection_to_string(p).as_bytes())
}

pub fn read_projection(path: &Path) -> Result<Projection> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let (method, digest) = match lines.next() {
        Some((_, first)) if first.starts_with("# ") => {
            let mut method = None;
            let mut digest = String::new();
            for kv in first[2..].split_whitespace() {
                match kv.split_once('=') {
                    Some(("method", v)) => method = Some(v.parse::<ProjectionMethod>()?),
                    Some(("params", v)) => digest = v.to_owned(),
                    _ => {}
                }
            }
            (method.ok_or_else(|| Error::parse(path, 1, "no method in comment line"))?, digest)
        }
        _ => return Err(Error::parse(path, 1, "missing '# method=...' line")),
    };
    match lines.next() {
        Some((_, h)) if h == PROJECTION_HEADER => {}
        _ => return Err(Error::parse(path, 2, format!("missing header {PROJECTION_HEADER:?}"))),
    }
    let mut flat = Vec::new();
    let mut labels = Vec::new();
    let mut split_tags = Vec::new();
    let mut source_pairs = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f = fields(path, i + 1, line, 6)?;
        let bad = |m: String| Error::parse(path, i + 1, m);
        let x: f64 = f[0].parse().map_err(|e| bad(format!("bad x: {e}")))?;
        let y: f64 = f[1].parse().map_err(|e| bad(format!("bad y: {e}")))?;
        let label: Label = f[2].parse().map_err(|e: Error| bad(e.to_string()))?;
        let split: SplitTag = f[3].parse().map_err(|e: Error| bad(e.to_string()))?;
        flat.extend([x, y]);
        labels.push(label);
        split_tags.push(split);
        // Part of speech is not stored in projection files.
        source_pairs.push(
            WordPair::verbatim(f[4].to_owned(), f[5].to_owned(), Pos::Noun, label, split)
                .map_err(|e| bad(e.to_string()))?,
        );
    }
    let n = labels.len();
    Ok(Projection {
        coords: Matrix::from_vec(n, 2, flat)?,
        labels,
        split_tags,
        source_pairs,
        method,
        params_digest: digest,
    })
}

/// Cloud rows as `label, split, word1, word2, c0, c1, ...`, after a
/// `# construction=..` line.
pub fn cloud_to_string(c: &LabeledCloud) -> String {
    let mut out = format!("# construction={}\n{CLOUD_PREFIX}", c.construction);
    for j in 0..c.dim() {
        let _ = write!(out, "\tc{j}");
    }
    out.push('\n');
    for i in 0..c.len() {
        let p = &c.source_pairs[i];
        let _ = write!(out, "{}\t{}\t{}\t{}", c.labels[i], c.split_tags[i], p.word1, p.word2);
        for v in c.points.row(i) {
            let _ = write!(out, "\t{v:?}");
        }
        out.push('\n');
    }
    out
}

pub fn write_cloud(path: &Path, c: &LabeledCloud) -> Result<()> {
    write_atomic(path, cloud_to_string(c).as_bytes())
}

/// Reads a cloud written by [`write_cloud`]. Part of speech is not stored
/// and comes back as noun.
pub fn read_cloud(path: &Path) -> Result<LabeledCloud> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    let construction = match lines.next() {
        Some((_, first)) => match first.strip_prefix("# construction=") {
            Some(v) => v.trim().parse::<Construction>()?,
            None => return Err(Error::parse(path, 1, "missing '# construction=...' line")),
        },
        None => return Err(Error::parse(path, 1, "empty cloud file")),
    };
    let dim = match lines.next() {
        Some((_, h)) if h.starts_with(CLOUD_PREFIX) => h.split('\t').count() - 4,
        _ => return Err(Error::parse(path, 2, format!("missing header starting {CLOUD_PREFIX:?}"))),
    };
    let (mut flat, mut labels, mut split_tags, mut source_pairs) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let f = fields(path, i + 1, line, 4 + dim)?;
        let bad = |m: String| Error::parse(path, i + 1, m);
        let label: Label = f[0].parse().map_err(|e: Error| bad(e.to_string()))?;
        let split: SplitTag = f[1].parse().map_err(|e: Error| bad(e.to_string()))?;
        for v in &f[4..] {
            flat.push(v.parse::<f64>().map_err(|e| bad(format!("bad coordinate {v:?}: {e}")))?);
        }
        labels.push(label);
        split_tags.push(split);
        source_pairs.push(
            WordPair::verbatim(f[2].to_owned(), f[3].to_owned(), Pos::Noun, label, split)
                .map_err(|e| bad(e.to_string()))?,
        );
    }
    Ok(LabeledCloud {
        points: Matrix::from_vec(labels.len(), dim, flat)?,
        labels,
        split_tags,
        construction,
        source_pairs,
    })
}
