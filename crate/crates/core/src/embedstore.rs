//! Word embedding stores: word2vec binary and whitespace-separated text
//! loaders, coverage reporting and coverage filtering of pair datasets.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pairdata::{Label, PairDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSource {
    Word2vec,
    Glove,
    BertTable,
    ApiSmall,
    ApiLarge,
}

impl EmbeddingSource {
    pub const ALL: [EmbeddingSource; 5] = [
        EmbeddingSource::Word2vec,
        EmbeddingSource::Glove,
        EmbeddingSource::BertTable,
        EmbeddingSource::ApiSmall,
        EmbeddingSource::ApiLarge,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingSource::Word2vec => "word2vec",
            EmbeddingSource::Glove => "glove",
            EmbeddingSource::BertTable => "bert-table",
            EmbeddingSource::ApiSmall => "text-embedding-3-small",
            EmbeddingSource::ApiLarge => "text-embedding-3-large",
        }
    }

    /// Row title used in the accuracy tables.
    pub fn table_name(self) -> &'static str {
        match self {
            EmbeddingSource::Word2vec => "word2vec",
            EmbeddingSource::Glove => "glove",
            EmbeddingSource::BertTable => "BERT (bert-base-cased)",
            EmbeddingSource::ApiSmall => "text-embedding-3-small",
            EmbeddingSource::ApiLarge => "text-embedding-3-large",
        }
    }

    /// Dataset words are lowercased before lookup everywhere except in the
    /// cased transformer table, whose tokens are matched verbatim.
    pub fn lowercase_lookup(self) -> bool {
        !matches!(self, EmbeddingSource::BertTable)
    }
}

impl fmt::Display for EmbeddingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmbeddingSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word2vec" => Ok(EmbeddingSource::Word2vec),
            "glove" => Ok(EmbeddingSource::Glove),
            "bert-table" | "bert" => Ok(EmbeddingSource::BertTable),
            "text-embedding-3-small" | "api-small" => Ok(EmbeddingSource::ApiSmall),
            "text-embedding-3-large" | "api-large" => Ok(EmbeddingSource::ApiLarge),
            other => Err(Error::Param(format!("unknown embedding model {other:?}"))),
        }
    }
}

/// Immutable word → vector map. Vectors are stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    source: EmbeddingSource,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

impl EmbeddingStore {
    pub fn new(dim: usize, source: EmbeddingSource) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Param("embedding dimension must be positive".into()));
        }
        Ok(EmbeddingStore {
            dim,
            source,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
        })
    }

    /// Adds a vector. A repeated word keeps its first vector.
    pub fn insert(&mut self, word: String, vector: &[f32]) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Data(format!(
                "vector for {word:?} has length {}, store dimension is {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value in vector for {word:?}")));
        }
        if self.index.contains_key(&word) {
            return Ok(());
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn source(&self) -> EmbeddingSource {
        self.source
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    /// Looks a dataset word up, lowercasing first unless the source is
    /// case-sensitive.
    pub fn lookup(&self, word: &str) -> Option<&[f32]> {
        if self.source.lowercase_lookup() {
            self.get(&word.to_lowercase())
        } else {
            self.get(word)
        }
    }

    pub fn require(&self, word: &str) -> Result<&[f32]> {
        self.lookup(word).ok_or_else(|| Error::Lookup(word.to_owned()))
    }

    /// A new store holding only the given words (those present).
    pub fn subset<'a>(&self, words: impl IntoIterator<Item = &'a str>) -> EmbeddingStore {
        let mut out = EmbeddingStore::new(self.dim, self.source).expect("dim is positive");
        for w in words {
            let key = if self.source.lowercase_lookup() {
                w.to_lowercase()
            } else {
                w.to_owned()
            };
            if let Some(v) = self.get(&key) {
                out.insert(key, v).expect("vector came from a valid store");
            }
        }
        out
    }

    /// Writes the text vector format: one `word v1 ... vd` line per entry,
    /// floats with nine significant digits.
    pub fn write_text(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        for (i, word) in self.words.iter().enumerate() {
            let io = |e| Error::io(&tmp, e);
            w.write_all(word.as_bytes()).map_err(io)?;
            for v in &self.data[i * self.dim..(i + 1) * self.dim] {
                write!(w, " {v:.8e}").map_err(io)?;
            }
            w.write_all(b"\n").map_err(io)?;
        }
        w.flush().map_err(|e| Error::io(&tmp, e))?;
        drop(w);
        fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
    }
}

/// Loads the word2vec binary format: an ASCII header `<count> <dim>\n`, then
/// per record a space-terminated token and `dim` little-endian `f32`s.
pub fn load_word2vec_binary(path: &Path) -> Result<EmbeddingStore> {
    load_word2vec_binary_filtered(path, None)
}

/// Like [`load_word2vec_binary`], keeping only tokens in `keep` (matched
/// verbatim or lowercased). Large releases do not fit in memory otherwise.
pub fn load_word2vec_binary_filtered(
    path: &Path,
    keep: Option<&HashSet<String>>,
) -> Result<EmbeddingStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = CountingReader {
        inner: BufReader::with_capacity(1 << 20, file),
        offset: 0,
    };
    let mut header = Vec::new();
    r.read_until(b'\n', &mut header)
        .map_err(|e| Error::io(path, e))?;
    let header = String::from_utf8_lossy(&header);
    let mut it = header.split_whitespace();
    let parse_usize = |s: Option<&str>| s.and_then(|s| s.parse::<usize>().ok());
    let (count, dim) = match (parse_usize(it.next()), parse_usize(it.next())) {
        (Some(c), Some(d)) if d > 0 => (c, d),
        _ => return Err(Error::parse(path, 1, "expected header \"<vocab_count> <dim>\"")),
    };

    let mut store = EmbeddingStore::new(dim, EmbeddingSource::Word2vec)?;
    let mut buf = vec![0u8; dim * 4];
    let mut vector = vec![0f32; dim];
    let mut token = Vec::new();
    for rec in 0..count {
        token.clear();
        loop {
            let b = r.byte().map_err(|e| Error::io(path, e))?;
            match b {
                None => {
                    return Err(Error::Truncated {
                        path: path.into(),
                        offset: r.offset,
                        message: format!("file ends inside record {rec} of {count}"),
                    })
                }
                Some(b' ') if !token.is_empty() => break,
                Some(b'\n') | Some(b' ') | Some(b'\r') if token.is_empty() => {}
                Some(b) => token.push(b),
            }
        }
        let start = r.offset;
        if let Err(e) = r.read_exact(&mut buf) {
            return match e.kind() {
                std::io::ErrorKind::UnexpectedEof => Err(Error::Truncated {
                    path: path.into(),
                    offset: start,
                    message: format!("vector of record {rec} is cut short"),
                }),
                _ => Err(Error::io(path, e)),
            };
        }
        let word = String::from_utf8_lossy(&token).into_owned();
        if let Some(keep) = keep {
            if !keep.contains(&word) && !keep.contains(&word.to_lowercase()) {
                continue;
            }
        }
        for (v, chunk) in vector.iter_mut().zip(buf.chunks_exact(4)) {
            *v = f32::from_le_bytes(chunk.try_into().expect("chunk of four bytes"));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value in vector for {word:?}")));
        }
        store.insert(word, &vector)?;
    }
    Ok(store)
}

struct CountingReader<R> {
    inner: R,
    offset: u64,
}

impl<R: BufRead> CountingReader<R> {
    fn byte(&mut self) -> std::io::Result<Option<u8>> {
        let buf = self.inner.fill_buf()?;
        if buf.is_empty() {
            return Ok(None);
        }
        let b = buf[0];
        self.inner.consume(1);
        self.offset += 1;
        Ok(Some(b))
    }

    fn read_until(&mut self, delim: u8, out: &mut Vec<u8>) -> std::io::Result<usize> {
        let n = self.inner.read_until(delim, out)?;
        self.offset += n as u64;
        Ok(n)
    }
}

impl<R: BufRead> Read for CountingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.offset += n as u64;
        Ok(n)
    }
}

/// Writes a store in word2vec binary format.
pub fn write_word2vec_binary(store: &EmbeddingStore, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{} {}", store.len(), store.dim()).map_err(io)?;
    for word in store.words() {
        w.write_all(word.as_bytes()).map_err(io)?;
        w.write_all(b" ").map_err(io)?;
        for v in store.get(word).expect("word is stored") {
            w.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Loads the whitespace-separated text format (`word f1 ... fd` per line).
/// The dimension comes from the first line; a leading `<count> <dim>` header
/// line, as some releases carry, is skipped.
pub fn load_vectors_text(path: &Path, source: EmbeddingSource) -> Result<EmbeddingStore> {
    load_vectors_text_filtered(path, source, None)
}

pub fn load_vectors_text_filtered(
    path: &Path,
    source: EmbeddingSource,
    keep: Option<&HashSet<String>>,
) -> Result<EmbeddingStore> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::with_capacity(1 << 20, file);
    let mut store: Option<EmbeddingStore> = None;
    let mut vector: Vec<f32> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(' ').filter(|f| !f.is_empty());
        let word = fields.next().expect("line is non-empty");
        vector.clear();
        for f in fields {
            let v: f32 = f
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad float {f:?}")))?;
            vector.push(v);
        }
        if store.is_none() && lineno == 1 && vector.len() == 1 && word.parse::<usize>().is_ok() {
            continue;
        }
        let store = match &mut store {
            Some(s) => s,
            None => {
                if vector.is_empty() {
                    return Err(Error::parse(path, lineno, "line has no vector values"));
                }
                store.insert(EmbeddingStore::new(vector.len(), source)?)
            }
        };
        if vector.len() != store.dim() {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} values, found {}", store.dim(), vector.len()),
            ));
        }
        if let Some(keep) = keep {
            if !keep.contains(word) && !keep.contains(&word.to_lowercase()) {
                continue;
            }
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite value in vector for {word:?}")));
        }
        store.insert(word.to_owned(), &vector)?;
    }
    store.ok_or_else(|| Error::parse(path, 0, "no vectors in file"))
}

/// Loads vectors for `source` from `path`. word2vec files ending in `.bin`
/// are read as binary, everything else as the text format.
pub fn load_vectors(path: &Path, source: EmbeddingSource, keep: Option<&HashSet<String>>) -> Result<EmbeddingStore> {
    let binary = source == EmbeddingSource::Word2vec
        && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("bin"));
    if binary {
        load_word2vec_binary_filtered(path, keep)
    } else {
        load_vectors_text_filtered(path, source, keep)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub source: EmbeddingSource,
    pub dim: usize,
    pub covered_words: usize,
    pub total_words: usize,
    pub covered_pairs_per_label: BTreeMap<Label, usize>,
    pub total_pairs_per_label: BTreeMap<Label, usize>,
}

pub fn coverage(store: &EmbeddingStore, datasets: &[&PairDataset]) -> CoverageReport {
    let mut vocab: HashSet<&str> = HashSet::new();
    let mut covered_pairs = BTreeMap::new();
    let mut total_pairs = BTreeMap::new();
    for ds in datasets {
        for p in ds.pairs() {
            vocab.insert(&p.word1);
            vocab.insert(&p.word2);
            *total_pairs.entry(p.label).or_insert(0) += 1;
            let c = covered_pairs.entry(p.label).or_insert(0);
            if store.lookup(&p.word1).is_some() && store.lookup(&p.word2).is_some() {
                *c += 1;
            }
        }
    }
    CoverageReport {
        source: store.source(),
        dim: store.dim(),
        covered_words: vocab.iter().filter(|w| store.lookup(w).is_some()).count(),
        total_words: vocab.len(),
        covered_pairs_per_label: covered_pairs,
        total_pairs_per_label: total_pairs,
    }
}

/// Keeps exactly the pairs whose two words both have vectors.
pub fn filter_pairs(data: &PairDataset, store: &EmbeddingStore) -> PairDataset {
    data.filter(data.name.clone(), |p| {
        store.lookup(&p.word1).is_some() && store.lookup(&p.word2).is_some()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pairdata::{Pos, SplitTag, WordPair};
    use proptest::prelude::*;

    fn w2v_bytes(header: &str, records: &[(&str, &[f32])]) -> Vec<u8> {
        let mut out = header.as_bytes().to_vec();
        for (w, v) in records {
            out.extend_from_slice(w.as_bytes());
            out.push(b' ');
            for x in *v {
                out.extend_from_slice(&x.to_le_bytes());
            }
            out.push(b'\n');
        }
        out
    }

    #[test]
    fn word2vec_two_records() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.bin");
        fs::write(&p, w2v_bytes("2 3\n", &[("king", &[1.0, 2.0, 3.0]), ("queen", &[-1.0, 0.5, 0.25])])).unwrap();
        let s = load_word2vec_binary(&p).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dim(), 3);
        assert_eq!(s.get("queen").unwrap(), &[-1.0, 0.5, 0.25]);
    }

    #[test]
    fn word2vec_dim_300_header() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.bin");
        let v = vec![0.5f32; 300];
        fs::write(&p, w2v_bytes("1 300\n", &[("good", &v)])).unwrap();
        assert_eq!(load_word2vec_binary(&p).unwrap().dim(), 300);
    }

    #[test]
    fn word2vec_truncated_reports_offset() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.bin");
        let mut bytes = w2v_bytes("2 3\n", &[("a", &[1.0, 2.0, 3.0]), ("b", &[1.0, 2.0, 3.0])]);
        bytes.truncate(bytes.len() - 6);
        fs::write(&p, bytes).unwrap();
        match load_word2vec_binary(&p).unwrap_err() {
            Error::Truncated { offset, .. } => assert_eq!(offset, 4 + 2 + 12 + 1 + 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn word2vec_nonfinite_names_token() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.bin");
        fs::write(&p, w2v_bytes("1 2\n", &[("bad", &[f32::NAN, 1.0])])).unwrap();
        let err = load_word2vec_binary(&p).unwrap_err();
        assert!(matches!(err, Error::Data(_)));
        assert!(err.to_string().contains("bad"));
    }

    #[test]
    fn word2vec_binary_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.bin");
        let mut s = EmbeddingStore::new(2, EmbeddingSource::Word2vec).unwrap();
        s.insert("x".into(), &[1.5, -2.0]).unwrap();
        s.insert("y".into(), &[0.0, 3.25]).unwrap();
        write_word2vec_binary(&s, &p).unwrap();
        assert_eq!(load_word2vec_binary(&p).unwrap(), s);
    }

    #[test]
    fn text_two_words() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.txt");
        fs::write(&p, "king 0.1 0.2\nqueen 0.3 0.4\n").unwrap();
        let s = load_vectors_text(&p, EmbeddingSource::Glove).unwrap();
        assert_eq!((s.len(), s.dim()), (2, 2));
        assert_eq!(s.get("queen").unwrap(), &[0.3, 0.4]);
    }

    #[test]
    fn text_768_wide_table() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bert.txt");
        let row: Vec<String> = (0..768).map(|i| format!("{}", i as f32 * 1e-3)).collect();
        fs::write(&p, format!("Hot {}\n", row.join(" "))).unwrap();
        let s = load_vectors_text(&p, EmbeddingSource::BertTable).unwrap();
        assert_eq!(s.dim(), 768);
        assert!(s.lookup("Hot").is_some());
        assert!(s.lookup("hot").is_none());
    }

    #[test]
    fn text_dimension_mismatch_line_two() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("v.txt");
        fs::write(&p, "king 0.1\nqueen 0.1 0.2\n").unwrap();
        match load_vectors_text(&p, EmbeddingSource::Glove).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    fn ds(pairs: &[(&str, &str)]) -> PairDataset {
        PairDataset::from_pairs(
            "d",
            pairs
                .iter()
                .map(|(a, b)| WordPair::new(a, b, Pos::Adjective, Label::Antonym, SplitTag::Train).unwrap()),
        )
    }

    fn store(words: &[&str]) -> EmbeddingStore {
        let mut s = EmbeddingStore::new(2, EmbeddingSource::Glove).unwrap();
        for (i, w) in words.iter().enumerate() {
            s.insert((*w).into(), &[i as f32, 1.0]).unwrap();
        }
        s
    }

    #[test]
    fn coverage_counts() {
        let d = ds(&[("big", "small"), ("hot", "cold")]);
        let full = coverage(&store(&["big", "small", "hot", "cold"]), &[&d]);
        assert_eq!(full.covered_words, full.total_words);
        assert_eq!(full.covered_pairs_per_label[&Label::Antonym], 2);
        let empty = coverage(&EmbeddingStore::new(2, EmbeddingSource::Glove).unwrap(), &[&d]);
        assert_eq!(empty.covered_words, 0);
        assert_eq!(empty.covered_pairs_per_label[&Label::Antonym], 0);
    }

    #[test]
    fn filter_cases() {
        let d = ds(&[("big", "small"), ("hot", "cold")]);
        assert_eq!(filter_pairs(&d, &store(&["big", "small", "hot", "cold"])), d);
        assert!(filter_pairs(&d, &store(&[])).is_empty());
        let one = filter_pairs(&d, &store(&["big", "small", "hot"]));
        assert_eq!(one.len(), 1);
        assert_eq!(filter_pairs(&one, &store(&["big", "small", "hot"])), one);
    }

    proptest! {
        #[test]
        fn text_roundtrip(vals in prop::collection::vec(prop::collection::vec(-1e6f32..1e6, 4), 1..20)) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("v.txt");
            let mut s = EmbeddingStore::new(4, EmbeddingSource::Glove).unwrap();
            for (i, v) in vals.iter().enumerate() {
                s.insert(format!("w{i}"), v).unwrap();
            }
            s.write_text(&p).unwrap();
            let back = load_vectors_text(&p, EmbeddingSource::Glove).unwrap();
            prop_assert_eq!(back.len(), s.len());
            for w in s.words() {
                for (a, b) in s.get(w).unwrap().iter().zip(back.get(w).unwrap()) {
                    prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-30));
                }
            }
        }
    }
}
