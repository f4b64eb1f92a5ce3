//! Labeled word pairs: loading the antonym/synonym pair files, shuffled
//! control generation and train/test splitting.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pos {
    Adjective,
    Noun,
    Verb,
}

impl Pos {
    pub const ALL: [Pos; 3] = [Pos::Adjective, Pos::Noun, Pos::Verb];

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Adjective => "adjective",
            Pos::Noun => "noun",
            Pos::Verb => "verb",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Antonym,
    Synonym,
    ShuffledAntonym,
    ShuffledSynonym,
}

impl Label {
    pub const ALL: [Label; 4] = [
        Label::Antonym,
        Label::Synonym,
        Label::ShuffledAntonym,
        Label::ShuffledSynonym,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Antonym => "antonym",
            Label::Synonym => "synonym",
            Label::ShuffledAntonym => "shuffled_antonym",
            Label::ShuffledSynonym => "shuffled_synonym",
        }
    }

    pub fn is_shuffled(self) -> bool {
        matches!(self, Label::ShuffledAntonym | Label::ShuffledSynonym)
    }

    /// The control label generated from a real label; shuffled labels map to
    /// themselves.
    pub fn shuffled(self) -> Label {
        match self {
            Label::Antonym | Label::ShuffledAntonym => Label::ShuffledAntonym,
            Label::Synonym | Label::ShuffledSynonym => Label::ShuffledSynonym,
        }
    }
}

/// Which file of the dataset's own division a pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitTag {
    Train,
    Val,
    Test,
    None,
}

impl SplitTag {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Val => "val",
            SplitTag::Test => "test",
            SplitTag::None => "none",
        }
    }
}

macro_rules! impl_display_fromstr {
    ($ty:ty, $($name:literal => $val:expr),+ $(,)?) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($val),)+
                    other => Err(Error::Data(format!(
                        "unknown {} {other:?}",
                        stringify!($ty).to_lowercase()
                    ))),
                }
            }
        }
    };
}

impl_display_fromstr!(Pos, "adjective" => Pos::Adjective, "noun" => Pos::Noun, "verb" => Pos::Verb);
impl_display_fromstr!(Label,
    "antonym" => Label::Antonym,
    "synonym" => Label::Synonym,
    "shuffled_antonym" => Label::ShuffledAntonym,
    "shuffled_synonym" => Label::ShuffledSynonym,
);
impl_display_fromstr!(SplitTag,
    "train" => SplitTag::Train,
    "val" => SplitTag::Val,
    "test" => SplitTag::Test,
    "none" => SplitTag::None,
);

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WordPair {
    pub word1: String,
    pub word2: String,
    pub pos: Pos,
    pub label: Label,
    pub split: SplitTag,
}

fn valid_token(t: &str) -> bool {
    !t.is_empty() && !t.chars().any(char::is_whitespace)
}

impl WordPair {
    /// Builds a pair, lowercasing both words. Fails on empty tokens, tokens
    /// with whitespace, or identical words.
    pub fn new(word1: &str, word2: &str, pos: Pos, label: Label, split: SplitTag) -> Result<Self> {
        let w1 = word1.trim().to_lowercase();
        let w2 = word2.trim().to_lowercase();
        Self::verbatim(w1, w2, pos, label, split)
    }

    /// Builds a pair keeping the words exactly as given.
    pub fn verbatim(word1: String, word2: String, pos: Pos, label: Label, split: SplitTag) -> Result<Self> {
        if !valid_token(&word1) || !valid_token(&word2) {
            return Err(Error::Data(format!(
                "invalid token in pair ({word1:?}, {word2:?})"
            )));
        }
        if word1 == word2 {
            return Err(Error::Data(format!("pair repeats the word {word1:?}")));
        }
        Ok(WordPair {
            word1,
            word2,
            pos,
            label,
            split,
        })
    }

    fn key(&self) -> (&str, &str, Label) {
        (&self.word1, &self.word2, self.label)
    }
}

/// Ordered, duplicate-free list of pairs. Two pairs are duplicates when they
/// share `(word1, word2, label)`; the first occurrence wins.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PairDataset {
    pub name: String,
    pairs: Vec<WordPair>,
}

impl PairDataset {
    pub fn new(name: impl Into<String>) -> Self {
        PairDataset {
            name: name.into(),
            pairs: Vec::new(),
        }
    }

    pub fn from_pairs(name: impl Into<String>, pairs: impl IntoIterator<Item = WordPair>) -> Self {
        let mut ds = PairDataset::new(name);
        ds.extend(pairs);
        ds
    }

    pub fn extend(&mut self, pairs: impl IntoIterator<Item = WordPair>) {
        let mut seen: HashSet<(String, String, Label)> = self
            .pairs
            .iter()
            .map(|p| (p.word1.clone(), p.word2.clone(), p.label))
            .collect();
        for p in pairs {
            let (a, b, l) = p.key();
            if seen.insert((a.to_owned(), b.to_owned(), l)) {
                self.pairs.push(p);
            }
        }
    }

    pub fn pairs(&self) -> &[WordPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn vocabulary(&self) -> BTreeSet<&str> {
        self.pairs
            .iter()
            .flat_map(|p| [p.word1.as_str(), p.word2.as_str()])
            .collect()
    }

    pub fn retain(&mut self, f: impl FnMut(&WordPair) -> bool) {
        self.pairs.retain(f);
    }

    pub fn filter(&self, name: impl Into<String>, mut f: impl FnMut(&WordPair) -> bool) -> Self {
        PairDataset {
            name: name.into(),
            pairs: self.pairs.iter().filter(|p| f(p)).cloned().collect(),
        }
    }

    /// Concatenates datasets in order, dropping cross-dataset duplicates.
    pub fn concat<'a>(name: impl Into<String>, parts: impl IntoIterator<Item = &'a PairDataset>) -> Self {
        let mut out = PairDataset::new(name);
        for p in parts {
            out.extend(p.pairs.iter().cloned());
        }
        out
    }
}

/// The real relations stored in the pair files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Antonym,
    Synonym,
}

impl Relation {
    pub fn label(self) -> Label {
        match self {
            Relation::Antonym => Label::Antonym,
            Relation::Synonym => Label::Synonym,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Relation::Antonym => "antonym",
            Relation::Synonym => "synonym",
        }
    }
}

const SPLIT_FILES: [(&str, SplitTag); 3] = [
    ("train", SplitTag::Train),
    ("val", SplitTag::Val),
    ("test", SplitTag::Test),
];

fn relation_flag(field: &str) -> Option<Relation> {
    match field.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "ant" | "antonym" | "antonyms" => Some(Relation::Antonym),
        "false" | "0" | "syn" | "synonym" | "synonyms" => Some(Relation::Synonym),
        _ => None,
    }
}

/// Loads one part of speech and one relation from a pair-file directory.
///
/// Two layouts are recognised, per split (`train`, `val`, `test`):
///
/// * `<pos>-pairs.<split>`: lines `word1<TAB>word2<TAB>flag`, where the flag
///   is `True`/`1`/`antonym` for antonyms and `False`/`0`/`synonym` for
///   synonyms. This is the layout the public dataset ships with.
/// * `<pos>-<relation>.<split>`: lines `word1<TAB>word2[<TAB>score]`.
///
/// A split file that is absent in both layouts is skipped, but at least one
/// must exist. Words are lowercased; pairs with identical words after
/// lowercasing, or with whitespace inside a token, are dropped.
pub fn load_stuttgart(dir: &Path, pos: Pos, relation: Relation) -> Result<PairDataset> {
    let name = format!("{}-{}", pos.as_str(), relation.as_str());
    let mut ds = PairDataset::new(name);
    let mut found = false;
    for (suffix, tag) in SPLIT_FILES {
        let combined = dir.join(format!("{}-pairs.{suffix}", pos.as_str()));
        let single = dir.join(format!("{}-{}.{suffix}", pos.as_str(), relation.as_str()));
        let (path, is_combined) = if combined.is_file() {
            (combined, true)
        } else if single.is_file() {
            (single, false)
        } else {
            continue;
        };
        found = true;
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let pairs = parse_pair_lines(&path, &text, pos, relation, tag, is_combined)?;
        ds.extend(pairs);
    }
    if !found {
        let expected: PathBuf = dir.join(format!("{}-pairs.train", pos.as_str()));
        return Err(Error::io(
            expected,
            std::io::Error::new(std::io::ErrorKind::NotFound, "pair file not found"),
        ));
    }
    Ok(ds)
}

fn parse_pair_lines(
    path: &Path,
    text: &str,
    pos: Pos,
    relation: Relation,
    tag: SplitTag,
    combined: bool,
) -> Result<Vec<WordPair>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields[0].trim().is_empty() || fields[1].trim().is_empty() {
            return Err(Error::parse(path, lineno, "expected two tab-separated words"));
        }
        if combined {
            let flag = fields
                .get(2)
                .and_then(|f| relation_flag(f))
                .ok_or_else(|| Error::parse(path, lineno, "missing or unknown relation flag"))?;
            if flag != relation {
                continue;
            }
        } else if let Some(extra) = fields.get(2) {
            if extra.trim().parse::<f64>().is_err() && relation_flag(extra).is_none() {
                return Err(Error::parse(
                    path,
                    lineno,
                    format!("expected a numeric score after the words, found {extra:?}"),
                ));
            }
        }
        // Multi-word entries and self-pairs cannot be embedded as single tokens.
        if let Ok(p) = WordPair::new(fields[0], fields[1], pos, relation.label(), tag) {
            out.push(p);
        }
    }
    Ok(out)
}

/// Loads every part of speech for one relation into a single dataset.
pub fn load_stuttgart_all(dir: &Path, relation: Relation) -> Result<PairDataset> {
    let mut parts = Vec::new();
    for pos in Pos::ALL {
        parts.push(load_stuttgart(dir, pos, relation)?);
    }
    Ok(PairDataset::concat(relation.as_str(), &parts))
}

/// Unordered word pairs that shuffled controls must avoid.
#[derive(Debug, Clone, Default)]
pub struct ExclusionSet(HashSet<(String, String)>);

impl ExclusionSet {
    /// Every pair of the given datasets, in both orientations.
    pub fn from_datasets<'a>(sets: impl IntoIterator<Item = &'a PairDataset>) -> Self {
        let mut s = HashSet::new();
        for ds in sets {
            for p in ds.pairs() {
                s.insert((p.word1.clone(), p.word2.clone()));
                s.insert((p.word2.clone(), p.word1.clone()));
            }
        }
        ExclusionSet(s)
    }

    pub fn contains(&self, a: &str, b: &str) -> bool {
        self.0.contains(&(a.to_owned(), b.to_owned()))
    }
}

/// Rejection-sampling budget per requested pair.
const ATTEMPTS_PER_PAIR: usize = 100;

/// Samples `count` control pairs: the first word from the multiset of
/// first-position words of `source`, the second from the second-position
/// words. Self-pairs, pairs in `exclude` (either orientation), pairs of
/// `source` itself and repeats are rejected. Each generated pair takes the
/// part of speech of the pair its first word was drawn from.
pub fn make_shuffled(
    source: &PairDataset,
    exclude: &ExclusionSet,
    seed: u64,
    count: usize,
) -> Result<PairDataset> {
    if count == 0 {
        return Err(Error::Param("shuffled count must be positive".into()));
    }
    if source.vocabulary().len() < 2 {
        return Err(Error::Param(
            "shuffling needs at least two distinct words".into(),
        ));
    }
    let own = ExclusionSet::from_datasets([source]);
    let firsts = source.pairs();
    let mut rng = seed::rng(seed);
    let mut seen: HashSet<(String, String)> = HashSet::new();
    let mut out = Vec::with_capacity(count);
    let budget = count * ATTEMPTS_PER_PAIR + 1000;
    let mut attempts = 0;
    while out.len() < count && attempts < budget {
        attempts += 1;
        let a = &firsts[rng.random_range(0..firsts.len())];
        let b = &firsts[rng.random_range(0..firsts.len())];
        let (w1, w2) = (&a.word1, &b.word2);
        if w1 == w2 || exclude.contains(w1, w2) || own.contains(w1, w2) {
            continue;
        }
        if !seen.insert((w1.clone(), w2.clone())) {
            continue;
        }
        let label = a.label.shuffled();
        out.push(WordPair::verbatim(w1.clone(), w2.clone(), a.pos, label, SplitTag::None)?);
    }
    if out.len() < count {
        return Err(Error::Generation {
            requested: count,
            generated: out.len(),
            attempts,
        });
    }
    Ok(PairDataset::from_pairs(format!("shuffled-{}", source.name), out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    Stuttgart,
    Lexical,
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stuttgart" => Ok(SplitMode::Stuttgart),
            "lexical" => Ok(SplitMode::Lexical),
            other => Err(Error::Param(format!("unknown split mode {other:?}"))),
        }
    }
}

/// Train/test partition as index sets into a dataset. Pairs in neither set
/// are unused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train: BTreeSet<usize>,
    pub test: BTreeSet<usize>,
    pub mode: SplitMode,
    pub seed: u64,
}

impl SplitSpec {
    /// The dataset's own division. Validation pairs join the training side
    /// when `merge_val` is set and are left out otherwise.
    pub fn stuttgart(data: &PairDataset, merge_val: bool) -> Result<SplitSpec> {
        let mut train = BTreeSet::new();
        let mut test = BTreeSet::new();
        for (i, p) in data.pairs().iter().enumerate() {
            match p.split {
                SplitTag::Train => {
                    train.insert(i);
                }
                SplitTag::Val if merge_val => {
                    train.insert(i);
                }
                SplitTag::Test => {
                    test.insert(i);
                }
                _ => {}
            }
        }
        if train.is_empty() || test.is_empty() {
            return Err(Error::Split(format!(
                "dataset split tags give {} train and {} test pairs",
                train.len(),
                test.len()
            )));
        }
        Ok(SplitSpec {
            train,
            test,
            mode: SplitMode::Stuttgart,
            seed: 0,
        })
    }

    /// Checks disjointness, and for lexical splits, disjoint vocabularies.
    pub fn validate(&self, data: &PairDataset) -> Result<()> {
        if let Some(i) = self.train.intersection(&self.test).next() {
            return Err(Error::Split(format!("pair {i} is in both train and test")));
        }
        if self.mode == SplitMode::Lexical {
            let vocab = |idx: &BTreeSet<usize>| -> HashSet<&str> {
                idx.iter()
                    .flat_map(|&i| {
                        let p = &data.pairs()[i];
                        [p.word1.as_str(), p.word2.as_str()]
                    })
                    .collect()
            };
            let (tr, te) = (vocab(&self.train), vocab(&self.test));
            if let Some(w) = tr.intersection(&te).next() {
                return Err(Error::Split(format!("word {w:?} occurs in train and test")));
            }
        }
        Ok(())
    }
}

/// Word-level train/test split: no word occurs on both sides.
///
/// Words are visited in a seeded random order. A word with no assigned
/// neighbours goes to whichever vocabulary keeps the test share of assigned
/// words closest to `test_fraction`. A word whose assigned neighbours all sit
/// on one side joins that side, so no pair is lost. A word with neighbours on
/// both sides goes to the side whose pair count is behind target; pairs
/// straddling the two vocabularies are discarded.
pub fn lexical_split(data: &PairDataset, test_fraction: f64, seed: u64) -> Result<SplitSpec> {
    if data.is_empty() {
        return Err(Error::Split("cannot split an empty dataset".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Param(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut words: Vec<&str> = data.vocabulary().into_iter().collect();
    let mut rng = seed::rng(seed);
    words.shuffle(&mut rng);

    let mut adjacency: HashMap<&str, Vec<&str>> = HashMap::new();
    for p in data.pairs() {
        adjacency.entry(&p.word1).or_default().push(&p.word2);
        adjacency.entry(&p.word2).or_default().push(&p.word1);
    }

    // true = test vocabulary.
    let mut side: HashMap<&str, bool> = HashMap::new();
    let (mut test_words, mut train_words) = (0usize, 0usize);
    let (mut test_pairs, mut train_pairs) = (0usize, 0usize);
    for w in words {
        let (mut nt, mut nr) = (0usize, 0usize);
        for u in &adjacency[w] {
            match side.get(u) {
                Some(true) => nt += 1,
                Some(false) => nr += 1,
                None => {}
            }
        }
        let to_test = match (nt, nr) {
            (0, 0) => {
                let assigned = test_words + train_words;
                (test_words as f64) < test_fraction * (assigned + 1) as f64 - 0.5
            }
            (_, 0) => true,
            (0, _) => false,
            _ => {
                let kept = (test_pairs + train_pairs) as f64;
                (test_pairs as f64) < test_fraction * kept
            }
        };
        side.insert(w, to_test);
        if to_test {
            test_words += 1;
            test_pairs += nt;
        } else {
            train_words += 1;
            train_pairs += nr;
        }
    }

    let mut train = BTreeSet::new();
    let mut test = BTreeSet::new();
    for (i, p) in data.pairs().iter().enumerate() {
        match (side[p.word1.as_str()], side[p.word2.as_str()]) {
            (true, true) => {
                test.insert(i);
            }
            (false, false) => {
                train.insert(i);
            }
            _ => {}
        }
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::Split(format!(
            "lexical split is degenerate: {} train and {} test pairs",
            train.len(),
            test.len()
        )));
    }
    Ok(SplitSpec {
        train,
        test,
        mode: SplitMode::Lexical,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn pair(a: &str, b: &str, label: Label) -> WordPair {
        WordPair::new(a, b, Pos::Adjective, label, SplitTag::Train).unwrap()
    }

    fn write(dir: &Path, name: &str, body: &str) {
        fs::write(dir.join(name), body).unwrap();
    }

    #[test]
    fn loads_combined_layout() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "adjective-pairs.train", "big\tsmall\tTrue\nhappy\tglad\tFalse\n");
        write(dir.path(), "adjective-pairs.test", "Hot\tCold\tTrue\n");
        let ant = load_stuttgart(dir.path(), Pos::Adjective, Relation::Antonym).unwrap();
        assert_eq!(ant.len(), 2);
        assert_eq!(ant.pairs()[0], pair("big", "small", Label::Antonym));
        assert_eq!(ant.pairs()[1].word1, "hot");
        assert_eq!(ant.pairs()[1].split, SplitTag::Test);
        let syn = load_stuttgart(dir.path(), Pos::Adjective, Relation::Synonym).unwrap();
        assert_eq!(syn.len(), 1);
        assert_eq!(syn.pairs()[0].label, Label::Synonym);
    }

    #[test]
    fn loads_per_relation_layout_with_scores() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "noun-antonym.train", "war\tpeace\t0.9\n\n");
        let ds = load_stuttgart(dir.path(), Pos::Noun, Relation::Antonym).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.pairs()[0].pos, Pos::Noun);
    }

    #[test]
    fn empty_file_gives_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "verb-antonym.train", "");
        let ds = load_stuttgart(dir.path(), Pos::Verb, Relation::Antonym).unwrap();
        assert!(ds.is_empty());
    }

    #[test]
    fn duplicate_lines_are_merged() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "adjective-antonym.train", "hot\tcold\nhot\tcold\n");
        let ds = load_stuttgart(dir.path(), Pos::Adjective, Relation::Antonym).unwrap();
        assert_eq!(ds.len(), 1);
    }

    #[test]
    fn missing_file_names_expected_path() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_stuttgart(dir.path(), Pos::Verb, Relation::Synonym).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(err.to_string().contains("verb-pairs.train"), "{err}");
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "adjective-antonym.train", "big\tsmall\nlonely\n");
        let err = load_stuttgart(dir.path(), Pos::Adjective, Relation::Antonym).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn loading_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "adjective-pairs.train", "big\tsmall\tTrue\nfast\tslow\tTrue\n");
        let a = load_stuttgart(dir.path(), Pos::Adjective, Relation::Antonym).unwrap();
        let b = load_stuttgart(dir.path(), Pos::Adjective, Relation::Antonym).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn word_pair_invariants() {
        assert!(WordPair::new("a", "A", Pos::Noun, Label::Antonym, SplitTag::None).is_err());
        assert!(WordPair::new("ice cream", "b", Pos::Noun, Label::Antonym, SplitTag::None).is_err());
        assert!(WordPair::new("", "b", Pos::Noun, Label::Antonym, SplitTag::None).is_err());
    }

    #[test]
    fn shuffled_two_pair_source() {
        let src = PairDataset::from_pairs(
            "ant",
            [pair("big", "small", Label::Antonym), pair("hot", "cold", Label::Antonym)],
        );
        let excl = ExclusionSet::from_datasets([&src]);
        let out = make_shuffled(&src, &excl, 5, 2).unwrap();
        let got: BTreeSet<(String, String)> = out
            .pairs()
            .iter()
            .map(|p| (p.word1.clone(), p.word2.clone()))
            .collect();
        let want: BTreeSet<(String, String)> = [("big", "cold"), ("hot", "small")]
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert_eq!(got, want);
        assert!(out.pairs().iter().all(|p| p.label == Label::ShuffledAntonym));
        assert_eq!(make_shuffled(&src, &excl, 5, 2).unwrap(), out);
    }

    #[test]
    fn shuffled_reports_exhaustion() {
        let src = PairDataset::from_pairs(
            "ant",
            [pair("big", "small", Label::Antonym), pair("hot", "cold", Label::Antonym)],
        );
        let err = make_shuffled(&src, &ExclusionSet::default(), 1, 3).unwrap_err();
        match err {
            Error::Generation { generated, requested, .. } => {
                assert_eq!(generated, 2);
                assert_eq!(requested, 3);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn shuffled_needs_two_words() {
        let src = PairDataset::new("empty");
        assert!(make_shuffled(&src, &ExclusionSet::default(), 0, 1).is_err());
    }

    fn synthetic_antonyms(n: usize, seed: u64) -> PairDataset {
        let mut rng = seed::rng(seed);
        let pairs = (0..n).filter_map(|_| {
            let a = format!("w{}", rng.random_range(0..n));
            let b = format!("w{}", rng.random_range(0..n));
            WordPair::new(&a, &b, Pos::Noun, Label::Antonym, SplitTag::Train).ok()
        });
        PairDataset::from_pairs("ant", pairs)
    }

    #[test]
    fn shuffled_full_size_against_enumerated_candidates() {
        let src = synthetic_antonyms(300, 9);
        let excl = ExclusionSet::from_datasets([&src]);
        // Oracle: enumerate every admissible (first, second) combination.
        let firsts: BTreeSet<&str> = src.pairs().iter().map(|p| p.word1.as_str()).collect();
        let seconds: BTreeSet<&str> = src.pairs().iter().map(|p| p.word2.as_str()).collect();
        let admissible: BTreeSet<(&str, &str)> = firsts
            .iter()
            .flat_map(|a| seconds.iter().map(move |b| (*a, *b)))
            .filter(|(a, b)| a != b && !excl.contains(a, b))
            .collect();
        assert!(admissible.len() >= src.len());
        let out = make_shuffled(&src, &excl, 3, src.len()).unwrap();
        assert_eq!(out.len(), src.len());
        for p in out.pairs() {
            assert!(admissible.contains(&(p.word1.as_str(), p.word2.as_str())));
        }
    }

    #[test]
    fn lexical_two_disjoint_pairs() {
        let ds = PairDataset::from_pairs(
            "d",
            [pair("a", "b", Label::Antonym), pair("c", "d", Label::Synonym)],
        );
        let s = lexical_split(&ds, 0.5, 0).unwrap();
        assert_eq!(s.train.len(), 1);
        assert_eq!(s.test.len(), 1);
        s.validate(&ds).unwrap();
    }

    #[test]
    fn lexical_shared_hub_is_degenerate() {
        let ds = PairDataset::from_pairs(
            "d",
            [pair("a", "b", Label::Antonym), pair("a", "c", Label::Antonym)],
        );
        for seed in 0..20 {
            assert!(matches!(lexical_split(&ds, 0.5, seed), Err(Error::Split(_))));
        }
    }

    #[test]
    fn lexical_fraction_on_disjoint_pairs() {
        let pairs = (0..1000).map(|i| pair(&format!("x{i}"), &format!("y{i}"), Label::Antonym));
        let ds = PairDataset::from_pairs("d", pairs);
        let s = lexical_split(&ds, 0.2, 11).unwrap();
        assert!((180..=220).contains(&s.test.len()), "{}", s.test.len());
        assert_eq!(s.train.len() + s.test.len(), 1000);
    }

    #[test]
    fn stuttgart_split_merges_val() {
        let mut v = pair("a", "b", Label::Antonym);
        v.split = SplitTag::Val;
        let mut t = pair("c", "d", Label::Antonym);
        t.split = SplitTag::Test;
        let ds = PairDataset::from_pairs("d", [pair("e", "f", Label::Antonym), v, t]);
        let s = SplitSpec::stuttgart(&ds, true).unwrap();
        assert_eq!(s.train.len(), 2);
        let s = SplitSpec::stuttgart(&ds, false).unwrap();
        assert_eq!(s.train.len(), 1);
        assert_eq!(s.test.len(), 1);
    }

    proptest! {
        #[test]
        fn lexical_vocabularies_are_disjoint(seed in 0u64..1000, n in 20usize..200, frac in 0.1f64..0.5) {
            let ds = synthetic_antonyms(n, seed);
            if let Ok(s) = lexical_split(&ds, frac, seed) {
                s.validate(&ds).unwrap();
                let tr: HashSet<&str> = s.train.iter().flat_map(|&i| [ds.pairs()[i].word1.as_str(), ds.pairs()[i].word2.as_str()]).collect();
                for &i in &s.test {
                    prop_assert!(!tr.contains(ds.pairs()[i].word1.as_str()));
                    prop_assert!(!tr.contains(ds.pairs()[i].word2.as_str()));
                }
            }
        }

        #[test]
        fn shuffled_never_emits_real_pairs(seed in 0u64..500) {
            let ant = synthetic_antonyms(80, seed);
            let syn = PairDataset::from_pairs(
                "syn",
                synthetic_antonyms(80, seed + 1).pairs().iter().map(|p| {
                    let mut p = p.clone();
                    p.label = Label::Synonym;
                    p
                }),
            );
            let excl = ExclusionSet::from_datasets([&ant, &syn]);
            let out = make_shuffled(&ant, &excl, seed, ant.len() / 2).unwrap();
            for p in out.pairs() {
                prop_assert!(p.word1 != p.word2);
                prop_assert!(!excl.contains(&p.word1, &p.word2));
                prop_assert!(!excl.contains(&p.word2, &p.word1));
            }
        }
    }
}
