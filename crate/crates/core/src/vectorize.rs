//! Pair vectors: difference (`E(word2) - E(word1)`) and concatenation
//! clouds, and within-pair cosine similarities.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embedstore::EmbeddingStore;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pairdata::{Label, PairDataset, SplitTag, WordPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Difference,
    Concatenation,
}

impl Construction {
    pub fn as_str(self) -> &'static str {
        match self {
            Construction::Difference => "diff",
            Construction::Concatenation => "concat",
        }
    }
}

impl fmt::Display for Construction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Construction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "diff" | "difference" => Ok(Construction::Difference),
            "concat" | "concatenation" => Ok(Construction::Concatenation),
            other => Err(Error::Param(format!("unknown vector construction {other:?}"))),
        }
    }
}

/// One row per word pair, with the pair's label and split tag carried along.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledCloud {
    pub points: Matrix,
    pub labels: Vec<Label>,
    pub split_tags: Vec<SplitTag>,
    pub construction: Construction,
    pub source_pairs: Vec<WordPair>,
}

impl LabeledCloud {
    pub fn len(&self) -> usize {
        self.points.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.rows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    /// Keeps the rows at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> LabeledCloud {
        LabeledCloud {
            points: self.points.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            split_tags: idx.iter().map(|&i| self.split_tags[i]).collect(),
            construction: self.construction,
            source_pairs: idx.iter().map(|&i| self.source_pairs[i].clone()).collect(),
        }
    }

    pub fn without_shuffled(&self) -> LabeledCloud {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| !self.labels[i].is_shuffled())
            .collect();
        self.select(&idx)
    }
}

fn build_cloud(
    data: &[&PairDataset],
    store: &EmbeddingStore,
    construction: Construction,
) -> Result<LabeledCloud> {
    let d = store.dim();
    let cols = match construction {
        Construction::Difference => d,
        Construction::Concatenation => 2 * d,
    };
    let n: usize = data.iter().map(|ds| ds.len()).sum();
    let mut flat = Vec::with_capacity(n * cols);
    let mut labels = Vec::with_capacity(n);
    let mut split_tags = Vec::with_capacity(n);
    let mut source_pairs = Vec::with_capacity(n);
    for ds in data {
        for p in ds.pairs() {
            let e1 = store.require(&p.word1)?;
            let e2 = store.require(&p.word2)?;
            match construction {
                Construction::Difference => {
                    flat.extend(e1.iter().zip(e2).map(|(a, b)| *b as f64 - *a as f64));
                }
                Construction::Concatenation => {
                    flat.extend(e1.iter().chain(e2).map(|&v| v as f64));
                }
            }
            labels.push(p.label);
            split_tags.push(p.split);
            source_pairs.push(p.clone());
        }
    }
    Ok(LabeledCloud {
        points: Matrix::from_vec(n, cols, flat)?,
        labels,
        split_tags,
        construction,
        source_pairs,
    })
}

/// Row `i` is `E(word2_i) - E(word1_i)`. Datasets are stacked in order.
pub fn difference_cloud(data: &[&PairDataset], store: &EmbeddingStore) -> Result<LabeledCloud> {
    build_cloud(data, store, Construction::Difference)
}

/// Row `i` is `E(word1_i)` followed by `E(word2_i)`.
pub fn concat_cloud(data: &[&PairDataset], store: &EmbeddingStore) -> Result<LabeledCloud> {
    build_cloud(data, store, Construction::Concatenation)
}

pub fn cloud(data: &[&PairDataset], store: &EmbeddingStore, construction: Construction) -> Result<LabeledCloud> {
    build_cloud(data, store, construction)
}

pub fn cosine(a: &[f32], b: &[f32]) -> Option<f64> {
    let (mut ab, mut aa, mut bb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (x as f64, y as f64);
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == 0.0 || bb == 0.0 {
        return None;
    }
    Some((ab / (aa.sqrt() * bb.sqrt())).clamp(-1.0, 1.0))
}

/// Cosine similarity between the two words of every pair.
pub fn pair_cosines(data: &PairDataset, store: &EmbeddingStore) -> Result<Vec<f64>> {
    data.pairs()
        .iter()
        .map(|p| {
            let e1 = store.require(&p.word1)?;
            let e2 = store.require(&p.word2)?;
            cosine(e1, e2).ok_or_else(|| {
                let zero = if e1.iter().all(|v| *v == 0.0) { &p.word1 } else { &p.word2 };
                Error::Numeric(format!("zero vector for {zero:?}"))
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedstore::EmbeddingSource;
    use crate::pairdata::Pos;
    use proptest::prelude::*;

    fn store(entries: &[(&str, &[f32])]) -> EmbeddingStore {
        let mut s = EmbeddingStore::new(entries[0].1.len(), EmbeddingSource::Glove).unwrap();
        for (w, v) in entries {
            s.insert((*w).into(), v).unwrap();
        }
        s
    }

    fn ds(label: Label, pairs: &[(&str, &str)]) -> PairDataset {
        PairDataset::from_pairs(
            label.as_str(),
            pairs
                .iter()
                .map(|(a, b)| WordPair::new(a, b, Pos::Adjective, label, SplitTag::None).unwrap()),
        )
    }

    #[test]
    fn difference_row() {
        let s = store(&[("a", &[1.0, 2.0]), ("b", &[4.0, 6.0])]);
        let c = difference_cloud(&[&ds(Label::Antonym, &[("a", "b")])], &s).unwrap();
        assert_eq!(c.points.row(0), &[3.0, 4.0]);
        assert_eq!(c.construction, Construction::Difference);
    }

    #[test]
    fn identical_vectors_give_zero_row() {
        let s = store(&[("a", &[1.0, 2.0]), ("b", &[1.0, 2.0])]);
        let c = difference_cloud(&[&ds(Label::Antonym, &[("a", "b")])], &s).unwrap();
        assert_eq!(c.points.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn four_datasets_stack_in_order() {
        let s = store(&[("a", &[1.0]), ("b", &[2.0]), ("c", &[3.0]), ("d", &[5.0])]);
        let sets: Vec<PairDataset> = Label::ALL
            .iter()
            .map(|&l| ds(l, &[("a", "b"), ("c", "d")]))
            .collect();
        let refs: Vec<&PairDataset> = sets.iter().collect();
        let c = difference_cloud(&refs, &s).unwrap();
        assert_eq!(c.len(), 8);
        let labels: Vec<Label> = Label::ALL.iter().flat_map(|&l| [l, l]).collect();
        assert_eq!(c.labels, labels);
        assert_eq!(c.without_shuffled().len(), 4);
    }

    #[test]
    fn concat_row_and_width() {
        let s = store(&[("a", &[1.0, 2.0]), ("b", &[4.0, 6.0])]);
        let c = concat_cloud(&[&ds(Label::Synonym, &[("a", "b")])], &s).unwrap();
        assert_eq!(c.points.row(0), &[1.0, 2.0, 4.0, 6.0]);
        let wide = store(&[("a", &[0.5; 768]), ("b", &[0.25; 768])]);
        assert_eq!(concat_cloud(&[&ds(Label::Synonym, &[("a", "b")])], &wide).unwrap().dim(), 1536);
        assert!(concat_cloud(&[], &s).unwrap().is_empty());
    }

    #[test]
    fn uncovered_word_is_lookup_error() {
        let s = store(&[("a", &[1.0])]);
        let err = difference_cloud(&[&ds(Label::Antonym, &[("a", "zzz")])], &s).unwrap_err();
        assert!(matches!(err, Error::Lookup(w) if w == "zzz"));
    }

    #[test]
    fn cosine_cases() {
        let s = store(&[("x", &[1.0, 0.0]), ("y", &[0.0, 1.0]), ("x2", &[2.0, 0.0]), ("nx", &[-1.0, 0.0]), ("z", &[0.0, 0.0])]);
        let got = pair_cosines(&ds(Label::Antonym, &[("x", "y"), ("x2", "x"), ("x", "nx")]), &s).unwrap();
        assert_eq!(got, vec![0.0, 1.0, -1.0]);
        let err = pair_cosines(&ds(Label::Antonym, &[("x", "z")]), &s).unwrap_err();
        assert!(err.to_string().contains("\"z\""));
    }

    proptest! {
        #[test]
        fn swapping_words_negates_difference(v in prop::collection::vec(-100f32..100.0, 6)) {
            let s = store(&[("a", &v[..3]), ("b", &v[3..])]);
            let fwd = difference_cloud(&[&ds(Label::Antonym, &[("a", "b")])], &s).unwrap();
            let rev = difference_cloud(&[&ds(Label::Antonym, &[("b", "a")])], &s).unwrap();
            for (x, y) in fwd.points.row(0).iter().zip(rev.points.row(0)) {
                prop_assert_eq!(*x, -*y);
            }
        }

        #[test]
        fn cosine_is_scale_invariant(
            v in prop::collection::vec(-10f32..10.0, 8),
            s1 in 0.01f32..100.0,
            s2 in 0.01f32..100.0,
        ) {
            let (a, b) = v.split_at(4);
            prop_assume!(a.iter().any(|x| *x != 0.0) && b.iter().any(|x| *x != 0.0));
            let base = cosine(a, b).unwrap();
            let sa: Vec<f32> = a.iter().map(|x| x * s1).collect();
            let sb: Vec<f32> = b.iter().map(|x| x * s2).collect();
            prop_assert!((cosine(&sa, &sb).unwrap() - base).abs() < 1e-5);
        }
    }
}
