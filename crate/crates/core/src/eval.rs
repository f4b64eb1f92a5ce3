//! Classification metrics, cosine-similarity histograms and the accuracy
//! tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::embedstore::EmbeddingSource;
use crate::error::{Error, Result};
use crate::pairdata::{Label, Pos};

/// Positive class for the binary metrics.
pub const POSITIVE: Label = Label::Antonym;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class: BTreeMap<Label, ClassMetrics>,
    pub macro_f1: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    pub per_class: BTreeMap<Label, ClassMetrics>,
    pub macro_f1: f64,
    pub per_pos: BTreeMap<Pos, Metrics>,
    pub n_test: usize,
    pub config_digest: String,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn metrics(predicted: &[Label], gold: &[Label]) -> Metrics {
    let mut classes: Vec<Label> = gold.iter().chain(predicted).copied().collect();
    classes.sort();
    classes.dedup();
    let correct = predicted.iter().zip(gold).filter(|(p, g)| p == g).count();
    let mut per_class = BTreeMap::new();
    for &c in &classes {
        let tp = predicted.iter().zip(gold).filter(|(p, g)| **p == c && **g == c).count();
        let pred_c = predicted.iter().filter(|p| **p == c).count();
        let support = gold.iter().filter(|g| **g == c).count();
        let precision = ratio(tp, pred_c);
        let recall = ratio(tp, support);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        per_class.insert(
            c,
            ClassMetrics {
                precision,
                recall,
                f1,
                support,
            },
        );
    }
    let macro_f1 = if per_class.is_empty() {
        0.0
    } else {
        per_class.values().map(|m| m.f1).sum::<f64>() / per_class.len() as f64
    };
    Metrics {
        accuracy: ratio(correct, gold.len()),
        per_class,
        macro_f1,
        n: gold.len(),
    }
}

/// Confusion-matrix metrics overall and per part of speech.
pub fn score(predicted: &[Label], gold: &[Label], pos_tags: &[Pos], config_digest: &str) -> Result<EvalReport> {
    if predicted.len() != gold.len() || gold.len() != pos_tags.len() {
        return Err(Error::Param(format!(
            "score got {} predictions, {} gold labels and {} POS tags",
            predicted.len(),
            gold.len(),
            pos_tags.len()
        )));
    }
    if gold.is_empty() {
        return Err(Error::Param("nothing to score".into()));
    }
    let overall = metrics(predicted, gold);
    let mut per_pos = BTreeMap::new();
    for pos in Pos::ALL {
        let idx: Vec<usize> = (0..gold.len()).filter(|&i| pos_tags[i] == pos).collect();
        if idx.is_empty() {
            continue;
        }
        let p: Vec<Label> = idx.iter().map(|&i| predicted[i]).collect();
        let g: Vec<Label> = idx.iter().map(|&i| gold[i]).collect();
        per_pos.insert(pos, metrics(&p, &g));
    }
    Ok(EvalReport {
        accuracy: overall.accuracy,
        per_class: overall.per_class,
        macro_f1: overall.macro_f1,
        per_pos,
        n_test: gold.len(),
        config_digest: config_digest.to_owned(),
    })
}

/// Mean and sample standard deviation of a cell across seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

pub fn aggregate(values: &[f64]) -> Option<Aggregate> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some(Aggregate {
        mean,
        std,
        runs: values.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSpec {
    pub bin_edges: Vec<f64>,
    pub counts: BTreeMap<Label, Vec<usize>>,
}

pub const DEFAULT_BINS: usize = 50;

/// Uniform bins over `[-1, 1]`; every bin is `[lo, hi)` except the last,
/// which also holds 1.
pub fn cosine_histogram(values: &BTreeMap<Label, Vec<f64>>, n_bins: usize) -> Result<HistogramSpec> {
    if n_bins == 0 {
        return Err(Error::Param("histogram needs at least one bin".into()));
    }
    let bin_edges: Vec<f64> = (0..=n_bins)
        .map(|i| -1.0 + 2.0 * i as f64 / n_bins as f64)
        .collect();
    let mut counts = BTreeMap::new();
    for (&label, vals) in values {
        let mut c = vec![0usize; n_bins];
        for &v in vals {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::Data(format!("cosine value {v} outside [-1, 1]")));
            }
            let b = (((v + 1.0) / 2.0) * n_bins as f64).floor() as usize;
            c[b.min(n_bins - 1)] += 1;
        }
        counts.insert(label, c);
    }
    Ok(HistogramSpec { bin_edges, counts })
}

impl HistogramSpec {
    /// TSV with columns `bin_lo, bin_hi` and one count column per label.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("bin_lo\tbin_hi");
        for l in self.counts.keys() {
            let _ = write!(out, "\t{l}");
        }
        out.push('\n');
        for b in 0..self.bin_edges.len() - 1 {
            let _ = write!(out, "{:.4}\t{:.4}", self.bin_edges[b], self.bin_edges[b + 1]);
            for c in self.counts.values() {
                let _ = write!(out, "\t{}", c[b]);
            }
            out.push('\n');
        }
        out
    }
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// The eight classifier columns of the accuracy tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TableColumn {
    pub use_umap: bool,
    pub classifier: crate::classify::ClassifierKind,
}

impl TableColumn {
    pub fn all() -> Vec<TableColumn> {
        use crate::classify::ClassifierKind::*;
        [false, true]
            .iter()
            .flat_map(|&use_umap| {
                [LogReg, ShallowNn, KMeans, Spectral]
                    .into_iter()
                    .map(move |classifier| TableColumn { use_umap, classifier })
            })
            .collect()
    }

    pub fn header(&self) -> String {
        format!(
            "{} {}",
            if self.use_umap { "UMAP" } else { "Non-UMAP" },
            self.classifier.table_name()
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableLayout {
    /// Lexical split.
    Table3,
    /// The dataset's own split.
    Table4,
}

impl TableLayout {
    pub fn caption(self) -> &'static str {
        match self {
            TableLayout::Table3 => "Transductive inference results on the lexical data split.",
            TableLayout::Table4 => "Transductive inference results on the Stuttgart data split.",
        }
    }
}

/// Cell values keyed by model row and classifier column.
pub type TableGrid = BTreeMap<(EmbeddingSource, TableColumn), f64>;

pub const GAP: &str = "—";

fn cell(grid: &TableGrid, src: EmbeddingSource, col: &TableColumn) -> String {
    grid.get(&(src, *col))
        .map(|v| format!("{v:.4}"))
        .unwrap_or_else(|| GAP.to_owned())
}

/// Renders a grid as CSV and as an aligned text table, rows in the fixed
/// model order and columns Non-UMAP then UMAP x (LR, ShallowNN, KMeans,
/// Spectral). Missing cells are rendered as `—`.
pub fn emit_tables(grid: &TableGrid, layout: TableLayout) -> (String, String) {
    let cols = TableColumn::all();
    let mut csv = String::from("Dataset");
    for c in &cols {
        let _ = write!(csv, ",{}", c.header());
    }
    csv.push('\n');
    for src in EmbeddingSource::ALL {
        csv.push_str(src.table_name());
        for c in &cols {
            let _ = write!(csv, ",{}", cell(grid, src, c));
        }
        csv.push('\n');
    }

    let name_w = EmbeddingSource::ALL
        .iter()
        .map(|s| s.table_name().chars().count())
        .max()
        .unwrap_or(0)
        .max("Dataset".len());
    let mut text = format!("{}\n", layout.caption());
    let _ = write!(text, "{:<name_w$} | {:^43} | {:^43}\n", "", "Non-UMAP", "UMAP");
    let _ = write!(text, "{:<name_w$} |", "Dataset");
    for (i, c) in cols.iter().enumerate() {
        if i == 4 {
            text.push_str(" |");
        }
        let _ = write!(text, " {:>9}", c.classifier.table_name());
    }
    text.push('\n');
    for src in EmbeddingSource::ALL {
        let pad = name_w - src.table_name().chars().count();
        let _ = write!(text, "{}{} |", src.table_name(), " ".repeat(pad));
        for (i, c) in cols.iter().enumerate() {
            if i == 4 {
                text.push_str(" |");
            }
            let v = cell(grid, src, c);
            let pad = 9usize.saturating_sub(v.chars().count());
            let _ = write!(text, " {}{}", " ".repeat(pad), v);
        }
        text.push('\n');
    }
    (csv, text)
}
