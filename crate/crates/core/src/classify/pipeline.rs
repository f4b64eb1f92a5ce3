//! One cell of the accuracy tables: difference cloud, optional joint UMAP
//! projection, removal of the shuffled controls, classification, scoring.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::logreg::{fit_logreg, DEFAULT_L2};
use super::nn::{fit_shallow_nn, NnParams};
use super::transduce::{transduce, Clusterer, DEFAULT_K};
use super::ClassifierKind;
use crate::embedstore::EmbeddingStore;
use crate::error::{Error, Result};
use crate::eval::{score, EvalReport, TableColumn};
use crate::linalg::Matrix;
use crate::pairdata::{make_shuffled, ExclusionSet, Label, PairDataset, SplitSpec};
use crate::reduce::umap::umap_embed;
use crate::reduce::UmapParams;
use crate::seed;
use crate::vectorize::difference_cloud;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CellParams {
    pub umap: UmapParams,
    pub k: usize,
    pub kmeans_n_init: usize,
    pub spectral_neighbors: usize,
    pub l2: f64,
    pub nn: NnParams,
    pub seed: u64,
}

impl Default for CellParams {
    fn default() -> Self {
        CellParams {
            umap: UmapParams::default(),
            k: DEFAULT_K,
            kmeans_n_init: 10,
            spectral_neighbors: 10,
            l2: DEFAULT_L2,
            nn: NnParams::default(),
            seed: 0,
        }
    }
}

impl CellParams {
    /// The same parameters with every stage seeded from `seed`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.umap.seed = seed;
        self.nn.seed = seed;
        self
    }
}

/// Shuffled controls for the antonym and synonym pairs of `pairs`, one
/// control per real pair, drawn from the whole pair set rather than a split.
pub fn make_controls(pairs: &PairDataset, seed: u64) -> Result<PairDataset> {
    let exclude = ExclusionSet::from_datasets([pairs]);
    let mut out = PairDataset::new(format!("{}-controls", pairs.name));
    for label in [Label::Antonym, Label::Synonym] {
        let part = pairs.filter(label.as_str(), |p| p.label == label);
        if part.is_empty() {
            continue;
        }
        let s = seed::stage_seed(&format!("shuffle-{label}"), seed);
        out.extend(make_shuffled(&part, &exclude, s, part.len())?.pairs().iter().cloned());
    }
    Ok(out)
}

#[derive(Serialize)]
struct CellConfig<'a> {
    params: &'a CellParams,
    use_umap: bool,
    classifier: ClassifierKind,
    split: &'a SplitSpec,
    pairs: usize,
    controls: usize,
    source: &'a str,
}

/// The space a cell classifies in: the joint UMAP projection of pairs and
/// controls restricted to the pair rows, or the raw difference vectors.
/// Row `i` belongs to `pairs.pairs()[i]`.
pub fn feature_space(
    store: &EmbeddingStore,
    pairs: &PairDataset,
    controls: &PairDataset,
    use_umap: bool,
    params: &CellParams,
) -> Result<Matrix> {
    if pairs.pairs().iter().any(|p| p.label.is_shuffled()) || controls.pairs().iter().any(|p| !p.label.is_shuffled()) {
        return Err(Error::Param("pairs must be real and controls shuffled".into()));
    }
    let real: Vec<usize> = (0..pairs.len()).collect();
    if use_umap {
        let cloud = difference_cloud(&[pairs, controls], store)?;
        Ok(umap_embed(&cloud.points, &params.umap)?.select_rows(&real))
    } else {
        Ok(difference_cloud(&[pairs], store)?.points)
    }
}

/// Classifies the test rows of `space` and scores them.
pub fn classify_space(
    space: &Matrix,
    pairs: &PairDataset,
    split: &SplitSpec,
    classifier: ClassifierKind,
    params: &CellParams,
    config_digest: &str,
) -> Result<EvalReport> {
    if space.rows() != pairs.len() {
        return Err(Error::Param(format!("{} rows for {} pairs", space.rows(), pairs.len())));
    }
    if let Some(&i) = split.train.iter().chain(&split.test).find(|&&i| i >= pairs.len()) {
        return Err(Error::Split(format!("split refers to pair {i} of {}", pairs.len())));
    }
    let label = |i: usize| pairs.pairs()[i].label;
    let train: Vec<usize> = split.train.iter().copied().collect();
    let test: Vec<usize> = split.test.iter().copied().collect();
    let gold: Vec<Label> = test.iter().map(|&i| label(i)).collect();
    let pos: Vec<_> = test.iter().map(|&i| pairs.pairs()[i].pos).collect();

    let predicted: Vec<Label> = match classifier {
        ClassifierKind::LogReg | ClassifierKind::ShallowNn => {
            let x_train = space.select_rows(&train);
            let y_train: Vec<bool> = train.iter().map(|&i| label(i) == Label::Antonym).collect();
            let x_test = space.select_rows(&test);
            let out = if classifier == ClassifierKind::LogReg {
                fit_logreg(&x_train, &y_train, params.l2)?.predict(&x_test)
            } else {
                fit_shallow_nn(&x_train, &y_train, &params.nn)?.predict(&x_test)
            };
            out.into_iter()
                .map(|a| if a { Label::Antonym } else { Label::Synonym })
                .collect()
        }
        ClassifierKind::KMeans | ClassifierKind::Spectral => {
            let mut rows = train.clone();
            rows.extend(&test);
            let pts = space.select_rows(&rows);
            let labels: Vec<Option<Label>> = rows
                .iter()
                .enumerate()
                .map(|(r, &i)| (r < train.len()).then(|| label(i)))
                .collect();
            let clusterer = if classifier == ClassifierKind::KMeans {
                Clusterer::KMeans { n_init: params.kmeans_n_init }
            } else {
                Clusterer::Spectral { n_neighbors: params.spectral_neighbors }
            };
            transduce(&pts, &labels, &clusterer, params.k, params.seed)?.predicted
        }
    };
    score(&predicted, &gold, &pos, config_digest)
}

fn cell_digest(
    store: &EmbeddingStore,
    pairs: &PairDataset,
    controls: &PairDataset,
    split: &SplitSpec,
    use_umap: bool,
    classifier: ClassifierKind,
    params: &CellParams,
) -> String {
    let json = serde_json::to_vec(&CellConfig {
        params,
        use_umap,
        classifier,
        split,
        pairs: pairs.len(),
        controls: controls.len(),
        source: store.source().as_str(),
    })
    .expect("config serialises");
    seed::digest_hex(&json)[..16].to_owned()
}

/// Runs one table cell. `pairs` holds the antonym and synonym pairs that
/// `split` indexes into; `controls` are shuffled pairs that take part in the
/// projection only.
pub fn run_table_cell(
    store: &EmbeddingStore,
    pairs: &PairDataset,
    controls: &PairDataset,
    split: &SplitSpec,
    use_umap: bool,
    classifier: ClassifierKind,
    params: &CellParams,
) -> Result<EvalReport> {
    split.validate(pairs)?;
    let space = feature_space(store, pairs, controls, use_umap, params)?;
    let digest = cell_digest(store, pairs, controls, split, use_umap, classifier, params);
    classify_space(&space, pairs, split, classifier, params, &digest)
}

/// One model's row of the accuracy table: all eight cells, each run once per
/// seed. Controls and the projection are regenerated per seed; the four
/// classifiers of a seed share one projection.
pub fn run_table_row(
    store: &EmbeddingStore,
    pairs: &PairDataset,
    split: &SplitSpec,
    params: &CellParams,
    seeds: &[u64],
) -> Result<BTreeMap<TableColumn, Vec<EvalReport>>> {
    split.validate(pairs)?;
    let mut out: BTreeMap<TableColumn, Vec<EvalReport>> = BTreeMap::new();
    for &s in seeds {
        let p = params.clone().with_seed(s);
        let controls = make_controls(pairs, s)?;
        for use_umap in [false, true] {
            let space = feature_space(store, pairs, &controls, use_umap, &p)?;
            for classifier in ClassifierKind::ALL {
                let digest = cell_digest(store, pairs, &controls, split, use_umap, classifier, &p);
                let report = classify_space(&space, pairs, split, classifier, &p, &digest)?;
                out.entry(TableColumn { use_umap, classifier }).or_default().push(report);
            }
        }
    }
    Ok(out)
}
