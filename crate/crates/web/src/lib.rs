//! Browser bindings: UMAP layouts of synthetic data, the UMAP curve fit and
//! transductive cluster voting. Each export wraps a plain function that the
//! native tests call directly.

use antsyn::classify::make_controls;
use antsyn::classify::transduce::{transduce, Clusterer};
use antsyn::linalg::{sq_euclidean, Matrix};
use antsyn::reduce::umap::{curve, fit_curve_params, umap_embed};
use antsyn::synth::{blobs, rings, toy_lexicon};
use antsyn::vectorize::difference_cloud;
use antsyn::{Label, Metric, UmapParams};
use wasm_bindgen::prelude::*;

/// A planar layout: `coords` is `[x0, y0, x1, y1, ...]`, `groups` the true
/// group of each point.
#[wasm_bindgen]
pub struct Layout {
    coords: Vec<f64>,
    groups: Vec<u32>,
    agreement: f64,
}

#[wasm_bindgen]
impl Layout {
    #[wasm_bindgen(getter)]
    pub fn coords(&self) -> Vec<f64> {
        self.coords.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn groups(&self) -> Vec<u32> {
        self.groups.clone()
    }

    /// Leave-one-out 5-NN vote agreement with the true groups.
    #[wasm_bindgen(getter)]
    pub fn agreement(&self) -> f64 {
        self.agreement
    }
}

fn label_group(l: Label) -> u32 {
    match l {
        Label::Antonym => 0,
        Label::ShuffledAntonym => 1,
        Label::Synonym => 2,
        Label::ShuffledSynonym => 3,
    }
}

fn knn_agreement(coords: &Matrix, groups: &[u32], k: usize) -> f64 {
    let n = coords.rows();
    let mut hits = 0;
    for i in 0..n {
        let mut d: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (sq_euclidean(coords.row(i), coords.row(j)), j))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut votes = [0usize; 4];
        for &(_, j) in d.iter().take(k) {
            votes[groups[j] as usize] += 1;
        }
        let best = (0..4).max_by_key(|&g| (votes[g], std::cmp::Reverse(g))).unwrap();
        hits += usize::from(best as u32 == groups[i]);
    }
    hits as f64 / n.max(1) as f64
}

fn shape_points(shape: &str, n_per: usize, seed: u64) -> Result<(Matrix, Vec<u32>), String> {
    let to_u32 = |v: Vec<usize>| v.into_iter().map(|g| g as u32).collect();
    match shape {
        "blobs" => {
            let centres: Vec<Vec<f64>> = (0..3)
                .map(|c| (0..10).map(|j| if j == c { 6.0 } else { 0.0 }).collect())
                .collect();
            let (m, g) = blobs(&centres, n_per, 1.0, seed);
            Ok((m, to_u32(g)))
        }
        "rings" => {
            let (m, g) = rings(&[1.0, 3.0], n_per, 0.08, seed);
            Ok((m, to_u32(g)))
        }
        "lexicon" => {
            let (store, pairs) = toy_lexicon(n_per, 16, 0.6, seed).map_err(|e| e.to_string())?;
            let controls = make_controls(&pairs, seed).map_err(|e| e.to_string())?;
            let c = difference_cloud(&[&pairs, &controls], &store).map_err(|e| e.to_string())?;
            Ok((c.points, c.labels.into_iter().map(label_group).collect()))
        }
        other => Err(format!("unknown shape {other:?}")),
    }
}

pub fn layout_native(
    shape: &str,
    n_per: usize,
    n_neighbors: usize,
    min_dist: f64,
    metric: &str,
    seed: u64,
) -> Result<Layout, String> {
    if !(5..=400).contains(&n_per) {
        return Err("points per group must be between 5 and 400".into());
    }
    let metric: Metric = metric.parse().map_err(|e: antsyn::Error| e.to_string())?;
    let (points, groups) = shape_points(shape, n_per, seed)?;
    let params = UmapParams {
        n_neighbors: n_neighbors.min(points.rows() - 1),
        min_dist,
        metric,
        n_epochs: Some(200),
        seed,
        ..UmapParams::default()
    };
    let coords = umap_embed(&points, &params).map_err(|e| e.to_string())?;
    let agreement = knn_agreement(&coords, &groups, 5);
    Ok(Layout { coords: coords.as_slice().to_vec(), groups, agreement })
}

/// UMAP layout of a synthetic set: `"blobs"` (three blobs in 10-D),
/// `"rings"` (two concentric rings) or `"lexicon"` (difference vectors of a
/// toy antonym/synonym lexicon with shuffled controls, groups 0-3 as
/// antonym, shuffled antonym, synonym, shuffled synonym).
#[wasm_bindgen]
pub fn layout(shape: &str, n_per: u32, n_neighbors: u32, min_dist: f64, metric: &str, seed: u32) -> Result<Layout, JsError> {
    layout_native(shape, n_per as usize, n_neighbors as usize, min_dist, metric, seed as u64).map_err(|e| JsError::new(&e))
}

/// `[a, b]` followed by 100 `(x, fitted, target)` triples on `[0, 3 * spread]`.
pub fn curve_native(min_dist: f64, spread: f64) -> Result<Vec<f64>, String> {
    let (a, b) = fit_curve_params(min_dist, spread).map_err(|e| e.to_string())?;
    let mut out = vec![a, b];
    for i in 0..100 {
        let x = 3.0 * spread * i as f64 / 99.0;
        let target = if x < min_dist { 1.0 } else { (-(x - min_dist) / spread).exp() };
        out.extend([x, curve(x, a, b), target]);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn fit_curve(min_dist: f64, spread: f64) -> Result<Vec<f64>, JsError> {
    curve_native(min_dist, spread).map_err(|e| JsError::new(&e))
}

/// Result of cluster voting on four 2-D blobs, two per class.
#[wasm_bindgen]
pub struct VoteDemo {
    coords: Vec<f64>,
    gold: Vec<u32>,
    predicted: Vec<i32>,
    accuracy: f64,
}

#[wasm_bindgen]
impl VoteDemo {
    #[wasm_bindgen(getter)]
    pub fn coords(&self) -> Vec<f64> {
        self.coords.clone()
    }

    /// Class of every point: 0 antonym, 1 synonym.
    #[wasm_bindgen(getter)]
    pub fn gold(&self) -> Vec<u32> {
        self.gold.clone()
    }

    /// Predicted class of every test point, -1 for training points.
    #[wasm_bindgen(getter)]
    pub fn predicted(&self) -> Vec<i32> {
        self.predicted.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }
}

pub fn vote_native(n_per: usize, spread: f64, train_fraction: f64, k: usize, method: &str, seed: u64) -> Result<VoteDemo, String> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err("train fraction must lie strictly between 0 and 1".into());
    }
    let centres = vec![vec![0.0, 0.0], vec![6.0, 0.0], vec![0.0, 6.0], vec![6.0, 6.0]];
    let (m, blob) = blobs(&centres, n_per, spread, seed);
    // Diagonal blobs share a class.
    let class = |b: usize| if b == 0 || b == 3 { Label::Antonym } else { Label::Synonym };
    let mut state = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let labels: Vec<Option<Label>> = blob.iter().map(|&b| (next() < train_fraction).then(|| class(b))).collect();
    let clusterer = match method {
        "kmeans" => Clusterer::kmeans(),
        "spectral" => Clusterer::spectral(),
        other => return Err(format!("unknown clusterer {other:?}")),
    };
    let k = k.clamp(2, m.rows());
    let r = transduce(&m, &labels, &clusterer, k, seed).map_err(|e| e.to_string())?;
    let code = |l: Label| if l == Label::Antonym { 0 } else { 1 };
    let mut predicted = vec![-1i32; m.rows()];
    let mut correct = 0;
    for (&i, &p) in r.test_indices.iter().zip(&r.predicted) {
        predicted[i] = code(p);
        correct += usize::from(p == class(blob[i]));
    }
    Ok(VoteDemo {
        coords: m.as_slice().to_vec(),
        gold: blob.iter().map(|&b| code(class(b)) as u32).collect(),
        predicted,
        accuracy: correct as f64 / r.test_indices.len().max(1) as f64,
    })
}

/// Clusters all points, labels each cluster by the majority of its training
/// points, and scores the test points.
#[wasm_bindgen]
pub fn cluster_vote(n_per: u32, spread: f64, train_fraction: f64, k: u32, method: &str, seed: u32) -> Result<VoteDemo, JsError> {
    vote_native(n_per as usize, spread, train_fraction, k as usize, method, seed as u64).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blob_layout_keeps_groups_apart() {
        let l = layout_native("blobs", 60, 15, 0.1, "euclidean", 1).unwrap();
        assert_eq!(l.coords.len(), 2 * 180);
        assert!(l.agreement > 0.95, "{}", l.agreement);
    }

    #[test]
    fn lexicon_layout_has_four_groups() {
        let l = layout_native("lexicon", 40, 10, 0.1, "euclidean", 0).unwrap();
        for g in 0..4 {
            assert_eq!(l.groups.iter().filter(|&&x| x == g).count(), 40);
        }
    }

    #[test]
    fn bad_inputs_are_errors() {
        assert!(layout_native("cubes", 50, 10, 0.1, "euclidean", 0).is_err());
        assert!(layout_native("blobs", 50, 10, 0.1, "manhattan", 0).is_err());
        assert!(vote_native(50, 1.0, 0.0, 4, "kmeans", 0).is_err());
        assert!(curve_native(2.0, 1.0).is_err());
    }

    #[test]
    fn curve_output_shape() {
        let c = curve_native(0.1, 1.0).unwrap();
        assert_eq!(c.len(), 2 + 300);
        assert!((c[0] - 1.577).abs() < 1e-3 && (c[1] - 0.895).abs() < 1e-3);
    }

    #[test]
    fn separated_blobs_vote_perfectly() {
        for method in ["kmeans", "spectral"] {
            let v = vote_native(80, 0.8, 0.2, 8, method, 3).unwrap();
            assert!(v.accuracy >= 0.98, "{method}: {}", v.accuracy);
            let train = v.predicted.iter().filter(|&&p| p < 0).count();
            assert!((40..=90).contains(&train), "{train} training points of 320");
        }
    }
}
