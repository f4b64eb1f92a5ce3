//! Projection of pair clouds to the plane: UMAP, exact t-SNE and PCA.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::pairdata::{Label, SplitTag, WordPair};
use crate::seed::digest_hex;
use crate::vectorize::LabeledCloud;

pub mod knn;
pub mod pca;
pub mod tsne;
pub mod umap;

pub use knn::{knn_graph, KnnGraph};
pub use pca::pca;
pub use tsne::{tsne, TsneParams};
pub use umap::umap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    Cosine,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Cosine => "cosine",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            other => Err(Error::Param(format!("unknown metric {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct UmapParams {
    pub n_neighbors: usize,
    pub min_dist: f64,
    pub metric: Metric,
    /// `None` picks 500 epochs below 10,000 points and 200 otherwise.
    pub n_epochs: Option<usize>,
    pub seed: u64,
    pub spread: f64,
    pub negative_sample_rate: usize,
}

impl Default for UmapParams {
    fn default() -> Self {
        UmapParams {
            n_neighbors: 30,
            min_dist: 0.1,
            metric: Metric::Euclidean,
            n_epochs: None,
            seed: 0,
            spread: 1.0,
            negative_sample_rate: 5,
        }
    }
}

impl UmapParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_neighbors < 2 {
            return Err(Error::Param(format!(
                "n_neighbors must be at least 2, got {}",
                self.n_neighbors
            )));
        }
        if !(self.spread > 0.0) {
            return Err(Error::Param("spread must be positive".into()));
        }
        if !(self.min_dist >= 0.0 && self.min_dist < self.spread) {
            return Err(Error::Param(format!(
                "min_dist must lie in [0, spread), got {}",
                self.min_dist
            )));
        }
        if self.negative_sample_rate == 0 {
            return Err(Error::Param("negative_sample_rate must be positive".into()));
        }
        if self.n_epochs == Some(0) {
            return Err(Error::Param("n_epochs must be positive".into()));
        }
        Ok(())
    }

    pub fn epochs_for(&self, n: usize) -> usize {
        self.n_epochs
            .unwrap_or(if n < 10_000 { 500 } else { 200 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    Umap,
    Tsne,
    Pca,
}

impl ProjectionMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ProjectionMethod::Umap => "umap",
            ProjectionMethod::Tsne => "tsne",
            ProjectionMethod::Pca => "pca",
        }
    }
}

impl fmt::Display for ProjectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProjectionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "umap" => Ok(ProjectionMethod::Umap),
            "tsne" => Ok(ProjectionMethod::Tsne),
            "pca" => Ok(ProjectionMethod::Pca),
            other => Err(Error::Param(format!("unknown projection method {other:?}"))),
        }
    }
}

/// Planar coordinates for every row of a cloud, with the cloud's labels
/// attached after the fact.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub coords: Matrix,
    pub labels: Vec<Label>,
    pub split_tags: Vec<SplitTag>,
    pub source_pairs: Vec<WordPair>,
    pub method: ProjectionMethod,
    pub params_digest: String,
}

impl Projection {
    pub fn new<P: Serialize>(
        cloud: &LabeledCloud,
        coords: Matrix,
        method: ProjectionMethod,
        params: &P,
    ) -> Result<Self> {
        if coords.rows() != cloud.len() {
            return Err(Error::Numeric(format!(
                "projection has {} rows for {} points",
                coords.rows(),
                cloud.len()
            )));
        }
        if !coords.is_finite() {
            return Err(Error::Numeric("projection contains non-finite coordinates".into()));
        }
        let json = serde_json::to_vec(params).expect("parameters serialise");
        Ok(Projection {
            coords,
            labels: cloud.labels.clone(),
            split_tags: cloud.split_tags.clone(),
            source_pairs: cloud.source_pairs.clone(),
            method,
            params_digest: digest_hex(&json)[..16].to_owned(),
        })
    }

    pub fn len(&self) -> usize {
        self.coords.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.rows() == 0
    }

    pub fn select(&self, idx: &[usize]) -> Projection {
        Projection {
            coords: self.coords.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            split_tags: idx.iter().map(|&i| self.split_tags[i]).collect(),
            source_pairs: idx.iter().map(|&i| self.source_pairs[i].clone()).collect(),
            method: self.method,
            params_digest: self.params_digest.clone(),
        }
    }
}
