//! Clustering, supervised baselines and the transductive cluster vote.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod kmeans;
pub mod logreg;
pub mod nn;
pub mod pipeline;
pub mod spectral;
pub mod transduce;

pub use kmeans::kmeans;
pub use logreg::{fit_logreg, LinearModel};
pub use nn::{fit_shallow_nn, NnModel, NnParams};
pub use pipeline::{make_controls, run_table_cell, run_table_row, CellParams};
pub use spectral::spectral_cluster;
pub use transduce::{transduce, Clusterer, TransductiveResult};

/// Cluster ids for every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub cluster_id: Vec<usize>,
    pub k: usize,
    /// Sum of squared distances to the assigned centroid, in the space the
    /// final k-means ran in.
    pub inertia: f64,
}

impl ClusterAssignment {
    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &c in &self.cluster_id {
            s[c] += 1;
        }
        s
    }
}

/// The four classifier columns of the accuracy tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    LogReg,
    ShallowNn,
    KMeans,
    Spectral,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::LogReg,
        ClassifierKind::ShallowNn,
        ClassifierKind::KMeans,
        ClassifierKind::Spectral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::LogReg => "lr",
            ClassifierKind::ShallowNn => "nn",
            ClassifierKind::KMeans => "kmeans",
            ClassifierKind::Spectral => "spectral",
        }
    }

    pub fn table_name(self) -> &'static str {
        match self {
            ClassifierKind::LogReg => "LR",
            ClassifierKind::ShallowNn => "ShallowNN",
            ClassifierKind::KMeans => "KMeans",
            ClassifierKind::Spectral => "Spectral",
        }
    }

    pub fn is_transductive(self) -> bool {
        matches!(self, ClassifierKind::KMeans | ClassifierKind::Spectral)
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lr" | "logreg" => Ok(ClassifierKind::LogReg),
            "nn" | "shallow_nn" => Ok(ClassifierKind::ShallowNn),
            "kmeans" => Ok(ClassifierKind::KMeans),
            "spectral" => Ok(ClassifierKind::Spectral),
            other => Err(Error::Param(format!("unknown classifier {other:?}"))),
        }
    }
}

/// Per-column mean and scale; constant columns keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(points: &crate::linalg::Matrix) -> Self {
        let (n, d) = (points.rows() as f64, points.cols());
        let mut mean = vec![0.0; d];
        for r in points.iter_rows() {
            mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for r in points.iter_rows() {
            for j in 0..d {
                var[j] += (r[j] - mean[j]).powi(2);
            }
        }
        let scale = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 1e-12 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, points: &crate::linalg::Matrix) -> crate::linalg::Matrix {
        let mut out = points.clone();
        for i in 0..out.rows() {
            for (j, v) in out.row_mut(i).iter_mut().enumerate() {
                *v = (*v - self.mean[j]) / self.scale[j];
            }
        }
        out
    }
}

pub(crate) fn check_binary_fit(points: &crate::linalg::Matrix, labels: &[bool]) -> Result<()> {
    if points.rows() != labels.len() {
        return Err(Error::Param(format!(
            "{} points but {} labels",
            points.rows(),
            labels.len()
        )));
    }
    if !labels.iter().any(|&l| l) || labels.iter().all(|&l| l) {
        return Err(Error::Fit("training set holds only one class".into()));
    }
    if !points.is_finite() {
        return Err(Error::Data("training points contain non-finite values".into()));
    }
    Ok(())
}
