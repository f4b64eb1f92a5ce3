//! Exact k-nearest-neighbour graphs.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::Metric;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, sq_euclidean, Matrix};

/// `k` neighbours per point, closest first. Ties are broken by index.
#[derive(Debug, Clone, PartialEq)]
pub struct KnnGraph {
    k: usize,
    indices: Vec<usize>,
    distances: Vec<f64>,
}

impl KnnGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.indices.len() / self.k
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[i * self.k..(i + 1) * self.k]
    }

    pub fn distances(&self, i: usize) -> &[f64] {
        &self.distances[i * self.k..(i + 1) * self.k]
    }
}

/// Distance function over raw rows. Cosine distance is `1 - cos`, with a
/// zero row at distance 0 from another zero row and 1 from anything else.
pub(crate) struct DistanceFn<'a> {
    points: &'a Matrix,
    metric: Metric,
    norms: Vec<f64>,
}

impl<'a> DistanceFn<'a> {
    pub(crate) fn new(points: &'a Matrix, metric: Metric) -> Self {
        let norms = match metric {
            Metric::Cosine => points.iter_rows().map(norm).collect(),
            Metric::Euclidean => Vec::new(),
        };
        DistanceFn {
            points,
            metric,
            norms,
        }
    }

    #[inline]
    pub(crate) fn dist(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.points.row(i), self.points.row(j));
        match self.metric {
            Metric::Euclidean => sq_euclidean(a, b).sqrt(),
            Metric::Cosine => {
                let (na, nb) = (self.norms[i], self.norms[j]);
                if na == 0.0 && nb == 0.0 {
                    0.0
                } else if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    (1.0 - dot(a, b) / (na * nb)).max(0.0)
                }
            }
        }
    }
}

fn row_neighbors(df: &DistanceFn<'_>, i: usize, n: usize, k: usize) -> Vec<(f64, usize)> {
    let mut cand: Vec<(f64, usize)> = (0..n)
        .filter(|&j| j != i)
        .map(|j| (df.dist(i, j), j))
        .collect();
    let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < cand.len() {
        cand.select_nth_unstable_by(k - 1, cmp);
        cand.truncate(k);
    }
    cand.sort_by(cmp);
    cand
}

/// Brute-force exact kNN graph; a point is never its own neighbour, but an
/// exact duplicate of it is a neighbour at distance 0.
pub fn knn_graph(points: &Matrix, k: usize, metric: Metric) -> Result<KnnGraph> {
    let n = points.rows();
    if k == 0 || k >= n {
        return Err(Error::Param(format!(
            "k = {k} neighbours needs more than {k} points, got {n}"
        )));
    }
    if !points.is_finite() {
        return Err(Error::Data("input points contain non-finite values".into()));
    }
    let df = DistanceFn::new(points, metric);
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<(f64, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| row_neighbors(&df, i, n, k))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<(f64, usize)>> = (0..n).map(|i| row_neighbors(&df, i, n, k)).collect();

    let mut indices = Vec::with_capacity(n * k);
    let mut distances = Vec::with_capacity(n * k);
    for row in rows {
        for (d, j) in row {
            indices.push(j);
            distances.push(d);
        }
    }
    Ok(KnnGraph {
        k,
        indices,
        distances,
    })
}
