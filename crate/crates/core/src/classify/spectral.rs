//! Normalised spectral clustering on a kNN graph.

use super::kmeans::kmeans;
use super::ClusterAssignment;
use crate::error::{Error, Result};
use crate::linalg::{top_eigenpairs, Matrix, NormalizedAdjacency, SparseSym};
use crate::reduce::{knn_graph, Metric};
use crate::seed;

pub const N_INIT: usize = 10;

/// Binary kNN affinity, symmetrised by union.
pub fn knn_affinity(points: &Matrix, n_neighbors: usize) -> Result<SparseSym> {
    let g = knn_graph(points, n_neighbors, Metric::Euclidean)?;
    let mut triplets = Vec::with_capacity(2 * g.n() * g.k());
    for i in 0..g.n() {
        for &j in g.neighbors(i) {
            triplets.push((i, j, 1.0));
            triplets.push((j, i, 1.0));
        }
    }
    let w = SparseSym::from_triplets(g.n(), triplets);
    // Summing duplicates counts mutual edges twice; the union is binary.
    let binary = w.entries().map(|(i, j, _)| (i, j, 1.0)).collect();
    Ok(SparseSym::from_triplets(g.n(), binary))
}

/// The `k` bottom eigenvectors of the symmetric normalised Laplacian, found
/// as the top eigenvectors of `D^{-1/2} W D^{-1/2}`. The trivial
/// `D^{1/2} 1` direction is kept: after row normalisation it carries no
/// information on a connected graph, and on a disconnected one the
/// components share the top eigenvalue 1 so dropping one would lose a
/// component. Rows are scaled to unit length before k-means.
pub fn spectral_embedding(w: &SparseSym, k: usize, seed: u64) -> Result<Matrix> {
    let n = w.n();
    let pairs = top_eigenpairs(&NormalizedAdjacency::new(w), k, seed::stage_seed("spectral-eig", seed))?;
    let mut emb = Matrix::zeros(n, k);
    for (c, v) in pairs.vectors.iter().enumerate() {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Numeric("eigenvector has non-finite entries".into()));
        }
        for i in 0..n {
            emb.set(i, c, v[i]);
        }
    }
    for i in 0..n {
        let row = emb.row_mut(i);
        let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|x| *x /= norm);
        }
    }
    Ok(emb)
}

pub fn spectral_cluster(points: &Matrix, k: usize, n_neighbors: usize, seed: u64) -> Result<ClusterAssignment> {
    let n = points.rows();
    if n <= n_neighbors {
        return Err(Error::Param(format!(
            "spectral clustering needs more than {n_neighbors} points, got {n}"
        )));
    }
    if k == 0 || k > n {
        return Err(Error::Param(format!("cannot form {k} clusters from {n} points")));
    }
    if k == 1 {
        return Ok(ClusterAssignment {
            cluster_id: vec![0; n],
            k: 1,
            inertia: 0.0,
        });
    }
    let w = knn_affinity(points, n_neighbors)?;
    let emb = spectral_embedding(&w, k, seed)?;
    kmeans(&emb, k, seed::stage_seed("spectral-kmeans", seed), N_INIT)
}
