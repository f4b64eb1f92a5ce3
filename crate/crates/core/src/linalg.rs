//! Dense row-major matrices and a symmetric eigensolver for the graph
//! Laplacians used by spectral initialisation and spectral clustering.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Row-major dense `f64` matrix. One row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Param(format!(
                "matrix data has {} entries, expected {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equal-length rows. An empty iterator gives a
    /// `0 x cols` matrix.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Param(format!(
                    "row {i} has length {}, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Selects a subset of rows, in the given order.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum()
}

/// A symmetric linear operator on `R^n`.
pub trait SymOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Leading eigenpairs of a symmetric operator.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    /// Eigenvalues, largest first.
    pub values: Vec<f64>,
    /// `vectors[j]` is the unit eigenvector belonging to `values[j]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Below this dimension the operator is materialised and diagonalised densely.
const DENSE_LIMIT: usize = 1200;

/// Computes the `k` algebraically largest eigenpairs of `op`.
///
/// Small operators are diagonalised densely. Larger ones use a restarted
/// block Krylov method, which copes with repeated eigenvalues (several
/// connected components in a graph) up to the block size.
pub fn top_eigenpairs(op: &dyn SymOp, k: usize, seed: u64) -> Result<EigenPairs> {
    let n = op.dim();
    if k == 0 || k > n {
        return Err(Error::Param(format!(
            "cannot extract {k} eigenpairs from a {n}-dimensional operator"
        )));
    }
    if n <= DENSE_LIMIT {
        dense_top(op, k)
    } else {
        block_krylov_top(op, k, seed)
    }
}

fn dense_top(op: &dyn SymOp, k: usize) -> Result<EigenPairs> {
    let n = op.dim();
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply(&e, &mut col);
        e[j] = 0.0;
        for i in 0..n {
            m[(i, j)] = col[i];
        }
    }
    let m = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("dense symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order[..k].iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = order[..k]
        .iter()
        .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
        .collect();
    Ok(EigenPairs { values, vectors })
}

fn block_krylov_top(op: &dyn SymOp, k: usize, seed: u64) -> Result<EigenPairs> {
    let n = op.dim();
    let block = (k + 8).min(n);
    let depth = 10;
    let max_restarts = 60;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();

    let mut best: Option<EigenPairs> = None;
    for _ in 0..max_restarts {
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let mut images: Vec<Vec<f64>> = Vec::new();
        let mut frontier = std::mem::take(&mut start);
        for _ in 0..=depth {
            let mut next = Vec::with_capacity(frontier.len());
            for mut v in frontier {
                for _ in 0..2 {
                    for q in &basis {
                        let c = dot(q, &v);
                        v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
                    }
                }
                let nv = norm(&v);
                if nv < 1e-10 {
                    continue;
                }
                v.iter_mut().for_each(|x| *x /= nv);
                let mut av = vec![0.0; n];
                op.apply(&v, &mut av);
                basis.push(v);
                next.push(av.clone());
                images.push(av);
            }
            if next.is_empty() || basis.len() >= n {
                break;
            }
            frontier = next;
        }

        let m = basis.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = 0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]));
                t[(i, j)] = v;
                t[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::try_new(t, f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numeric("projected eigenproblem did not converge".into()))?;
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

        let scale = eig.eigenvalues.iter().fold(1e-300f64, |s, v| s.max(v.abs()));
        let mut values = Vec::with_capacity(block);
        let mut vectors = Vec::with_capacity(block);
        let mut converged = true;
        for (rank, &j) in order.iter().take(block.min(m)).enumerate() {
            let y = eig.eigenvectors.column(j);
            let mut x = vec![0.0; n];
            let mut ax = vec![0.0; n];
            for (l, &c) in y.iter().enumerate() {
                x.iter_mut().zip(&basis[l]).for_each(|(xi, b)| *xi += c * b);
                ax.iter_mut().zip(&images[l]).for_each(|(xi, b)| *xi += c * b);
            }
            let theta = eig.eigenvalues[j];
            if rank < k {
                let res: f64 = ax
                    .iter()
                    .zip(&x)
                    .map(|(a, b)| (a - theta * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if res > 1e-8 * scale {
                    converged = false;
                }
            }
            values.push(theta);
            vectors.push(x);
        }
        if values.len() < k {
            return Err(Error::Numeric(format!(
                "Krylov basis collapsed to {} vectors, {k} requested",
                values.len()
            )));
        }
        let pairs = EigenPairs {
            values: values[..k].to_vec(),
            vectors: vectors[..k].to_vec(),
        };
        if converged {
            return Ok(pairs);
        }
        best = Some(pairs);
        start = vectors;
        while start.len() < block {
            start.push((0..n).map(|_| StandardNormal.sample(&mut rng)).collect());
        }
    }
    // Residuals never reached tolerance; the last Ritz pairs are still the
    // best available approximation.
    best.ok_or_else(|| Error::Numeric("block Krylov eigensolver failed".into()))
}

/// Sparse symmetric matrix in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSym {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSym {
    /// Builds from `(row, col, value)` triplets that already describe a
    /// symmetric matrix. Duplicate entries are summed.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in triplets {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            indptr[i + 1] += 1;
            indices.push(j);
            values.push(v);
            last = Some((i, j));
        }
        for i in 0..n {
            indptr[i + 1] += indptr[i];
        }
        SparseSym {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => 0.0,
        }
    }

    /// All stored entries as `(row, col, value)`, row-major.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn degrees(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }
}

/// `D^{-1/2} W D^{-1/2}`; its top eigenvectors are the bottom eigenvectors of
/// the symmetric normalised Laplacian `I - D^{-1/2} W D^{-1/2}`.
pub struct NormalizedAdjacency<'a> {
    w: &'a SparseSym,
    inv_sqrt_deg: Vec<f64>,
}

impl<'a> NormalizedAdjacency<'a> {
    pub fn new(w: &'a SparseSym) -> Self {
        let inv_sqrt_deg = w
            .degrees()
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        NormalizedAdjacency { w, inv_sqrt_deg }
    }
}

impl SymOp for NormalizedAdjacency<'_> {
    fn dim(&self) -> usize {
        self.w.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let s: f64 = self
                .w
                .row(i)
                .map(|(j, v)| v * self.inv_sqrt_deg[j] * x[j])
                .sum();
            *yi = self.inv_sqrt_deg[i] * s;
        }
    }
}
