//! Exact (all-pairs) t-SNE.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Projection, ProjectionMethod};
use crate::error::{Error, Result};
use crate::linalg::{sq_euclidean, Matrix};
use crate::seed;
use crate::vectorize::LabeledCloud;

/// Largest input the dense `N x N` affinity matrices are built for.
pub const MAX_POINTS: usize = 20_000;
const EARLY_EXAGGERATION: f64 = 12.0;
const PERPLEXITY_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TsneParams {
    pub perplexity: f64,
    pub n_iter: usize,
    pub seed: u64,
    /// `None` uses `max(N / 48, 50)`.
    pub learning_rate: Option<f64>,
}

impl Default for TsneParams {
    fn default() -> Self {
        TsneParams {
            perplexity: 30.0,
            n_iter: 1000,
            seed: 0,
            learning_rate: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TsneResult {
    pub coords: Matrix,
    /// KL(P || Q) against the unexaggerated P, one entry per iteration.
    pub kl_history: Vec<f64>,
}

/// Row-conditional Gaussian affinities `p_{j|i}` whose perplexity
/// `2^{H(P_i)}` (entropy in bits) matches `perplexity`. Returns the
/// row-major `N x N` matrix.
pub fn conditional_affinities(points: &Matrix, perplexity: f64) -> Vec<f64> {
    let n = points.rows();
    let target = perplexity.log2();
    let row = |i: usize| -> Vec<f64> {
        let d: Vec<f64> = (0..n)
            .map(|j| if j == i { 0.0 } else { sq_euclidean(points.row(i), points.row(j)) })
            .collect();
        let dmin = (0..n)
            .filter(|&j| j != i)
            .map(|j| d[j])
            .fold(f64::INFINITY, f64::min);
        let mut p = vec![0.0; n];
        let (mut lo, mut hi, mut beta) = (0.0f64, f64::INFINITY, 1.0f64);
        for _ in 0..200 {
            let mut sum = 0.0;
            for j in 0..n {
                p[j] = if j == i { 0.0 } else { (-beta * (d[j] - dmin)).exp() };
                sum += p[j];
            }
            // Entropy in bits of the normalised row.
            let mut h = 0.0;
            for pj in p.iter_mut() {
                *pj /= sum;
                if *pj > 0.0 {
                    h -= *pj * pj.log2();
                }
            }
            if (h.exp2() - perplexity).abs() < PERPLEXITY_TOL {
                break;
            }
            if h > target {
                lo = beta;
                beta = if hi.is_infinite() { beta * 2.0 } else { 0.5 * (lo + hi) };
            } else {
                hi = beta;
                beta = 0.5 * (lo + hi);
            }
        }
        p
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..n).map(row).collect();
    rows.concat()
}

/// Entropy in bits of row `i` of a row-major `N x N` matrix.
pub fn row_entropy_bits(p: &[f64], n: usize, i: usize) -> f64 {
    p[i * n..(i + 1) * n]
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.log2())
        .sum()
}

pub fn tsne_embed(points: &Matrix, params: &TsneParams) -> Result<TsneResult> {
    let n = points.rows();
    if !(params.perplexity > 0.0) || 3.0 * params.perplexity >= n as f64 {
        return Err(Error::Param(format!(
            "perplexity {} needs more than {} points, got {n}",
            params.perplexity,
            3.0 * params.perplexity
        )));
    }
    if n > MAX_POINTS {
        return Err(Error::Param(format!(
            "exact t-SNE is limited to {MAX_POINTS} points, got {n}; subsample first"
        )));
    }
    if params.n_iter == 0 {
        return Err(Error::Param("n_iter must be positive".into()));
    }

    let cond = conditional_affinities(points, params.perplexity);
    let mut p = vec![0.0; n * n];
    let denom = 2.0 * n as f64;
    for i in 0..n {
        for j in 0..n {
            p[i * n + j] = ((cond[i * n + j] + cond[j * n + i]) / denom).max(1e-300);
        }
        p[i * n + i] = 0.0;
    }

    let mut rng = seed::stage_rng("tsne-init", params.seed);
    let normal = Normal::new(0.0, 1e-4).expect("valid normal");
    let mut y: Vec<f64> = (0..2 * n).map(|_| normal.sample(&mut rng)).collect();
    let mut update = vec![0.0; 2 * n];
    let mut gains = vec![1.0f64; 2 * n];
    let eta = params
        .learning_rate
        .unwrap_or_else(|| (n as f64 / EARLY_EXAGGERATION / 4.0).max(50.0));
    let switch = params.n_iter / 4;
    let mut kl_history = Vec::with_capacity(params.n_iter);
    let mut num = vec![0.0; n * n];
    let mut grad = vec![0.0; 2 * n];

    for it in 0..params.n_iter {
        let (exaggeration, momentum) = if it < switch {
            (EARLY_EXAGGERATION, 0.5)
        } else {
            (1.0, 0.8)
        };
        let mut z = 0.0;
        for i in 0..n {
            for j in 0..n {
                let v = if i == j {
                    0.0
                } else {
                    let d0 = y[2 * i] - y[2 * j];
                    let d1 = y[2 * i + 1] - y[2 * j + 1];
                    1.0 / (1.0 + d0 * d0 + d1 * d1)
                };
                num[i * n + j] = v;
                z += v;
            }
        }
        let mut kl = 0.0;
        for i in 0..n {
            let (mut g0, mut g1) = (0.0, 0.0);
            for j in 0..n {
                if i == j {
                    continue;
                }
                let q = (num[i * n + j] / z).max(1e-300);
                let pij = p[i * n + j];
                kl += pij * (pij / q).ln();
                let m = (exaggeration * pij - q) * num[i * n + j];
                g0 += m * (y[2 * i] - y[2 * j]);
                g1 += m * (y[2 * i + 1] - y[2 * j + 1]);
            }
            grad[2 * i] = 4.0 * g0;
            grad[2 * i + 1] = 4.0 * g1;
        }
        if !kl.is_finite() {
            return Err(Error::Numeric(format!("KL divergence is not finite at iteration {it}")));
        }
        kl_history.push(kl);

        for k in 0..2 * n {
            gains[k] = if (grad[k] > 0.0) != (update[k] > 0.0) {
                gains[k] + 0.2
            } else {
                (gains[k] * 0.8).max(0.01)
            };
            update[k] = momentum * update[k] - eta * gains[k] * grad[k];
            y[k] += update[k];
        }
        let (m0, m1) = (
            (0..n).map(|i| y[2 * i]).sum::<f64>() / n as f64,
            (0..n).map(|i| y[2 * i + 1]).sum::<f64>() / n as f64,
        );
        for i in 0..n {
            y[2 * i] -= m0;
            y[2 * i + 1] -= m1;
        }
    }
    Ok(TsneResult {
        coords: Matrix::from_vec(n, 2, y)?,
        kl_history,
    })
}

pub fn tsne(cloud: &LabeledCloud, params: &TsneParams) -> Result<Projection> {
    let res = tsne_embed(&cloud.points, params)?;
    Projection::new(cloud, res.coords, ProjectionMethod::Tsne, params)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perplexity_precondition() {
        let rows: Vec<[f64; 1]> = (0..10).map(|i| [i as f64]).collect();
        let m = Matrix::from_rows(&rows, 1).unwrap();
        let p = TsneParams {
            perplexity: 5.0,
            ..TsneParams::default()
        };
        assert!(matches!(tsne_embed(&m, &p), Err(Error::Param(_))));
    }

    #[test]
    fn small_run_is_deterministic() {
        let rows: Vec<[f64; 2]> = (0..30).map(|i| [(i % 5) as f64, (i / 5) as f64]).collect();
        let m = Matrix::from_rows(&rows, 2).unwrap();
        let p = TsneParams {
            perplexity: 5.0,
            n_iter: 100,
            ..TsneParams::default()
        };
        let a = tsne_embed(&m, &p).unwrap();
        let b = tsne_embed(&m, &p).unwrap();
        assert_eq!(a.coords, b.coords);
        assert_eq!(a.kl_history.len(), 100);
    }
}
