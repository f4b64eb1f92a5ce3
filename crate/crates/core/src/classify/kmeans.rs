//! Lloyd's algorithm with k-means++ seeding.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::ClusterAssignment;
use crate::error::{Error, Result};
use crate::linalg::{sq_euclidean, Matrix};
use crate::seed;

pub const MAX_ITER: usize = 300;

/// One Lloyd run: the final assignment, centroids and the inertia measured
/// after every assignment step.
#[derive(Debug, Clone)]
pub struct LloydRun {
    pub assignment: ClusterAssignment,
    pub centroids: Matrix,
    pub inertia_history: Vec<f64>,
}

fn plus_plus(points: &Matrix, k: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let n = points.rows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_euclidean(points.row(i), points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut r = rng.random_range(0.0..total);
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if r < w {
                    pick = i;
                    break;
                }
                r -= w;
            }
            pick
        } else {
            // Every point coincides with a centre: take any unused index.
            (0..n).find(|i| !chosen.contains(i)).unwrap_or(0)
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_euclidean(points.row(i), points.row(next)));
        }
    }
    points.select_rows(&chosen)
}

fn nearest(point: &[f64], centroids: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centroids.rows() {
        let d = sq_euclidean(point, centroids.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

/// Lloyd iterations from the given centroids until the assignment stops
/// changing or `MAX_ITER` is reached. A centroid left without points is moved
/// onto the point farthest from its own centroid.
pub fn lloyd(points: &Matrix, init: Matrix) -> LloydRun {
    let (n, d, k) = (points.rows(), points.cols(), init.rows());
    let mut centroids = init;
    let mut assign = vec![usize::MAX; n];
    let mut dist = vec![0.0; n];
    let mut history = Vec::new();
    for _ in 0..MAX_ITER {
        let mut changed = false;
        for i in 0..n {
            let (c, dd) = nearest(points.row(i), &centroids);
            if assign[i] != c {
                assign[i] = c;
                changed = true;
            }
            dist[i] = dd;
        }
        history.push(dist.iter().sum());
        if !changed {
            break;
        }
        let mut sums = Matrix::zeros(k, d);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assign[i]] += 1;
            sums.row_mut(assign[i])
                .iter_mut()
                .zip(points.row(i))
                .for_each(|(s, v)| *s += v);
        }
        for c in 0..k {
            if counts[c] > 0 {
                let row = sums.row(c).to_vec();
                centroids
                    .row_mut(c)
                    .iter_mut()
                    .zip(row)
                    .for_each(|(m, s)| *m = s / counts[c] as f64);
            } else {
                let far = (0..n)
                    .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
                    .expect("non-empty input");
                centroids.row_mut(c).copy_from_slice(points.row(far));
                dist[far] = 0.0;
            }
        }
    }
    let inertia = *history.last().unwrap_or(&0.0);
    LloydRun {
        assignment: ClusterAssignment {
            cluster_id: assign,
            k,
            inertia,
        },
        centroids,
        inertia_history: history,
    }
}

/// Best of `n_init` seeded k-means++ restarts by inertia. Restart `r` draws
/// from its own stream, so the result does not depend on scheduling.
pub fn kmeans_run(points: &Matrix, k: usize, seed: u64, n_init: usize) -> Result<LloydRun> {
    let n = points.rows();
    if k == 0 || n < k {
        return Err(Error::Param(format!("k-means needs 1 <= k <= N, got k={k}, N={n}")));
    }
    if n_init == 0 {
        return Err(Error::Param("n_init must be positive".into()));
    }
    if !points.is_finite() {
        return Err(Error::Data("k-means input contains non-finite values".into()));
    }
    let base = seed::stage_seed("kmeans", seed);
    let restart = |r: usize| {
        let mut rng = seed::rng(base.wrapping_add(r as u64));
        let init = plus_plus(points, k, &mut rng);
        lloyd(points, init)
    };
    #[cfg(feature = "parallel")]
    let runs: Vec<LloydRun> = (0..n_init).into_par_iter().map(restart).collect();
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<LloydRun> = (0..n_init).map(restart).collect();
    Ok(runs
        .into_iter()
        .reduce(|best, r| {
            if r.assignment.inertia < best.assignment.inertia {
                r
            } else {
                best
            }
        })
        .expect("n_init > 0"))
}

pub fn kmeans(points: &Matrix, k: usize, seed: u64, n_init: usize) -> Result<ClusterAssignment> {
    kmeans_run(points, k, seed, n_init).map(|r| r.assignment)
}
