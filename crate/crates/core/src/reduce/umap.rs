//! UMAP: exact kNN graph, smooth-kNN calibration, fuzzy union, curve fit,
//! spectral initialisation and negative-sampling SGD.

use nalgebra::{Matrix2, Vector2};
use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::knn::{knn_graph, KnnGraph};
use super::{Metric, Projection, ProjectionMethod, UmapParams};
use crate::error::{Error, Result};
use crate::linalg::{top_eigenpairs, Matrix, NormalizedAdjacency, SparseSym};
use crate::seed;
use crate::vectorize::LabeledCloud;

/// Residual tolerance of the bandwidth search.
pub const SMOOTH_K_TOLERANCE: f64 = 1e-6;
const BANDWIDTH_ITERS: usize = 200;
/// Bandwidth for rows whose tied nearest distances alone exceed the target,
/// as a fraction of the row's mean distance.
const SIGMA_FLOOR_SCALE: f64 = 1e-3;

/// Regulariser in the repulsive term: distances are measured as
/// `sqrt(d^2 + REPULSION_EPS)`.
pub const REPULSION_EPS: f64 = 1e-3;
const GRAD_CLIP: f64 = 4.0;

/// Per-point local connectivity: `rho` is the smallest positive neighbour
/// distance and `sigma` the bandwidth with
/// `sum_j exp(-max(0, d_j - rho) / sigma) = log2(k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub rho: f64,
    pub sigma: f64,
}

pub fn membership_sum(distances: &[f64], rho: f64, sigma: f64) -> f64 {
    distances
        .iter()
        .map(|&d| (-(d - rho).max(0.0) / sigma).exp())
        .sum()
}

/// Solves for the bandwidth of one row of sorted neighbour distances.
///
/// When more distances tie at `rho` than `log2(k)` no bandwidth reaches the
/// target, and `sigma` is set to a small floor (1e-3 of the mean distance).
pub fn smooth_knn_calibrate(distances: &[f64], k: usize) -> Calibration {
    let target = (k as f64).log2();
    let rho = distances.iter().copied().find(|&d| d > 0.0).unwrap_or(0.0);
    let ties = distances.iter().filter(|&&d| d <= rho).count() as f64;
    if distances.is_empty() || ties > target + SMOOTH_K_TOLERANCE {
        let mean = if distances.is_empty() {
            0.0
        } else {
            distances.iter().sum::<f64>() / distances.len() as f64
        };
        let floor = if mean > 0.0 { SIGMA_FLOOR_SCALE * mean } else { SIGMA_FLOOR_SCALE };
        return Calibration { rho, sigma: floor };
    }

    let (mut lo, mut hi, mut mid) = (0.0f64, f64::INFINITY, 1.0f64);
    for _ in 0..BANDWIDTH_ITERS {
        let psum = membership_sum(distances, rho, mid);
        if (psum - target).abs() < SMOOTH_K_TOLERANCE {
            break;
        }
        if psum > target {
            hi = mid;
            mid = 0.5 * (lo + hi);
        } else {
            lo = mid;
            mid = if hi.is_infinite() { mid * 2.0 } else { 0.5 * (lo + hi) };
        }
    }
    Calibration { rho, sigma: mid }
}

pub fn calibrate_graph(graph: &KnnGraph) -> Vec<Calibration> {
    (0..graph.n())
        .map(|i| smooth_knn_calibrate(graph.distances(i), graph.k()))
        .collect()
}

/// Directed memberships `exp(-max(0, d_ij - rho_i) / sigma_i)` symmetrised
/// with the probabilistic t-conorm `A + A^T - A * A^T`.
pub fn fuzzy_union(graph: &KnnGraph, calib: &[Calibration]) -> SparseSym {
    let n = graph.n();
    // (row, col, value, came_from_transpose)
    let mut entries: Vec<(usize, usize, f64, bool)> = Vec::with_capacity(2 * n * graph.k());
    for i in 0..n {
        let Calibration { rho, sigma } = calib[i];
        for (&j, &d) in graph.neighbors(i).iter().zip(graph.distances(i)) {
            let w = (-(d - rho).max(0.0) / sigma).exp();
            entries.push((i, j, w, false));
            entries.push((j, i, w, true));
        }
    }
    entries.sort_by(|a, b| (a.0, a.1, a.3).cmp(&(b.0, b.1, b.3)));
    let mut triplets = Vec::with_capacity(entries.len());
    let mut p = 0;
    while p < entries.len() {
        let (r, c) = (entries[p].0, entries[p].1);
        let (mut direct, mut transposed) = (0.0, 0.0);
        while p < entries.len() && entries[p].0 == r && entries[p].1 == c {
            if entries[p].3 {
                transposed = entries[p].2;
            } else {
                direct = entries[p].2;
            }
            p += 1;
        }
        let w = direct + transposed - direct * transposed;
        if w > 0.0 {
            triplets.push((r, c, w));
        }
    }
    SparseSym::from_triplets(n, triplets)
}

/// Low-dimensional similarity curve `1 / (1 + a * x^(2b))`.
pub fn curve(x: f64, a: f64, b: f64) -> f64 {
    1.0 / (1.0 + a * x.powf(2.0 * b))
}

/// Grid the curve parameters are fitted on: 300 points over `[0, 3 * spread]`.
pub fn curve_grid(spread: f64) -> Vec<f64> {
    let n = 300;
    (0..n)
        .map(|i| 3.0 * spread * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn curve_target(x: f64, min_dist: f64, spread: f64) -> f64 {
    if x <= min_dist {
        1.0
    } else {
        (-(x - min_dist) / spread).exp()
    }
}

/// Least-squares fit (Levenberg-Marquardt, started at `a = b = 1`) of the
/// similarity curve to the offset exponential target.
pub fn fit_curve_params(min_dist: f64, spread: f64) -> Result<(f64, f64)> {
    if !(spread > 0.0 && min_dist >= 0.0 && min_dist < spread) {
        return Err(Error::Param(format!(
            "curve fit needs 0 <= min_dist < spread, got min_dist {min_dist}, spread {spread}"
        )));
    }
    let xs = curve_grid(spread);
    let ys: Vec<f64> = xs.iter().map(|&x| curve_target(x, min_dist, spread)).collect();
    let sse = |a: f64, b: f64| -> f64 {
        xs.iter()
            .zip(&ys)
            .map(|(&x, &y)| (curve(x, a, b) - y).powi(2))
            .sum()
    };

    let (mut a, mut b) = (1.0f64, 1.0f64);
    let mut cost = sse(a, b);
    let mut lambda = 1e-3;
    for _ in 0..2000 {
        let mut jtj = Matrix2::<f64>::zeros();
        let mut jtr = Vector2::<f64>::zeros();
        for (&x, &y) in xs.iter().zip(&ys) {
            if x == 0.0 {
                continue;
            }
            let p = x.powf(2.0 * b);
            let denom = (1.0 + a * p).powi(2);
            let da = -p / denom;
            let db = -a * p * 2.0 * x.ln() / denom;
            let r = 1.0 / (1.0 + a * p) - y;
            let g = Vector2::new(da, db);
            jtj += g * g.transpose();
            jtr += g * r;
        }
        let mut improved = false;
        for _ in 0..50 {
            let mut damped = jtj;
            damped[(0, 0)] *= 1.0 + lambda;
            damped[(1, 1)] *= 1.0 + lambda;
            let Some(step) = damped.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let (na, nb) = (a + step[0], b + step[1]);
            let nc = if na > 0.0 && nb > 0.0 { sse(na, nb) } else { f64::INFINITY };
            if nc.is_finite() && nc <= cost {
                let rel = (cost - nc) / cost.max(1e-300);
                a = na;
                b = nb;
                cost = nc;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if rel < 1e-12 && step.norm() < 1e-10 {
                    return Ok((a, b));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // No damped step lowers the cost: a local minimum.
            break;
        }
    }
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(Error::Numeric(format!("curve fit diverged to a = {a}, b = {b}")));
    }
    let gradient_norm = {
        let mut g = Vector2::<f64>::zeros();
        for (&x, &y) in xs.iter().zip(&ys) {
            if x == 0.0 {
                continue;
            }
            let p = x.powf(2.0 * b);
            let denom = (1.0 + a * p).powi(2);
            let r = 1.0 / (1.0 + a * p) - y;
            g += Vector2::new(-p / denom, -a * p * 2.0 * x.ln() / denom) * r;
        }
        g.norm()
    };
    if gradient_norm > 1e-6 {
        return Err(Error::Numeric(format!(
            "curve fit did not converge (gradient norm {gradient_norm:.3e})"
        )));
    }
    Ok((a, b))
}

/// Coefficient `g` of the attractive move `y_i += alpha * g * (y_i - y_j)`:
/// minus the gradient of `-log(1 / (1 + a d^(2b)))` with respect to `y_i`,
/// divided by `(y_i - y_j)`. `dist_sq` is `d^2`.
pub fn attractive_coeff(dist_sq: f64, a: f64, b: f64) -> f64 {
    if dist_sq > 0.0 {
        let pb = dist_sq.powf(b);
        -2.0 * a * b * pb / dist_sq / (a * pb + 1.0)
    } else {
        0.0
    }
}

/// Per-edge attractive cross-entropy term `log(1 + a d^(2b))`.
pub fn attractive_loss(dist_sq: f64, a: f64, b: f64) -> f64 {
    (a * dist_sq.powf(b)).ln_1p()
}

/// Coefficient of the repulsive move; the exact gradient of
/// [`repulsive_loss`].
pub fn repulsive_coeff(dist_sq: f64, a: f64, b: f64) -> f64 {
    let s = dist_sq + REPULSION_EPS;
    2.0 * b / (s * (1.0 + a * s.powf(b)))
}

/// Per-sample repulsive cross-entropy term `-log(1 - phi)` evaluated at the
/// regularised squared distance `d^2 + REPULSION_EPS`.
pub fn repulsive_loss(dist_sq: f64, a: f64, b: f64) -> f64 {
    let asb = a * (dist_sq + REPULSION_EPS).powf(b);
    asb.ln_1p() - asb.ln()
}

#[inline]
fn clip(v: f64) -> f64 {
    v.clamp(-GRAD_CLIP, GRAD_CLIP)
}

/// Spectral layout from the normalised Laplacian of `w`, scaled so the
/// largest coordinate is 10, with small seeded noise. Falls back to a
/// uniform random layout in `[-10, 10]^2` when the eigensolver fails.
pub fn spectral_init(w: &SparseSym, seed: u64) -> Matrix {
    let n = w.n();
    let mut rng = seed::stage_rng("umap-init", seed);
    let spectral = if n > 3 {
        let op = NormalizedAdjacency::new(w);
        top_eigenpairs(&op, 3, seed).ok()
    } else {
        None
    };
    let mut coords = Matrix::zeros(n, 2);
    match spectral {
        Some(pairs) => {
            let max = pairs.vectors[1..3]
                .iter()
                .flat_map(|v| v.iter())
                .fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = if max > 0.0 { 10.0 / max } else { 1.0 };
            let noise = Normal::new(0.0, 1e-4).expect("valid normal");
            for i in 0..n {
                for d in 0..2 {
                    let v = pairs.vectors[d + 1][i] * scale + noise.sample(&mut rng);
                    coords.set(i, d, v);
                }
            }
        }
        None => {
            for i in 0..n {
                for d in 0..2 {
                    coords.set(i, d, rng.random_range(-10.0..10.0));
                }
            }
        }
    }
    coords
}

/// Rescales every column to `[0, 10]`.
fn rescale_to_box(coords: &mut Matrix) {
    for d in 0..coords.cols() {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..coords.rows() {
            lo = lo.min(coords.get(i, d));
            hi = hi.max(coords.get(i, d));
        }
        let span = if hi > lo { hi - lo } else { 1.0 };
        for i in 0..coords.rows() {
            let v = 10.0 * (coords.get(i, d) - lo) / span;
            coords.set(i, d, v);
        }
    }
}

/// Stochastic gradient descent on the fuzzy cross-entropy.
///
/// Each edge is sampled with frequency proportional to its weight; each
/// sample pulls both endpoints together and pushes the head away from
/// `negative_sample_rate` uniformly drawn points. The learning rate decays
/// linearly from 1 to 0 and per-coordinate moves are clipped to +-4.
pub fn optimize_layout(
    w: &SparseSym,
    init: &Matrix,
    params: &UmapParams,
    a: f64,
    b: f64,
) -> Result<Matrix> {
    let n = w.n();
    if init.rows() != n || init.cols() != 2 {
        return Err(Error::Param(format!(
            "initial layout is {}x{}, expected {n}x2",
            init.rows(),
            init.cols()
        )));
    }
    if !init.is_finite() {
        return Err(Error::Numeric("initial layout is not finite".into()));
    }
    let n_epochs = params.epochs_for(n);
    let max_w = w.entries().fold(0.0f64, |m, (_, _, v)| m.max(v));
    let mut heads = Vec::new();
    let mut tails = Vec::new();
    let mut epochs_per_sample = Vec::new();
    if max_w > 0.0 {
        for (i, j, v) in w.entries() {
            if i == j {
                continue;
            }
            let samples = n_epochs as f64 * v / max_w;
            if samples < 1.0 {
                continue;
            }
            heads.push(i);
            tails.push(j);
            epochs_per_sample.push(n_epochs as f64 / samples);
        }
    }
    let neg_rate = params.negative_sample_rate as f64;
    let epochs_per_negative: Vec<f64> = epochs_per_sample.iter().map(|e| e / neg_rate).collect();
    let mut next_sample = epochs_per_sample.clone();
    let mut next_negative = epochs_per_negative.clone();

    let mut y = init.clone();
    let mut rng = seed::stage_rng("umap-sgd", params.seed);
    for epoch in 0..n_epochs {
        let alpha = 1.0 - epoch as f64 / n_epochs as f64;
        let e = epoch as f64;
        for edge in 0..heads.len() {
            if next_sample[edge] > e {
                continue;
            }
            let (i, j) = (heads[edge], tails[edge]);
            let (yi0, yi1, yj0, yj1) = (y.get(i, 0), y.get(i, 1), y.get(j, 0), y.get(j, 1));
            let (d0, d1) = (yi0 - yj0, yi1 - yj1);
            let g = attractive_coeff(d0 * d0 + d1 * d1, a, b);
            let (g0, g1) = (clip(g * d0) * alpha, clip(g * d1) * alpha);
            y.set(i, 0, yi0 + g0);
            y.set(i, 1, yi1 + g1);
            y.set(j, 0, yj0 - g0);
            y.set(j, 1, yj1 - g1);
            next_sample[edge] += epochs_per_sample[edge];

            let n_neg = ((e - next_negative[edge]) / epochs_per_negative[edge]).floor().max(0.0) as usize;
            for _ in 0..n_neg {
                let k = rng.random_range(0..n);
                if k == i {
                    continue;
                }
                let (yi0, yi1) = (y.get(i, 0), y.get(i, 1));
                let (d0, d1) = (yi0 - y.get(k, 0), yi1 - y.get(k, 1));
                let g = repulsive_coeff(d0 * d0 + d1 * d1, a, b);
                y.set(i, 0, yi0 + clip(g * d0) * alpha);
                y.set(i, 1, yi1 + clip(g * d1) * alpha);
            }
            next_negative[edge] += n_neg as f64 * epochs_per_negative[edge];
        }
        if !y.is_finite() {
            return Err(Error::Numeric(format!("non-finite coordinate in epoch {epoch}")));
        }
    }
    Ok(y)
}

/// Intermediate UMAP state, exposed for inspection and tests.
#[derive(Debug, Clone)]
pub struct UmapGraph {
    pub knn: KnnGraph,
    pub calibration: Vec<Calibration>,
    pub weights: SparseSym,
}

pub fn build_graph(points: &Matrix, n_neighbors: usize, metric: Metric) -> Result<UmapGraph> {
    let knn = knn_graph(points, n_neighbors, metric)?;
    let calibration = calibrate_graph(&knn);
    let weights = fuzzy_union(&knn, &calibration);
    Ok(UmapGraph {
        knn,
        calibration,
        weights,
    })
}

/// Embeds the rows of `points` in the plane.
pub fn umap_embed(points: &Matrix, params: &UmapParams) -> Result<Matrix> {
    params.validate()?;
    let n = points.rows();
    if n <= params.n_neighbors {
        return Err(Error::Param(format!(
            "UMAP with n_neighbors = {} needs more than {} points, got {n}",
            params.n_neighbors, params.n_neighbors
        )));
    }
    let graph = build_graph(points, params.n_neighbors, params.metric)?;
    let (a, b) = fit_curve_params(params.min_dist, params.spread)?;
    let mut init = spectral_init(&graph.weights, params.seed);
    rescale_to_box(&mut init);
    optimize_layout(&graph.weights, &init, params, a, b)
}

/// Projects a cloud; labels play no part until they are attached to the
/// output.
pub fn umap(cloud: &LabeledCloud, params: &UmapParams) -> Result<Projection> {
    let coords = umap_embed(&cloud.points, params)?;
    Projection::new(cloud, coords, ProjectionMethod::Umap, params)
}
