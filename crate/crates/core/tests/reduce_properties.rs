//! Projection invariants and worked examples, checked from outside the crate.

use antsyn::linalg::{sq_euclidean, Matrix};
use antsyn::reduce::umap::{build_graph, curve, curve_grid, curve_target, fit_curve_params, smooth_knn_calibrate, umap_embed};
use antsyn::synth::blobs;
use antsyn::{Metric, UmapParams};
use proptest::prelude::*;

fn membership(d: &[f64], rho: f64, sigma: f64) -> f64 {
    d.iter().map(|&x| (-(x - rho).max(0.0) / sigma).exp()).sum()
}

/// Independent bisection on log(sigma), far past the library's tolerance.
fn oracle_sigma(d: &[f64], k: usize) -> f64 {
    let rho = d.iter().copied().find(|&x| x > 0.0).unwrap();
    let target = (k as f64).log2();
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if membership(d, rho, mid.exp()) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi)).exp()
}

#[test]
fn calibration_of_one_to_four() {
    let d = [1.0, 2.0, 3.0, 4.0];
    let c = smooth_knn_calibrate(&d, 4);
    assert_eq!(c.rho, 1.0);
    assert!((membership(&d, c.rho, c.sigma) - 2.0).abs() < 1e-5);
    let s = oracle_sigma(&d, 4);
    assert!((c.sigma - s).abs() < 1e-4 * s, "{} vs {s}", c.sigma);
}

#[test]
fn bandwidth_shrinks_with_the_gap() {
    // k = 2 targets a membership sum of exactly 1, so any positive sigma is
    // short of the target by exp(-eps / sigma); the solver drives sigma
    // toward zero, further for smaller gaps.
    let sigmas: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|eps| smooth_knn_calibrate(&[1.0, 1.0 + eps], 2).sigma)
        .collect();
    for w in sigmas.windows(2) {
        assert!(w[1] <= w[0], "{sigmas:?}");
    }
    assert!(sigmas[3] < 1e-3, "{sigmas:?}");
}

#[test]
fn curve_fit_residual_and_ordering() {
    let (a, b) = fit_curve_params(0.1, 1.0).unwrap();
    let xs = curve_grid(1.0);
    let mse = xs.iter().map(|&x| (curve(x, a, b) - curve_target(x, 0.1, 1.0)).powi(2)).sum::<f64>() / xs.len() as f64;
    assert!(mse.sqrt() < 0.02, "rmse {}", mse.sqrt());
    let a_values: Vec<f64> = [0.01, 0.1, 0.25].iter().map(|&m| fit_curve_params(m, 1.0).unwrap().0).collect();
    assert!(a_values.windows(2).all(|w| w[1] < w[0]), "{a_values:?}");
}

fn five_nn_agreement(y: &Matrix, truth: &[usize]) -> f64 {
    let n = y.rows();
    let hits = (0..n)
        .filter(|&i| {
            let mut d: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (sq_euclidean(y.row(i), y.row(j)), j)).collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            let same = d.iter().take(5).filter(|(_, j)| truth[*j] == truth[i]).count();
            same >= 3
        })
        .count();
    hits as f64 / n as f64
}

#[test]
fn far_apart_tight_blobs() {
    let (m, truth) = blobs(&[vec![0.0; 5], vec![100.0; 5]], 100, 0.1, 8);
    let p = UmapParams { n_neighbors: 15, ..UmapParams::default() };
    let y = umap_embed(&m, &p).unwrap();
    assert_eq!((y.rows(), y.cols()), (200, 2));
    assert!(y.is_finite());
    assert!(five_nn_agreement(&y, &truth) >= 0.95);
    assert_eq!(umap_embed(&m, &p).unwrap(), y, "same seed, same layout");
}

#[test]
fn cosine_metric_runs_on_the_same_cloud() {
    let (m, truth) = blobs(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 40, 0.05, 2);
    let p = UmapParams { n_neighbors: 10, metric: Metric::Cosine, n_epochs: Some(200), ..UmapParams::default() };
    let y = umap_embed(&m, &p).unwrap();
    assert!(five_nn_agreement(&y, &truth) >= 0.95);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn fuzzy_weights_are_symmetric_probabilities(
        seed in 0u64..10_000,
        n in 12usize..60,
        k in 2usize..10,
        cosine in any::<bool>(),
    ) {
        let mut rng = antsyn::seed::rng(seed);
        let rows: Vec<[f64; 3]> = (0..n).map(|_| {
            use rand::Rng;
            [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]
        }).collect();
        let m = Matrix::from_rows(&rows, 3).unwrap();
        let metric = if cosine { Metric::Cosine } else { Metric::Euclidean };
        let g = build_graph(&m, k.min(n - 1), metric).unwrap();
        for (i, j, w) in g.weights.entries() {
            prop_assert!((0.0..=1.0).contains(&w));
            prop_assert_eq!(w, g.weights.get(j, i));
        }
        for i in 0..n {
            let d = g.knn.distances(i);
            prop_assert!(d.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(!g.knn.neighbors(i).contains(&i));
        }
    }
}
