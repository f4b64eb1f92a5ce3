//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! The oracle criteria run on synthetic data. The reproduction criteria need
//! the pair files and public vector releases; they read their locations from
//! environment variables and report NOT RUN when a variable is unset:
//!
//!   ANTSYN_STUTTGART_DIR  directory with the `{adj,noun,verb}-pairs.*` files
//!   ANTSYN_WORD2VEC       word2vec vectors (`.bin` binary or text)
//!   ANTSYN_GLOVE          GloVe text vectors
//!   ANTSYN_BERT_TABLE     text table written by the BERT exporter
//!
//! Exit status is non-zero if any criterion that ran failed. With
//! `ANTSYN_ACCEPTANCE_STRICT=1`, criteria that could not run count as
//! failures too.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};
use std::time::Instant;

use antsyn::classify::pipeline::{classify_space, feature_space};
use antsyn::classify::transduce::{transduce, Clusterer, DEFAULT_K};
use antsyn::classify::{make_controls, run_table_row, spectral_cluster, CellParams, ClassifierKind};
use antsyn::embedstore::{filter_pairs, load_vectors};
use antsyn::eval::{aggregate, score, TableColumn};
use antsyn::linalg::{sq_euclidean, Matrix};
use antsyn::pairdata::{lexical_split, load_stuttgart_all, Relation};
use antsyn::reduce::knn::knn_graph;
use antsyn::reduce::pca::pca_fit;
use antsyn::reduce::tsne::{conditional_affinities, row_entropy_bits, tsne_embed, TsneParams};
use antsyn::reduce::umap::{
    attractive_coeff, attractive_loss, membership_sum, repulsive_coeff, repulsive_loss, smooth_knn_calibrate,
    umap_embed,
};
use antsyn::synth::{blobs, two_blobs};
use antsyn::vectorize::difference_cloud;
use antsyn::{EmbeddingSource, EmbeddingStore, Label, Metric, PairDataset, Pos, SplitSpec, UmapParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

enum Outcome {
    Pass(String),
    Fail(String),
    NotRun(String),
}

use Outcome::{Fail, NotRun, Pass};

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Pass(detail)
    } else {
        Fail(detail)
    }
}

// ---------------------------------------------------------------- oracles

fn oracle_dist(points: &Matrix, i: usize, j: usize, metric: Metric) -> f64 {
    let (a, b) = (points.row(i), points.row(j));
    match metric {
        Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
        Metric::Cosine => {
            let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            match (na > 0.0, nb > 0.0) {
                (true, true) => (1.0 - ab / (na * nb)).max(0.0),
                (false, false) => 0.0,
                _ => 1.0,
            }
        }
    }
}

/// Full sort of every other point by (distance, index).
fn brute_knn(points: &Matrix, k: usize, metric: Metric) -> Vec<Vec<(f64, usize)>> {
    let n = points.rows();
    (0..n)
        .map(|i| {
            let mut all: Vec<(f64, usize)> =
                (0..n).filter(|&j| j != i).map(|j| (oracle_dist(points, i, j, metric), j)).collect();
            all.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
            all.truncate(k);
            all
        })
        .collect()
}

/// Cyclic Jacobi rotations on a dense symmetric matrix.
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

/// Leave-one-out `k`-NN majority vote agreement with the true labels.
fn knn_vote_agreement<L: Copy + Eq + Ord>(coords: &Matrix, labels: &[L], k: usize) -> f64 {
    let n = coords.rows();
    let mut hits = 0;
    for i in 0..n {
        let mut d: Vec<(f64, usize)> = (0..n).filter(|&j| j != i).map(|j| (sq_euclidean(coords.row(i), coords.row(j)), j)).collect();
        d.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let mut votes: BTreeMap<L, usize> = BTreeMap::new();
        for &(_, j) in d.iter().take(k) {
            *votes.entry(labels[j]).or_default() += 1;
        }
        let best = votes.iter().max_by_key(|(_, &c)| c).map(|(&l, _)| l).unwrap();
        if best == labels[i] {
            hits += 1;
        }
    }
    hits as f64 / n as f64
}

/// Fraction of points whose cluster's majority truth label is their own.
fn purity(clusters: &[usize], truth: &[usize]) -> f64 {
    let mut table: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&c, &t) in clusters.iter().zip(truth) {
        *table.entry(c).or_default().entry(t).or_default() += 1;
    }
    table.values().map(|m| m.values().max().copied().unwrap_or(0)).sum::<usize>() as f64 / truth.len() as f64
}

// --------------------------------------------------------- oracle criteria

fn knn_exact() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0;
    let mut near_ties = 0;
    for inst in 0..100 {
        let n = rng.random_range(20..=500usize);
        let d = rng.random_range(1..=12usize);
        let k = rng.random_range(1..=15usize.min(n - 1));
        // Every fourth instance is on an integer grid to force distance ties.
        let grid = inst % 4 == 0;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| if grid { rng.random_range(-3i32..=3) as f64 } else { rng.random_range(-1.0..1.0) })
                    .collect()
            })
            .collect();
        let m = Matrix::from_rows(&rows, d).unwrap();
        for metric in [Metric::Euclidean, Metric::Cosine] {
            let fast = knn_graph(&m, k, metric).unwrap();
            let slow = brute_knn(&m, k, metric);
            for i in 0..n {
                // Indices must agree exactly; the only tolerated difference is
                // an order swap between candidates whose oracle distances agree
                // to rounding (cosine sums may associate differently).
                let got = fast.neighbors(i);
                let want = &slow[i];
                for (p, &(dw, jw)) in want.iter().enumerate() {
                    if got[p] != jw {
                        let dg = oracle_dist(&m, i, got[p], metric);
                        if (dg - dw).abs() > 1e-12 {
                            return Fail(format!("instance {inst} ({metric}), row {i}: {got:?} vs {want:?}"));
                        }
                        near_ties += 1;
                    }
                }
            }
            checked += 1;
        }
    }
    Pass(format!("{checked} graphs match brute force ({near_ties} rounding-level tie swaps)"))
}

fn calibration_residual() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(3..=100usize);
        let scale = 10f64.powf(rng.random_range(-3.0..3.0));
        let mut d: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..1.0) * scale).collect();
        d.sort_by(f64::total_cmp);
        let c = smooth_knn_calibrate(&d, k);
        let r = (membership_sum(&d, c.rho, c.sigma) - (k as f64).log2()).abs();
        worst = worst.max(r);
    }
    verdict(worst < 1e-5, format!("max residual {worst:.2e} over 1000 rows"))
}

fn sgd_gradients() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = rng.random_range(0.3..2.0);
        let b = rng.random_range(0.6..1.5);
        let yi = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let yj = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let dsq = |p: [f64; 2]| (p[0] - yj[0]).powi(2) + (p[1] - yj[1]).powi(2);
        let d2 = dsq(yi);
        let losses: [(&dyn Fn(f64) -> f64, f64); 2] = [
            (&|s| attractive_loss(s, a, b), attractive_coeff(d2, a, b)),
            (&|s| repulsive_loss(s, a, b), repulsive_coeff(d2, a, b)),
        ];
        for (loss, coeff) in losses {
            for axis in 0..2 {
                // The SGD move is `coeff * (y_i - y_j)`, i.e. minus the gradient.
                let analytic = -coeff * (yi[axis] - yj[axis]);
                let h = 1e-6;
                let (mut p, mut m) = (yi, yi);
                p[axis] += h;
                m[axis] -= h;
                let fd = (loss(dsq(p)) - loss(dsq(m))) / (2.0 * h);
                let rel = (fd - analytic).abs() / analytic.abs().max(1e-8);
                worst = worst.max(rel);
            }
        }
    }
    verdict(worst < 1e-4, format!("max relative error {worst:.2e} at 100 configurations"))
}

fn pca_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let rows: Vec<Vec<f64>> = (0..100).map(|_| (0..50).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let m = Matrix::from_rows(&rows, 50).unwrap();
        let fit = pca_fit(&m, 50).unwrap();
        let mean: Vec<f64> = (0..50).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / 100.0).collect();
        let cov: Vec<Vec<f64>> = (0..50)
            .map(|a| {
                (0..50)
                    .map(|b| rows.iter().map(|r| (r[a] - mean[a]) * (r[b] - mean[b])).sum::<f64>() / 99.0)
                    .collect()
            })
            .collect();
        let ev = jacobi_eigenvalues(cov);
        for (x, y) in fit.explained_variance.iter().zip(&ev) {
            worst = worst.max((x - y).abs());
        }
    }
    verdict(worst <= 1e-8, format!("max explained-variance gap {worst:.2e} on 10 random 100x50 matrices"))
}

fn tsne_checks() -> Outcome {
    let (m, _) = blobs(&[vec![0.0; 5], vec![3.0; 5], vec![-3.0, 3.0, 0.0, 0.0, 0.0]], 67, 1.0, 5);
    let m = m.select_rows(&(0..200).collect::<Vec<_>>());
    let perp = 30.0;
    let p = conditional_affinities(&m, perp);
    let worst = (0..200)
        .map(|i| (row_entropy_bits(&p, 200, i).exp2() - perp).abs())
        .fold(0.0f64, f64::max);
    let res = tsne_embed(&m, &TsneParams { perplexity: perp, n_iter: 1000, seed: 0, learning_rate: None }).unwrap();
    // Window means over the optimisation after early exaggeration.
    let tail = &res.kl_history[250..];
    let means: Vec<f64> = tail.chunks(50).map(|w| w.iter().sum::<f64>() / w.len() as f64).collect();
    let monotone = means.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    verdict(
        worst < 1e-4 && monotone,
        format!(
            "max |2^H - perplexity| = {worst:.2e}; KL window means {:.4} -> {:.4}, non-increasing: {monotone}",
            means[0],
            means[means.len() - 1]
        ),
    )
}

fn two_blob_sanity() -> Outcome {
    let (m, truth) = two_blobs(100, 10, 6);
    let t0 = Instant::now();
    let u = umap_embed(&m, &UmapParams { n_neighbors: 15, ..UmapParams::default() }).unwrap();
    let umap_acc = knn_vote_agreement(&u, &truth, 5);
    let t = tsne_embed(&m, &TsneParams { perplexity: 30.0, ..TsneParams::default() }).unwrap();
    let tsne_acc = knn_vote_agreement(&t.coords, &truth, 5);
    let s = spectral_cluster(&m, 2, 10, 0).unwrap();
    let spec_acc = purity(&s.cluster_id, &truth);
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        umap_acc >= 0.95 && tsne_acc >= 0.95 && spec_acc >= 0.95 && secs < 120.0,
        format!("UMAP 5-NN {umap_acc:.3}, t-SNE 5-NN {tsne_acc:.3}, spectral purity {spec_acc:.3}, {secs:.1}s"),
    )
}

fn transductive_synthetic() -> Outcome {
    let centres = vec![vec![0.0, 0.0, 0.0], vec![8.0, 0.0, 0.0], vec![0.0, 8.0, 0.0], vec![8.0, 8.0, 8.0]];
    let (m, blob) = blobs(&centres, 100, 1.0, 7);
    let class = |b: usize| if b % 2 == 0 { Label::Antonym } else { Label::Synonym };
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let labels: Vec<Option<Label>> = blob.iter().map(|&b| (rng.random::<f64>() < 0.2).then(|| class(b))).collect();
    let mut results = Vec::new();
    for clusterer in [Clusterer::kmeans(), Clusterer::spectral()] {
        let r = transduce(&m, &labels, &clusterer, DEFAULT_K, 0).unwrap();
        let gold: Vec<Label> = r.test_indices.iter().map(|&i| class(blob[i])).collect();
        let acc = score(&r.predicted, &gold, &vec![Pos::Noun; gold.len()], "").unwrap().accuracy;
        results.push(acc);
    }
    verdict(
        results.iter().all(|&a| a >= 0.98),
        format!("k-means vote {:.4}, spectral vote {:.4} (k = {DEFAULT_K}, 20% labels)", results[0], results[1]),
    )
}

fn metric_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..1000 {
        let n = rng.random_range(1..300usize);
        let gold: Vec<Label> = (0..n).map(|_| if rng.random::<bool>() { Label::Antonym } else { Label::Synonym }).collect();
        let pred: Vec<Label> = (0..n).map(|_| if rng.random::<bool>() { Label::Antonym } else { Label::Synonym }).collect();
        let r = score(&pred, &gold, &vec![Pos::Verb; n], "").unwrap();
        let correct = pred.iter().zip(&gold).filter(|(a, b)| a == b).count();
        // Recall times support recovers each class's true positives exactly.
        let tp_sum: usize = r.per_class.values().map(|m| (m.recall * m.support as f64).round() as usize).sum();
        let weighted: f64 = r.per_class.values().map(|m| m.recall * m.support as f64).sum::<f64>() / n as f64;
        if tp_sum != correct || (weighted - r.accuracy).abs() > 1e-15 {
            return Fail(format!("trial {trial}: accuracy {} vs weighted recall {weighted}", r.accuracy));
        }
    }
    Pass("1000 random confusion matrices".into())
}

// ---------------------------------------------------- reproduction criteria

fn env_path(var: &str) -> Option<PathBuf> {
    std::env::var_os(var).map(PathBuf::from).filter(|p| p.exists())
}

fn load_pairs(dir: &Path) -> antsyn::Result<PairDataset> {
    let ant = load_stuttgart_all(dir, Relation::Antonym)?;
    let syn = load_stuttgart_all(dir, Relation::Synonym)?;
    Ok(PairDataset::concat("stuttgart", [&ant, &syn]))
}

fn load_covered(dir: &Path, vectors: &Path, source: EmbeddingSource) -> antsyn::Result<(EmbeddingStore, PairDataset)> {
    let pairs = load_pairs(dir)?;
    let vocab: HashSet<String> = pairs.vocabulary().into_iter().map(str::to_owned).collect();
    let store = load_vectors(vectors, source, Some(&vocab))?;
    let covered = filter_pairs(&pairs, &store);
    Ok((store, covered))
}

fn mean_acc(row: &BTreeMap<TableColumn, Vec<antsyn::eval::EvalReport>>, use_umap: bool, c: ClassifierKind) -> f64 {
    let v: Vec<f64> = row[&TableColumn { use_umap, classifier: c }].iter().map(|r| r.accuracy).collect();
    aggregate(&v).unwrap().mean
}

fn table3_word2vec() -> Outcome {
    let (Some(dir), Some(w2v)) = (env_path("ANTSYN_STUTTGART_DIR"), env_path("ANTSYN_WORD2VEC")) else {
        return NotRun("needs ANTSYN_STUTTGART_DIR and ANTSYN_WORD2VEC".into());
    };
    let run = || -> antsyn::Result<Outcome> {
        let (store, pairs) = load_covered(&dir, &w2v, EmbeddingSource::Word2vec)?;
        let split = lexical_split(&pairs, 0.2, 0)?;
        let row = run_table_row(&store, &pairs, &split, &CellParams::default(), &[0, 1, 2])?;
        let km = mean_acc(&row, true, ClassifierKind::KMeans);
        let nn = mean_acc(&row, true, ClassifierKind::ShallowNn);
        let lifts: Vec<f64> = ClassifierKind::ALL
            .iter()
            .map(|&c| mean_acc(&row, true, c) - mean_acc(&row, false, c))
            .collect();
        let ok = (km - 0.8904).abs() <= 0.05 && (nn - 0.9095).abs() <= 0.05 && lifts.iter().all(|&l| l >= 0.10);
        Ok(verdict(ok, format!("UMAP KMeans {km:.4}, UMAP ShallowNN {nn:.4}, UMAP lifts {lifts:.3?}")))
    };
    run().unwrap_or_else(|e| Fail(format!("error: {e}")))
}

fn table4_bert() -> Outcome {
    let (Some(dir), Some(table)) = (env_path("ANTSYN_STUTTGART_DIR"), env_path("ANTSYN_BERT_TABLE")) else {
        return NotRun("needs ANTSYN_STUTTGART_DIR and ANTSYN_BERT_TABLE".into());
    };
    let run = || -> antsyn::Result<Outcome> {
        let (store, pairs) = load_covered(&dir, &table, EmbeddingSource::BertTable)?;
        let split = SplitSpec::stuttgart(&pairs, true)?;
        let mut accs = Vec::new();
        for seed in 0..3 {
            let p = CellParams::default().with_seed(seed);
            let controls = make_controls(&pairs, seed)?;
            let space = feature_space(&store, &pairs, &controls, true, &p)?;
            accs.push(classify_space(&space, &pairs, &split, ClassifierKind::KMeans, &p, "")?.accuracy);
        }
        let m = aggregate(&accs).unwrap().mean;
        Ok(verdict((m - 0.9167).abs() <= 0.05, format!("BERT UMAP KMeans {m:.4} over 3 seeds")))
    };
    run().unwrap_or_else(|e| Fail(format!("error: {e}")))
}

fn chance_lr() -> Outcome {
    let Some(dir) = env_path("ANTSYN_STUTTGART_DIR") else {
        return NotRun("needs ANTSYN_STUTTGART_DIR plus ANTSYN_WORD2VEC, ANTSYN_GLOVE, ANTSYN_BERT_TABLE".into());
    };
    let sources = [
        ("ANTSYN_WORD2VEC", EmbeddingSource::Word2vec),
        ("ANTSYN_GLOVE", EmbeddingSource::Glove),
        ("ANTSYN_BERT_TABLE", EmbeddingSource::BertTable),
    ];
    let missing: Vec<&str> = sources.iter().filter(|(v, _)| env_path(v).is_none()).map(|(v, _)| *v).collect();
    if !missing.is_empty() {
        return NotRun(format!("needs {}", missing.join(", ")));
    }
    let run = || -> antsyn::Result<Outcome> {
        let mut parts = Vec::new();
        let mut ok = true;
        for (var, source) in sources {
            let (store, pairs) = load_covered(&dir, &env_path(var).unwrap(), source)?;
            let split = SplitSpec::stuttgart(&pairs, true)?;
            let p = CellParams::default();
            let controls = make_controls(&pairs, 0)?;
            let space = feature_space(&store, &pairs, &controls, false, &p)?;
            let acc = classify_space(&space, &pairs, &split, ClassifierKind::LogReg, &p, "")?.accuracy;
            ok &= (0.45..=0.55).contains(&acc);
            parts.push(format!("{source} {acc:.4}"));
        }
        Ok(verdict(ok, format!("no-UMAP LR: {}", parts.join(", "))))
    };
    run().unwrap_or_else(|e| Fail(format!("error: {e}")))
}

fn swirl_agreement(coords: &Matrix, labels: &[Label], real: Label) -> f64 {
    let idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == real || labels[i] == real.shuffled()).collect();
    knn_vote_agreement(&coords.select_rows(&idx), &idx.iter().map(|&i| labels[i]).collect::<Vec<_>>(), 10)
}

fn swirl_proxy() -> Outcome {
    let (Some(dir), Some(w2v)) = (env_path("ANTSYN_STUTTGART_DIR"), env_path("ANTSYN_WORD2VEC")) else {
        return NotRun("needs ANTSYN_STUTTGART_DIR and ANTSYN_WORD2VEC".into());
    };
    let run = || -> antsyn::Result<Outcome> {
        let (store, pairs) = load_covered(&dir, &w2v, EmbeddingSource::Word2vec)?;
        let controls = make_controls(&pairs, 0)?;
        let cloud = difference_cloud(&[&pairs, &controls], &store)?;
        let mut stats = Vec::new();
        for metric in [Metric::Euclidean, Metric::Cosine] {
            let params = UmapParams { n_neighbors: 30, min_dist: 0.1, metric, ..UmapParams::default() };
            let coords = umap_embed(&cloud.points, &params)?;
            stats.push([
                swirl_agreement(&coords, &cloud.labels, Label::Antonym),
                swirl_agreement(&coords, &cloud.labels, Label::Synonym),
            ]);
        }
        let [eu, co] = [stats[0], stats[1]];
        let drop = (eu[0] + eu[1] - co[0] - co[1]) / 2.0;
        let ok = eu[0] >= 0.80 && eu[1] >= 0.80 && drop >= 0.10;
        Ok(verdict(
            ok,
            format!(
                "euclidean ant {:.3} syn {:.3}; cosine ant {:.3} syn {:.3}; mean drop {drop:.3}",
                eu[0], eu[1], co[0], co[1]
            ),
        ))
    };
    run().unwrap_or_else(|e| Fail(format!("error: {e}")))
}

fn main() {
    // Honour `cargo test -- --list` and name filters well enough to be
    // skipped by harness-aware tooling.
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("knn graph equals brute force", knn_exact),
        ("smooth-kNN calibration residual", calibration_residual),
        ("UMAP SGD gradients vs finite differences", sgd_gradients),
        ("PCA vs dense eigendecomposition", pca_oracle),
        ("t-SNE perplexity and KL descent", tsne_checks),
        ("two-blob sanity (UMAP, t-SNE, spectral)", two_blob_sanity),
        ("transductive vote on synthetic clusters", transductive_synthetic),
        ("accuracy equals support-weighted recall", metric_identity),
        ("Table 3 word2vec row (lexical split)", table3_word2vec),
        ("Table 4 BERT UMAP+KMeans (dataset split)", table4_bert),
        ("no-UMAP LR at chance", chance_lr),
        ("swirl proxy: euclidean vs cosine 10-NN", swirl_proxy),
    ];
    let strict = std::env::var("ANTSYN_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let filter: Vec<&String> = args.iter().filter(|a| !a.starts_with('-')).collect();
    let (mut failed, mut not_run) = (0, 0);
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = f();
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Pass(d) => println!("PASS     {name}: {d} [{secs:.1}s]"),
            Fail(d) => {
                failed += 1;
                println!("FAIL     {name}: {d} [{secs:.1}s]");
            }
            NotRun(d) => {
                not_run += 1;
                println!("NOT RUN  {name}: {d}");
            }
        }
    }
    if failed > 0 || (strict && not_run > 0) {
        std::process::exit(1);
    }
}
