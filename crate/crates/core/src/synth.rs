//! Synthetic point sets and toy lexicons with known structure.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::embedstore::{EmbeddingSource, EmbeddingStore};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::pairdata::{Label, PairDataset, Pos, SplitTag, WordPair};
use crate::seed;

/// Isotropic Gaussian blobs, `n_per` points around each centre. Returns the
/// points and the blob index of each.
pub fn blobs(centers: &[Vec<f64>], n_per: usize, std: f64, seed: u64) -> (Matrix, Vec<usize>) {
    let d = centers.first().map_or(0, Vec::len);
    let mut rng = seed::stage_rng("blobs", seed);
    let normal = Normal::new(0.0, std).expect("valid std");
    let mut flat = Vec::with_capacity(centers.len() * n_per * d);
    let mut ids = Vec::with_capacity(centers.len() * n_per);
    for (c, centre) in centers.iter().enumerate() {
        for _ in 0..n_per {
            flat.extend(centre.iter().map(|m| m + normal.sample(&mut rng)));
            ids.push(c);
        }
    }
    (Matrix::from_vec(ids.len(), d, flat).expect("consistent shape"), ids)
}

/// Two far-apart blobs in `dim` dimensions.
pub fn two_blobs(n_per: usize, dim: usize, seed: u64) -> (Matrix, Vec<usize>) {
    let mut a = vec![0.0; dim];
    let mut b = vec![0.0; dim];
    a[0] = -5.0;
    b[0] = 5.0;
    blobs(&[a, b], n_per, 1.0, seed)
}

/// Concentric noisy circles in the plane.
pub fn rings(radii: &[f64], n_per: usize, noise: f64, seed: u64) -> (Matrix, Vec<usize>) {
    let mut rng = seed::stage_rng("rings", seed);
    let normal = Normal::new(0.0, noise.max(f64::MIN_POSITIVE)).expect("valid noise");
    let mut flat = Vec::with_capacity(radii.len() * n_per * 2);
    let mut ids = Vec::with_capacity(radii.len() * n_per);
    for (c, &r) in radii.iter().enumerate() {
        for _ in 0..n_per {
            let t = rng.random_range(0.0..std::f64::consts::TAU);
            let rr = r + if noise > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            flat.push(rr * t.cos());
            flat.push(rr * t.sin());
            ids.push(c);
        }
    }
    (Matrix::from_vec(ids.len(), 2, flat).expect("consistent shape"), ids)
}

/// A toy lexicon whose difference vectors carry the class: every antonym
/// pair is offset along one of a few "antonym" directions, every synonym
/// pair along a "synonym" direction, with Gaussian jitter. Each pair uses
/// two fresh words, and parts of speech cycle through adjective, noun, verb.
pub fn toy_lexicon(n_per_class: usize, dim: usize, jitter: f64, seed: u64) -> Result<(EmbeddingStore, PairDataset)> {
    let mut rng = seed::stage_rng("toy-lexicon", seed);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    let noise = Normal::new(0.0, jitter.max(f64::MIN_POSITIVE)).expect("valid jitter");
    let directions: Vec<Vec<f64>> = (0..4)
        .map(|_| {
            let v: Vec<f64> = (0..dim).map(|_| unit.sample(&mut rng)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.into_iter().map(|x| 4.0 * x / n).collect()
        })
        .collect();
    let mut store = EmbeddingStore::new(dim, EmbeddingSource::Word2vec)?;
    let mut pairs = Vec::new();
    let mut word = 0usize;
    for (class, label) in [Label::Antonym, Label::Synonym].into_iter().enumerate() {
        for i in 0..n_per_class {
            let dir = &directions[2 * class + i % 2];
            let base: Vec<f64> = (0..dim).map(|_| unit.sample(&mut rng)).collect();
            let other: Vec<f64> = base
                .iter()
                .zip(dir)
                .map(|(b, d)| b + d + if jitter > 0.0 { noise.sample(&mut rng) } else { 0.0 })
                .collect();
            let (w1, w2) = (format!("w{word}"), format!("w{}", word + 1));
            word += 2;
            store.insert(w1.clone(), &base.iter().map(|&v| v as f32).collect::<Vec<_>>())?;
            store.insert(w2.clone(), &other.iter().map(|&v| v as f32).collect::<Vec<_>>())?;
            let pos = Pos::ALL[i % 3];
            let split = if i % 5 == 0 { SplitTag::Test } else { SplitTag::Train };
            pairs.push(WordPair::new(&w1, &w2, pos, label, split)?);
        }
    }
    Ok((store, PairDataset::from_pairs("toy", pairs)))
}
