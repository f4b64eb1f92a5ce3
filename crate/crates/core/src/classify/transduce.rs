//! Cluster all points jointly, let the training points inside each cluster
//! vote, and label every test point by its cluster.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{kmeans::kmeans, spectral::spectral_cluster, ClusterAssignment};
use crate::error::{Error, Result};
use crate::linalg::{sq_euclidean, Matrix};
use crate::pairdata::Label;

pub const DEFAULT_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Clusterer {
    KMeans { n_init: usize },
    Spectral { n_neighbors: usize },
}

impl Clusterer {
    pub fn kmeans() -> Self {
        Clusterer::KMeans { n_init: 10 }
    }

    pub fn spectral() -> Self {
        Clusterer::Spectral { n_neighbors: 10 }
    }

    pub fn cluster(&self, points: &Matrix, k: usize, seed: u64) -> Result<ClusterAssignment> {
        match *self {
            Clusterer::KMeans { n_init } => kmeans(points, k, seed, n_init),
            Clusterer::Spectral { n_neighbors } => spectral_cluster(points, k, n_neighbors, seed),
        }
    }
}

/// How a cluster's label was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum VoteRule {
    Majority,
    /// Tied vote settled by the majority over all training points.
    GlobalMajority,
    /// Tied twice; antonym wins.
    FixedOrder,
    /// No training point inside; label copied from the cluster whose
    /// centroid is nearest.
    NearestCentroid { from: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterVote {
    pub label: Label,
    /// Share of the cluster's training votes cast for `label`; 0 for
    /// inherited labels.
    pub margin: f64,
    pub antonym_votes: usize,
    pub synonym_votes: usize,
    pub rule: VoteRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransductiveResult {
    /// Indices of the unlabeled points, ascending.
    pub test_indices: Vec<usize>,
    /// One label per entry of `test_indices`.
    pub predicted: Vec<Label>,
    pub per_cluster_vote: BTreeMap<usize, ClusterVote>,
    pub assignment: ClusterAssignment,
}

fn centroid(points: &Matrix, members: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; points.cols()];
    for &i in members {
        c.iter_mut().zip(points.row(i)).for_each(|(a, b)| *a += b);
    }
    c.iter_mut().for_each(|a| *a /= members.len() as f64);
    c
}

/// Labels every point from a given partition. `train_labels[i]` is `None`
/// for test points.
pub fn vote(points: &Matrix, train_labels: &[Option<Label>], assignment: &ClusterAssignment) -> Result<TransductiveResult> {
    let n = points.rows();
    if train_labels.len() != n || assignment.cluster_id.len() != n {
        return Err(Error::Param("points, labels and assignment differ in length".into()));
    }
    let (mut g_ant, mut g_syn) = (0usize, 0usize);
    for l in train_labels.iter().flatten() {
        match l {
            Label::Antonym => g_ant += 1,
            Label::Synonym => g_syn += 1,
            other => {
                return Err(Error::Param(format!(
                    "training label {other} is a shuffled control; drop controls before voting"
                )))
            }
        }
    }
    if g_ant + g_syn == 0 {
        return Err(Error::Param("no training points to vote with".into()));
    }
    let global = if g_ant != g_syn {
        Some(if g_ant > g_syn { Label::Antonym } else { Label::Synonym })
    } else {
        None
    };

    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in assignment.cluster_id.iter().enumerate() {
        members.entry(c).or_default().push(i);
    }
    let mut votes = BTreeMap::new();
    let mut unvoted = Vec::new();
    for (&c, idx) in &members {
        let (mut a, mut s) = (0, 0);
        for &i in idx {
            match train_labels[i] {
                Some(Label::Antonym) => a += 1,
                Some(_) => s += 1,
                None => {}
            }
        }
        if a + s == 0 {
            unvoted.push(c);
            continue;
        }
        let (label, rule) = if a != s {
            (if a > s { Label::Antonym } else { Label::Synonym }, VoteRule::Majority)
        } else if let Some(g) = global {
            (g, VoteRule::GlobalMajority)
        } else {
            (Label::Antonym, VoteRule::FixedOrder)
        };
        let won = if label == Label::Antonym { a } else { s };
        votes.insert(
            c,
            ClusterVote {
                label,
                margin: won as f64 / (a + s) as f64,
                antonym_votes: a,
                synonym_votes: s,
                rule,
            },
        );
    }
    if !unvoted.is_empty() {
        let voted: Vec<(usize, Vec<f64>)> = votes
            .keys()
            .map(|&c| (c, centroid(points, &members[&c])))
            .collect();
        for c in unvoted {
            let mine = centroid(points, &members[&c]);
            let (from, _) = voted
                .iter()
                .map(|(v, cen)| (*v, sq_euclidean(&mine, cen)))
                .min_by(|x, y| {
                    // Ties go to the cluster holding the lowest point index,
                    // which depends on the partition only.
                    x.1.total_cmp(&y.1).then(members[&x.0][0].cmp(&members[&y.0][0]))
                })
                .expect("at least one voted cluster");
            let label = votes[&from].label;
            votes.insert(
                c,
                ClusterVote {
                    label,
                    margin: 0.0,
                    antonym_votes: 0,
                    synonym_votes: 0,
                    rule: VoteRule::NearestCentroid { from },
                },
            );
        }
    }
    let test_indices: Vec<usize> = (0..n).filter(|&i| train_labels[i].is_none()).collect();
    let predicted = test_indices
        .iter()
        .map(|&i| votes[&assignment.cluster_id[i]].label)
        .collect();
    Ok(TransductiveResult {
        test_indices,
        predicted,
        per_cluster_vote: votes,
        assignment: assignment.clone(),
    })
}

/// Clusters train and test points together, then votes.
pub fn transduce(
    points: &Matrix,
    train_labels: &[Option<Label>],
    clusterer: &Clusterer,
    k: usize,
    seed: u64,
) -> Result<TransductiveResult> {
    if train_labels.iter().all(Option::is_none) {
        return Err(Error::Param("no training points to vote with".into()));
    }
    let assignment = clusterer.cluster(points, k, seed)?;
    vote(points, train_labels, &assignment)
}
