//! Principal component analysis through the SVD of the centred data.

use nalgebra::SVD;
use serde::Serialize;

use super::{Projection, ProjectionMethod};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::vectorize::LabeledCloud;

#[derive(Debug, Clone)]
pub struct PcaFit {
    pub mean: Vec<f64>,
    /// `components.row(c)` is the unit loading vector of component `c`.
    pub components: Matrix,
    /// Variance along each retained component (`s^2 / (n - 1)`), descending.
    pub explained_variance: Vec<f64>,
    pub scores: Matrix,
}

impl PcaFit {
    /// Maps scores back to the input space.
    pub fn reconstruct(&self) -> Matrix {
        let (n, d) = (self.scores.rows(), self.mean.len());
        let mut out = Matrix::zeros(n, d);
        for i in 0..n {
            let row = out.row_mut(i);
            row.copy_from_slice(&self.mean);
            for c in 0..self.components.rows() {
                let s = self.scores.get(i, c);
                for (r, l) in row.iter_mut().zip(self.components.row(c)) {
                    *r += s * l;
                }
            }
        }
        out
    }
}

/// Projects mean-centred rows onto the leading `out_dims` right singular
/// vectors. Each component's largest-magnitude loading is made positive.
pub fn pca_fit(points: &Matrix, out_dims: usize) -> Result<PcaFit> {
    let (n, d) = (points.rows(), points.cols());
    if n < 2 {
        return Err(Error::Param(format!("PCA needs at least 2 points, got {n}")));
    }
    if out_dims == 0 || out_dims > d.min(n) {
        return Err(Error::Param(format!(
            "cannot keep {out_dims} components of {n} points in {d} dimensions"
        )));
    }
    let mut mean = vec![0.0; d];
    for r in points.iter_rows() {
        mean.iter_mut().zip(r).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut centred = points.to_nalgebra();
    for i in 0..n {
        for j in 0..d {
            centred[(i, j)] -= mean[j];
        }
    }
    let svd = SVD::try_new(centred.clone(), false, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("SVD did not converge".into()))?;
    let v_t = svd.v_t.as_ref().expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut components = Matrix::zeros(out_dims, d);
    let mut explained_variance = Vec::with_capacity(out_dims);
    for (c, &k) in order.iter().take(out_dims).enumerate() {
        let row: Vec<f64> = v_t.row(k).iter().copied().collect();
        let pivot = row
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (j, v) in row.iter().enumerate() {
            components.set(c, j, sign * v);
        }
        let s = svd.singular_values[k];
        explained_variance.push(s * s / (n - 1) as f64);
    }

    let mut scores = Matrix::zeros(n, out_dims);
    for i in 0..n {
        for c in 0..out_dims {
            let v: f64 = (0..d).map(|j| centred[(i, j)] * components.get(c, j)).sum();
            scores.set(i, c, v);
        }
    }
    Ok(PcaFit {
        mean,
        components,
        explained_variance,
        scores,
    })
}

#[derive(Serialize)]
struct PcaConfig {
    out_dims: usize,
}

pub fn pca(cloud: &LabeledCloud, out_dims: usize) -> Result<Projection> {
    let fit = pca_fit(&cloud.points, out_dims)?;
    Projection::new(cloud, fit.scores, ProjectionMethod::Pca, &PcaConfig { out_dims })
}
