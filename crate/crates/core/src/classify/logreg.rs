//! L2-regularised binary logistic regression, fitted by truncated Newton.

use serde::{Deserialize, Serialize};

use super::{check_binary_fit, Standardizer};
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, Matrix};

pub const DEFAULT_L2: f64 = 1.0;
pub const GRAD_TOL: f64 = 1e-6;
const MAX_NEWTON: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub(crate) standardizer: Standardizer,
    /// Weights on standardised features.
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub l2: f64,
    pub iterations: usize,
    pub final_grad_norm: f64,
}

#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Penalised negative log-likelihood over standardised rows. The parameter
/// vector is the weights followed by the unpenalised intercept.
pub struct LogRegObjective<'a> {
    x: &'a Matrix,
    y: &'a [bool],
    l2: f64,
}

impl<'a> LogRegObjective<'a> {
    pub fn new(x: &'a Matrix, y: &'a [bool], l2: f64) -> Self {
        LogRegObjective { x, y, l2 }
    }

    pub fn dim(&self) -> usize {
        self.x.cols() + 1
    }

    fn margins(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.x.cols();
        self.x
            .iter_rows()
            .map(|r| dot(r, &theta[..d]) + theta[d])
            .collect()
    }

    pub fn value(&self, theta: &[f64]) -> f64 {
        let d = self.x.cols();
        let nll: f64 = self
            .margins(theta)
            .iter()
            .zip(self.y)
            .map(|(&z, &y)| softplus(z) - if y { z } else { 0.0 })
            .sum();
        nll + 0.5 * self.l2 * dot(&theta[..d], &theta[..d])
    }

    pub fn gradient(&self, theta: &[f64]) -> Vec<f64> {
        let d = self.x.cols();
        let mut g = vec![0.0; d + 1];
        for ((r, z), &y) in self.x.iter_rows().zip(self.margins(theta)).zip(self.y) {
            let e = sigmoid(z) - if y { 1.0 } else { 0.0 };
            for j in 0..d {
                g[j] += e * r[j];
            }
            g[d] += e;
        }
        for j in 0..d {
            g[j] += self.l2 * theta[j];
        }
        g
    }

    /// Hessian-vector product at `theta`, given the curvature weights
    /// `s_i = sigma(z_i) (1 - sigma(z_i))`.
    fn hess_vec(&self, s: &[f64], v: &[f64]) -> Vec<f64> {
        let d = self.x.cols();
        let mut out = vec![0.0; d + 1];
        for (r, &si) in self.x.iter_rows().zip(s) {
            let xv = si * (dot(r, &v[..d]) + v[d]);
            for j in 0..d {
                out[j] += xv * r[j];
            }
            out[d] += xv;
        }
        for j in 0..d {
            out[j] += self.l2 * v[j];
        }
        out
    }
}

/// Conjugate gradients on `H p = -g`, stopped at relative residual `tol`.
fn cg_solve(h: impl Fn(&[f64]) -> Vec<f64>, g: &[f64], tol: f64, max_iter: usize) -> Vec<f64> {
    let n = g.len();
    let mut p = vec![0.0; n];
    let mut r: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut dir = r.clone();
    let mut rr = dot(&r, &r);
    let stop = tol * tol * rr;
    for _ in 0..max_iter {
        if rr <= stop {
            break;
        }
        let hd = h(&dir);
        let curv = dot(&dir, &hd);
        if curv <= 0.0 {
            break;
        }
        let alpha = rr / curv;
        for i in 0..n {
            p[i] += alpha * dir[i];
            r[i] -= alpha * hd[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            dir[i] = r[i] + beta * dir[i];
        }
    }
    if p.iter().all(|&v| v == 0.0) {
        p = g.iter().map(|v| -v).collect();
    }
    p
}

/// `labels[i]` is true for the positive (antonym) class. Features are
/// standardised on the training rows; the fit stops once the gradient norm
/// of the penalised objective falls below `1e-6`.
pub fn fit_logreg(points: &Matrix, labels: &[bool], l2: f64) -> Result<LinearModel> {
    check_binary_fit(points, labels)?;
    if !(l2 > 0.0) {
        return Err(Error::Param(format!("l2 penalty must be positive, got {l2}")));
    }
    let standardizer = Standardizer::fit(points);
    let x = standardizer.apply(points);
    let obj = LogRegObjective::new(&x, labels, l2);
    let mut theta = vec![0.0; obj.dim()];
    let mut f = obj.value(&theta);
    let mut g = obj.gradient(&theta);
    let mut iterations = 0;
    while norm(&g) >= GRAD_TOL {
        if iterations == MAX_NEWTON {
            return Err(Error::Fit(format!(
                "logistic regression stopped at gradient norm {:.3e} after {MAX_NEWTON} Newton steps",
                norm(&g)
            )));
        }
        iterations += 1;
        let s: Vec<f64> = obj
            .margins(&theta)
            .iter()
            .map(|&z| {
                let p = sigmoid(z);
                p * (1.0 - p)
            })
            .collect();
        let gn = norm(&g);
        let step = cg_solve(|v| obj.hess_vec(&s, v), &g, gn.sqrt().min(0.1), 10 * obj.dim().max(50));
        let slope = dot(&g, &step);
        let mut t = 1.0;
        loop {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(a, b)| a + t * b).collect();
            let fc = obj.value(&cand);
            if fc <= f + 1e-4 * t * slope || t < 1e-10 {
                theta = cand;
                f = fc;
                break;
            }
            t *= 0.5;
        }
        g = obj.gradient(&theta);
        if !f.is_finite() {
            return Err(Error::Numeric("logistic loss is not finite".into()));
        }
    }
    let d = x.cols();
    Ok(LinearModel {
        standardizer,
        weights: theta[..d].to_vec(),
        intercept: theta[d],
        l2,
        iterations,
        final_grad_norm: norm(&g),
    })
}

impl LinearModel {
    /// Probability of the positive class.
    pub fn predict_proba(&self, points: &Matrix) -> Vec<f64> {
        let x = self.standardizer.apply(points);
        x.iter_rows()
            .map(|r| sigmoid(dot(r, &self.weights) + self.intercept))
            .collect()
    }

    pub fn predict(&self, points: &Matrix) -> Vec<bool> {
        self.predict_proba(points).into_iter().map(|p| p > 0.5).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn xor() -> (Matrix, Vec<bool>) {
        let rows = [[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]];
        let mut pts = Vec::new();
        let mut y = Vec::new();
        for _ in 0..25 {
            for r in rows {
                pts.push(r);
                y.push(r[0] * r[1] > 0.0);
            }
        }
        (Matrix::from_rows(&pts, 2).unwrap(), y)
    }

    #[test]
    fn separable_1d() {
        let rows: Vec<[f64; 1]> = (0..20).map(|i| [if i < 10 { -1.0 } else { 1.0 }]).collect();
        let y: Vec<bool> = (0..20).map(|i| i >= 10).collect();
        let m = fit_logreg(&Matrix::from_rows(&rows, 1).unwrap(), &y, 1.0).unwrap();
        assert_eq!(m.predict(&Matrix::from_rows(&rows, 1).unwrap()), y);
    }

    #[test]
    fn xor_is_chance() {
        let (x, y) = xor();
        let m = fit_logreg(&x, &y, 1.0).unwrap();
        let acc = m.predict(&x).iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
        assert!((acc - 0.5).abs() <= 0.25, "{acc}");
    }

    #[test]
    fn single_class_is_an_error() {
        let x = Matrix::from_rows(&[[0.0], [1.0]], 1).unwrap();
        assert!(matches!(fit_logreg(&x, &[true, true], 1.0), Err(Error::Fit(_))));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = crate::seed::rng(8);
        let rows: Vec<[f64; 3]> = (0..40).map(|_| [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]).collect();
        let x = Matrix::from_rows(&rows, 3).unwrap();
        let y: Vec<bool> = rows.iter().map(|r| r[0] - r[2] + rng.random_range(-1.0..1.0) > 0.0).collect();
        let obj = LogRegObjective::new(&x, &y, 0.7);
        for _ in 0..10 {
            let theta: Vec<f64> = (0..4).map(|_| rng.random_range(-1.5..1.5)).collect();
            let g = obj.gradient(&theta);
            for j in 0..4 {
                let h = 1e-6;
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[j] += h;
                tm[j] -= h;
                let fd = (obj.value(&tp) - obj.value(&tm)) / (2.0 * h);
                assert!((fd - g[j]).abs() <= 1e-6 * (1.0 + g[j].abs()), "{fd} vs {}", g[j]);
            }
        }
    }

    #[test]
    fn converges_below_tolerance() {
        let mut rng = crate::seed::rng(10);
        let rows: Vec<[f64; 2]> = (0..300).map(|_| [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]).collect();
        let y: Vec<bool> = rows.iter().map(|r| r[0] + 0.3 * r[1] > 0.0).collect();
        let m = fit_logreg(&Matrix::from_rows(&rows, 2).unwrap(), &y, 1.0).unwrap();
        assert!(m.final_grad_norm < GRAD_TOL);
    }

    #[test]
    fn zero_padding_keeps_decisions() {
        let mut rng = crate::seed::rng(11);
        let rows: Vec<[f64; 2]> = (0..80).map(|_| [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)]).collect();
        let padded: Vec<[f64; 3]> = rows.iter().map(|r| [r[0], r[1], 0.0]).collect();
        let y: Vec<bool> = rows.iter().map(|r| r[0] - r[1] + rng.random_range(-1.0..1.0) > 0.0).collect();
        let a = fit_logreg(&Matrix::from_rows(&rows, 2).unwrap(), &y, 1.0).unwrap();
        let b = fit_logreg(&Matrix::from_rows(&padded, 3).unwrap(), &y, 1.0).unwrap();
        assert_eq!(
            a.predict(&Matrix::from_rows(&rows, 2).unwrap()),
            b.predict(&Matrix::from_rows(&padded, 3).unwrap())
        );
        assert_eq!(b.weights[2], 0.0);
    }
}
