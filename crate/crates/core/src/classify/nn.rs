//! One-hidden-layer ReLU network with a two-way softmax, trained by Adam.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_binary_fit, Standardizer};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NnParams {
    pub hidden_width: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for NnParams {
    fn default() -> Self {
        NnParams {
            hidden_width: 64,
            epochs: 200,
            batch_size: 64,
            learning_rate: 1e-3,
            seed: 0,
        }
    }
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Parameters are stored flat: `W1` (hidden x input, row-major), `b1`,
/// `W2` (2 x hidden), `b2`. Output 1 is the positive class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NnModel {
    pub(crate) standardizer: Standardizer,
    pub input_dim: usize,
    pub hidden_width: usize,
    pub params: Vec<f64>,
}

impl NnModel {
    fn offsets(&self) -> (usize, usize, usize) {
        let (d, h) = (self.input_dim, self.hidden_width);
        (h * d, h * d + h, h * d + h + 2 * h)
    }

    fn init(standardizer: Standardizer, input_dim: usize, hidden_width: usize, seed: u64) -> Self {
        let (d, h) = (input_dim, hidden_width);
        let mut rng = seed::stage_rng("nn-init", seed);
        let mut params = vec![0.0; h * d + h + 2 * h + 2];
        let lim1 = (6.0 / d as f64).sqrt();
        for p in &mut params[..h * d] {
            *p = rng.random_range(-lim1..lim1);
        }
        let lim2 = (6.0 / (h + 2) as f64).sqrt();
        for p in &mut params[h * d + h..h * d + h + 2 * h] {
            *p = rng.random_range(-lim2..lim2);
        }
        NnModel {
            standardizer,
            input_dim,
            hidden_width,
            params,
        }
    }

    /// Logits for one standardised row, with the hidden activations.
    fn forward(&self, x: &[f64], hidden: &mut [f64]) -> [f64; 2] {
        let (d, h) = (self.input_dim, self.hidden_width);
        let (o_b1, o_w2, o_b2) = self.offsets();
        for u in 0..h {
            let w = &self.params[u * d..(u + 1) * d];
            let z: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + self.params[o_b1 + u];
            hidden[u] = z.max(0.0);
        }
        let mut out = [0.0; 2];
        for (c, o) in out.iter_mut().enumerate() {
            let w = &self.params[o_w2 + c * h..o_w2 + (c + 1) * h];
            *o = w.iter().zip(hidden.iter()).map(|(a, b)| a * b).sum::<f64>() + self.params[o_b2 + c];
        }
        out
    }

    /// Mean cross-entropy over the given standardised rows, and its gradient
    /// with respect to `params`.
    pub fn loss_and_gradient(&self, x: &Matrix, y: &[bool], rows: &[usize]) -> (f64, Vec<f64>) {
        let (d, h) = (self.input_dim, self.hidden_width);
        let (o_b1, o_w2, o_b2) = self.offsets();
        let mut grad = vec![0.0; self.params.len()];
        let mut hidden = vec![0.0; h];
        let mut loss = 0.0;
        let inv = 1.0 / rows.len() as f64;
        for &i in rows {
            let xi = x.row(i);
            let logits = self.forward(xi, &mut hidden);
            let m = logits[0].max(logits[1]);
            let lse = m + ((logits[0] - m).exp() + (logits[1] - m).exp()).ln();
            let target = usize::from(y[i]);
            loss -= (logits[target] - lse) * inv;
            let mut dlogit = [(logits[0] - lse).exp(), (logits[1] - lse).exp()];
            dlogit[target] -= 1.0;
            for c in 0..2 {
                let g = dlogit[c] * inv;
                grad[o_b2 + c] += g;
                for u in 0..h {
                    grad[o_w2 + c * h + u] += g * hidden[u];
                }
            }
            for u in 0..h {
                if hidden[u] <= 0.0 {
                    continue;
                }
                let g = (dlogit[0] * self.params[o_w2 + u] + dlogit[1] * self.params[o_w2 + h + u]) * inv;
                grad[o_b1 + u] += g;
                let row = &mut grad[u * d..(u + 1) * d];
                for (gw, xv) in row.iter_mut().zip(xi) {
                    *gw += g * xv;
                }
            }
        }
        (loss, grad)
    }

    pub fn predict_proba(&self, points: &Matrix) -> Vec<f64> {
        let x = self.standardizer.apply(points);
        let mut hidden = vec![0.0; self.hidden_width];
        x.iter_rows()
            .map(|r| {
                let l = self.forward(r, &mut hidden);
                1.0 / (1.0 + (l[0] - l[1]).exp())
            })
            .collect()
    }

    pub fn predict(&self, points: &Matrix) -> Vec<bool> {
        self.predict_proba(points).into_iter().map(|p| p > 0.5).collect()
    }
}

/// `labels[i]` is true for the positive class. Inputs are standardised on
/// the training rows. Batches are reshuffled each epoch from the seeded
/// stream, so a fit is reproducible bit for bit.
pub fn fit_shallow_nn(points: &Matrix, labels: &[bool], params: &NnParams) -> Result<NnModel> {
    check_binary_fit(points, labels)?;
    if params.hidden_width == 0 || params.batch_size == 0 {
        return Err(Error::Param("hidden width and batch size must be positive".into()));
    }
    if !(params.learning_rate > 0.0) {
        return Err(Error::Param("learning rate must be positive".into()));
    }
    let standardizer = Standardizer::fit(points);
    let x = standardizer.apply(points);
    let mut model = NnModel::init(standardizer, points.cols(), params.hidden_width, params.seed);
    let mut m = vec![0.0; model.params.len()];
    let mut v = vec![0.0; model.params.len()];
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut rng = seed::stage_rng("nn-batches", params.seed);
    let mut t = 0i32;
    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(params.batch_size) {
            let (loss, grad) = model.loss_and_gradient(&x, labels, batch);
            epoch_loss += loss * batch.len() as f64;
            t += 1;
            let c1 = 1.0 - BETA1.powi(t);
            let c2 = 1.0 - BETA2.powi(t);
            for k in 0..grad.len() {
                m[k] = BETA1 * m[k] + (1.0 - BETA1) * grad[k];
                v[k] = BETA2 * v[k] + (1.0 - BETA2) * grad[k] * grad[k];
                model.params[k] -= params.learning_rate * (m[k] / c1) / ((v[k] / c2).sqrt() + ADAM_EPS);
            }
        }
        if !epoch_loss.is_finite() {
            return Err(Error::Numeric(format!("network loss became non-finite in epoch {epoch}")));
        }
    }
    Ok(model)
}
