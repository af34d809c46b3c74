//! Fully connected ReLU network with a softmax output, trained with Adam.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{argmax, describe, Design};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::types::TerrainClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnParams {
    /// Hidden layer widths, input side first.
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Minimum epoch-loss improvement that counts as progress.
    pub tol: f64,
    /// Epochs without progress before the learning rate drops.
    pub patience: usize,
    pub lr_divisor: f64,
    /// Training stops at the first stall after this many learning-rate drops.
    pub max_reductions: usize,
}

impl Default for AnnParams {
    fn default() -> Self {
        Self {
            hidden: vec![50, 100],
            batch_size: 32,
            learning_rate: 1e-3,
            max_epochs: 200,
            tol: 1e-4,
            patience: 2,
            lr_divisor: 5.0,
            max_reductions: 3,
        }
    }
}

impl AnnParams {
    pub fn describe(&self) -> BTreeMap<String, String> {
        let hidden: Vec<String> = self.hidden.iter().map(|h| h.to_string()).collect();
        describe([
            ("hidden", hidden.join(",")),
            ("activation", "relu".into()),
            ("optimizer", "adam".into()),
            ("batch_size", self.batch_size.to_string()),
            ("learning_rate_init", self.learning_rate.to_string()),
            ("learning_rate", format!("adaptive(/{} after {} stalled epochs)", self.lr_divisor, self.patience)),
            ("max_epochs", self.max_epochs.to_string()),
        ])
    }
}

/// Adam with bias correction over a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - libm::pow(self.beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= self.lr * m_hat / (libm::sqrt(v_hat) + self.eps);
        }
    }
}

/// Layer sizes plus one flat parameter vector; per layer the weights
/// (`out x in`, row-major) come before the biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnModel {
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
}

impl AnnModel {
    pub fn zeros(sizes: Vec<usize>) -> Self {
        let n = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Self { sizes, params: vec![0.0; n] }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn glorot(sizes: Vec<usize>, rng: &mut SplitMix64) -> Self {
        let mut m = Self::zeros(sizes);
        let mut off = 0;
        for l in 0..m.sizes.len() - 1 {
            let (n_in, n_out) = (m.sizes[l], m.sizes[l + 1]);
            let limit = libm::sqrt(6.0 / (n_in + n_out) as f64);
            for w in &mut m.params[off..off + n_in * n_out] {
                *w = rng.uniform(-limit, limit);
            }
            off += n_in * n_out + n_out;
        }
        m
    }

    fn layers(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let mut off = 0;
        self.sizes.windows(2).map(move |w| {
            let start = off;
            off += w[0] * w[1] + w[1];
            (start, w[0], w[1])
        })
    }

    /// Output logits for one input.
    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        let n_layers = self.sizes.len() - 1;
        let mut a = x.to_vec();
        for (l, (off, n_in, n_out)) in self.layers().enumerate() {
            let w = &self.params[off..off + n_in * n_out];
            let b = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let mut z: Vec<f64> = (0..n_out)
                .map(|o| b[o] + w[o * n_in..(o + 1) * n_in].iter().zip(&a).map(|(p, q)| p * q).sum::<f64>())
                .collect();
            if l + 1 < n_layers {
                z.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            a = z;
        }
        a
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        softmax(&self.logits(x))
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.logits(x))
    }

    /// Mean cross-entropy over `rows` of the design and its gradient.
    pub fn loss_and_grad(&self, data: &Design, rows: &[usize]) -> (f64, Vec<f64>) {
        let b = rows.len();
        let n_layers = self.sizes.len() - 1;
        let layers: Vec<(usize, usize, usize)> = self.layers().collect();
        // activations[l] is the input of layer l, batch-major
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(n_layers + 1);
        let mut input = Vec::with_capacity(b * data.d);
        for &r in rows {
            input.extend_from_slice(data.row(r));
        }
        acts.push(input);
        for (l, &(off, n_in, n_out)) in layers.iter().enumerate() {
            let w = &self.params[off..off + n_in * n_out];
            let bias = &self.params[off + n_in * n_out..off + n_in * n_out + n_out];
            let a = &acts[l];
            let mut z = vec![0.0; b * n_out];
            for s in 0..b {
                let x = &a[s * n_in..(s + 1) * n_in];
                for o in 0..n_out {
                    let wr = &w[o * n_in..(o + 1) * n_in];
                    let mut acc = bias[o];
                    for k in 0..n_in {
                        acc += wr[k] * x[k];
                    }
                    z[s * n_out + o] = if l + 1 < n_layers { acc.max(0.0) } else { acc };
                }
            }
            acts.push(z);
        }
        let k = self.sizes[n_layers];
        let mut loss = 0.0;
        let mut delta = vec![0.0; b * k];
        for (s, &r) in rows.iter().enumerate() {
            let p = softmax(&acts[n_layers][s * k..(s + 1) * k]);
            let y = data.y[r];
            loss -= libm::log(p[y].max(f64::MIN_POSITIVE));
            for c in 0..k {
                delta[s * k + c] = (p[c] - if c == y { 1.0 } else { 0.0 }) / b as f64;
            }
        }
        loss /= b as f64;

        let mut grad = vec![0.0; self.params.len()];
        for l in (0..n_layers).rev() {
            let (off, n_in, n_out) = layers[l];
            let a = &acts[l];
            let w = &self.params[off..off + n_in * n_out];
            let (gw, rest) = grad[off..].split_at_mut(n_in * n_out);
            let gb = &mut rest[..n_out];
            for s in 0..b {
                let x = &a[s * n_in..(s + 1) * n_in];
                for o in 0..n_out {
                    let d = delta[s * n_out + o];
                    if d == 0.0 {
                        continue;
                    }
                    gb[o] += d;
                    let row = &mut gw[o * n_in..(o + 1) * n_in];
                    for i in 0..n_in {
                        row[i] += d * x[i];
                    }
                }
            }
            if l > 0 {
                let mut prev = vec![0.0; b * n_in];
                for s in 0..b {
                    for o in 0..n_out {
                        let d = delta[s * n_out + o];
                        if d == 0.0 {
                            continue;
                        }
                        let wr = &w[o * n_in..(o + 1) * n_in];
                        for i in 0..n_in {
                            prev[s * n_in + i] += d * wr[i];
                        }
                    }
                    // ReLU derivative, taken as 0 at 0
                    for i in 0..n_in {
                        if a[s * n_in + i] <= 0.0 {
                            prev[s * n_in + i] = 0.0;
                        }
                    }
                }
                delta = prev;
            }
        }
        (loss, grad)
    }
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| libm::exp(v - m)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Train the network. Returns the model and the per-epoch training loss.
pub fn fit(train: &Design, params: &AnnParams, seed: u64) -> Result<(AnnModel, Vec<f64>)> {
    if train.n == 0 {
        return Err(Error::EmptyDataset);
    }
    if params.batch_size == 0 || params.hidden.contains(&0) || !(params.learning_rate > 0.0) {
        return Err(Error::InvalidParameter("batch size, layer widths and learning rate must be positive".into()));
    }
    let mut sizes = vec![train.d];
    sizes.extend_from_slice(&params.hidden);
    sizes.push(TerrainClass::COUNT);
    let root = SplitMix64::new(seed);
    let mut model = AnnModel::glorot(sizes, &mut root.child("init"));
    let mut shuffle = root.child("shuffle");
    let mut adam = Adam::new(model.params.len(), params.learning_rate);
    let mut order: Vec<usize> = (0..train.n).collect();
    let mut curve = Vec::new();
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    let mut reductions = 0;
    for epoch in 0..params.max_epochs {
        shuffle.shuffle(&mut order);
        let mut total = 0.0;
        for batch in order.chunks(params.batch_size) {
            let (loss, grad) = model.loss_and_grad(train, batch);
            if !loss.is_finite() {
                return Err(Error::Diverged { epoch });
            }
            total += loss * batch.len() as f64;
            adam.step(&mut model.params, &grad);
        }
        let loss = total / train.n as f64;
        curve.push(loss);
        if loss > best - params.tol {
            stalled += 1;
        } else {
            stalled = 0;
        }
        best = best.min(loss);
        if stalled >= params.patience {
            if reductions == params.max_reductions {
                break;
            }
            reductions += 1;
            adam.lr /= params.lr_divisor;
            stalled = 0;
        }
    }
    if model.params.iter().any(|p| !p.is_finite()) {
        return Err(Error::Diverged { epoch: curve.len() });
    }
    Ok((model, curve))
}
