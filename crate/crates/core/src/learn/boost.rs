//! Multinomial gradient boosting with shallow regression trees.
//!
//! Each stage fits one tree per class to the softmax residuals `y - p`; the
//! leaves hold the mean residual and the scores move by `lr` times the leaf
//! value. With `lr` below 4 every stage lowers the training cross-entropy.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::{grow, presort, Criterion, Tree, TreeSpec};
use super::{argmax, describe, Design};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::types::TerrainClass;

const K: usize = TerrainClass::COUNT;
/// Floor on class frequencies for the prior, so absent classes get a finite score.
pub const PRIOR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbParams {
    pub learning_rate: f64,
    pub n_estimators: usize,
    pub max_depth: usize,
}

impl Default for GbParams {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            n_estimators: 100,
            max_depth: 3,
        }
    }
}

impl GbParams {
    pub fn describe(&self) -> BTreeMap<String, String> {
        describe([
            ("learning_rate", self.learning_rate.to_string()),
            ("n_estimators", self.n_estimators.to_string()),
            ("max_depth", self.max_depth.to_string()),
            ("loss", "multinomial_deviance".into()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbModel {
    pub learning_rate: f64,
    /// Stage-0 score per class (log prior).
    pub prior: Vec<f64>,
    /// `stages[s][k]` is the class-`k` tree of stage `s`.
    pub stages: Vec<Vec<Tree>>,
}

/// Mean cross-entropy of raw scores against labels.
pub fn cross_entropy(scores: &[[f64; K]], y: &[usize]) -> f64 {
    let mut total = 0.0;
    for (s, &c) in scores.iter().zip(y) {
        let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = m + libm::log(s.iter().map(|v| libm::exp(v - m)).sum::<f64>());
        total += lse - s[c];
    }
    total / y.len() as f64
}

fn softmax(s: &[f64; K]) -> [f64; K] {
    let m = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p = s.map(|v| libm::exp(v - m));
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
    p
}

/// Returns the model and the training loss after each stage, starting with
/// the prior.
pub fn fit(train: &Design, params: &GbParams) -> Result<(GbModel, Vec<f64>)> {
    if train.n == 0 {
        return Err(Error::EmptyDataset);
    }
    if !(params.learning_rate.is_finite() && params.learning_rate >= 0.0) || params.max_depth == 0 {
        return Err(Error::InvalidParameter("learning_rate must be >= 0 and max_depth >= 1".into()));
    }
    let n = train.n;
    let mut counts = [0.0; K];
    for &c in &train.y {
        counts[c] += 1.0;
    }
    let prior: Vec<f64> = counts.iter().map(|c| libm::log((c / n as f64).max(PRIOR_FLOOR))).collect();
    let mut scores: Vec<[f64; K]> = vec![core::array::from_fn(|k| prior[k]); n];
    let mut trace = vec![cross_entropy(&scores, &train.y)];
    let sorted = presort(train);
    let weights = vec![1.0; n];
    // trees are grown on all features, so the generator is never consulted
    let mut rng = SplitMix64::new(0);
    let mut stages = Vec::with_capacity(params.n_estimators);
    let mut residual = vec![0.0; n];
    for _ in 0..params.n_estimators {
        let probs: Vec<[f64; K]> = scores.iter().map(softmax).collect();
        let mut stage = Vec::with_capacity(K);
        for k in 0..K {
            for i in 0..n {
                let y = if train.y[i] == k { 1.0 } else { 0.0 };
                residual[i] = y - probs[i][k];
            }
            let spec = TreeSpec {
                criterion: Criterion::Mse,
                max_depth: Some(params.max_depth),
                max_features: None,
                targets: &residual,
                weights: &weights,
            };
            stage.push(grow(train, &sorted, &spec, &mut rng));
        }
        for (i, s) in scores.iter_mut().enumerate() {
            let row = train.row(i);
            for (k, t) in stage.iter().enumerate() {
                s[k] += params.learning_rate * t.predict(row);
            }
        }
        trace.push(cross_entropy(&scores, &train.y));
        stages.push(stage);
    }
    Ok((
        GbModel {
            learning_rate: params.learning_rate,
            prior,
            stages,
        },
        trace,
    ))
}

impl GbModel {
    pub fn scores(&self, x: &[f64]) -> [f64; K] {
        let mut s: [f64; K] = core::array::from_fn(|k| self.prior[k]);
        for stage in &self.stages {
            for (k, t) in stage.iter().enumerate() {
                s[k] += self.learning_rate * t.predict(x);
            }
        }
        s
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        argmax(&self.scores(x))
    }
}
