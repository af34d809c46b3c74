//! Test-set accuracy, confusion matrix and prediction latency.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Algo, ModelArtifact};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::types::TerrainClass;

const K: usize = TerrainClass::COUNT;

/// Monotonic time source in seconds.
pub trait Clock {
    fn now_s(&self) -> f64;
}

/// A clock that never advances; latencies come out as zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_s(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean_ms: f64,
    pub p50_ms: f64,
    pub p95_ms: f64,
}

impl LatencyStats {
    /// Nearest-rank percentiles of the samples.
    pub fn from_samples(ms: &[f64]) -> Self {
        if ms.is_empty() {
            return Self::default();
        }
        let mut sorted = ms.to_vec();
        sorted.sort_by(f64::total_cmp);
        let rank = |p: f64| {
            let r = libm::ceil(p * sorted.len() as f64) as usize;
            sorted[r.clamp(1, sorted.len()) - 1]
        };
        Self {
            mean_ms: ms.iter().sum::<f64>() / ms.len() as f64,
            p50_ms: rank(0.5),
            p95_ms: rank(0.95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algo: Algo,
    pub n_test: usize,
    /// Percent correct per class; `None` for classes absent from the test set.
    pub per_class_accuracy: [Option<f64>; K],
    pub overall_accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: [[u64; K]; K],
    pub inference_latency: LatencyStats,
}

impl EvalReport {
    pub fn from_predictions(algo: Algo, truth: &[usize], predicted: &[usize], latency_ms: &[f64]) -> Self {
        let mut confusion = [[0u64; K]; K];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t][p] += 1;
        }
        let per_class_accuracy = core::array::from_fn(|c| {
            let total: u64 = confusion[c].iter().sum();
            (total > 0).then(|| 100.0 * confusion[c][c] as f64 / total as f64)
        });
        let correct: u64 = (0..K).map(|c| confusion[c][c]).sum();
        let overall_accuracy = if truth.is_empty() {
            0.0
        } else {
            100.0 * correct as f64 / truth.len() as f64
        };
        Self {
            algo,
            n_test: truth.len(),
            per_class_accuracy,
            overall_accuracy,
            confusion,
            inference_latency: LatencyStats::from_samples(latency_ms),
        }
    }
}

/// Predict every test row, timing each call with `clock`.
pub fn evaluate(model: &ModelArtifact, test: &Dataset, clock: &dyn Clock) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    model.validate()?;
    let truth = test.labels()?;
    let mut predicted = Vec::with_capacity(test.len());
    let mut latency = Vec::with_capacity(test.len());
    for row in &test.rows {
        let t0 = clock.now_s();
        let label = model.predict_values(&row.values)?;
        let t1 = clock.now_s();
        predicted.push(label.code());
        latency.push(((t1 - t0) * 1e3).max(0.0));
    }
    Ok(EvalReport::from_predictions(model.algo, &truth, &predicted, &latency))
}
