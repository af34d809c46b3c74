use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::features::layout::FEATURE_COUNT;

/// Standard deviations below this are treated as a constant feature.
pub const MIN_STD: f64 = 1e-12;

/// Per-feature z-scoring with population statistics of the training set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Identity transform over `width` features.
    pub fn identity(width: usize) -> Self {
        Self {
            mean: vec![0.0; width],
            std: vec![1.0; width],
        }
    }

    pub fn fit(ds: &Dataset) -> Self {
        let rows: Vec<&[f64]> = ds.rows.iter().map(|r| r.values.as_slice()).collect();
        Self::fit_rows(&rows, FEATURE_COUNT)
    }

    /// Constant columns get a std of 1 so they map to 0 instead of blowing up.
    pub fn fit_rows(rows: &[&[f64]], width: usize) -> Self {
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; width];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r.iter()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; width];
        for r in rows {
            for j in 0..width {
                let d = r[j] - mean[j];
                var[j] += d * d;
            }
        }
        let std = var
            .iter()
            .map(|v| {
                let s = libm::sqrt(v / n);
                if s < MIN_STD {
                    1.0
                } else {
                    s
                }
            })
            .collect();
        Self { mean, std }
    }

    pub fn apply_one(&self, index: usize, value: f64) -> f64 {
        (value - self.mean[index]) / self.std[index]
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values.iter().enumerate().map(|(i, v)| self.apply_one(i, *v)).collect()
    }
}
