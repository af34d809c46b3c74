//! Labeled feature rows and the stratified train/test split.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::features::layout::{FEATURE_COUNT, FEATURE_NAMES};
use crate::rng::SplitMix64;
use crate::types::TerrainClass;

/// A 100-entry per-footstep feature record in the frozen layout.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub label: Option<TerrainClass>,
}

impl FeatureVector {
    pub fn new(values: Vec<f64>, label: Option<TerrainClass>) -> Result<Self> {
        let fv = Self { values, label };
        fv.validate()?;
        Ok(fv)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != FEATURE_COUNT {
            return Err(Error::WrongWidth {
                expected: FEATURE_COUNT,
                got: self.values.len(),
            });
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature vector"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Vec<FeatureVector>,
    pub feature_names: Vec<String>,
}

impl Default for Dataset {
    fn default() -> Self {
        Self::new(Vec::new())
    }
}

impl Dataset {
    pub fn new(rows: Vec<FeatureVector>) -> Self {
        Self {
            rows,
            feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Build a dataset, checking width, finiteness and labels of every row.
    pub fn from_rows(rows: Vec<FeatureVector>) -> Result<Self> {
        for r in &rows {
            r.validate()?;
            if r.label.is_none() {
                return Err(Error::InvalidParameter("dataset row without label".into()));
            }
        }
        Ok(Self::new(rows))
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Label codes of every row; unlabeled rows are an error.
    pub fn labels(&self) -> Result<Vec<usize>> {
        self.rows
            .iter()
            .map(|r| {
                r.label
                    .map(TerrainClass::code)
                    .ok_or_else(|| Error::InvalidParameter("dataset row without label".into()))
            })
            .collect()
    }

    pub fn class_counts(&self) -> [usize; TerrainClass::COUNT] {
        let mut counts = [0; TerrainClass::COUNT];
        for r in &self.rows {
            if let Some(l) = r.label {
                counts[l.code()] += 1;
            }
        }
        counts
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Row indices of a stratified split, each list in ascending order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Per class, `round(count * test_fraction)` rows go to the test side. Both
/// sides must be non-empty for every class present.
pub fn split_indices(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<SplitIndices> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    if ds.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let labels = ds.labels()?;
    let mut rng = SplitMix64::new(seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for class in TerrainClass::ALL {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class.code()).collect();
        if members.is_empty() {
            continue;
        }
        let n_test = libm::round(members.len() as f64 * test_fraction) as usize;
        if members.len() < 2 || n_test == 0 || n_test >= members.len() {
            return Err(Error::ClassTooSmall {
                class: class.name(),
                rows: members.len(),
                fraction: test_fraction,
            });
        }
        let mut class_rng = rng.child(class.name());
        class_rng.shuffle(&mut members);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
        rng.next_u64();
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

/// Stratified, seeded train/test split. Returns `(train, test)`.
pub fn split_train_test(ds: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let idx = split_indices(ds, test_fraction, seed)?;
    Ok((ds.subset(&idx.train), ds.subset(&idx.test)))
}
