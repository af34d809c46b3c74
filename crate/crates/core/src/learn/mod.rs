//! Trainable classifiers, evaluation, sensor ablation and PCA.
//!
//! Every model standardizes all 100 features with statistics of its training
//! set and then looks only at its selected feature indices, which is how the
//! sensor ablation restricts a model to a subset of sensors.

pub mod ablation;
pub mod ann;
pub mod boost;
pub mod eval;
pub mod forest;
pub mod knn;
pub mod pca;
pub mod standardize;
pub mod svm;
pub mod tree;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureVector};
use crate::error::{Error, Result};
use crate::features::layout::FEATURE_COUNT;
use crate::features::SpectralBandSpec;
use crate::types::TerrainClass;

pub use ablation::{ablate, table4_preset, SensorSubset};
pub use ann::{AnnModel, AnnParams};
pub use boost::{GbModel, GbParams};
pub use eval::{evaluate, Clock, EvalReport, LatencyStats, NoClock};
pub use forest::{RfModel, RfParams};
pub use knn::{KnnModel, KnnParams};
pub use pca::{pca_project, PcaResult};
pub use standardize::Standardizer;
pub use svm::{SvmModel, SvmParams};

/// Version of the model file layout; bumped on incompatible changes.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Algo {
    Knn,
    Svm,
    Rf,
    Gb,
    Ann,
}

impl Algo {
    pub const ALL: [Algo; 5] = [Algo::Knn, Algo::Svm, Algo::Rf, Algo::Gb, Algo::Ann];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Knn => "KNN",
            Algo::Svm => "SVM",
            Algo::Rf => "RF",
            Algo::Gb => "GB",
            Algo::Ann => "ANN",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParameter(alloc::format!("unknown algorithm `{s}`")))
    }
}

/// Hyperparameters of every algorithm; only the selected one is used.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainParams {
    pub knn: KnnParams,
    pub svm: SvmParams,
    pub rf: RfParams,
    pub gb: GbParams,
    pub ann: AnnParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payload {
    Knn(KnnModel),
    Svm(SvmModel),
    Rf(RfModel),
    Gb(GbModel),
    Ann(AnnModel),
}

impl Payload {
    pub fn algo(&self) -> Algo {
        match self {
            Payload::Knn(_) => Algo::Knn,
            Payload::Svm(_) => Algo::Svm,
            Payload::Rf(_) => Algo::Rf,
            Payload::Gb(_) => Algo::Gb,
            Payload::Ann(_) => Algo::Ann,
        }
    }

    /// Class code for an already standardized and selected input.
    fn predict(&self, x: &[f64]) -> usize {
        match self {
            Payload::Knn(m) => m.predict(x),
            Payload::Svm(m) => m.predict(x),
            Payload::Rf(m) => m.predict(x),
            Payload::Gb(m) => m.predict(x),
            Payload::Ann(m) => m.predict(x),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub schema_version: u32,
    pub algo: Algo,
    pub hyperparams: BTreeMap<String, String>,
    pub standardizer: Standardizer,
    pub band_spec: SpectralBandSpec,
    #[serde(default)]
    pub standard_moments: bool,
    /// Feature indices the payload consumes, ascending.
    pub features: Vec<usize>,
    pub train_seed: u64,
    pub payload: Payload,
}

impl ModelArtifact {
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                expected: SCHEMA_VERSION,
                found: self.schema_version,
            });
        }
        if self.payload.algo() != self.algo {
            return Err(Error::SchemaMismatch(alloc::format!(
                "algo {} with a {} payload",
                self.algo,
                self.payload.algo()
            )));
        }
        if self.standardizer.mean.len() != FEATURE_COUNT || self.standardizer.std.len() != FEATURE_COUNT {
            return Err(Error::SchemaMismatch("standardizer must have 100 entries".into()));
        }
        if self.features.is_empty()
            || self.features.iter().any(|&i| i >= FEATURE_COUNT)
            || self.features.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::SchemaMismatch("invalid feature selection".into()));
        }
        Ok(())
    }

    /// Standardized values of the selected features of `values`.
    pub fn prepare(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != FEATURE_COUNT {
            return Err(Error::WrongWidth {
                expected: FEATURE_COUNT,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature vector"));
        }
        Ok(self
            .features
            .iter()
            .map(|&i| self.standardizer.apply_one(i, values[i]))
            .collect())
    }

    pub fn predict_values(&self, values: &[f64]) -> Result<TerrainClass> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                expected: SCHEMA_VERSION,
                found: self.schema_version,
            });
        }
        let x = self.prepare(values)?;
        let code = self.payload.predict(&x);
        TerrainClass::from_code(code).ok_or_else(|| Error::UnknownLabel(code.to_string()))
    }
}

pub fn predict(model: &ModelArtifact, fv: &FeatureVector) -> Result<TerrainClass> {
    model.predict_values(&fv.values)
}

/// Standardized, feature-selected training matrix.
#[derive(Debug, Clone)]
pub struct Design {
    /// Row-major `n x d`.
    pub x: Vec<f64>,
    pub y: Vec<usize>,
    pub n: usize,
    pub d: usize,
}

impl Design {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn new(x: Vec<f64>, y: Vec<usize>, d: usize) -> Self {
        let n = y.len();
        debug_assert_eq!(x.len(), n * d);
        Self { x, y, n, d }
    }

    pub fn classes_present(&self) -> usize {
        let mut seen = [false; TerrainClass::COUNT];
        for &c in &self.y {
            seen[c] = true;
        }
        seen.iter().filter(|s| **s).count()
    }
}

/// Fit `algo` on `train` using only the feature indices in `features`.
pub fn fit_selected(
    algo: Algo,
    train: &Dataset,
    features: &[usize],
    params: &TrainParams,
    band_spec: &SpectralBandSpec,
    seed: u64,
) -> Result<ModelArtifact> {
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    for r in &train.rows {
        r.validate()?;
    }
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    if features.is_empty() || features.iter().any(|&i| i >= FEATURE_COUNT) {
        return Err(Error::InvalidParameter("feature selection must be non-empty and < 100".into()));
    }
    let y = train.labels()?;
    let standardizer = Standardizer::fit(train);
    let d = features.len();
    let mut x = Vec::with_capacity(train.len() * d);
    for r in &train.rows {
        x.extend(features.iter().map(|&i| standardizer.apply_one(i, r.values[i])));
    }
    let design = Design::new(x, y, d);
    let (payload, hyperparams) = match algo {
        Algo::Knn => (Payload::Knn(knn::fit(&design, &params.knn)?), params.knn.describe()),
        Algo::Svm => (Payload::Svm(svm::fit(&design, &params.svm)?.0), params.svm.describe()),
        Algo::Rf => (Payload::Rf(forest::fit(&design, &params.rf, seed)?), params.rf.describe()),
        Algo::Gb => (Payload::Gb(boost::fit(&design, &params.gb)?.0), params.gb.describe()),
        Algo::Ann => (Payload::Ann(ann::fit(&design, &params.ann, seed)?.0), params.ann.describe()),
    };
    Ok(ModelArtifact {
        schema_version: SCHEMA_VERSION,
        algo,
        hyperparams,
        standardizer,
        band_spec: band_spec.clone(),
        standard_moments: false,
        features,
        train_seed: seed,
        payload,
    })
}

/// Fit `algo` on all 100 features.
pub fn fit(
    algo: Algo,
    train: &Dataset,
    params: &TrainParams,
    band_spec: &SpectralBandSpec,
    seed: u64,
) -> Result<ModelArtifact> {
    let all: Vec<usize> = (0..FEATURE_COUNT).collect();
    fit_selected(algo, train, &all, params, band_spec, seed)
}

/// Index of the largest value; the first one wins ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Class with the most votes; the lowest code wins ties.
pub(crate) fn majority(votes: &[usize; TerrainClass::COUNT]) -> usize {
    let mut best = 0;
    for (c, v) in votes.iter().enumerate() {
        if *v > votes[best] {
            best = c;
        }
    }
    best
}

pub(crate) fn describe<const N: usize>(pairs: [(&str, String); N]) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
