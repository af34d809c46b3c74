//! Random forest of bagged, fully grown Gini trees.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::tree::{grow, presort, Criterion, Tree, TreeSpec};
use super::{describe, majority, Design};
use crate::error::{Error, Result};
use crate::rng::SplitMix64;
use crate::types::TerrainClass;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    /// Candidate features per split; `None` means `max(1, floor(sqrt(d)))`.
    pub max_features: Option<usize>,
    pub bootstrap: bool,
}

impl Default for RfParams {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            max_features: None,
            bootstrap: true,
        }
    }
}

impl RfParams {
    pub fn describe(&self) -> BTreeMap<String, String> {
        describe([
            ("n_trees", self.n_trees.to_string()),
            ("max_depth", self.max_depth.map_or("none".into(), |d| d.to_string())),
            ("max_features", self.max_features.map_or("sqrt".into(), |m| m.to_string())),
            ("bootstrap", self.bootstrap.to_string()),
            ("criterion", "gini".into()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RfModel {
    pub trees: Vec<Tree>,
}

pub fn fit(train: &Design, params: &RfParams, seed: u64) -> Result<RfModel> {
    if train.n == 0 {
        return Err(Error::EmptyDataset);
    }
    if params.n_trees == 0 {
        return Err(Error::InvalidParameter("n_trees must be at least 1".into()));
    }
    let max_features = params
        .max_features
        .unwrap_or_else(|| (libm::floor(libm::sqrt(train.d as f64)) as usize).max(1));
    let sorted = presort(train);
    let targets: Vec<f64> = train.y.iter().map(|&c| c as f64).collect();
    let root = SplitMix64::new(seed);
    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = root.child(&format!("tree{t}"));
            let mut weights = vec![0.0; train.n];
            if params.bootstrap {
                for _ in 0..train.n {
                    weights[rng.below(train.n)] += 1.0;
                }
            } else {
                weights.iter_mut().for_each(|w| *w = 1.0);
            }
            let spec = TreeSpec {
                criterion: Criterion::Gini,
                max_depth: params.max_depth,
                max_features: Some(max_features),
                targets: &targets,
                weights: &weights,
            };
            grow(train, &sorted, &spec, &mut rng)
        })
        .collect();
    Ok(RfModel { trees })
}

impl RfModel {
    pub fn votes(&self, x: &[f64]) -> [usize; TerrainClass::COUNT] {
        let mut votes = [0; TerrainClass::COUNT];
        for t in &self.trees {
            votes[t.predict(x) as usize] += 1;
        }
        votes
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        majority(&self.votes(x))
    }
}
