//! Retraining on the features of a subset of sensors.

use alloc::string::String;
use alloc::vec::Vec;

use super::eval::{evaluate, Clock, EvalReport};
use super::{fit_selected, Algo, TrainParams};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::features::layout::Sensor;
use crate::features::SpectralBandSpec;

/// A named, non-empty set of sensors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SensorSubset {
    pub name: String,
    pub sensors: Vec<Sensor>,
}

impl SensorSubset {
    pub fn new(name: impl Into<String>, sensors: &[Sensor]) -> Self {
        let mut sensors = sensors.to_vec();
        sensors.sort_unstable();
        sensors.dedup();
        Self { name: name.into(), sensors }
    }

    /// Feature indices covered by the subset, ascending.
    pub fn feature_indices(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = self.sensors.iter().flat_map(|s| s.range()).collect();
        idx.sort_unstable();
        idx
    }
}

/// The ten sensor combinations of the per-sensor comparison.
pub fn table4_preset() -> Vec<SensorSubset> {
    use Sensor::*;
    alloc::vec![
        SensorSubset::new("all", &Sensor::ALL),
        SensorSubset::new("temperature", &[Temperature]),
        SensorSubset::new("accelerometer", &[Accelerometer]),
        SensorSubset::new("microphone", &[Microphone]),
        SensorSubset::new("capacitive", &[Capacitive]),
        SensorSubset::new("tactile", &[Tactile]),
        SensorSubset::new("temp + mic + cap", &[Temperature, Microphone, Capacitive]),
        SensorSubset::new("temp + cap", &[Temperature, Capacitive]),
        SensorSubset::new("temp + mic", &[Temperature, Microphone]),
        SensorSubset::new("mic + cap", &[Microphone, Capacitive]),
    ]
}

#[allow(clippy::too_many_arguments)]
pub fn ablate(
    train: &Dataset,
    test: &Dataset,
    subset: &SensorSubset,
    algo: Algo,
    params: &TrainParams,
    band_spec: &SpectralBandSpec,
    seed: u64,
    clock: &dyn Clock,
) -> Result<EvalReport> {
    if subset.sensors.is_empty() {
        return Err(Error::InvalidParameter("sensor subset must not be empty".into()));
    }
    let model = fit_selected(algo, train, &subset.feature_indices(), params, band_spec, seed)?;
    evaluate(&model, test, clock)
}
