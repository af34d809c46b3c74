//! Settings shared by all commands: a JSON file merged under explicit flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use footsense_core::learn::TrainParams;
use footsense_core::preprocess::SegmentationParams;
use footsense_core::synth::StepCycleSpec;

use crate::error::Result;
use crate::io::read_json;

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_OUT: &str = "out";
pub const DEFAULT_TEST_FRACTION: f64 = 0.2;

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub terrains: Option<PathBuf>,
    pub bands: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub steps: Option<usize>,
    pub test_fraction: Option<f64>,
    pub standard_moments: Option<bool>,
    pub segmentation: Option<SegmentationParams>,
    pub cycle: Option<StepCycleSpec>,
    pub train: Option<TrainParams>,
}

impl FileConfig {
    /// Load a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg: FileConfig = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.terrains, &mut cfg.bands, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// The global flags as given on the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub terrains: Option<PathBuf>,
    pub bands: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Fully resolved settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: u64,
    pub terrains: Option<PathBuf>,
    pub bands: Option<PathBuf>,
    pub out: PathBuf,
    pub steps: usize,
    pub test_fraction: f64,
    pub standard_moments: bool,
    pub segmentation: SegmentationParams,
    pub cycle: StepCycleSpec,
    pub train: TrainParams,
}

impl Settings {
    pub fn resolve(flags: Overrides, file: FileConfig) -> Self {
        let cycle = file.cycle.unwrap_or_default();
        Self {
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            terrains: flags.terrains.or(file.terrains),
            bands: flags.bands.or(file.bands),
            out: flags.out.or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            steps: file.steps.unwrap_or(cycle.n_steps),
            test_fraction: file.test_fraction.unwrap_or(DEFAULT_TEST_FRACTION),
            standard_moments: file.standard_moments.unwrap_or(false),
            segmentation: file.segmentation.unwrap_or_default(),
            cycle,
            train: file.train.unwrap_or_default(),
        }
    }
}
