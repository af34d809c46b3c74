//! File formats, the online streaming pipeline and the `footsense` CLI on
//! top of `footsense-core`.

pub mod cli;
pub mod clock;
pub mod config;
pub mod error;
pub mod io;
pub mod runtime;

pub use error::{Error, Result};

use footsense_core::features::{extract_features, FeatureConfig};
use footsense_core::preprocess::{segment, SegmentationParams};
use footsense_core::{FeatureVector, RecordingRun};

/// Offline path: segment the whole run and extract one labeled vector per
/// footstep.
pub fn extract_run(run: &RecordingRun, params: &SegmentationParams, cfg: &FeatureConfig) -> Result<Vec<FeatureVector>> {
    cfg.bands.validate(run.fast_rate_hz)?;
    segment(run, params)?
        .iter()
        .map(|seg| {
            let mut fv = extract_features(seg, cfg)?;
            fv.label = run.terrain;
            Ok(fv)
        })
        .collect()
}
