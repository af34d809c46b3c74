//! Terrain identification from footstep contact sensing.
//!
//! This crate holds the allocation-only algorithmic core: synthetic footstep
//! recordings, drift removal and footstep segmentation, the 100-entry
//! per-footstep feature vector, five from-scratch classifiers, PCA, and the
//! bang-bang tarsal controller. File formats, wall-clock timing and the CLI
//! live in the `footsense` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod control;
pub mod dataset;
pub mod error;
pub mod features;
pub mod learn;
pub mod preprocess;
pub mod rng;
pub mod stream;
pub mod synth;
pub mod types;

pub use dataset::{split_train_test, Dataset, FeatureVector};
pub use error::{Error, Result};
pub use rng::SplitMix64;
pub use types::{FastFrame, FootstepSegment, RecordingRun, SampleSeries, SlowFrame, TerrainClass};

/// Default acquisition rate of the acoustic and capacitive channels.
pub const FAST_RATE_HZ: f64 = 18_000.0;
/// Default acquisition rate of the accelerometer, temperature and tactile channels.
pub const SLOW_RATE_HZ: f64 = 45.0;
/// Number of barometric tactile channels (two strips of four).
pub const TACTILE_CHANNELS: usize = 8;
