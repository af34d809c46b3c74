//! Per-footstep feature extraction.

pub mod fft;
pub mod layout;
pub mod stats;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureVector;
use crate::error::{Error, Result};
use crate::types::FootstepSegment;
use crate::TACTILE_CHANNELS;

pub use fft::SpectralBandSpec;
pub use layout::{schema_hash, Sensor, FEATURE_COUNT, FEATURE_NAMES};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub bands: SpectralBandSpec,
    /// Use moment-ratio skewness instead of the `(N-1)^3` divisor.
    #[serde(default)]
    pub standard_moments: bool,
}

/// Element-wise sum of the tactile channels of `frames`.
pub fn summed_tactile(frames: &[crate::SlowFrame]) -> Vec<f64> {
    frames.iter().map(|f| f.tactile.iter().sum()).collect()
}

/// Build the 100-entry vector for one footstep. The label is left empty.
pub fn extract_features(seg: &FootstepSegment, cfg: &FeatureConfig) -> Result<FeatureVector> {
    if seg.slow.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: seg.slow.len() });
    }
    if seg.fast.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: seg.fast.len() });
    }
    let mut out = Vec::with_capacity(FEATURE_COUNT);

    for axis in 0..3 {
        let a: Vec<f64> = seg.slow.iter().map(|f| f.accel[axis]).collect();
        out.extend([
            stats::max(&a)?,
            stats::min(&a)?,
            stats::mean(&a)?,
            stats::variance(&a)?,
            stats::sum(&a)?,
            stats::zcr(&a)?,
        ]);
    }

    let acoustic: Vec<f64> = seg.fast.iter().map(|f| f.acoustic).collect();
    out.push(stats::zcr(&acoustic)?);
    out.extend(fft::band_averages(&acoustic, seg.fast_rate_hz, &cfg.bands)?);

    let cap: Vec<f64> = seg.fast.iter().map(|f| f.capacitive).collect();
    out.push(stats::mean(&cap)?);
    out.push(stats::variance(&cap)?);
    out.extend(fft::band_averages(&cap, seg.fast_rate_hz, &cfg.bands)?);

    let summed = summed_tactile(&seg.slow);
    let rise = stats::rise80(&summed)?;
    out.extend([stats::max(&summed)?, stats::min(&summed)?, rise as f64]);
    let channels: Vec<Vec<f64>> = (0..TACTILE_CHANNELS)
        .map(|c| seg.slow.iter().map(|f| f.tactile[c]).collect())
        .collect();
    for ch in &channels {
        let skew = if cfg.standard_moments {
            stats::standard_skewness(ch)?
        } else {
            stats::skewness(ch)?
        };
        out.extend([
            stats::max(ch)?,
            stats::min(ch)?,
            stats::mean(ch)?,
            stats::variance(ch)?,
            skew,
            stats::kurtosis(ch)?,
        ]);
    }
    out.extend(channels.iter().map(|ch| ch[rise]));

    let temp: Vec<f64> = seg.slow.iter().map(|f| f.temperature).collect();
    out.push(stats::mean(&temp)?);
    out.push(stats::variance(&temp)?);

    debug_assert_eq!(out.len(), FEATURE_COUNT);
    FeatureVector::new(out, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{FastFrame, SlowFrame};
    use alloc::vec;

    fn segment(tactile: impl Fn(usize) -> [f64; 8]) -> FootstepSegment {
        let slow: Vec<SlowFrame> = (0..20)
            .map(|i| SlowFrame {
                t: i as f64 / 45.0,
                accel: [0.1 * (i as f64).sin(), -0.2, 9.81],
                temperature: 22.0 + 0.01 * i as f64,
                tactile: tactile(i),
            })
            .collect();
        let fast: Vec<FastFrame> = (0..8000)
            .map(|i| FastFrame {
                t: i as f64 / 18_000.0,
                acoustic: 0.3 * ((i as f64) * 0.7).sin(),
                capacitive: 1200.0 + (i % 7) as f64,
            })
            .collect();
        FootstepSegment {
            t_start: 0.0,
            t_end: 20.0 / 45.0,
            t_peak: 0.2,
            slow_start: 0,
            slow,
            fast,
            fast_rate_hz: 18_000.0,
            slow_rate_hz: 45.0,
        }
    }

    #[test]
    fn vector_is_exactly_100_wide() {
        let seg = segment(|i| [(i as f64) * 10.0 + 1.0; 8]);
        let fv = extract_features(&seg, &FeatureConfig::default()).unwrap();
        assert_eq!(fv.values.len(), 100);
        assert!(fv.values.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn single_loaded_channel_matches_sum() {
        let seg = segment(|i| {
            let mut t = [0.0; 8];
            t[3] = 50.0 * (1.0 + (i as f64 / 3.0).sin());
            t
        });
        let fv = extract_features(&seg, &FeatureConfig::default()).unwrap();
        let idx = |n: &str| FEATURE_NAMES.iter().position(|x| *x == n).unwrap();
        assert_eq!(fv.values[idx("tac3_max")], fv.values[idx("tactile_sum_max")]);
        assert_eq!(fv.values[idx("tac3_min")], fv.values[idx("tactile_sum_min")]);
    }

    #[test]
    fn extraction_is_pure() {
        let seg = segment(|i| [i as f64 + 0.5; 8]);
        let cfg = FeatureConfig::default();
        assert_eq!(extract_features(&seg, &cfg).unwrap(), extract_features(&seg, &cfg).unwrap());
    }

    #[test]
    fn degenerate_segments_error() {
        let mut seg = segment(|_| [-1.0; 8]);
        assert_eq!(extract_features(&seg, &FeatureConfig::default()).unwrap_err(), Error::NoContact);
        seg.slow.truncate(1);
        assert!(matches!(
            extract_features(&seg, &FeatureConfig::default()),
            Err(Error::TooShort { .. })
        ));
        let mut seg = segment(|_| [1.0; 8]);
        seg.fast = vec![seg.fast[0]];
        assert!(extract_features(&seg, &FeatureConfig::default()).is_err());
    }
}
