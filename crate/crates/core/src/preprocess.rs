//! Drift removal and footstep segmentation.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{FootstepSegment, RecordingRun, SampleSeries, SlowFrame};
use crate::TACTILE_CHANNELS;

/// Remove the least-squares line (fit against the sample index).
pub fn detrend(series: &SampleSeries) -> Result<SampleSeries> {
    Ok(SampleSeries {
        values: detrend_values(&series.values)?,
        rate_hz: series.rate_hz,
    })
}

pub fn detrend_values(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if n < 2 {
        return Err(Error::TooShort { needed: 2, got: n });
    }
    let (intercept, slope) = line_fit(x);
    Ok(x.iter()
        .enumerate()
        .map(|(i, &v)| v - (intercept + slope * i as f64))
        .collect())
}

/// Least-squares `(a, b)` of `x[i] ~ a + b * i`, computed on centered
/// coordinates.
fn line_fit(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let i_mean = (n - 1.0) / 2.0;
    let x_mean = x.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let di = i as f64 - i_mean;
        sxy += di * (v - x_mean);
        sxx += di * di;
    }
    let slope = sxy / sxx;
    (x_mean - slope * i_mean, slope)
}

/// Tactile channels of every slow frame after per-channel detrending over
/// the whole run.
pub fn detrended_tactile(run: &RecordingRun) -> Result<Vec<[f64; TACTILE_CHANNELS]>> {
    let n = run.slow.len();
    let mut out = alloc::vec![[0.0; TACTILE_CHANNELS]; n];
    for c in 0..TACTILE_CHANNELS {
        let ch: Vec<f64> = run.slow.iter().map(|f| f.tactile[c]).collect();
        for (o, v) in out.iter_mut().zip(detrend_values(&ch)?) {
            o[c] = v;
        }
    }
    Ok(out)
}

/// Sum of the eight detrended tactile channels at the slow rate.
pub fn sum_tactile(run: &RecordingRun) -> Result<SampleSeries> {
    let det = detrended_tactile(run)?;
    Ok(SampleSeries {
        values: det.iter().map(|t| t.iter().sum()).collect(),
        rate_hz: run.slow_rate_hz,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentationParams {
    /// Threshold as a fraction of the summed-tactile peak-to-peak range.
    pub contact_threshold_frac: f64,
    /// Minimum spacing between the maxima of consecutive footsteps.
    pub min_step_gap_s: f64,
    /// Shortest above-threshold stretch accepted as a contact.
    pub min_contact_s: f64,
    /// Peak-to-peak range (Pa) below which the signal holds no contact.
    pub min_peak_to_peak: f64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            contact_threshold_frac: 0.3,
            min_step_gap_s: 0.5,
            min_contact_s: 0.2,
            min_peak_to_peak: 50.0,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<()> {
        let f = self.contact_threshold_frac;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("contact_threshold_frac = {f}")));
        }
        for (name, v) in [
            ("min_step_gap_s", self.min_step_gap_s),
            ("min_contact_s", self.min_contact_s),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(alloc::format!("{name} = {v}")));
            }
        }
        if !(self.min_peak_to_peak.is_finite() && self.min_peak_to_peak >= 0.0) {
            return Err(Error::InvalidParameter(alloc::format!(
                "min_peak_to_peak = {}",
                self.min_peak_to_peak
            )));
        }
        Ok(())
    }

    /// Threshold for a signal whose range is `[lo, hi]`, or `None` when the
    /// range is too small to contain a contact.
    pub fn threshold(&self, lo: f64, hi: f64) -> Option<f64> {
        let p2p = hi - lo;
        if p2p <= 0.0 || p2p < self.min_peak_to_peak {
            None
        } else {
            Some(lo + self.contact_threshold_frac * p2p)
        }
    }
}

/// A contact in slow-sample indices: `start` is the first sample at or above
/// the threshold, `end` the first sample below it after the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contact {
    pub start: usize,
    pub end: usize,
    pub peak: usize,
    /// Peak of the most recently merged constituent; gap checks use this.
    pub last_peak: usize,
}

fn argmax(x: &[f64], lo: usize, hi: usize) -> usize {
    let mut best = lo;
    for i in lo..hi {
        if x[i] > x[best] {
            best = i;
        }
    }
    best
}

/// Complete above-threshold stretches of `x`. Stretches touching either end
/// of the signal are dropped.
pub fn find_contacts(x: &[f64], threshold: f64) -> Vec<Contact> {
    let mut out = Vec::new();
    let mut start = None;
    for i in 1..x.len() {
        let (prev, cur) = (x[i - 1], x[i]);
        if prev < threshold && cur >= threshold {
            start = Some(i);
        } else if prev >= threshold && cur < threshold {
            if let Some(s) = start.take() {
                let peak = argmax(x, s, i);
                out.push(Contact { start: s, end: i, peak, last_peak: peak });
            }
        }
    }
    out
}

/// Shared contact acceptance rule: drop short stretches, merge stretches
/// whose maxima are closer than the step gap.
#[derive(Debug, Clone)]
pub struct ContactMerger {
    min_contact_samples: f64,
    min_gap_samples: f64,
}

impl ContactMerger {
    pub fn new(params: &SegmentationParams, rate_hz: f64) -> Self {
        Self {
            min_contact_samples: params.min_contact_s * rate_hz,
            min_gap_samples: params.min_step_gap_s * rate_hz,
        }
    }

    pub fn long_enough(&self, c: &Contact) -> bool {
        (c.end - c.start) as f64 >= self.min_contact_samples
    }

    /// Whether `next` belongs to the same footstep as `prev`.
    pub fn should_merge(&self, prev: &Contact, next: &Contact) -> bool {
        ((next.peak - prev.last_peak) as f64) < self.min_gap_samples
    }

    pub fn merge(prev: &Contact, next: &Contact, x: &[f64]) -> Contact {
        let peak = if x[next.peak] > x[prev.peak] { next.peak } else { prev.peak };
        Contact {
            start: prev.start,
            end: next.end,
            peak,
            last_peak: next.peak,
        }
    }

    /// Whether `prev` can no longer absorb a later contact at sample `now`.
    pub fn settled(&self, prev: &Contact, now: usize) -> bool {
        (now as f64) >= prev.last_peak as f64 + self.min_gap_samples
    }
}

pub fn merge_contacts(raw: Vec<Contact>, x: &[f64], merger: &ContactMerger) -> Vec<Contact> {
    let mut out: Vec<Contact> = Vec::new();
    for c in raw.into_iter().filter(|c| merger.long_enough(c)) {
        match out.last_mut() {
            Some(prev) if merger.should_merge(prev, &c) => *prev = ContactMerger::merge(prev, &c, x),
            _ => out.push(c),
        }
    }
    out
}

/// Contacts of an already summed and drift-corrected tactile signal.
pub fn segment_summed(x: &[f64], rate_hz: f64, params: &SegmentationParams) -> Vec<Contact> {
    if x.is_empty() {
        return Vec::new();
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    match params.threshold(lo, hi) {
        Some(thr) => merge_contacts(find_contacts(x, thr), x, &ContactMerger::new(params, rate_hz)),
        None => Vec::new(),
    }
}

/// Cut one footstep out of the run. `tactile` replaces the tactile channels
/// of the slow frames (drift-corrected values).
pub fn cut_segment(
    run: &RecordingRun,
    contact: &Contact,
    tactile: &[[f64; TACTILE_CHANNELS]],
) -> FootstepSegment {
    let slow: Vec<SlowFrame> = (contact.start..contact.end)
        .map(|i| SlowFrame {
            tactile: tactile[i],
            ..run.slow[i]
        })
        .collect();
    let t_start = run.slow[contact.start].t;
    let t_end = run.slow[contact.end].t;
    let lo = run.fast.partition_point(|f| f.t < t_start);
    let hi = run.fast.partition_point(|f| f.t < t_end);
    FootstepSegment {
        t_start,
        t_end,
        t_peak: run.slow[contact.peak].t,
        slow_start: contact.start,
        slow,
        fast: run.fast[lo..hi].to_vec(),
        fast_rate_hz: run.fast_rate_hz,
        slow_rate_hz: run.slow_rate_hz,
    }
}

/// Split a run into footsteps using the detrended summed tactile signal.
pub fn segment(run: &RecordingRun, params: &SegmentationParams) -> Result<Vec<FootstepSegment>> {
    params.validate()?;
    if run.duration_s() <= params.min_contact_s {
        return Err(Error::TooShort {
            needed: libm::ceil(params.min_contact_s * run.slow_rate_hz) as usize + 1,
            got: run.slow.len(),
        });
    }
    let tactile = detrended_tactile(run)?;
    let summed: Vec<f64> = tactile.iter().map(|t| t.iter().sum()).collect();
    Ok(segment_summed(&summed, run.slow_rate_hz, params)
        .iter()
        .map(|c| cut_segment(run, c, &tactile))
        .collect())
}
