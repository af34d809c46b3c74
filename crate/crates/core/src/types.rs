//! Domain value types shared by every stage of the pipeline.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{FAST_RATE_HZ, SLOW_RATE_HZ, TACTILE_CHANNELS};

/// The ten terrain labels. Integer codes are the discriminants and are stable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
#[repr(u8)]
pub enum TerrainClass {
    Metal = 0,
    Wood = 1,
    Foam = 2,
    Mat = 3,
    Grass = 4,
    Gravel = 5,
    Straw = 6,
    Concrete = 7,
    Carpet = 8,
    Poppy = 9,
}

impl TerrainClass {
    pub const COUNT: usize = 10;

    pub const ALL: [TerrainClass; 10] = [
        TerrainClass::Metal,
        TerrainClass::Wood,
        TerrainClass::Foam,
        TerrainClass::Mat,
        TerrainClass::Grass,
        TerrainClass::Gravel,
        TerrainClass::Straw,
        TerrainClass::Concrete,
        TerrainClass::Carpet,
        TerrainClass::Poppy,
    ];

    #[inline]
    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_code(code: usize) -> Option<Self> {
        Self::ALL.get(code).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            TerrainClass::Metal => "METAL",
            TerrainClass::Wood => "WOOD",
            TerrainClass::Foam => "FOAM",
            TerrainClass::Mat => "MAT",
            TerrainClass::Grass => "GRASS",
            TerrainClass::Gravel => "GRAVEL",
            TerrainClass::Straw => "STRAW",
            TerrainClass::Concrete => "CONCRETE",
            TerrainClass::Carpet => "CARPET",
            TerrainClass::Poppy => "POPPY",
        }
    }
}

impl fmt::Display for TerrainClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TerrainClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownLabel(s.into()))
    }
}

/// A uniformly sampled scalar signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSeries {
    pub values: Vec<f64>,
    pub rate_hz: f64,
}

impl SampleSeries {
    pub fn new(values: Vec<f64>, rate_hz: f64) -> Result<Self> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("rate_hz = {rate_hz}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample series"));
        }
        Ok(Self { values, rate_hz })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One sample of the 45 Hz channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowFrame {
    /// Seconds since run start.
    pub t: f64,
    /// m/s^2
    pub accel: [f64; 3],
    /// deg C
    pub temperature: f64,
    /// Relative pressure in Pa; channels 0..4 are the first strip.
    pub tactile: [f64; TACTILE_CHANNELS],
}

impl SlowFrame {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.temperature.is_finite()
            && self.accel.iter().all(|v| v.is_finite())
            && self.tactile.iter().all(|v| v.is_finite())
    }
}

/// One sample of the 18 kHz channels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FastFrame {
    pub t: f64,
    /// Normalized microphone amplitude in [-1, 1].
    pub acoustic: f64,
    /// Raw capacitive counts.
    pub capacitive: f64,
}

impl FastFrame {
    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.acoustic.is_finite() && self.capacitive.is_finite()
    }
}

/// A dual-rate recording. `terrain == None` marks an unlabeled inference stream.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordingRun {
    pub run_id: String,
    pub terrain: Option<TerrainClass>,
    pub fast_rate_hz: f64,
    pub slow_rate_hz: f64,
    pub fast: Vec<FastFrame>,
    pub slow: Vec<SlowFrame>,
    pub seed: u64,
    pub truth_boundaries: Option<Vec<(f64, f64)>>,
}

impl RecordingRun {
    pub fn empty(run_id: impl Into<String>) -> Self {
        Self {
            run_id: run_id.into(),
            terrain: None,
            fast_rate_hz: FAST_RATE_HZ,
            slow_rate_hz: SLOW_RATE_HZ,
            fast: Vec::new(),
            slow: Vec::new(),
            seed: 0,
            truth_boundaries: None,
        }
    }

    /// Time covered by the slow stream, in seconds.
    pub fn duration_s(&self) -> f64 {
        self.slow.len() as f64 / self.slow_rate_hz
    }

    /// Check rates, finiteness, and that both streams span the same interval.
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [("fast_rate_hz", self.fast_rate_hz), ("slow_rate_hz", self.slow_rate_hz)] {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidParameter(alloc::format!("{name} = {r}")));
            }
        }
        if !self.fast.iter().all(FastFrame::is_finite) {
            return Err(Error::NonFinite("fast stream"));
        }
        if !self.slow.iter().all(SlowFrame::is_finite) {
            return Err(Error::NonFinite("slow stream"));
        }
        let span_fast = self.fast.len() as f64 / self.fast_rate_hz;
        let span_slow = self.slow.len() as f64 / self.slow_rate_hz;
        if (span_fast - span_slow).abs() > 1.0 / self.slow_rate_hz + 1e-9 {
            return Err(Error::InvalidParameter(alloc::format!(
                "fast stream spans {span_fast:.4} s but slow stream spans {span_slow:.4} s"
            )));
        }
        Ok(())
    }
}

/// One footstep's slice of both streams. Tactile channels in `slow` are
/// already drift-corrected.
#[derive(Debug, Clone, PartialEq)]
pub struct FootstepSegment {
    pub t_start: f64,
    /// Time of the first slow sample after the contact (exclusive end).
    pub t_end: f64,
    /// Time of the summed-tactile maximum inside the contact.
    pub t_peak: f64,
    /// Index of the first slow sample of the contact within its run.
    pub slow_start: usize,
    pub slow: Vec<SlowFrame>,
    pub fast: Vec<FastFrame>,
    pub fast_rate_hz: f64,
    pub slow_rate_hz: f64,
}
