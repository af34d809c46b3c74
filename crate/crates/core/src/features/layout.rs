//! The frozen index -> name map of the 100-entry feature vector.

use core::ops::Range;

use serde::{Deserialize, Serialize};

pub const FEATURE_COUNT: usize = 100;

pub const ACCEL_RANGE: Range<usize> = 0..18;
pub const ACOUSTIC_RANGE: Range<usize> = 18..28;
pub const CAPACITIVE_RANGE: Range<usize> = 28..39;
pub const TACTILE_RANGE: Range<usize> = 39..98;
pub const TEMPERATURE_RANGE: Range<usize> = 98..100;

#[rustfmt::skip]
pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    // accelerometer, axis-major
    "accel_x_max", "accel_x_min", "accel_x_mean", "accel_x_var", "accel_x_sum", "accel_x_zcr",
    "accel_y_max", "accel_y_min", "accel_y_mean", "accel_y_var", "accel_y_sum", "accel_y_zcr",
    "accel_z_max", "accel_z_min", "accel_z_mean", "accel_z_var", "accel_z_sum", "accel_z_zcr",
    // acoustic
    "acoustic_zcr",
    "acoustic_band0", "acoustic_band1", "acoustic_band2", "acoustic_band3", "acoustic_band4",
    "acoustic_band5", "acoustic_band6", "acoustic_band7", "acoustic_band8",
    // capacitive
    "cap_mean", "cap_var",
    "cap_band0", "cap_band1", "cap_band2", "cap_band3", "cap_band4",
    "cap_band5", "cap_band6", "cap_band7", "cap_band8",
    // tactile, summed series
    "tactile_sum_max", "tactile_sum_min", "tactile_sum_rise80",
    // tactile, per channel
    "tac0_max", "tac0_min", "tac0_mean", "tac0_var", "tac0_skew", "tac0_kurt",
    "tac1_max", "tac1_min", "tac1_mean", "tac1_var", "tac1_skew", "tac1_kurt",
    "tac2_max", "tac2_min", "tac2_mean", "tac2_var", "tac2_skew", "tac2_kurt",
    "tac3_max", "tac3_min", "tac3_mean", "tac3_var", "tac3_skew", "tac3_kurt",
    "tac4_max", "tac4_min", "tac4_mean", "tac4_var", "tac4_skew", "tac4_kurt",
    "tac5_max", "tac5_min", "tac5_mean", "tac5_var", "tac5_skew", "tac5_kurt",
    "tac6_max", "tac6_min", "tac6_mean", "tac6_var", "tac6_skew", "tac6_kurt",
    "tac7_max", "tac7_min", "tac7_mean", "tac7_var", "tac7_skew", "tac7_kurt",
    // tactile, each channel at the summed rise80 index
    "tac0_at_rise80", "tac1_at_rise80", "tac2_at_rise80", "tac3_at_rise80",
    "tac4_at_rise80", "tac5_at_rise80", "tac6_at_rise80", "tac7_at_rise80",
    // temperature
    "temp_mean", "temp_var",
];

/// The five sensor groups of the layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensor {
    Temperature,
    Accelerometer,
    Microphone,
    Capacitive,
    Tactile,
}

impl Sensor {
    pub const ALL: [Sensor; 5] = [
        Sensor::Temperature,
        Sensor::Accelerometer,
        Sensor::Microphone,
        Sensor::Capacitive,
        Sensor::Tactile,
    ];

    pub fn range(self) -> Range<usize> {
        match self {
            Sensor::Temperature => TEMPERATURE_RANGE,
            Sensor::Accelerometer => ACCEL_RANGE,
            Sensor::Microphone => ACOUSTIC_RANGE,
            Sensor::Capacitive => CAPACITIVE_RANGE,
            Sensor::Tactile => TACTILE_RANGE,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sensor::Temperature => "temperature",
            Sensor::Accelerometer => "accelerometer",
            Sensor::Microphone => "microphone",
            Sensor::Capacitive => "capacitive",
            Sensor::Tactile => "tactile",
        }
    }

    pub fn parse(s: &str) -> Option<Sensor> {
        match s.to_ascii_lowercase().as_str() {
            "temperature" | "temp" => Some(Sensor::Temperature),
            "accelerometer" | "accel" => Some(Sensor::Accelerometer),
            "microphone" | "mic" | "acoustic" => Some(Sensor::Microphone),
            "capacitive" | "cap" => Some(Sensor::Capacitive),
            "tactile" => Some(Sensor::Tactile),
            _ => None,
        }
    }

    pub fn of_index(index: usize) -> Option<Sensor> {
        Sensor::ALL.into_iter().find(|s| s.range().contains(&index))
    }
}

/// FNV-1a over the newline-joined feature names. Any reordering or renaming
/// changes this value.
pub fn schema_hash() -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        if i > 0 {
            h ^= u64::from(b'\n');
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        for b in name.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_sizes() {
        assert_eq!(ACCEL_RANGE.len(), 18);
        assert_eq!(ACOUSTIC_RANGE.len(), 10);
        assert_eq!(CAPACITIVE_RANGE.len(), 11);
        assert_eq!(TACTILE_RANGE.len(), 59);
        assert_eq!(TEMPERATURE_RANGE.len(), 2);
        let total: usize = Sensor::ALL.iter().map(|s| s.range().len()).sum();
        assert_eq!(total, FEATURE_COUNT);
    }

    #[test]
    fn names_unique_and_prefixed_by_group() {
        for (i, a) in FEATURE_NAMES.iter().enumerate() {
            for b in &FEATURE_NAMES[i + 1..] {
                assert_ne!(a, b);
            }
            let prefix = match Sensor::of_index(i).unwrap() {
                Sensor::Accelerometer => "accel_",
                Sensor::Microphone => "acoustic_",
                Sensor::Capacitive => "cap_",
                Sensor::Tactile => "ta",
                Sensor::Temperature => "temp_",
            };
            assert!(a.starts_with(prefix), "{a}");
        }
    }
}
