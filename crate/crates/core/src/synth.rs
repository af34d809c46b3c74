//! Synthetic dual-rate footstep recordings.
//!
//! Each footstep follows a load-controlled press cycle: the foot approaches,
//! the load ramps linearly to `press_force` at a rate set by the terrain
//! stiffness and the descent speed, is held, ramps back down, and the foot
//! lifts and rests. Every sensor channel is a deterministic function of this
//! load profile, the terrain signature and seeded Gaussian noise.
//!
//! Force model: the eight tactile channels share the load through per-step
//! weights summing to one, so the drift-free summed tactile pressure equals
//! `PA_PER_NEWTON * load`. Each channel also carries a barometric offset
//! and a linear drift with slope magnitude in [`DRIFT_SLOPE_RANGE`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::fft::{ifft_in_place, Complex, SpectralBandSpec};
use crate::rng::{derive_seed, SplitMix64};
use crate::types::{FastFrame, RecordingRun, SlowFrame, TerrainClass};
use crate::{FAST_RATE_HZ, SLOW_RATE_HZ, TACTILE_CHANNELS};

/// Summed tactile pressure per newton of load.
pub const PA_PER_NEWTON: f64 = 10.0;
/// Nominal load share of each barometer, strip by strip.
pub const CHANNEL_WEIGHTS: [f64; TACTILE_CHANNELS] = [0.10, 0.14, 0.14, 0.12, 0.12, 0.14, 0.14, 0.10];
/// Travel time from the neutral position down to first contact.
pub const APPROACH_S: f64 = 0.15;
/// Travel time from lift-off back to the neutral position.
pub const LIFT_S: f64 = 0.15;
pub const LEAD_IN_S: f64 = 0.5;
pub const TAIL_S: f64 = 0.5;
/// Relative jitter applied to the loading and hold durations of each step.
pub const TIMING_JITTER: f64 = 0.10;
/// Truth boundaries mark where the noiseless load crosses this fraction of
/// the press force, rising and falling.
pub const TRUTH_LOAD_FRACTION: f64 = 0.3;
pub const TACTILE_NOISE_PA: f64 = 1.5;
/// Magnitude range of the per-channel tactile drift, Pa/s.
pub const DRIFT_SLOPE_RANGE: (f64, f64) = (0.2, 1.0);
pub const BAROMETER_OFFSET_PA: f64 = 40.0;
pub const GRAVITY: f64 = 9.81;
pub const ACCEL_NOISE: f64 = 0.05;
/// Ring-down amplitude (m/s^2) per unit of impact burst amplitude.
pub const ACCEL_RING_GAIN: f64 = 5.0;
pub const TEMP_SENSOR_NOISE: f64 = 0.02;
pub const CAP_IDLE_COUNTS: f64 = 1000.0;
pub const CAP_IDLE_NOISE: f64 = 3.0;
pub const ACOUSTIC_IDLE_NOISE: f64 = 0.005;
/// RMS of the band-shaped contact noise for unit band energies.
pub const ACOUSTIC_BAND_LEVEL: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpactBurst {
    /// Peak amplitude of the contact transient (normalized units).
    pub amplitude: f64,
    /// Exponential decay rate, 1/s.
    pub decay: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapBaseline {
    pub counts: f64,
    pub jitter: f64,
}

/// Parameters that make one terrain's recordings distinct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerrainSignature {
    /// N/mm; with the descent speed this sets the loading ramp duration.
    pub stiffness: f64,
    /// Pa RMS per channel while loaded (granular shifting).
    pub settle_noise: f64,
    /// Relative energies of the nine acoustic bands.
    pub acoustic_bands: [f64; 9],
    pub impact_burst: ImpactBurst,
    pub cap_baseline: CapBaseline,
    pub temp_mean: f64,
    /// deg C^2, spread of the per-step terrain temperature.
    pub temp_var: f64,
    /// Hz, accelerometer ring-down frequency.
    pub vib_freq: f64,
    /// 1/s, accelerometer ring-down damping.
    pub vib_damping: f64,
}

impl TerrainSignature {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("stiffness", self.stiffness),
            ("settle_noise", self.settle_noise),
            ("impact_burst.decay", self.impact_burst.decay),
            ("cap_baseline.counts", self.cap_baseline.counts),
            ("vib_freq", self.vib_freq),
            ("vib_damping", self.vib_damping),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("impact_burst.amplitude", self.impact_burst.amplitude),
            ("cap_baseline.jitter", self.cap_baseline.jitter),
            ("temp_var", self.temp_var),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be non-negative, got {v}")));
            }
        }
        if !self.temp_mean.is_finite() || self.acoustic_bands.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::InvalidParameter("acoustic bands and temperature must be finite".into()));
        }
        Ok(())
    }

    /// The shipped fixture signature for `class`.
    ///
    /// Hard terrains (METAL, WOOD, CONCRETE) are stiff with short ramps,
    /// deformable ones (FOAM, MAT) ramp slowly, granular ones (GRAVEL, POPPY,
    /// STRAW) have strong settle noise and distinct band shapes, and fibrous
    /// ones (CARPET, GRASS) sit in between. Temperatures come in overlapping
    /// pairs so that temperature alone is a weak cue.
    pub fn default_for(class: TerrainClass) -> Self {
        let sig = |stiffness, settle_noise, acoustic_bands, (amplitude, decay), (counts, jitter), temp_mean, (vib_freq, vib_damping)| {
            TerrainSignature {
                stiffness,
                settle_noise,
                acoustic_bands,
                impact_burst: ImpactBurst { amplitude, decay },
                cap_baseline: CapBaseline { counts, jitter },
                temp_mean,
                temp_var: 0.09,
                vib_freq,
                vib_damping,
            }
        };
        match class {
            TerrainClass::Metal => sig(800.0, 2.0, [0.2, 0.3, 0.4, 0.6, 0.9, 1.0, 0.8, 0.6, 0.4], (0.9, 25.0), (1900.0, 15.0), 21.0, (16.0, 3.0)),
            TerrainClass::Wood => sig(400.0, 4.0, [0.5, 0.6, 0.8, 0.9, 0.7, 0.5, 0.3, 0.2, 0.1], (0.6, 60.0), (1150.0, 10.0), 21.6, (11.0, 6.0)),
            TerrainClass::Foam => sig(60.0, 6.0, [0.3, 0.25, 0.2, 0.15, 0.1, 0.05, 0.03, 0.02, 0.01], (0.1, 300.0), (1100.0, 8.0), 22.2, (3.0, 12.0)),
            TerrainClass::Mat => sig(90.0, 5.0, [0.4, 0.35, 0.3, 0.2, 0.15, 0.1, 0.06, 0.04, 0.02], (0.2, 200.0), (1250.0, 12.0), 22.2, (4.0, 10.0)),
            TerrainClass::Grass => sig(120.0, 10.0, [0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.6, 0.5, 0.4], (0.25, 150.0), (1350.0, 40.0), 23.4, (6.0, 8.0)),
            TerrainClass::Gravel => sig(250.0, 25.0, [0.6, 0.7, 0.8, 0.9, 1.0, 0.9, 0.7, 0.5, 0.3], (0.7, 80.0), (1200.0, 30.0), 22.8, (13.0, 5.0)),
            TerrainClass::Straw => sig(100.0, 18.0, [0.1, 0.1, 0.15, 0.2, 0.3, 0.45, 0.7, 0.9, 1.0], (0.3, 120.0), (1050.0, 25.0), 23.4, (5.0, 9.0)),
            TerrainClass::Concrete => sig(600.0, 3.0, [0.6, 0.5, 0.45, 0.4, 0.5, 0.6, 0.5, 0.35, 0.2], (0.8, 40.0), (1300.0, 12.0), 21.0, (14.0, 4.0)),
            TerrainClass::Carpet => sig(150.0, 7.0, [0.25, 0.2, 0.3, 0.35, 0.3, 0.25, 0.2, 0.15, 0.1], (0.15, 250.0), (1150.0, 20.0), 21.6, (7.0, 11.0)),
            TerrainClass::Poppy => sig(200.0, 30.0, [0.3, 0.5, 0.8, 1.0, 0.7, 0.4, 0.3, 0.5, 0.6], (0.4, 100.0), (1450.0, 35.0), 22.8, (9.0, 7.0)),
        }
    }
}

/// The ten fixture signatures.
pub fn default_signatures() -> BTreeMap<TerrainClass, TerrainSignature> {
    TerrainClass::ALL
        .iter()
        .map(|&c| (c, TerrainSignature::default_for(c)))
        .collect()
}

/// One press cycle of the loading rig.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepCycleSpec {
    /// N
    pub press_force: f64,
    pub hold_s: f64,
    pub rest_s: f64,
    /// mm/s
    pub descent_speed: f64,
    pub n_steps: usize,
}

impl Default for StepCycleSpec {
    fn default() -> Self {
        Self {
            press_force: 300.0,
            hold_s: 1.0,
            rest_s: 0.25,
            descent_speed: 10.0,
            n_steps: 200,
        }
    }
}

impl StepCycleSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("press_force", self.press_force),
            ("hold_s", self.hold_s),
            ("rest_s", self.rest_s),
            ("descent_speed", self.descent_speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        Ok(())
    }

    /// Nominal loading (and unloading) ramp duration on `sig`.
    pub fn ramp_s(&self, sig: &TerrainSignature) -> f64 {
        self.press_force / (sig.stiffness * self.descent_speed)
    }
}

/// Timing and per-step random draws of one footstep.
#[derive(Debug, Clone)]
struct StepPlan {
    cycle_start: f64,
    touch: f64,
    ramp: f64,
    release: f64,
    lift: f64,
    weights: [f64; TACTILE_CHANNELS],
    temp_level: f64,
    accel_amp: f64,
    cap_level: f64,
    /// Band-shaped contact noise, one value per fast sample from `touch`.
    band_noise: Vec<f64>,
}

impl StepPlan {
    fn load(&self, t: f64, force: f64) -> f64 {
        if t <= self.touch || t >= self.lift {
            0.0
        } else if t < self.touch + self.ramp {
            force * (t - self.touch) / self.ramp
        } else if t <= self.release {
            force
        } else {
            force * (1.0 - (t - self.release) / self.ramp)
        }
    }
}

fn band_noise(rng: &mut SplitMix64, len: usize, rate: f64, bands: &[f64; 9]) -> Vec<f64> {
    let n = len.max(2).next_power_of_two();
    let spec = SpectralBandSpec::log_spaced(rate);
    let mut buf = vec![Complex::ZERO; n];
    let mut band = 0;
    let mut power = 0.0;
    for k in 1..n / 2 {
        let f = k as f64 * rate / n as f64;
        if f <= spec.edges[0] {
            continue;
        }
        while band < 8 && f > spec.edges[band + 1] {
            band += 1;
        }
        let m = bands[band] * (1.0 + 0.05 * rng.normal()).max(0.0);
        let c = Complex::new(m * rng.normal(), m * rng.normal());
        power += 2.0 * c.norm_sqr();
        buf[k] = c;
        buf[n - k] = c.conj();
    }
    ifft_in_place(&mut buf);
    // scale so that unit band energies would give ACOUSTIC_BAND_LEVEL RMS
    let rms = libm::sqrt(power) / n as f64;
    let unit = libm::sqrt(bands.iter().map(|b| b * b).sum::<f64>() / 9.0).max(1e-12);
    let gain = if rms > 0.0 { ACOUSTIC_BAND_LEVEL * unit / rms } else { 0.0 };
    buf.iter().take(len).map(|c| c.re * gain).collect()
}

fn plan_steps(
    sig: &TerrainSignature,
    cycle: &StepCycleSpec,
    fast_rate: f64,
    rng: &mut SplitMix64,
) -> Vec<StepPlan> {
    let nominal_ramp = cycle.ramp_s(sig);
    let unevenness = 0.02 + sig.settle_noise / 200.0;
    let mut t = LEAD_IN_S;
    let mut plans = Vec::with_capacity(cycle.n_steps);
    for _ in 0..cycle.n_steps {
        let ramp = nominal_ramp * rng.uniform(1.0 - TIMING_JITTER, 1.0 + TIMING_JITTER);
        let hold = cycle.hold_s * rng.uniform(1.0 - TIMING_JITTER, 1.0 + TIMING_JITTER);
        let touch = t + APPROACH_S;
        let release = touch + ramp + hold;
        let lift = release + ramp;
        let mut weights = CHANNEL_WEIGHTS;
        for w in weights.iter_mut() {
            *w *= (1.0 + unevenness * rng.normal()).max(0.05);
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        let temp_level = rng.gaussian(sig.temp_mean, libm::sqrt(sig.temp_var));
        let accel_amp = ACCEL_RING_GAIN * sig.impact_burst.amplitude * rng.uniform(0.9, 1.1);
        let cap_level = rng.gaussian(sig.cap_baseline.counts, 0.5 * sig.cap_baseline.jitter);
        let contact_len = libm::ceil((lift - touch) * fast_rate) as usize + 1;
        let band_noise = band_noise(rng, contact_len, fast_rate, &sig.acoustic_bands);
        plans.push(StepPlan {
            cycle_start: t,
            touch,
            ramp,
            release,
            lift,
            weights,
            temp_level,
            accel_amp,
            cap_level,
            band_noise,
        });
        t = lift + LIFT_S + cycle.rest_s;
    }
    plans
}

/// Generate one recording of `cycle.n_steps` footsteps on `terrain`.
pub fn generate_run(
    terrain: TerrainClass,
    sig: &TerrainSignature,
    cycle: &StepCycleSpec,
    seed: u64,
) -> Result<RecordingRun> {
    sig.validate()?;
    cycle.validate()?;
    let fast_rate = FAST_RATE_HZ;
    let slow_rate = SLOW_RATE_HZ;
    let ratio = libm::round(fast_rate / slow_rate) as usize;
    let force = cycle.press_force;

    let rng = SplitMix64::new(seed);
    let mut plan_rng = rng.child("plan");
    let plans = plan_steps(sig, cycle, fast_rate, &mut plan_rng);
    let last = plans.last().expect("n_steps >= 1");
    let duration = last.lift + LIFT_S + cycle.rest_s + TAIL_S;
    let n_slow = libm::ceil(duration * slow_rate) as usize;
    let n_fast = n_slow * ratio;

    let mut chan_rng = rng.child("channels");
    let offsets: [f64; TACTILE_CHANNELS] =
        core::array::from_fn(|_| chan_rng.uniform(-BAROMETER_OFFSET_PA, BAROMETER_OFFSET_PA));
    let slopes: [f64; TACTILE_CHANNELS] = core::array::from_fn(|_| {
        let m = chan_rng.uniform(DRIFT_SLOPE_RANGE.0, DRIFT_SLOPE_RANGE.1);
        if chan_rng.next_u64() & 1 == 0 {
            m
        } else {
            -m
        }
    });

    // slow channels
    let mut slow_rng = rng.child("slow");
    let mut slow = Vec::with_capacity(n_slow);
    let mut active = 0;
    for k in 0..n_slow {
        let t = k as f64 / slow_rate;
        while active + 1 < plans.len() && plans[active + 1].cycle_start <= t {
            active += 1;
        }
        let p = &plans[active];
        let load = p.load(t, force);
        let loaded = load / force;

        let mut tactile = [0.0; TACTILE_CHANNELS];
        for (c, v) in tactile.iter_mut().enumerate() {
            *v = PA_PER_NEWTON * load * p.weights[c]
                + sig.settle_noise * loaded * slow_rng.normal()
                + TACTILE_NOISE_PA * slow_rng.normal()
                + offsets[c]
                + slopes[c] * t;
        }

        let tau = t - p.touch;
        let (rx, ry, rz) = if tau >= 0.0 {
            let env = p.accel_amp * libm::exp(-sig.vib_damping * tau);
            let w = TAU * sig.vib_freq * tau;
            (
                0.4 * env * libm::cos(1.3 * w),
                0.25 * env * libm::sin(0.7 * w + 1.0),
                env * libm::sin(w),
            )
        } else {
            (0.0, 0.0, 0.0)
        };
        let accel = [
            rx + ACCEL_NOISE * slow_rng.normal(),
            ry + ACCEL_NOISE * slow_rng.normal(),
            GRAVITY + rz + ACCEL_NOISE * slow_rng.normal(),
        ];
        let temperature = p.temp_level + TEMP_SENSOR_NOISE * slow_rng.normal();
        slow.push(SlowFrame { t, accel, temperature, tactile });
    }

    // fast channels
    let mut fast_rng = rng.child("fast");
    let mut fast = Vec::with_capacity(n_fast);
    let mut active = 0;
    let burst = sig.impact_burst;
    for n in 0..n_fast {
        let t = n as f64 / fast_rate;
        while active + 1 < plans.len() && plans[active + 1].cycle_start <= t {
            active += 1;
        }
        let p = &plans[active];
        let load = p.load(t, force);
        let mut acoustic = ACOUSTIC_IDLE_NOISE * fast_rng.normal();
        let tau = t - p.touch;
        if tau >= 0.0 {
            let env = burst.amplitude * libm::exp(-burst.decay * tau);
            if env > 1e-6 {
                acoustic += env * fast_rng.normal();
            }
            if load > 0.0 {
                let i = libm::floor(tau * fast_rate) as usize;
                if let Some(b) = p.band_noise.get(i) {
                    acoustic += b * load / force;
                }
            }
        }
        let engaged = (load / (0.2 * force)).min(1.0);
        let capacitive = CAP_IDLE_COUNTS
            + (p.cap_level - CAP_IDLE_COUNTS) * engaged
            + (CAP_IDLE_NOISE + sig.cap_baseline.jitter * engaged) * fast_rng.normal();
        fast.push(FastFrame {
            t,
            acoustic: acoustic.clamp(-1.0, 1.0),
            capacitive,
        });
    }

    let truth = plans
        .iter()
        .map(|p| {
            (
                p.touch + TRUTH_LOAD_FRACTION * p.ramp,
                p.release + (1.0 - TRUTH_LOAD_FRACTION) * p.ramp,
            )
        })
        .collect();

    Ok(RecordingRun {
        run_id: format!("{}-{:016x}", terrain.name().to_ascii_lowercase(), seed),
        terrain: Some(terrain),
        fast_rate_hz: fast_rate,
        slow_rate_hz: slow_rate,
        fast,
        slow,
        seed,
        truth_boundaries: Some(truth),
    })
}

/// Seed of the run generated for `terrain` inside a corpus seeded with `seed`.
pub fn corpus_run_seed(seed: u64, terrain: TerrainClass) -> u64 {
    derive_seed(seed, terrain.name())
}

/// One run for `terrain` as it appears in a corpus; lets callers generate
/// the corpus one run at a time.
pub fn generate_corpus_run(
    specs: &BTreeMap<TerrainClass, TerrainSignature>,
    terrain: TerrainClass,
    cycle: &StepCycleSpec,
    steps_per_terrain: usize,
    seed: u64,
) -> Result<RecordingRun> {
    let sig = specs.get(&terrain).ok_or(Error::MissingTerrain(terrain.name()))?;
    let cycle = StepCycleSpec {
        n_steps: steps_per_terrain,
        ..cycle.clone()
    };
    generate_run(terrain, sig, &cycle, corpus_run_seed(seed, terrain))
}

/// One run per terrain, each with `steps_per_terrain` footsteps.
pub fn generate_corpus(
    specs: &BTreeMap<TerrainClass, TerrainSignature>,
    cycle: &StepCycleSpec,
    steps_per_terrain: usize,
    seed: u64,
) -> Result<Vec<RecordingRun>> {
    if let Some(missing) = TerrainClass::ALL.iter().find(|c| !specs.contains_key(c)) {
        return Err(Error::MissingTerrain(missing.name()));
    }
    TerrainClass::ALL
        .iter()
        .map(|&c| generate_corpus_run(specs, c, cycle, steps_per_terrain, seed))
        .collect()
}

/// Parse a terrain name into its class, for signature tables keyed by name.
pub fn parse_terrain_key(key: &str) -> Result<TerrainClass> {
    key.parse().map_err(|_| Error::UnknownLabel(key.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(n: usize) -> StepCycleSpec {
        StepCycleSpec { n_steps: n, ..Default::default() }
    }

    #[test]
    fn defaults_are_valid_and_distinct() {
        let sigs = default_signatures();
        assert_eq!(sigs.len(), 10);
        let fields = |s: &TerrainSignature| {
            [
                s.stiffness,
                s.settle_noise,
                s.impact_burst.amplitude,
                s.impact_burst.decay,
                s.cap_baseline.counts,
                s.cap_baseline.jitter,
                s.temp_mean,
                s.vib_freq,
                s.vib_damping,
            ]
        };
        for (a, sa) in &sigs {
            sa.validate().unwrap();
            for (b, sb) in &sigs {
                if a < b {
                    let differing = fields(sa).iter().zip(fields(sb)).filter(|(x, y)| *x != y).count()
                        + usize::from(sa.acoustic_bands != sb.acoustic_bands);
                    assert!(differing >= 3, "{a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn truth_count_matches_steps() {
        let run = generate_run(TerrainClass::Wood, &TerrainSignature::default_for(TerrainClass::Wood), &small(5), 1).unwrap();
        assert_eq!(run.truth_boundaries.as_ref().unwrap().len(), 5);
        run.validate().unwrap();
        assert_eq!(run.fast.len(), run.slow.len() * 400);
    }

    #[test]
    fn deterministic_given_seed() {
        let sig = TerrainSignature::default_for(TerrainClass::Gravel);
        let a = generate_run(TerrainClass::Gravel, &sig, &small(2), 9).unwrap();
        let b = generate_run(TerrainClass::Gravel, &sig, &small(2), 9).unwrap();
        assert_eq!(a, b);
        let c = generate_run(TerrainClass::Gravel, &sig, &small(2), 10).unwrap();
        assert_ne!(a.slow, c.slow);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let sig = TerrainSignature::default_for(TerrainClass::Metal);
        assert!(generate_run(TerrainClass::Metal, &sig, &small(0), 1).is_err());
        let bad = TerrainSignature { stiffness: 0.0, ..sig };
        assert!(generate_run(TerrainClass::Metal, &bad, &small(1), 1).is_err());
        let mut specs = default_signatures();
        specs.remove(&TerrainClass::Poppy);
        assert_eq!(
            generate_corpus(&specs, &small(1), 1, 0).unwrap_err(),
            Error::MissingTerrain("POPPY")
        );
    }
}
