//! Generator, segmentation, features and control working together.

use footsense_core::control::{self, Action, FootState, DESTABILIZING};
use footsense_core::features::layout::FEATURE_NAMES;
use footsense_core::features::{extract_features, FeatureConfig};
use footsense_core::preprocess::{segment, sum_tactile, SegmentationParams};
use footsense_core::stream::StreamSegmenter;
use footsense_core::synth::{
    default_signatures, generate_corpus, generate_run, StepCycleSpec, TerrainSignature, PA_PER_NEWTON,
};
use footsense_core::{RecordingRun, TerrainClass};
use proptest::prelude::*;

fn run(terrain: TerrainClass, steps: usize, seed: u64) -> RecordingRun {
    let cycle = StepCycleSpec {
        n_steps: steps,
        ..Default::default()
    };
    generate_run(terrain, &TerrainSignature::default_for(terrain), &cycle, seed).unwrap()
}

fn sample_index(t: f64, rate: f64) -> i64 {
    (t * rate).ceil() as i64
}

#[test]
fn five_steps_give_five_segments_near_truth() {
    let r = run(TerrainClass::Gravel, 5, 3);
    let segs = segment(&r, &SegmentationParams::default()).unwrap();
    let truth = r.truth_boundaries.as_ref().unwrap();
    assert_eq!(segs.len(), 5);
    for (s, (a, b)) in segs.iter().zip(truth) {
        let start = s.slow_start as i64;
        let end = start + s.slow.len() as i64;
        assert!((start - sample_index(*a, 45.0)).abs() <= 2);
        assert!((end - sample_index(*b, 45.0)).abs() <= 2);
    }
}

#[test]
fn segment_count_matches_steps_on_every_terrain() {
    let cycle = StepCycleSpec::default();
    let runs = generate_corpus(&default_signatures(), &cycle, 12, 5).unwrap();
    for r in &runs {
        let segs = segment(r, &SegmentationParams::default()).unwrap();
        assert_eq!(segs.len(), 12, "{:?}", r.terrain);
        for s in &segs {
            // both streams cover the same window, to within one slow period
            let slow_end = s.slow.last().unwrap().t + 1.0 / s.slow_rate_hz;
            let fast_end = s.fast.last().unwrap().t + 1.0 / s.fast_rate_hz;
            assert!((s.fast[0].t - s.t_start).abs() <= 1.0 / s.slow_rate_hz);
            assert!((fast_end - slow_end).abs() <= 1.0 / s.slow_rate_hz);
            assert!(s.t_end > s.t_start && s.t_end <= r.duration_s());
        }
    }
}

#[test]
fn hold_phase_sum_tracks_press_force() {
    let r = run(TerrainClass::Wood, 3, 8);
    let summed = sum_tactile(&r).unwrap();
    let cycle = StepCycleSpec::default();
    let segs = segment(&r, &SegmentationParams::default()).unwrap();
    for s in &segs {
        // middle third of the contact lies in the hold phase
        let n = s.slow.len();
        let mid = &summed.values[s.slow_start + n / 3..s.slow_start + 2 * n / 3];
        let rest = &summed.values[s.slow_start - 8..s.slow_start - 2];
        // detrending removes the run mean, so compare against the unloaded level
        let level = mid.iter().sum::<f64>() / mid.len() as f64 - rest.iter().sum::<f64>() / rest.len() as f64;
        let expected = PA_PER_NEWTON * cycle.press_force;
        assert!((level - expected).abs() < 0.05 * expected, "{level} vs {expected}");
    }
}

#[test]
fn quiet_or_short_runs() {
    let mut r = run(TerrainClass::Metal, 1, 1);
    for f in &mut r.slow {
        f.tactile = [0.0; 8];
    }
    assert!(segment(&r, &SegmentationParams::default()).unwrap().is_empty());
    r.slow.truncate(5);
    r.fast.truncate(5 * 400);
    assert!(segment(&r, &SegmentationParams::default()).is_err());
}

#[test]
fn rise_time_separates_stiff_and_soft_terrain() {
    let rise = FEATURE_NAMES.iter().position(|n| *n == "tactile_sum_rise80").unwrap();
    let mean_rise = |t| {
        let r = run(t, 10, 4);
        let segs = segment(&r, &SegmentationParams::default()).unwrap();
        let v: Vec<f64> = segs
            .iter()
            .map(|s| extract_features(s, &FeatureConfig::default()).unwrap().values[rise])
            .collect();
        assert!(v.iter().all(|x| x.is_finite()));
        v.iter().sum::<f64>() / v.len() as f64
    };
    assert!(mean_rise(TerrainClass::Foam) > mean_rise(TerrainClass::Metal) + 5.0);
}

#[test]
fn streaming_boundaries_follow_offline_ones() {
    let params = SegmentationParams::default();
    for terrain in [TerrainClass::Foam, TerrainClass::Poppy, TerrainClass::Concrete] {
        let r = run(terrain, 15, 6);
        let offline = segment(&r, &params).unwrap();
        let mut seg = StreamSegmenter::new(params.clone(), r.fast_rate_hz, r.slow_rate_hz);
        let ratio = r.fast.len() / r.slow.len();
        let mut online = Vec::new();
        for (k, f) in r.slow.iter().enumerate() {
            online.extend(seg.push_slow(*f));
            for ff in &r.fast[k * ratio..(k + 1) * ratio] {
                seg.push_fast(*ff);
            }
            let (cap_slow, cap_fast) = seg.capacity();
            let (slow, fast) = seg.buffered();
            assert!(slow <= cap_slow && fast <= cap_fast);
        }
        online.extend(seg.finish());
        assert_eq!(online.len(), offline.len());
        for (a, b) in online.iter().zip(&offline) {
            assert!((a.slow_start as i64 - b.slow_start as i64).abs() <= 2);
            let (ea, eb) = (a.slow_start + a.slow.len(), b.slow_start + b.slow.len());
            assert!((ea as i64 - eb as i64).abs() <= 2);
        }
    }
}

#[test]
fn decide_is_exhaustive() {
    let deployed: Vec<TerrainClass> = TerrainClass::ALL
        .into_iter()
        .filter(|c| control::decide(*c).action == Action::Deploy)
        .collect();
    let mut expected = DESTABILIZING.to_vec();
    expected.sort();
    assert_eq!(deployed, expected);
    assert_eq!(
        deployed.iter().map(|c| c.name()).collect::<Vec<_>>(),
        ["FOAM", "GRASS", "GRAVEL", "STRAW", "CARPET", "POPPY"]
    );
}

#[test]
fn reachable_states_are_exactly_two() {
    let mut seen = vec![FootState::default()];
    let mut frontier = seen.clone();
    while let Some(s) = frontier.pop() {
        for c in TerrainClass::ALL {
            let next = control::apply(s, control::decide(c));
            assert_eq!(control::apply(next, control::decide(c)), next);
            if !seen.contains(&next) {
                seen.push(next);
                frontier.push(next);
            }
        }
    }
    assert_eq!(seen.len(), 2);
    assert!(seen.iter().all(FootState::is_valid));
}

proptest! {
    #[test]
    fn force_split_conserves_total(total in 0.0f64..1e4, roll in -90.0f64..90.0) {
        let (l, r) = control::force_split(total, roll).unwrap();
        prop_assert!((l + r - total).abs() <= 1e-12 * total.max(1.0));
        prop_assert!(l >= 0.0 && r >= 0.0);
    }

    #[test]
    fn stabilizing_force_is_linear(tau in 0.0f64..22.8) {
        let f = control::stabilizing_force(tau).unwrap();
        prop_assert!((f - tau * 447.0 / 22.8).abs() < 1e-9);
    }
}
