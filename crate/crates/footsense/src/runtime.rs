//! Online pipeline: a reader thread replays a run at its sampling rates and
//! a step processor segments, extracts, classifies and actuates per footstep.

use std::sync::mpsc::{sync_channel, Receiver, SyncSender};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use footsense_core::control::{apply, decide, Action, ActuationCommand, FootState};
use footsense_core::features::{extract_features, FeatureConfig};
use footsense_core::learn::{Algo, ModelArtifact};
use footsense_core::preprocess::{segment, SegmentationParams};
use footsense_core::stream::StreamSegmenter;
use footsense_core::{FastFrame, FootstepSegment, RecordingRun, SlowFrame, TerrainClass, FAST_RATE_HZ};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub seg_params: SegmentationParams,
    /// Pace the reader to the wall clock instead of replaying at full speed.
    pub realtime: bool,
    /// Run the reader on its own thread; otherwise everything runs inline.
    pub threaded: bool,
    /// Capacity of the reader-to-processor queue, in slow ticks.
    pub queue_depth: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seg_params: SegmentationParams::default(),
            realtime: false,
            threaded: true,
            queue_depth: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEvent {
    pub step_index: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// Stream time at which the footstep was finalized.
    pub emitted_at: f64,
    pub label: TerrainClass,
    pub command: ActuationCommand,
    pub classify_latency_ms: f64,
    pub extract_latency_ms: f64,
}

impl StepEvent {
    /// Equal apart from the latency fields.
    pub fn same_outcome(&self, other: &StepEvent) -> bool {
        self.step_index == other.step_index
            && self.t_start == other.t_start
            && self.t_end == other.t_end
            && self.emitted_at == other.emitted_at
            && self.label == other.label
            && self.command == other.command
    }
}

/// One line of the actuation log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActuationRecord {
    pub t: f64,
    pub label: TerrainClass,
    pub action: Action,
    pub tarsal_angle_deg: f64,
    pub contact_area_factor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub events: Vec<StepEvent>,
    pub actuation: Vec<ActuationRecord>,
    pub final_state: FootState,
    /// Largest `(slow, fast)` buffer occupancy seen by the segmenter.
    pub peak_buffered: (usize, usize),
    /// The segmenter's fixed `(slow, fast)` buffer caps.
    pub buffer_capacity: (usize, usize),
}

/// One slow sample and the fast samples that follow it in time.
struct Tick {
    slow: SlowFrame,
    fast: Vec<FastFrame>,
}

/// Fast-frame index range delivered after slow frame `k`.
fn fast_block(run: &RecordingRun, k: usize) -> std::ops::Range<usize> {
    let ratio = run.fast_rate_hz / run.slow_rate_hz;
    let at = |i: usize| ((i as f64 * ratio).round() as usize).min(run.fast.len());
    let end = if k + 1 == run.slow.len() { run.fast.len() } else { at(k + 1) };
    at(k).min(end)..end
}

fn feature_config(model: &ModelArtifact) -> FeatureConfig {
    FeatureConfig {
        bands: model.band_spec.clone(),
        standard_moments: model.standard_moments,
    }
}

/// Check that `model` can classify footsteps cut from `run`.
pub fn check_compatible(run: &RecordingRun, model: &ModelArtifact) -> Result<()> {
    model.validate()?;
    model.band_spec.validate(run.fast_rate_hz).map_err(|e| {
        footsense_core::Error::SchemaMismatch(format!(
            "model band edges do not fit a {} Hz run: {e}",
            run.fast_rate_hz
        ))
    })?;
    Ok(())
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

struct StepProcessor<'a> {
    model: &'a ModelArtifact,
    features: FeatureConfig,
    segmenter: StreamSegmenter,
    state: FootState,
    out: PipelineOutput,
    now: f64,
}

impl<'a> StepProcessor<'a> {
    fn new(model: &'a ModelArtifact, run: &RecordingRun, params: &SegmentationParams) -> Self {
        let segmenter = StreamSegmenter::new(params.clone(), run.fast_rate_hz, run.slow_rate_hz);
        let out = PipelineOutput {
            events: Vec::new(),
            actuation: Vec::new(),
            final_state: FootState::PASSIVE,
            peak_buffered: (0, 0),
            buffer_capacity: segmenter.capacity(),
        };
        Self {
            model,
            features: feature_config(model),
            segmenter,
            state: FootState::PASSIVE,
            out,
            now: 0.0,
        }
    }

    fn tick(&mut self, tick: Tick, on_event: &mut dyn FnMut(&StepEvent)) -> Result<()> {
        self.now = tick.slow.t;
        let done = self.segmenter.push_slow(tick.slow);
        for f in tick.fast {
            self.segmenter.push_fast(f);
        }
        let (s, f) = self.segmenter.buffered();
        let peak = &mut self.out.peak_buffered;
        *peak = (peak.0.max(s), peak.1.max(f));
        for seg in done {
            self.step(seg, on_event)?;
        }
        Ok(())
    }

    fn finish(mut self, end_t: f64, on_event: &mut dyn FnMut(&StepEvent)) -> Result<PipelineOutput> {
        self.now = self.now.max(end_t);
        if let Some(seg) = self.segmenter.finish() {
            self.step(seg, on_event)?;
        }
        self.out.final_state = self.state;
        Ok(self.out)
    }

    fn step(&mut self, seg: FootstepSegment, on_event: &mut dyn FnMut(&StepEvent)) -> Result<()> {
        let t0 = Instant::now();
        let fv = extract_features(&seg, &self.features)?;
        let extract_latency_ms = ms_since(t0);
        let t1 = Instant::now();
        let label = self.model.predict_values(&fv.values)?;
        let classify_latency_ms = ms_since(t1);

        let command = decide(label);
        self.state = apply(self.state, command);
        let event = StepEvent {
            step_index: self.out.events.len(),
            t_start: seg.t_start,
            t_end: seg.t_end,
            emitted_at: self.now,
            label,
            command,
            classify_latency_ms,
            extract_latency_ms,
        };
        on_event(&event);
        self.out.actuation.push(ActuationRecord {
            t: self.now,
            label,
            action: command.action,
            tarsal_angle_deg: self.state.tarsal_angle_deg,
            contact_area_factor: self.state.contact_area_factor,
        });
        self.out.events.push(event);
        Ok(())
    }
}

fn produce(run: &RecordingRun, realtime: bool, tx: &SyncSender<Tick>) {
    let start = Instant::now();
    for (k, slow) in run.slow.iter().enumerate() {
        if realtime {
            // a block is complete once the next slow sample is due
            let due = Duration::from_secs_f64((k + 1) as f64 / run.slow_rate_hz);
            if let Some(wait) = due.checked_sub(start.elapsed()) {
                std::thread::sleep(wait);
            }
        }
        let tick = Tick {
            slow: *slow,
            fast: run.fast[fast_block(run, k)].to_vec(),
        };
        if tx.send(tick).is_err() {
            return;
        }
    }
}

fn consume(
    rx: Receiver<Tick>,
    mut proc: StepProcessor<'_>,
    end_t: f64,
    on_event: &mut dyn FnMut(&StepEvent),
) -> Result<PipelineOutput> {
    for tick in rx {
        proc.tick(tick, on_event)?;
    }
    proc.finish(end_t, on_event)
}

/// Replay `run` through the online pipeline. `on_event` sees every footstep
/// as soon as it is classified.
pub fn run_pipeline(
    run: &RecordingRun,
    model: &ModelArtifact,
    cfg: &PipelineConfig,
    on_event: &mut dyn FnMut(&StepEvent),
) -> Result<PipelineOutput> {
    run.validate()?;
    cfg.seg_params.validate()?;
    check_compatible(run, model)?;
    let proc = StepProcessor::new(model, run, &cfg.seg_params);
    let end_t = run.duration_s();

    if !cfg.threaded {
        let start = Instant::now();
        let mut proc = proc;
        for (k, slow) in run.slow.iter().enumerate() {
            if cfg.realtime {
                let due = Duration::from_secs_f64((k + 1) as f64 / run.slow_rate_hz);
                if let Some(wait) = due.checked_sub(start.elapsed()) {
                    std::thread::sleep(wait);
                }
            }
            let tick = Tick {
                slow: *slow,
                fast: run.fast[fast_block(run, k)].to_vec(),
            };
            proc.tick(tick, on_event)?;
        }
        return proc.finish(end_t, on_event);
    }

    let (tx, rx) = sync_channel(cfg.queue_depth.max(1));
    std::thread::scope(|s| {
        let reader = s.spawn(move || produce(run, cfg.realtime, &tx));
        // dropping the receiver on error unblocks the reader
        let out = consume(rx, proc, end_t, on_event);
        reader
            .join()
            .map_err(|_| Error::Pipeline("stream reader panicked".into()))?;
        out
    })
}

/// Offline reference: whole-run segmentation, then per-footstep labels.
pub fn offline_labels(
    run: &RecordingRun,
    model: &ModelArtifact,
    params: &SegmentationParams,
) -> Result<Vec<(FootstepSegment, TerrainClass)>> {
    check_compatible(run, model)?;
    let cfg = feature_config(model);
    segment(run, params)?
        .into_iter()
        .map(|seg| {
            let fv = extract_features(&seg, &cfg)?;
            let label = model.predict_values(&fv.values)?;
            Ok((seg, label))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineInfo {
    pub os: String,
    pub arch: String,
    pub logical_cpus: usize,
    pub cpu_model: Option<String>,
}

impl MachineInfo {
    pub fn detect() -> Self {
        let cpu_model = std::fs::read_to_string("/proc/cpuinfo").ok().and_then(|s| {
            s.lines()
                .find(|l| l.starts_with("model name"))
                .and_then(|l| l.split_once(':'))
                .map(|(_, v)| v.trim().to_string())
        });
        Self {
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
            logical_cpus: std::thread::available_parallelism().map_or(1, |n| n.get()),
            cpu_model,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algo: Algo,
    pub mean_ms: f64,
    pub max_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub machine: MachineInfo,
    pub n_steps: usize,
    pub rows: Vec<BenchRow>,
}

/// Mean wall-clock predict time per footstep over the first `n_steps`
/// footsteps of `run`, for each model.
pub fn bench_latency(
    models: &[ModelArtifact],
    run: &RecordingRun,
    n_steps: usize,
    params: &SegmentationParams,
) -> Result<BenchReport> {
    if n_steps == 0 {
        return Err(footsense_core::Error::InvalidParameter("n_steps must be at least 1".into()).into());
    }
    let segs = segment(run, params)?;
    if segs.len() < n_steps {
        return Err(Error::NotEnoughSteps {
            needed: n_steps,
            got: segs.len(),
        });
    }
    let mut rows = Vec::with_capacity(models.len());
    for model in models {
        check_compatible(run, model)?;
        let cfg = feature_config(model);
        let vectors = segs[..n_steps]
            .iter()
            .map(|s| extract_features(s, &cfg))
            .collect::<footsense_core::Result<Vec<_>>>()?;
        let mut times = Vec::with_capacity(n_steps);
        for fv in &vectors {
            let t = Instant::now();
            std::hint::black_box(model.predict_values(std::hint::black_box(&fv.values))?);
            times.push(ms_since(t));
        }
        rows.push(BenchRow {
            algo: model.algo,
            mean_ms: times.iter().sum::<f64>() / n_steps as f64,
            max_ms: times.iter().copied().fold(0.0, f64::max),
        });
    }
    Ok(BenchReport {
        machine: MachineInfo::detect(),
        n_steps,
        rows,
    })
}

/// Fast samples segmented and feature-extracted per wall-clock second,
/// divided by the 18 kHz acquisition rate. `None` for a run without fast
/// samples.
pub fn throughput_check(run: &RecordingRun, params: &SegmentationParams, features: &FeatureConfig) -> Result<Option<f64>> {
    run.validate()?;
    if run.fast.is_empty() || run.slow.is_empty() {
        return Ok(None);
    }
    let t = Instant::now();
    let mut seg = StreamSegmenter::new(params.clone(), run.fast_rate_hz, run.slow_rate_hz);
    let mut steps = Vec::new();
    for (k, slow) in run.slow.iter().enumerate() {
        steps.extend(seg.push_slow(*slow));
        for f in &run.fast[fast_block(run, k)] {
            seg.push_fast(*f);
        }
        for s in steps.drain(..) {
            std::hint::black_box(extract_features(&s, features)?);
        }
    }
    if let Some(s) = seg.finish() {
        std::hint::black_box(extract_features(&s, features)?);
    }
    let elapsed = t.elapsed().as_secs_f64().max(1e-9);
    Ok(Some(run.fast.len() as f64 / elapsed / FAST_RATE_HZ))
}
