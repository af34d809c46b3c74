//! The `footsense` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use footsense_core::features::{FeatureConfig, Sensor, SpectralBandSpec, FEATURE_NAMES};
use footsense_core::learn::{self, ablate, evaluate, pca_project, table4_preset, Algo, SensorSubset};
use footsense_core::synth::{default_signatures, generate_corpus_run, parse_terrain_key, TerrainSignature};
use footsense_core::{split_train_test, Dataset, TerrainClass, FAST_RATE_HZ};

use crate::clock::MonotonicClock;
use crate::config::{FileConfig, Overrides, Settings};
use crate::error::Error;
use crate::io;
use crate::runtime::{bench_latency, run_pipeline, throughput_check, BenchReport, PipelineConfig};

#[derive(Debug, Parser)]
#[command(name = "footsense", version, about = "Terrain identification from footstep contact sensing")]
pub struct Cli {
    /// Master seed for generation, splitting and training [default: 42]
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Terrain signature table (JSON, keyed by terrain name) replacing the built-in fixtures
    #[arg(long, global = true, value_name = "PATH")]
    pub terrains: Option<PathBuf>,
    /// Spectral band edges as JSON {"edges": [10 values]} [default: 9 log-spaced bands over (20, 9000] Hz]
    #[arg(long, global = true, value_name = "PATH")]
    pub bands: Option<PathBuf>,
    /// Output directory for every artifact [default: out]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// JSON settings file; explicit flags take precedence over its values
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic runs into <out>/runs/<terrain>/
    Gen(GenArgs),
    /// Segment runs and write the per-footstep feature table
    Extract(ExtractArgs),
    /// Split the feature table 80/20 (stratified) and fit one classifier
    Train(TrainArgs),
    /// Evaluate a model on the held-out split; writes report.json and confusion.csv
    Eval(EvalArgs),
    /// Retrain and evaluate on sensor subsets; writes ablation.csv
    Ablate(AblateArgs),
    /// Project the feature table onto its principal components; writes pca.csv
    Pca(PcaArgs),
    /// Replay a run through the online pipeline, printing one JSON event per footstep
    Stream(StreamArgs),
    /// Time per-footstep inference of one or more models and fast-path throughput
    Bench(BenchArgs),
    /// Feature layout utilities
    Features {
        #[command(subcommand)]
        command: FeaturesCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum FeaturesCommand {
    /// Print the 100 feature names as CSV (index,name,sensor)
    Schema,
}

#[derive(Debug, Args)]
pub struct SegArgs {
    /// Contact threshold as a fraction of the summed-tactile range [default: 0.3]
    #[arg(long)]
    pub contact_threshold_frac: Option<f64>,
    /// Minimum spacing of consecutive footstep maxima, seconds [default: 0.5]
    #[arg(long)]
    pub min_step_gap_s: Option<f64>,
    /// Shortest contact accepted as a footstep, seconds [default: 0.2]
    #[arg(long)]
    pub min_contact_s: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Footsteps per terrain [default: 200]
    #[arg(long)]
    pub steps: Option<usize>,
    /// Terrains to generate, comma separated [default: all ten]
    #[arg(long, value_delimiter = ',')]
    pub terrain: Vec<String>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Directory holding run directories [default: <out>/runs]
    #[arg(long, value_name = "DIR")]
    pub runs: Option<PathBuf>,
    /// Output feature table [default: <out>/features.csv]
    #[arg(long, value_name = "PATH")]
    pub features: Option<PathBuf>,
    /// Use moment-ratio skewness and kurtosis instead of the literal divisors
    #[arg(long)]
    pub standard_moments: bool,
    #[command(flatten)]
    pub seg: SegArgs,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Classifier: knn, svm, rf, gb or ann
    #[arg(long)]
    pub algo: String,
    /// Input feature table [default: <out>/features.csv]
    #[arg(long, value_name = "PATH")]
    pub features: Option<PathBuf>,
    /// Output model file [default: <out>/model.json]
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Fraction of each class held out for testing [default: 0.2]
    #[arg(long)]
    pub test_fraction: Option<f64>,
    /// Restrict training to these sensors, comma separated [default: all]
    #[arg(long, value_delimiter = ',')]
    pub sensors: Vec<String>,
    /// Record that the features were extracted with --standard-moments
    #[arg(long)]
    pub standard_moments: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Model file [default: <out>/model.json]
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Test feature table [default: <out>/split/test.csv]
    #[arg(long, value_name = "PATH")]
    pub test: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Named set of sensor combinations; only `table4` exists
    #[arg(long)]
    pub preset: Option<String>,
    /// A single sensor combination, comma separated
    #[arg(long, value_delimiter = ',', conflicts_with = "preset")]
    pub sensors: Vec<String>,
    /// Classifier retrained for each combination
    #[arg(long, default_value = "rf")]
    pub algo: String,
    /// Input feature table [default: <out>/features.csv]
    #[arg(long, value_name = "PATH")]
    pub features: Option<PathBuf>,
    /// Fraction of each class held out for testing [default: 0.2]
    #[arg(long)]
    pub test_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    /// Input feature table [default: <out>/features.csv]
    #[arg(long, value_name = "PATH")]
    pub features: Option<PathBuf>,
    /// Number of components kept
    #[arg(long, default_value_t = 3)]
    pub dims: usize,
}

#[derive(Debug, Args)]
pub struct StreamArgs {
    /// Run directory to replay
    #[arg(long, value_name = "DIR")]
    pub run: PathBuf,
    /// Model file [default: <out>/model.json]
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Replay at the recorded sampling rates instead of as fast as possible
    #[arg(long)]
    pub realtime: bool,
    /// Process everything on one thread
    #[arg(long)]
    pub single_threaded: bool,
    /// Reader-to-processor queue capacity, in slow samples
    #[arg(long, default_value_t = 64)]
    pub queue_depth: usize,
    #[command(flatten)]
    pub seg: SegArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Run directory supplying the footsteps
    #[arg(long, value_name = "DIR")]
    pub run: PathBuf,
    /// Model files to time (repeatable)
    #[arg(long, value_name = "PATH", required = true)]
    pub model: Vec<PathBuf>,
    /// Footsteps timed per model
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    #[command(flatten)]
    pub seg: SegArgs,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or flag values; exit code 1.
    Usage(String),
    /// Missing or malformed inputs, or a failing operation; exit code 2.
    Data(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Data(e)
    }
}

impl From<footsense_core::Error> for CliError {
    fn from(e: footsense_core::Error) -> Self {
        CliError::Data(e.into())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parse `args` and run the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

pub fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        seed: cli.seed,
        terrains: cli.terrains,
        bands: cli.bands,
        out: cli.out,
    };
    let ctx = Context {
        s: Settings::resolve(flags, file),
    };
    match cli.command {
        Command::Gen(a) => ctx.gen(a),
        Command::Extract(a) => ctx.extract(a),
        Command::Train(a) => ctx.train(a),
        Command::Eval(a) => ctx.eval(a),
        Command::Ablate(a) => ctx.ablate(a),
        Command::Pca(a) => ctx.pca(a),
        Command::Stream(a) => ctx.stream(a),
        Command::Bench(a) => ctx.bench(a),
        Command::Features {
            command: FeaturesCommand::Schema,
        } => schema(),
    }
}

pub fn parse_algo(s: &str) -> CliResult<Algo> {
    if s.eq_ignore_ascii_case("cnn") {
        return Err(CliError::Usage(
            "CNN is out of scope: no input shape for 100 tabular features is defined; use knn, svm, rf, gb or ann".into(),
        ));
    }
    s.parse()
        .map_err(|_| CliError::Usage(format!("unknown algorithm `{s}`; expected knn, svm, rf, gb or ann")))
}

fn parse_sensors(names: &[String]) -> CliResult<SensorSubset> {
    let sensors = names
        .iter()
        .map(|n| Sensor::parse(n.trim()).ok_or_else(|| CliError::Usage(format!("unknown sensor `{n}`"))))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(SensorSubset::new(names.join(" + "), &sensors))
}

fn check_fraction(f: f64) -> CliResult<f64> {
    if f > 0.0 && f < 1.0 {
        Ok(f)
    } else {
        Err(CliError::Usage(format!("--test-fraction must be in (0, 1), got {f}")))
    }
}

fn schema() -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    let mut line = |s: String| writeln!(out, "{s}").map_err(|e| Error::io("<stdout>", e));
    line("index,name,sensor".into())?;
    for (i, name) in FEATURE_NAMES.iter().enumerate() {
        let sensor = Sensor::of_index(i).map_or("", Sensor::name);
        line(format!("{i},{name},{sensor}"))?;
    }
    Ok(())
}

struct Context {
    s: Settings,
}

#[derive(Serialize)]
struct PcaSummary<'a> {
    explained_variance: &'a [f64],
    eigenvalues: &'a [f64],
}

#[derive(Serialize)]
struct BenchOutput<'a> {
    #[serde(flatten)]
    report: &'a BenchReport,
    throughput_ratio: Option<f64>,
}

impl Context {
    fn out(&self, name: &str) -> PathBuf {
        self.s.out.join(name)
    }

    fn signatures(&self) -> CliResult<BTreeMap<TerrainClass, TerrainSignature>> {
        Ok(match &self.s.terrains {
            Some(p) => io::read_terrains(p)?,
            None => default_signatures(),
        })
    }

    fn bands(&self, rate_hz: f64) -> CliResult<SpectralBandSpec> {
        Ok(match &self.s.bands {
            Some(p) => io::read_bands(p, rate_hz)?,
            None => SpectralBandSpec::log_spaced(rate_hz),
        })
    }

    fn seg_params(&self, a: &SegArgs) -> CliResult<footsense_core::preprocess::SegmentationParams> {
        let mut p = self.s.segmentation.clone();
        if let Some(v) = a.contact_threshold_frac {
            p.contact_threshold_frac = v;
        }
        if let Some(v) = a.min_step_gap_s {
            p.min_step_gap_s = v;
        }
        if let Some(v) = a.min_contact_s {
            p.min_contact_s = v;
        }
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }

    fn features_path(&self, p: &Option<PathBuf>) -> PathBuf {
        p.clone().unwrap_or_else(|| self.out("features.csv"))
    }

    fn model_path(&self, p: &Option<PathBuf>) -> PathBuf {
        p.clone().unwrap_or_else(|| self.out("model.json"))
    }

    fn gen(&self, a: GenArgs) -> CliResult<()> {
        let steps = a.steps.unwrap_or(self.s.steps);
        if steps == 0 {
            return Err(CliError::Usage("--steps must be at least 1".into()));
        }
        let terrains = if a.terrain.is_empty() {
            TerrainClass::ALL.to_vec()
        } else {
            a.terrain
                .iter()
                .map(|t| parse_terrain_key(t).map_err(|_| CliError::Usage(format!("unknown terrain `{t}`"))))
                .collect::<CliResult<Vec<_>>>()?
        };
        let specs = self.signatures()?;
        self.s.cycle.validate()?;
        io::write_terrains(&self.out("terrains.json"), &specs)?;
        for c in terrains {
            let run = generate_corpus_run(&specs, c, &self.s.cycle, steps, self.s.seed)?;
            let dir = self.out("runs").join(c.name().to_ascii_lowercase());
            io::write_run(&dir, &run)?;
            println!("{}: {} steps, {:.1} s -> {}", c, steps, run.duration_s(), dir.display());
        }
        Ok(())
    }

    fn extract(&self, a: ExtractArgs) -> CliResult<()> {
        let runs = a.runs.clone().unwrap_or_else(|| self.out("runs"));
        let params = self.seg_params(&a.seg)?;
        let dirs = io::list_run_dirs(&runs)?;
        if dirs.is_empty() {
            return Err(Error::format(&runs, "no run directories (meta.json) found").into());
        }
        let mut rows = Vec::new();
        for dir in dirs {
            let run = io::read_run(&dir)?;
            let cfg = FeatureConfig {
                bands: self.bands(run.fast_rate_hz)?,
                standard_moments: a.standard_moments || self.s.standard_moments,
            };
            let vectors = crate::extract_run(&run, &params, &cfg)?;
            let truth = run.truth_boundaries.as_ref().map(Vec::len);
            match truth {
                Some(t) => println!("{}: {} footsteps (truth {t})", run.run_id, vectors.len()),
                None => println!("{}: {} footsteps", run.run_id, vectors.len()),
            }
            rows.extend(vectors);
        }
        let path = self.features_path(&a.features);
        io::write_dataset(&path, &Dataset::new(rows))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn train(&self, a: TrainArgs) -> CliResult<()> {
        let algo = parse_algo(&a.algo)?;
        let fraction = check_fraction(a.test_fraction.unwrap_or(self.s.test_fraction))?;
        let features: Vec<usize> = if a.sensors.is_empty() {
            (0..FEATURE_NAMES.len()).collect()
        } else {
            parse_sensors(&a.sensors)?.feature_indices()
        };
        let ds = io::read_dataset(&self.features_path(&a.features))?;
        let (train, test) = split_train_test(&ds, fraction, self.s.seed)?;
        io::write_dataset(&self.out("split/train.csv"), &train)?;
        io::write_dataset(&self.out("split/test.csv"), &test)?;
        let bands = self.bands(FAST_RATE_HZ)?;
        let mut model = learn::fit_selected(algo, &train, &features, &self.s.train, &bands, self.s.seed)?;
        model.standard_moments = a.standard_moments || self.s.standard_moments;
        let path = self.model_path(&a.model);
        io::write_model(&path, &model)?;
        println!(
            "{algo}: trained on {} rows ({} features), {} held out -> {}",
            train.len(),
            model.features.len(),
            test.len(),
            path.display()
        );
        Ok(())
    }

    fn eval(&self, a: EvalArgs) -> CliResult<()> {
        let model = io::read_model(&self.model_path(&a.model))?;
        let test_path = a.test.clone().unwrap_or_else(|| self.out("split/test.csv"));
        let test = io::read_dataset(&test_path)?;
        let report = evaluate(&model, &test, &MonotonicClock::new())?;
        io::write_report(&self.out("report.json"), &report)?;
        io::write_confusion(&self.out("confusion.csv"), &report)?;
        println!("{}: {:.2}% overall on {} rows", report.algo, report.overall_accuracy, report.n_test);
        for (c, acc) in TerrainClass::ALL.iter().zip(report.per_class_accuracy) {
            if let Some(acc) = acc {
                println!("  {:<9}{acc:6.2}%", c.name());
            }
        }
        println!(
            "  latency mean {:.4} ms, p95 {:.4} ms",
            report.inference_latency.mean_ms, report.inference_latency.p95_ms
        );
        Ok(())
    }

    fn ablate(&self, a: AblateArgs) -> CliResult<()> {
        let algo = parse_algo(&a.algo)?;
        let subsets = match (a.preset.as_deref(), a.sensors.is_empty()) {
            (Some("table4"), _) => table4_preset(),
            (Some(other), _) => return Err(CliError::Usage(format!("unknown preset `{other}`; expected table4"))),
            (None, false) => vec![parse_sensors(&a.sensors)?],
            (None, true) => return Err(CliError::Usage("give --preset table4 or --sensors".into())),
        };
        let fraction = check_fraction(a.test_fraction.unwrap_or(self.s.test_fraction))?;
        let ds = io::read_dataset(&self.features_path(&a.features))?;
        let (train, test) = split_train_test(&ds, fraction, self.s.seed)?;
        let bands = self.bands(FAST_RATE_HZ)?;
        let clock = MonotonicClock::new();
        let path = self.out("ablation.csv");
        let mut table = String::from("subset,n_features,overall_accuracy\n");
        println!("{algo} accuracy per sensor combination");
        for subset in &subsets {
            let report = ablate(&train, &test, subset, algo, &self.s.train, &bands, self.s.seed, &clock)?;
            let n = subset.feature_indices().len();
            table.push_str(&format!("{},{n},{}\n", subset.name, report.overall_accuracy));
            println!("  {:<18}{n:>4} features {:7.2}%", subset.name, report.overall_accuracy);
        }
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, table).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }

    fn pca(&self, a: PcaArgs) -> CliResult<()> {
        if a.dims == 0 {
            return Err(CliError::Usage("--dims must be at least 1".into()));
        }
        let ds = io::read_dataset(&self.features_path(&a.features))?;
        let result = pca_project(&ds, a.dims)?;
        let labels: Vec<_> = ds.rows.iter().map(|r| r.label).collect();
        io::write_pca(&self.out("pca.csv"), &result, &labels)?;
        io::write_json(
            &self.out("pca.json"),
            &PcaSummary {
                explained_variance: &result.explained_variance,
                eigenvalues: &result.eigenvalues,
            },
        )?;
        let total: f64 = result.eigenvalues.iter().sum();
        for (i, v) in result.explained_variance.iter().enumerate() {
            println!("pc{}: variance {v:.4} ({:.1}%)", i + 1, 100.0 * v / total);
        }
        Ok(())
    }

    fn stream(&self, a: StreamArgs) -> CliResult<()> {
        let cfg = PipelineConfig {
            seg_params: self.seg_params(&a.seg)?,
            realtime: a.realtime,
            threaded: !a.single_threaded,
            queue_depth: a.queue_depth.max(1),
        };
        let run = io::read_run(&a.run)?;
        let model = io::read_model(&self.model_path(&a.model))?;
        let mut events = io::JsonlWriter::create(&self.out("events.jsonl"))?;
        let mut stdout = std::io::stdout().lock();
        let mut failure = None;
        let out = run_pipeline(&run, &model, &cfg, &mut |ev| {
            if failure.is_some() {
                return;
            }
            let line = serde_json::to_string(ev).expect("events serialize");
            if let Err(e) = writeln!(stdout, "{line}").map_err(|e| Error::io("<stdout>", e)) {
                failure = Some(e);
            } else if let Err(e) = events.write(ev) {
                failure = Some(e);
            }
        })?;
        if let Some(e) = failure {
            return Err(e.into());
        }
        events.finish()?;
        let mut log = io::JsonlWriter::create(&self.out("actuation.jsonl"))?;
        for rec in &out.actuation {
            log.write(rec)?;
        }
        log.finish()?;
        eprintln!(
            "{} footsteps; peak buffers {}/{} slow, {}/{} fast",
            out.events.len(),
            out.peak_buffered.0,
            out.buffer_capacity.0,
            out.peak_buffered.1,
            out.buffer_capacity.1
        );
        Ok(())
    }

    fn bench(&self, a: BenchArgs) -> CliResult<()> {
        if a.steps == 0 {
            return Err(CliError::Usage("--steps must be at least 1".into()));
        }
        let params = self.seg_params(&a.seg)?;
        let run = io::read_run(&a.run)?;
        let models = a
            .model
            .iter()
            .map(|p| io::read_model(p))
            .collect::<Result<Vec<_>, _>>()?;
        let report = bench_latency(&models, &run, a.steps, &params)?;
        let features = FeatureConfig {
            bands: models[0].band_spec.clone(),
            standard_moments: models[0].standard_moments,
        };
        let ratio = throughput_check(&run, &params, &features)?;
        io::write_json(
            &self.out("bench.json"),
            &BenchOutput {
                report: &report,
                throughput_ratio: ratio,
            },
        )?;
        let m = &report.machine;
        println!(
            "machine: {} {} x{} {}",
            m.os,
            m.arch,
            m.logical_cpus,
            m.cpu_model.as_deref().unwrap_or("unknown cpu")
        );
        println!("mean inference per footstep over {} steps", report.n_steps);
        for r in &report.rows {
            println!("  {:<4}{:10.4} ms (max {:.4} ms)", r.algo.name(), r.mean_ms, r.max_ms);
        }
        match ratio {
            Some(r) => println!("fast-path throughput: {r:.1}x real time"),
            None => println!("fast-path throughput: undefined (no fast samples)"),
        }
        Ok(())
    }
}
