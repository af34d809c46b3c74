//! On-disk formats: run directories, feature tables, models and reports.
//!
//! Numbers are written with Rust's shortest round-trip rendering, so every
//! `f64` survives a write and read unchanged.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use footsense_core::features::{SpectralBandSpec, FEATURE_COUNT, FEATURE_NAMES};
use footsense_core::learn::{EvalReport, ModelArtifact, PcaResult};
use footsense_core::synth::{parse_terrain_key, TerrainSignature};
use footsense_core::{Dataset, FastFrame, FeatureVector, RecordingRun, SlowFrame, TerrainClass, TACTILE_CHANNELS};

use crate::error::{Error, Result};

pub const META_FILE: &str = "meta.json";
pub const FAST_FILE: &str = "fast.csv";
pub const SLOW_FILE: &str = "slow.csv";
/// Label written for runs and rows without a terrain.
pub const UNKNOWN_LABEL: &str = "UNKNOWN";

const FAST_HEADER: [&str; 3] = ["t", "acoustic", "capacitive"];
const BUF_BYTES: usize = 1 << 20;

fn slow_header() -> Vec<String> {
    let mut h: Vec<String> = ["t", "ax", "ay", "az", "temp"].iter().map(|s| s.to_string()).collect();
    h.extend((0..TACTILE_CHANNELS).map(|i| format!("tac{i}")));
    h
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::with_capacity(BUF_BYTES, f))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    finish(path, w)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(f)).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Append-only writer of one JSON document per line.
pub struct JsonlWriter {
    path: PathBuf,
    w: BufWriter<File>,
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self {
            path: path.to_path_buf(),
            w: create(path)?,
        })
    }

    pub fn write<T: Serialize>(&mut self, value: &T) -> Result<()> {
        serde_json::to_writer(&mut self.w, value).map_err(|e| Error::Json {
            path: self.path.clone(),
            source: e,
        })?;
        self.w.write_all(b"\n").map_err(|e| Error::io(&self.path, e))
    }

    pub fn finish(self) -> Result<()> {
        finish(&self.path, self.w)
    }
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for line in BufReader::new(f).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RunMeta {
    run_id: String,
    terrain: String,
    fast_rate_hz: f64,
    slow_rate_hz: f64,
    seed: u64,
    truth_boundaries: Option<Vec<[f64; 2]>>,
    n_fast: usize,
    n_slow: usize,
}

fn label_name(label: Option<TerrainClass>) -> &'static str {
    label.map_or(UNKNOWN_LABEL, TerrainClass::name)
}

fn parse_label(s: &str, path: &Path) -> Result<Option<TerrainClass>> {
    if s.is_empty() || s == UNKNOWN_LABEL {
        return Ok(None);
    }
    parse_terrain_key(s)
        .map(Some)
        .map_err(|_| Error::format(path, format!("unknown terrain label {s:?}")))
}

/// Write `run` as `meta.json`, `fast.csv` and `slow.csv` inside `dir`.
pub fn write_run(dir: &Path, run: &RecordingRun) -> Result<()> {
    run.validate()?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = RunMeta {
        run_id: run.run_id.clone(),
        terrain: label_name(run.terrain).to_string(),
        fast_rate_hz: run.fast_rate_hz,
        slow_rate_hz: run.slow_rate_hz,
        seed: run.seed,
        truth_boundaries: run
            .truth_boundaries
            .as_ref()
            .map(|b| b.iter().map(|&(a, z)| [a, z]).collect()),
        n_fast: run.fast.len(),
        n_slow: run.slow.len(),
    };
    write_json(&dir.join(META_FILE), &meta)?;

    let path = dir.join(FAST_FILE);
    let mut w = create(&path)?;
    let io = |e| Error::io(&path, e);
    writeln!(w, "{}", FAST_HEADER.join(",")).map_err(io)?;
    for f in &run.fast {
        writeln!(w, "{},{},{}", f.t, f.acoustic, f.capacitive).map_err(io)?;
    }
    finish(&path, w)?;

    let path = dir.join(SLOW_FILE);
    let mut w = create(&path)?;
    let io = |e| Error::io(&path, e);
    writeln!(w, "{}", slow_header().join(",")).map_err(io)?;
    for f in &run.slow {
        write!(w, "{},{},{},{},{}", f.t, f.accel[0], f.accel[1], f.accel[2], f.temperature).map_err(io)?;
        for v in &f.tactile {
            write!(w, ",{v}").map_err(io)?;
        }
        w.write_all(b"\n").map_err(io)?;
    }
    finish(&path, w)
}

/// Parse every row of a numeric CSV with exactly the columns in `header`.
fn read_numeric_csv(path: &Path, header: &[String], mut row: impl FnMut(&[f64])) -> Result<usize> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .buffer_capacity(BUF_BYTES)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    let found = rdr.byte_headers().map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    if found.len() != header.len() || found.iter().zip(header).any(|(a, b)| a != b.as_bytes()) {
        let found: Vec<String> = found.iter().map(|f| String::from_utf8_lossy(f).into_owned()).collect();
        return Err(Error::format(
            path,
            format!("expected columns [{}], found [{}]", header.join(","), found.join(",")),
        ));
    }
    let mut rec = csv::ByteRecord::new();
    let mut values = vec![0.0; header.len()];
    let mut n = 0;
    loop {
        let more = rdr.read_byte_record(&mut rec).map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        if !more {
            break;
        }
        n += 1;
        if rec.len() != header.len() {
            return Err(Error::format(
                path,
                format!("row {n} has {} columns, expected {}", rec.len(), header.len()),
            ));
        }
        for (slot, field) in values.iter_mut().zip(rec.iter()) {
            *slot = std::str::from_utf8(field)
                .ok()
                .and_then(|s| s.parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::format(path, format!("row {n}: not a number: {:?}", String::from_utf8_lossy(field)))
                })?;
        }
        row(&values);
    }
    Ok(n)
}

/// Load a run directory written by [`write_run`].
pub fn read_run(dir: &Path) -> Result<RecordingRun> {
    let meta_path = dir.join(META_FILE);
    let meta: RunMeta = read_json(&meta_path)?;
    let terrain = parse_label(&meta.terrain, &meta_path)?;

    let path = dir.join(FAST_FILE);
    let header: Vec<String> = FAST_HEADER.iter().map(|s| s.to_string()).collect();
    let mut fast = Vec::with_capacity(meta.n_fast);
    read_numeric_csv(&path, &header, |v| {
        fast.push(FastFrame {
            t: v[0],
            acoustic: v[1],
            capacitive: v[2],
        })
    })?;
    if fast.len() != meta.n_fast {
        return Err(Error::format(&path, format!("{} rows but meta.json says {}", fast.len(), meta.n_fast)));
    }

    let path = dir.join(SLOW_FILE);
    let mut slow = Vec::with_capacity(meta.n_slow);
    read_numeric_csv(&path, &slow_header(), |v| {
        let mut tactile = [0.0; TACTILE_CHANNELS];
        tactile.copy_from_slice(&v[5..]);
        slow.push(SlowFrame {
            t: v[0],
            accel: [v[1], v[2], v[3]],
            temperature: v[4],
            tactile,
        })
    })?;
    if slow.len() != meta.n_slow {
        return Err(Error::format(&path, format!("{} rows but meta.json says {}", slow.len(), meta.n_slow)));
    }

    let run = RecordingRun {
        run_id: meta.run_id,
        terrain,
        fast_rate_hz: meta.fast_rate_hz,
        slow_rate_hz: meta.slow_rate_hz,
        fast,
        slow,
        seed: meta.seed,
        truth_boundaries: meta
            .truth_boundaries
            .map(|b| b.into_iter().map(|[a, z]| (a, z)).collect()),
    };
    run.validate()?;
    Ok(run)
}

/// Sub-directories of `root` that hold a run, sorted by name.
pub fn list_run_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        let p = entry.path();
        if p.join(META_FILE).is_file() {
            dirs.push(p);
        }
    }
    dirs.sort();
    Ok(dirs)
}

fn features_header() -> Vec<String> {
    let mut h: Vec<String> = FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    h.push("label".into());
    h
}

/// Write `features.csv`: the 100 named columns plus the class name.
pub fn write_dataset(path: &Path, ds: &Dataset) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    writeln!(w, "{}", features_header().join(",")).map_err(io)?;
    for r in &ds.rows {
        r.validate()?;
        for v in &r.values {
            write!(w, "{v},").map_err(io)?;
        }
        let label = r.label.map_or("", TerrainClass::name);
        writeln!(w, "{label}").map_err(io)?;
    }
    finish(path, w)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
    let header = features_header();
    let found = rdr.headers().map_err(|e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    if found.len() != header.len() || found.iter().zip(&header).any(|(a, b)| a != b) {
        return Err(Error::format(
            path,
            format!("header does not match the {FEATURE_COUNT}-feature layout plus `label`"),
        ));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        if rec.len() != header.len() {
            return Err(Error::format(
                path,
                format!("row {} has {} columns, expected {}", i + 1, rec.len(), header.len()),
            ));
        }
        let values = rec
            .iter()
            .take(FEATURE_COUNT)
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| Error::format(path, format!("row {}: non-numeric feature", i + 1)))?;
        let label = parse_label(&rec[FEATURE_COUNT], path)?;
        let fv = FeatureVector::new(values, label)
            .map_err(|e| Error::format(path, format!("row {}: {e}", i + 1)))?;
        rows.push(fv);
    }
    Ok(Dataset::new(rows))
}

pub fn write_model(path: &Path, model: &ModelArtifact) -> Result<()> {
    model.validate()?;
    write_json(path, model)
}

pub fn read_model(path: &Path) -> Result<ModelArtifact> {
    let model: ModelArtifact = read_json(path)?;
    model.validate()?;
    Ok(model)
}

/// Signature table keyed by terrain name.
pub fn write_terrains(path: &Path, table: &BTreeMap<TerrainClass, TerrainSignature>) -> Result<()> {
    let named: BTreeMap<&str, &TerrainSignature> = table.iter().map(|(c, s)| (c.name(), s)).collect();
    write_json(path, &named)
}

pub fn read_terrains(path: &Path) -> Result<BTreeMap<TerrainClass, TerrainSignature>> {
    let named: BTreeMap<String, TerrainSignature> = read_json(path)?;
    let mut out = BTreeMap::new();
    for (key, sig) in named {
        let class = parse_terrain_key(&key).map_err(|_| Error::format(path, format!("unknown terrain {key:?}")))?;
        sig.validate()
            .map_err(|e| Error::format(path, format!("{key}: {e}")))?;
        out.insert(class, sig);
    }
    Ok(out)
}

/// Band edges from a `{"edges": [...]}` file, checked against `rate_hz`.
pub fn read_bands(path: &Path, rate_hz: f64) -> Result<SpectralBandSpec> {
    let spec: SpectralBandSpec = read_json(path)?;
    spec.validate(rate_hz)
        .map_err(|e| Error::format(path, e.to_string()))?;
    Ok(spec)
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<()> {
    write_json(path, report)
}

/// Confusion matrix with true classes as rows.
pub fn write_confusion(path: &Path, report: &EvalReport) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    let names: Vec<&str> = TerrainClass::ALL.iter().map(|c| c.name()).collect();
    writeln!(w, "true,{}", names.join(",")).map_err(io)?;
    for (c, row) in report.confusion.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(u64::to_string).collect();
        writeln!(w, "{},{}", names[c], cells.join(",")).map_err(io)?;
    }
    finish(path, w)
}

/// Projected coordinates as `pc1..pcN,label`.
pub fn write_pca(path: &Path, result: &PcaResult, labels: &[Option<TerrainClass>]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| Error::io(path, e);
    let dims = result.explained_variance.len();
    let cols: Vec<String> = (1..=dims).map(|i| format!("pc{i}")).collect();
    writeln!(w, "{},label", cols.join(",")).map_err(io)?;
    for (p, label) in result.projection.iter().zip(labels) {
        for v in p {
            write!(w, "{v},").map_err(io)?;
        }
        writeln!(w, "{}", label.map_or("", TerrainClass::name)).map_err(io)?;
    }
    finish(path, w)
}
