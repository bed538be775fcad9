//! Result rows, CSV and JSON-lines writers, and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::CliError;

/// One summary value of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: &'static str,
    pub n: Option<u32>,
    pub lambda: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub ci: Option<(f64, f64)>,
    pub reps: usize,
}

impl ResultRow {
    pub fn new(experiment: &'static str, n: Option<u32>, metric: impl Into<String>, value: f64, reps: usize) -> Self {
        Self { experiment, n, lambda: None, metric: metric.into(), value, ci: None, reps }
    }

    pub fn with_ci(mut self, ci: (f64, f64)) -> Self {
        self.ci = Some(ci);
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }
}

/// Everything a run produced, before it is written.
#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub warnings: Vec<String>,
    /// Extra JSON files: `(file name, content)`.
    pub dumps: Vec<(String, serde_json::Value)>,
}

#[derive(Serialize)]
struct CsvRow<'a> {
    config_hash: &'a str,
    experiment: &'a str,
    n: Option<u32>,
    lambda: Option<f64>,
    metric: &'a str,
    value: f64,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    reps: usize,
}

impl<'a> CsvRow<'a> {
    fn new(hash: &'a str, r: &'a ResultRow) -> Self {
        CsvRow {
            config_hash: hash,
            experiment: r.experiment,
            n: r.n,
            lambda: r.lambda,
            metric: &r.metric,
            value: r.value,
            ci_low: r.ci.map(|c| c.0),
            ci_high: r.ci.map(|c| c.1),
            reps: r.reps,
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_hash: &'a str,
    experiment: &'a str,
    seed: Option<u64>,
    generator: String,
    rows: usize,
    files: Vec<String>,
    warnings: &'a [String],
    config: serde_json::Value,
}

/// Writes `results.csv`, `results.jsonl` when `json` is set, the dumps and
/// `manifest.json` into `dir`; returns the paths written.
pub fn write_outputs(dir: &Path, config: &ExperimentConfig, out: &RunOutput, json: bool) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let hash = config.hash();
    let mut written = Vec::new();

    let csv_path = dir.join("results.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    for r in &out.rows {
        w.serialize(CsvRow::new(&hash, r))?;
    }
    if out.rows.is_empty() {
        w.write_record(["config_hash", "experiment", "n", "lambda", "metric", "value", "ci_low", "ci_high", "reps"])?;
    }
    w.flush()?;
    written.push(csv_path);

    if json {
        let path = dir.join("results.jsonl");
        let mut f = fs::File::create(&path)?;
        for r in &out.rows {
            serde_json::to_writer(&mut f, &CsvRow::new(&hash, r))?;
            f.write_all(b"\n")?;
        }
        written.push(path);
    }
    for (name, value) in &out.dumps {
        let path = dir.join(name);
        fs::write(&path, serde_json::to_vec(value)?)?;
        written.push(path);
    }

    let manifest_path = dir.join("manifest.json");
    let mut files: Vec<String> = written
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    files.push("manifest.json".into());
    let manifest = Manifest {
        config_hash: &hash,
        experiment: config.experiment.map_or("", |k| k.as_str()),
        seed: config.seed,
        generator: format!("fpp-cutlab {}", env!("CARGO_PKG_VERSION")),
        rows: out.rows.len(),
        files,
        warnings: &out.warnings,
        config: serde_json::from_str(&config.canonical())?,
    };
    fs::write(&manifest_path, serde_json::to_vec_pretty(&manifest)?)?;
    written.push(manifest_path);
    Ok(written)
}
