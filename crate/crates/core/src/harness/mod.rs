//! Experiment configuration, reports and the drivers behind the CLI.
//!
//! Every run writes a `report.json` carrying the SHA-256 of the canonical
//! configuration. Re-running into a directory whose report has a different
//! hash is refused. Wall-clock timings go to `timings.json` so the report
//! itself is reproducible byte for byte.

mod experiments;
pub mod fixtures;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::estimation::{EstimationError, OptimizerConfig, WeightSymbol};
use crate::models::{LoadedModel, LrdKernel, ModelConfig, ModelError};
use crate::simulation::{SimConfig, SimError, SimMethod};
use crate::spectral::SpectralError;

pub use experiments::{run_bias_decay, run_cov_tail, run_estimate, run_mc_consistency, run_simulate, ReplicateOutcome};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: existing report has config hash {found}, this run has {expected}; refusing to overwrite")]
    HashMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Estimation(#[from] EstimationError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{failed} of {total} replicates failed (more than 10%); first error: {first}")]
    Replicates { failed: usize, total: usize, first: String },
}

impl HarnessError {
    /// CLI exit code: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::HashMismatch { .. } => 2,
            HarnessError::Model(ModelError::Assumption { .. } | ModelError::Invalid(_)) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Simulate,
    Estimate,
    BiasDecay,
    CovTail,
    McConsistency,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSettings {
    pub method: SimMethod,
    pub j: usize,
    pub embed_factor: usize,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        let d = SimConfig::default();
        Self {
            method: d.method,
            j: d.j,
            embed_factor: d.embed_factor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimationSettings {
    pub beta: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wtilde: Option<Vec<f64>>,
    pub grid_points: usize,
    pub refine: bool,
    pub standardization: LrdKernel,
}

impl Default for EstimationSettings {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        Self {
            beta: 2.0,
            wtilde: None,
            grid_points: d.grid_points,
            refine: d.refine,
            standardization: d.standardization,
        }
    }
}

fn one() -> usize {
    1
}

/// One experiment. `model` (inline) or `model_path` (relative to the config file) is required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta0: Option<Vec<f64>>,
    #[serde(default)]
    pub t_values: Vec<usize>,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Lags for `cov_tail`.
    #[serde(default)]
    pub lags: Vec<u64>,
    /// Components (1-based) for `cov_tail`; all by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<usize>>,
    /// Tail-ratio tolerance for `cov_tail`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Maximum last/first bias ratio for `bias_decay`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_ratio_threshold: Option<f64>,
    /// Optional bound on the median error at the largest T for `mc_consistency`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_median_threshold: Option<f64>,
    #[serde(default)]
    pub simulation: SimulationSettings,
    #[serde(default)]
    pub estimation: EstimationSettings,
    /// Sample CSV (`t,l,value`) for `estimate`; simulated from `theta0` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Reads a config file and inlines `model_path` relative to its directory.
    pub fn from_path(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg =
            Self::from_json_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_model(base)?;
        if let Some(data) = &cfg.data {
            if data.is_relative() {
                cfg.data = Some(base.join(data));
            }
        }
        Ok(cfg)
    }

    fn resolve_model(&mut self, base: &Path) -> Result<(), HarnessError> {
        match (&self.model, &self.model_path) {
            (Some(_), Some(_)) => Err(HarnessError::Config(
                "give either `model` or `model_path`, not both".into(),
            )),
            (None, Some(p)) => {
                let full = if p.is_relative() { base.join(p) } else { p.clone() };
                self.model = Some(ModelConfig::from_path(&full).map_err(|e| HarnessError::Config(e.to_string()))?);
                self.model_path = None;
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn load_model(&self) -> Result<LoadedModel, HarnessError> {
        let model = self
            .model
            .as_ref()
            .ok_or_else(|| HarnessError::Config("missing field `model` (or `model_path`)".into()))?;
        Ok(model.build()?)
    }

    pub fn require_theta0(&self) -> Result<&[f64], HarnessError> {
        self.theta0
            .as_deref()
            .ok_or_else(|| HarnessError::Config(format!("missing field `theta0` for experiment {:?}", self.experiment)))
    }

    pub fn require_t_values(&self) -> Result<&[usize], HarnessError> {
        if self.t_values.is_empty() {
            return Err(HarnessError::Config(format!(
                "missing field `t_values` for experiment {:?}",
                self.experiment
            )));
        }
        if let Some(t) = self.t_values.iter().find(|t| **t < 8) {
            return Err(HarnessError::Config(format!("T values must be >= 8, got {t}")));
        }
        Ok(&self.t_values)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.replicates < 1 {
            return Err(HarnessError::Config("replicates must be >= 1".into()));
        }
        if self.model.is_none() {
            return Err(HarnessError::Config("missing field `model` (or `model_path`)".into()));
        }
        Ok(())
    }

    pub fn sim_config(&self, seed: u64, quad: crate::grid::QuadratureConfig) -> SimConfig {
        SimConfig {
            method: self.simulation.method,
            seed,
            j: self.simulation.j,
            embed_factor: self.simulation.embed_factor,
            quadrature: quad,
        }
    }

    pub fn weight(&self, size: usize) -> Result<WeightSymbol, HarnessError> {
        let wtilde = self.estimation.wtilde.clone().unwrap_or_else(|| vec![1.0; size]);
        if wtilde.len() != size {
            return Err(HarnessError::Config(format!(
                "wtilde has {} entries, basis has {size}",
                wtilde.len()
            )));
        }
        Ok(WeightSymbol::new(wtilde, self.estimation.beta)?)
    }

    pub fn optimizer(&self, quad: crate::grid::QuadratureConfig) -> OptimizerConfig {
        OptimizerConfig {
            grid_points: self.estimation.grid_points,
            refine: self.estimation.refine,
            standardization: self.estimation.standardization,
            quadrature: quad,
            ..OptimizerConfig::default()
        }
    }

    /// SHA-256 of the canonical JSON of everything that affects results.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let bytes = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    InsufficientPoints,
    InsufficientReplicates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// Named acceptance criterion this verdict checks.
    pub criterion: String,
    pub status: VerdictStatus,
    pub detail: String,
}

impl Verdict {
    pub fn new(criterion: &str, status: VerdictStatus, detail: impl Into<String>) -> Self {
        Self {
            criterion: criterion.to_string(),
            status,
            detail: detail.into(),
        }
    }

    pub fn check(criterion: &str, ok: bool, detail: impl Into<String>) -> Self {
        Self::new(
            criterion,
            if ok { VerdictStatus::Pass } else { VerdictStatus::Fail },
            detail,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub experiment: ExperimentKind,
    pub config_hash: String,
    pub seed: u64,
    /// Per-run metrics table, one object per row.
    pub metrics: Vec<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<serde_json::Value>,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: cfg.experiment,
            config_hash: cfg.hash(),
            seed: cfg.seed,
            metrics: Vec::new(),
            summary: None,
            verdicts: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != VerdictStatus::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Output directory guarded by the config hash.
#[derive(Debug, Clone)]
pub struct OutputDir {
    path: PathBuf,
}

impl OutputDir {
    /// Creates the directory, refusing when an existing report carries another hash.
    pub fn prepare(path: &Path, config_hash: &str) -> Result<Self, HarnessError> {
        fs::create_dir_all(path).map_err(io_err(path))?;
        let report = path.join("report.json");
        if report.exists() {
            let text = fs::read_to_string(&report).map_err(io_err(&report))?;
            let found = serde_json::from_str::<serde_json::Value>(&text)
                .ok()
                .and_then(|v| v.get("config_hash").and_then(|h| h.as_str()).map(str::to_string))
                .unwrap_or_default();
            if found != config_hash {
                return Err(HarnessError::HashMismatch {
                    path: report,
                    expected: config_hash.to_string(),
                    found,
                });
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, HarnessError> {
        let p = self.path.join(name);
        fs::write(&p, bytes).map_err(io_err(&p))?;
        Ok(p)
    }

    pub fn write_report(&self, report: &RunReport) -> Result<PathBuf, HarnessError> {
        self.write("report.json", report.to_json().as_bytes())
    }

    pub fn write_timings(&self, seconds: f64) -> Result<PathBuf, HarnessError> {
        let doc = serde_json::json!({ "wall_clock_seconds": seconds });
        self.write("timings.json", format!("{doc}\n").as_bytes())
    }
}

/// Runs the configured experiment into `out`, writing `report.json` and `timings.json`.
pub fn execute(cfg: &ExperimentConfig, out: &Path) -> Result<RunReport, HarnessError> {
    let dir = OutputDir::prepare(out, &cfg.hash())?;
    let start = std::time::Instant::now();
    let report = match cfg.experiment {
        ExperimentKind::Simulate => run_simulate(cfg, &dir)?,
        ExperimentKind::Estimate => run_estimate(cfg, &dir)?,
        ExperimentKind::BiasDecay => run_bias_decay(cfg, &dir)?,
        ExperimentKind::CovTail => run_cov_tail(cfg, &dir)?,
        ExperimentKind::McConsistency => run_mc_consistency(cfg, &dir)?,
    };
    dir.write_report(&report)?;
    dir.write_timings(start.elapsed().as_secs_f64())?;
    Ok(report)
}

/// Reads a long-format `t,l,value` CSV into a `T × L` matrix.
pub fn read_sample_csv(path: &Path) -> Result<nalgebra::DMatrix<f64>, HarnessError> {
    #[derive(Deserialize)]
    struct Row {
        t: usize,
        l: usize,
        value: f64,
    }
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
    let mut rows: Vec<(usize, usize, f64)> = Vec::new();
    for rec in reader.deserialize::<Row>() {
        let r = rec.map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        if r.t == 0 || r.l == 0 {
            return Err(HarnessError::Config(format!("{}: t and l are 1-based", path.display())));
        }
        rows.push((r.t, r.l, r.value));
    }
    let t_max = rows.iter().map(|r| r.0).max().unwrap_or(0);
    let l_max = rows.iter().map(|r| r.1).max().unwrap_or(0);
    if rows.len() != t_max * l_max {
        return Err(HarnessError::Config(format!(
            "{}: {} rows do not fill a {t_max} x {l_max} table",
            path.display(),
            rows.len()
        )));
    }
    let mut m = nalgebra::DMatrix::from_element(t_max, l_max, f64::NAN);
    for (t, l, v) in rows {
        m[(t - 1, l - 1)] = v;
    }
    if m.iter().any(|v| v.is_nan()) {
        return Err(HarnessError::Config(format!(
            "{}: duplicate or missing (t, l) entries",
            path.display()
        )));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: &str = r#"{
        "experiment": "simulate",
        "model": {
            "basis_size": 2,
            "alpha": { "family": "constant" },
            "short_memory": { "kind": "farima_rational" },
            "theta_domain": { "lower": [0.1], "upper": [0.9] }
        },
        "theta0": [0.4],
        "t_values": [64],
        "seed": 3
    }"#;

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = ExperimentConfig::from_json_str(CFG).unwrap();
        let mut b = a.clone();
        b.output_dir = Some("/tmp/x".into());
        assert_eq!(a.hash(), b.hash());
        b.seed = 4;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn missing_theta0_is_named() {
        let text = CFG.replace(r#""theta0": [0.4],"#, "");
        let cfg = ExperimentConfig::from_json_str(&text).unwrap();
        let err = cfg.require_theta0().unwrap_err();
        assert!(err.to_string().contains("theta0"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_experiment_is_a_config_error() {
        let text = CFG.replace("\"simulate\"", "\"dance\"");
        assert!(matches!(
            ExperimentConfig::from_json_str(&text),
            Err(HarnessError::Config(_))
        ));
    }

    #[test]
    fn hash_mismatch_refuses() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::prepare(dir.path(), "aaa").unwrap();
        let cfg = ExperimentConfig::from_json_str(CFG).unwrap();
        let mut report = RunReport::new(&cfg);
        report.config_hash = "aaa".into();
        out.write_report(&report).unwrap();
        assert!(OutputDir::prepare(dir.path(), "aaa").is_ok());
        let err = OutputDir::prepare(dir.path(), "bbb").unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn sample_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        fs::write(&p, "t,l,value\n1,1,1e0\n1,2,2e0\n2,1,3e0\n2,2,4e0\n").unwrap();
        let m = read_sample_csv(&p).unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m[(1, 0)], 3.0);
        fs::write(&p, "t,l,value\n1,1,1e0\n1,2,2e0\n2,1,3e0\n").unwrap();
        assert!(read_sample_csv(&p).is_err());
    }
}
