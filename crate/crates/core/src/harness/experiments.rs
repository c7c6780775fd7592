use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use statrs::statistics::{Data, OrderStatistics};

use super::fixtures::thresholds;
use super::{
    read_sample_csv, ExperimentConfig, HarnessError, OutputDir, OutputFormat, RunReport, Verdict, VerdictStatus,
};
use crate::estimation::{estimate_theta, Estimate};
use crate::models::{covariance_symbol, SpectralModel};
use crate::simulation::{replicate_seed, simulate, SamplePath};
use crate::spectral::{integrated_bias, PeriodogramSet};

fn require_ascending(ts: &[usize]) -> Result<(), HarnessError> {
    if ts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(HarnessError::Config(format!(
            "t_values must be strictly ascending, got {ts:?}"
        )));
    }
    Ok(())
}

fn sim_bytes(path: &SamplePath, format: OutputFormat) -> Result<Vec<u8>, HarnessError> {
    let mut buf = Vec::new();
    match format {
        OutputFormat::Csv => path.write_csv(&mut buf)?,
        OutputFormat::Jsonl => path.write_jsonl(&mut buf)?,
    }
    Ok(buf)
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Jsonl => "jsonl",
    }
}

/// Simulates one path per `(T, replicate)` and writes it with a JSON sidecar.
pub fn run_simulate(cfg: &ExperimentConfig, out: &OutputDir) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let loaded = cfg.load_model()?;
    let theta0 = cfg.require_theta0()?;
    let ts = cfg.require_t_values()?;
    let mut report = RunReport::new(cfg);
    for &t in ts {
        for r in 0..cfg.replicates {
            let seed = if cfg.replicates == 1 {
                cfg.seed
            } else {
                replicate_seed(cfg.seed, r)
            };
            let path = simulate(&loaded.model, theta0, t, &cfg.sim_config(seed, loaded.quadrature))?;
            let stem = if cfg.replicates == 1 {
                format!("sample_T{t}")
            } else {
                format!("sample_T{t}_r{r}")
            };
            let file = format!("{stem}.{}", extension(cfg.format));
            out.write(&file, &sim_bytes(&path, cfg.format)?)?;
            let mut sidecar = Vec::new();
            path.write_sidecar(&mut sidecar)?;
            out.write(&format!("{stem}.json"), &sidecar)?;
            report.metrics.push(json!({
                "t": t,
                "replicate": r,
                "seed": seed,
                "file": file,
                "rows": t * path.size(),
            }));
        }
    }
    report.summary = Some(json!({
        "t_values": ts,
        "basis_size": loaded.model.size(),
        "method": cfg.simulation.method,
        "seed": cfg.seed,
    }));
    Ok(report)
}

fn surface_csv(est: &Estimate) -> String {
    let mut s = String::new();
    let (p, l) = est
        .surface
        .rows
        .first()
        .map(|r| (r.theta.len(), r.values.len()))
        .unwrap_or((est.theta_hat.len(), est.contrast.len()));
    let mut header: Vec<String> = (1..=p).map(|i| format!("theta_{i}")).collect();
    header.push("sup".into());
    header.extend((1..=l).map(|k| format!("u_{k}")));
    s.push_str(&header.join(","));
    s.push('\n');
    for row in &est.surface.rows {
        let cells: Vec<String> = row
            .theta
            .iter()
            .chain(std::iter::once(&row.sup))
            .chain(&row.values)
            .map(|v| format!("{v:e}"))
            .collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Estimates θ from `data` (a `t,l,value` CSV) or from a path simulated at `theta0`.
pub fn run_estimate(cfg: &ExperimentConfig, out: &OutputDir) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let loaded = cfg.load_model()?;
    let model = &loaded.model;
    let path = match &cfg.data {
        Some(file) => {
            let coeffs = read_sample_csv(file)?;
            if coeffs.ncols() != model.size() {
                return Err(HarnessError::Config(format!(
                    "{} has {} components, model basis has {}",
                    file.display(),
                    coeffs.ncols(),
                    model.size()
                )));
            }
            SamplePath::from_coeffs(Arc::clone(model.basis()), coeffs)?
        }
        None => {
            let theta0 = cfg
                .require_theta0()
                .map_err(|_| HarnessError::Config("estimate needs `data` or `theta0`".into()))?;
            let t = *cfg.require_t_values()?.first().expect("non-empty");
            simulate(model, theta0, t, &cfg.sim_config(cfg.seed, loaded.quadrature))?
        }
    };
    let pset = PeriodogramSet::from_path(&path)?;
    let w = cfg.weight(model.size())?;
    let est = estimate_theta(&pset, model, &w, &cfg.optimizer(loaded.quadrature))?;

    let mut report = RunReport::new(cfg);
    let doc = json!({
        "theta_hat": est.theta_hat,
        "objective": est.objective,
        "contrast": est.contrast,
        "on_boundary": est.on_boundary,
        "trace": est.trace,
        "config_hash": report.config_hash,
        "seed": cfg.seed,
    });
    out.write(
        "estimate.json",
        format!("{}\n", serde_json::to_string_pretty(&doc).expect("json")).as_bytes(),
    )?;
    out.write("surface.csv", surface_csv(&est).as_bytes())?;
    report.metrics.push(json!({
        "t": path.len(),
        "theta_hat": est.theta_hat,
        "objective": est.objective,
    }));
    if est.on_boundary {
        report.warnings.push(format!(
            "theta_hat {:?} lies on the boundary of the parameter box",
            est.theta_hat
        ));
    }
    if let Some(theta0) = &cfg.theta0 {
        let tol = cfg.tolerance.unwrap_or(thresholds().estimation.single_run_tolerance);
        let err = sup_distance(&est.theta_hat, theta0);
        report.verdicts.push(Verdict::check(
            "estimate.single_run_accuracy",
            err <= tol,
            format!("max |theta_hat - theta0| = {err:.4e}, tolerance {tol}"),
        ));
    }
    Ok(report)
}

/// Integrated bias over ascending T; passes when strictly decreasing with a small last/first ratio.
pub fn run_bias_decay(cfg: &ExperimentConfig, out: &OutputDir) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let loaded = cfg.load_model()?;
    let theta0 = cfg.require_theta0()?;
    let ts = cfg.require_t_values()?;
    require_ascending(ts)?;
    let fx = &thresholds().bias_decay;
    let threshold = cfg.bias_ratio_threshold.unwrap_or(fx.max_ratio_last_over_first);

    let biases = ts
        .iter()
        .map(|&t| integrated_bias(&loaded.model, theta0, t, &loaded.quadrature))
        .collect::<Result<Vec<_>, _>>()?;
    let mut report = RunReport::new(cfg);
    let mut table = String::from("t,integrated_bias\n");
    for (&t, &b) in ts.iter().zip(&biases) {
        report
            .metrics
            .push(json!({ "t": t, "integrated_bias": b, "ratio_to_first": b / biases[0] }));
        writeln!(table, "{t},{b:e}").expect("string write");
    }
    out.write("bias_decay.csv", table.as_bytes())?;

    const CRITERION: &str = "bias_decay.monotone_with_ratio";
    let verdict = if biases.iter().all(|b| *b < fx.negligible_bias) {
        Verdict::new(
            CRITERION,
            VerdictStatus::Pass,
            format!("all biases below {:e}", fx.negligible_bias),
        )
    } else if ts.len() < 2 {
        Verdict::new(
            CRITERION,
            VerdictStatus::InsufficientPoints,
            "a single T value has no monotonicity to check",
        )
    } else {
        let decreasing = biases.windows(2).all(|w| w[1] < w[0]);
        let ratio = biases[biases.len() - 1] / biases[0];
        Verdict::check(
            CRITERION,
            decreasing && ratio < threshold,
            format!("strictly decreasing: {decreasing}; last/first = {ratio:.5}, threshold {threshold}"),
        )
    };
    report.verdicts.push(verdict);
    Ok(report)
}

/// Minimum lag of the tail window.
pub const TAIL_WINDOW_START: u64 = 200;

/// Quadrature covariance against the long-memory asymptote over the declared lags.
pub fn run_cov_tail(cfg: &ExperimentConfig, out: &OutputDir) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let loaded = cfg.load_model()?;
    let model = &loaded.model;
    let theta0 = cfg.require_theta0()?;
    if cfg.lags.is_empty() {
        return Err(HarnessError::Config(
            "missing field `lags` for experiment CovTail".into(),
        ));
    }
    let max_lag = *cfg.lags.iter().max().expect("non-empty");
    if max_lag < TAIL_WINDOW_START {
        return Err(HarnessError::Config(format!(
            "largest lag must be >= {TAIL_WINDOW_START}, got {max_lag}"
        )));
    }
    let components = match &cfg.components {
        Some(c) => c.clone(),
        None => (1..=model.size()).collect(),
    };
    let fx = &thresholds().cov_tail;
    let tol = cfg.tolerance.unwrap_or(fx.tolerance);

    let pairs: Vec<(u64, usize)> = cfg
        .lags
        .iter()
        .flat_map(|&t| components.iter().map(move |&l| (t, l)))
        .collect();
    let rows = pairs
        .par_iter()
        .map(|&(t, l)| {
            let r = covariance_symbol(model, t as i64, l, theta0, &loaded.quadrature)?;
            let a = model.lrd_asymptote(t, l, theta0)?;
            Ok((t, l, r, a))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;

    let mut report = RunReport::new(cfg);
    let mut table = String::from("t,l,covariance,asymptote,ratio\n");
    let mut worst: f64 = 0.0;
    for &(t, l, r, a) in &rows {
        let deviation = (r - a).abs() / a.abs().max(fx.relative_floor);
        let ratio = r / a;
        if t >= TAIL_WINDOW_START {
            worst = worst.max(deviation);
        }
        report.metrics.push(json!({
            "t": t, "l": l, "covariance": r, "asymptote": a, "ratio": ratio, "relative_deviation": deviation,
        }));
        writeln!(table, "{t},{l},{r:e},{a:e},{ratio:e}").expect("string write");
    }
    out.write("cov_tail.csv", table.as_bytes())?;
    report.verdicts.push(Verdict::check(
        "cov_tail.ratio_near_one",
        worst < tol,
        format!("max |ratio - 1| over lags >= {TAIL_WINDOW_START} = {worst:.4e}, tolerance {tol}"),
    ));
    Ok(report)
}

/// One Monte Carlo replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    pub t: usize,
    pub replicate: usize,
    pub seed: u64,
    pub theta_hat: Option<Vec<f64>>,
    pub error: Option<f64>,
    pub failure: Option<String>,
}

fn one_replicate(
    cfg: &ExperimentConfig,
    model: &SpectralModel,
    quad: &crate::grid::QuadratureConfig,
    theta0: &[f64],
    t: usize,
    r: usize,
) -> ReplicateOutcome {
    let seed = replicate_seed(cfg.seed, r);
    let run = || -> Result<Vec<f64>, HarnessError> {
        let path = simulate(model, theta0, t, &cfg.sim_config(seed, *quad))?;
        let pset = PeriodogramSet::from_path(&path)?;
        let w = cfg.weight(model.size())?;
        Ok(estimate_theta(&pset, model, &w, &cfg.optimizer(*quad))?.theta_hat)
    };
    match run() {
        Ok(theta_hat) => {
            let err = theta_hat
                .iter()
                .zip(theta0)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            ReplicateOutcome {
                t,
                replicate: r,
                seed,
                theta_hat: Some(theta_hat),
                error: Some(err),
                failure: None,
            }
        }
        Err(e) => ReplicateOutcome {
            t,
            replicate: r,
            seed,
            theta_hat: None,
            error: None,
            failure: Some(e.to_string()),
        },
    }
}

/// Replicated estimation over ascending T; passes when the median error strictly decreases.
pub fn run_mc_consistency(cfg: &ExperimentConfig, out: &OutputDir) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let loaded = cfg.load_model()?;
    let model = &loaded.model;
    let theta0 = cfg.require_theta0()?;
    model.alpha_values(theta0)?;
    let ts = cfg.require_t_values()?;
    require_ascending(ts)?;
    let fx = &thresholds().mc_consistency;

    let jobs: Vec<(usize, usize)> = ts
        .iter()
        .flat_map(|&t| (0..cfg.replicates).map(move |r| (t, r)))
        .collect();
    let outcomes: Vec<ReplicateOutcome> = jobs
        .par_iter()
        .map(|&(t, r)| one_replicate(cfg, model, &loaded.quadrature, theta0, t, r))
        .collect();

    let failed: Vec<&ReplicateOutcome> = outcomes.iter().filter(|o| o.failure.is_some()).collect();
    if failed.len() as f64 > fx.max_failure_fraction * outcomes.len() as f64 {
        return Err(HarnessError::Replicates {
            failed: failed.len(),
            total: outcomes.len(),
            first: failed[0].failure.clone().unwrap_or_default(),
        });
    }

    let mut report = RunReport::new(cfg);
    if model.theta_domain().on_boundary(theta0) {
        report.warnings.push(format!(
            "theta0 {theta0:?} lies on the boundary of the parameter box; the argmin may clip"
        ));
    }
    for o in &failed {
        report.warnings.push(format!(
            "replicate {} at T = {} failed: {}",
            o.replicate,
            o.t,
            o.failure.as_deref().unwrap_or("")
        ));
    }

    let mut replicates_csv = String::new();
    let p = theta0.len();
    let header: Vec<String> = ["t", "replicate", "seed"]
        .iter()
        .map(|s| s.to_string())
        .chain((1..=p).map(|i| format!("theta_hat_{i}")))
        .chain(["error".to_string(), "failure".to_string()])
        .collect();
    writeln!(replicates_csv, "{}", header.join(",")).expect("string write");
    for o in &outcomes {
        let theta: Vec<String> = match &o.theta_hat {
            Some(th) => th.iter().map(|v| format!("{v:e}")).collect(),
            None => vec![String::new(); p],
        };
        let err = o.error.map(|e| format!("{e:e}")).unwrap_or_default();
        let failure = o.failure.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(
            replicates_csv,
            "{},{},{},{},{err},{failure}",
            o.t,
            o.replicate,
            o.seed,
            theta.join(",")
        )
        .expect("string write");
    }
    out.write("replicates.csv", replicates_csv.as_bytes())?;

    let mut medians = Vec::with_capacity(ts.len());
    let mut summary_csv = String::from("t,succeeded,median_error,iqr_error\n");
    for &t in ts {
        let errs: Vec<f64> = outcomes.iter().filter(|o| o.t == t).filter_map(|o| o.error).collect();
        let n = errs.len();
        let (median, iqr) = if n == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let mut data = Data::new(errs);
            (data.median(), data.interquartile_range())
        };
        medians.push(median);
        report
            .metrics
            .push(json!({ "t": t, "succeeded": n, "median_error": median, "iqr_error": iqr }));
        writeln!(summary_csv, "{t},{n},{median:e},{iqr:e}").expect("string write");
    }
    out.write("mc_summary.csv", summary_csv.as_bytes())?;

    let insufficient = if cfg.replicates < fx.min_replicates {
        Some((
            VerdictStatus::InsufficientReplicates,
            format!("R = {} < {}", cfg.replicates, fx.min_replicates),
        ))
    } else if ts.len() < fx.min_t_values {
        Some((
            VerdictStatus::InsufficientPoints,
            format!("{} T values < {}", ts.len(), fx.min_t_values),
        ))
    } else {
        None
    };
    const DECREASING: &str = "mc_consistency.medians_decreasing";
    const FINAL: &str = "mc_consistency.final_median";
    match insufficient {
        Some((status, why)) => {
            report.verdicts.push(Verdict::new(DECREASING, status, why.clone()));
            if cfg.final_median_threshold.is_some() {
                report.verdicts.push(Verdict::new(FINAL, status, why));
            }
        }
        None => {
            let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
            report
                .verdicts
                .push(Verdict::check(DECREASING, decreasing, format!("medians {medians:?}")));
            if let Some(bound) = cfg.final_median_threshold {
                let last = medians[medians.len() - 1];
                report.verdicts.push(Verdict::check(
                    FINAL,
                    last < bound,
                    format!("median at T = {} is {last:.4e}, bound {bound}", ts[ts.len() - 1]),
                ));
            }
        }
    }
    Ok(report)
}
