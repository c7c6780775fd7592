//! Gaussian simulation of the basis coefficients `⟨X_t, φ_l⟩`.
//!
//! Components are independent (every operator is diagonal in the basis) and
//! each one draws from its own ChaCha20 stream, keyed by `(seed, l)`, so the
//! output does not depend on how the components are scheduled.

use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::QuadratureConfig;
use crate::models::{
    autocovariances, validate_assumptions, CovarianceRoute, ModelError, ShortMemorySymbol, SpectralModel,
};
use crate::operator::{BasisSpec, HermitianFrame, OperatorError};

/// Largest tolerated `Σ|negative eigenvalues| / Σ|eigenvalues|` of the circulant.
pub const NEGATIVE_MASS_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(
        "circulant embedding of component {component} has negative eigenvalue mass {relative_mass:e} \
         (embed_factor {embed_factor}); increase embed_factor or use ma_truncation"
    )]
    NegativeEmbedding {
        component: usize,
        relative_mass: f64,
        embed_factor: usize,
    },
    #[error("invalid simulation setting: {0}")]
    Config(String),
    #[error("lag {lag} must satisfy |lag| < T = {t}")]
    Lag { lag: i64, t: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMethod {
    #[default]
    Circulant,
    MaTruncation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub method: SimMethod,
    pub seed: u64,
    /// MA truncation order `J` (also the burn-in length).
    pub j: usize,
    /// Circulant half-size is `embed_factor · T`.
    pub embed_factor: usize,
    /// Quadrature used when no closed-form covariance route applies.
    pub quadrature: QuadratureConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            method: SimMethod::Circulant,
            seed: 0,
            j: 4096,
            embed_factor: 8,
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        match self.method {
            SimMethod::Circulant if self.embed_factor < 2 => Err(SimError::Config(format!(
                "embed_factor must be >= 2, got {}",
                self.embed_factor
            ))),
            SimMethod::MaTruncation if self.j < 64 => Err(SimError::Config(format!("J must be >= 64, got {}", self.j))),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub theta_true: Vec<f64>,
    pub seed: u64,
    pub method: SimMethod,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub covariance_routes: Vec<CovarianceRoute>,
}

/// `T × L` real coefficients; column `l - 1` is component `l`.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    basis: Arc<BasisSpec>,
    coeffs: DMatrix<f64>,
    meta: SampleMeta,
}

impl SamplePath {
    pub fn new(basis: Arc<BasisSpec>, coeffs: DMatrix<f64>, meta: SampleMeta) -> Result<Self, SimError> {
        if coeffs.nrows() < 2 {
            return Err(SimError::Config(format!(
                "sample length must be >= 2, got {}",
                coeffs.nrows()
            )));
        }
        if coeffs.ncols() != basis.size() {
            return Err(OperatorError::DimensionMismatch {
                expected: basis.size(),
                found: coeffs.ncols(),
            }
            .into());
        }
        if let Some(i) = coeffs.iter().position(|v| !v.is_finite()) {
            return Err(OperatorError::NonFinite { index: i }.into());
        }
        Ok(Self { basis, coeffs, meta })
    }

    /// A path with placeholder metadata, for data that did not come from a simulator.
    pub fn from_coeffs(basis: Arc<BasisSpec>, coeffs: DMatrix<f64>) -> Result<Self, SimError> {
        let meta = SampleMeta {
            theta_true: Vec::new(),
            seed: 0,
            method: SimMethod::Circulant,
            covariance_routes: Vec::new(),
        };
        Self::new(basis, coeffs, meta)
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.nrows() == 0
    }

    pub fn size(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn meta(&self) -> &SampleMeta {
        &self.meta
    }

    /// Series of component `l` (1-based).
    pub fn component(&self, l: usize) -> &[f64] {
        let t = self.len();
        &self.coeffs.as_slice()[(l - 1) * t..l * t]
    }

    /// Time-reversed copy.
    pub fn reversed(&self) -> Self {
        let t = self.len();
        Self {
            basis: self.basis.clone(),
            coeffs: DMatrix::from_fn(t, self.size(), |i, j| self.coeffs[(t - 1 - i, j)]),
            meta: self.meta.clone(),
        }
    }

    /// Long-format CSV with header `t,l,value`, `t` and `l` 1-based.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<(), SimError> {
        writeln!(out, "t,l,value")?;
        for t in 0..self.len() {
            for l in 0..self.size() {
                writeln!(out, "{},{},{:e}", t + 1, l + 1, self.coeffs[(t, l)])?;
            }
        }
        Ok(())
    }

    /// One JSON object per time step: `{"t": 1, "values": [...]}`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), SimError> {
        for t in 0..self.len() {
            let row: Vec<f64> = self.coeffs.row(t).iter().copied().collect();
            let line = serde_json::json!({ "t": t + 1, "values": row });
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    /// Sidecar with the metadata and shape.
    pub fn write_sidecar<W: Write>(&self, mut out: W) -> Result<(), SimError> {
        let doc = serde_json::json!({
            "t": self.len(),
            "basis_size": self.size(),
            "labels": self.basis.labels(),
            "meta": self.meta,
        });
        serde_json::to_writer_pretty(&mut out, &doc).map_err(std::io::Error::from)?;
        writeln!(out)?;
        Ok(())
    }
}

/// Generator for component `l` under `seed`.
pub fn component_rng(seed: u64, l: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(l as u64);
    rng
}

/// Seed of replicate `r` derived from a master seed.
pub fn replicate_seed(seed: u64, replicate: usize) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX - replicate as u64);
    rng.random()
}

fn check_theta(model: &SpectralModel, theta: &[f64]) -> Result<(), SimError> {
    model.alpha_values(theta)?;
    Ok(())
}

/// Exact Gaussian simulation by circulant embedding of `r_0..=r_m`, `m = embed_factor · T`.
pub fn simulate_gaussian(
    model: &SpectralModel,
    theta0: &[f64],
    t: usize,
    cfg: &SimConfig,
) -> Result<SamplePath, SimError> {
    if t < 2 {
        return Err(SimError::Config(format!("sample length must be >= 2, got {t}")));
    }
    let cfg = SimConfig {
        method: SimMethod::Circulant,
        ..cfg.clone()
    };
    cfg.validate()?;
    validate_assumptions(model, &cfg.quadrature)?;
    check_theta(model, theta0)?;
    let m = cfg.embed_factor * t;
    let columns: Vec<(Vec<f64>, CovarianceRoute)> = (1..=model.size())
        .into_par_iter()
        .map(|l| {
            let (r, route) = autocovariances(model, l, theta0, m, &cfg.quadrature)?;
            let x = circulant_sample(&r, t, &mut component_rng(cfg.seed, l)).map_err(|rel| {
                SimError::NegativeEmbedding {
                    component: l,
                    relative_mass: rel,
                    embed_factor: cfg.embed_factor,
                }
            })?;
            Ok((x, route))
        })
        .collect::<Result<_, SimError>>()?;
    assemble(model, theta0, t, &cfg, columns)
}

fn assemble(
    model: &SpectralModel,
    theta0: &[f64],
    t: usize,
    cfg: &SimConfig,
    columns: Vec<(Vec<f64>, CovarianceRoute)>,
) -> Result<SamplePath, SimError> {
    let routes = columns.iter().map(|c| c.1).collect();
    let data: Vec<f64> = columns.into_iter().flat_map(|c| c.0).collect();
    let coeffs = DMatrix::from_vec(t, model.size(), data);
    SamplePath::new(
        model.basis().clone(),
        coeffs,
        SampleMeta {
            theta_true: theta0.to_vec(),
            seed: cfg.seed,
            method: cfg.method,
            covariance_routes: routes,
        },
    )
}

/// One draw of length `t` with autocovariance `r` (`r.len() - 1 = m ≥ t`).
///
/// On failure returns the relative negative eigenvalue mass.
pub fn circulant_sample(r: &[f64], t: usize, rng: &mut ChaCha20Rng) -> Result<Vec<f64>, f64> {
    let m = r.len() - 1;
    let n = 2 * m;
    let mut c: Vec<Complex64> = Vec::with_capacity(n);
    c.extend(r.iter().map(|v| Complex64::new(*v, 0.0)));
    c.extend(r[1..m].iter().rev().map(|v| Complex64::new(*v, 0.0)));
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    fft.process(&mut c);
    let (mut neg, mut total) = (0.0, 0.0);
    for v in &c {
        total += v.re.abs();
        if v.re < 0.0 {
            neg -= v.re;
        }
    }
    if neg > NEGATIVE_MASS_TOL * total {
        return Err(neg / total);
    }
    let mut z: Vec<Complex64> = c
        .iter()
        .map(|lam| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            Complex64::new(a, b) * (lam.re.max(0.0) / n as f64).sqrt()
        })
        .collect();
    fft.process(&mut z);
    Ok(z[..t].iter().map(|v| v.re).collect())
}

/// Truncated MA(∞) simulation: `X_t(l) = Σ_{j≤J} b_j(l) η_{t-j}(l)`, `η ~ N(0, λ_l)`.
pub fn simulate_ma(model: &SpectralModel, theta0: &[f64], t: usize, cfg: &SimConfig) -> Result<SamplePath, SimError> {
    if t < 2 {
        return Err(SimError::Config(format!("sample length must be >= 2, got {t}")));
    }
    let cfg = SimConfig {
        method: SimMethod::MaTruncation,
        ..cfg.clone()
    };
    cfg.validate()?;
    let sigma = match model.short_memory() {
        ShortMemorySymbol::FarimaRational { sigma_eigs, .. } => sigma_eigs.clone(),
        _ => return Err(ModelError::NotFarima.into()),
    };
    check_theta(model, theta0)?;
    let j = cfg.j;
    let columns: Vec<(Vec<f64>, CovarianceRoute)> = (1..=model.size())
        .into_par_iter()
        .map(|l| {
            let b = model.ma_coefficients(l, theta0, j)?;
            let mut rng = component_rng(cfg.seed, l);
            let sd = sigma[l - 1].sqrt();
            let n = t + 2 * j;
            let eta: Vec<f64> = (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
            let full = convolve(&eta, &b);
            // outputs before index J are incomplete sums; the next J are burn-in
            Ok((full[2 * j..2 * j + t].to_vec(), CovarianceRoute::FractionalClosedForm))
        })
        .collect::<Result<_, SimError>>()?;
    let mut path = assemble(model, theta0, t, &cfg, columns)?;
    path.meta.covariance_routes.clear();
    Ok(path)
}

/// Linear convolution via FFT, truncated to `x.len()` outputs.
fn convolve(x: &[f64], h: &[f64]) -> Vec<f64> {
    let n = (x.len() + h.len()).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut a: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    a.resize(n, Complex64::new(0.0, 0.0));
    let mut b: Vec<Complex64> = h.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    b.resize(n, Complex64::new(0.0, 0.0));
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (ai, bi) in a.iter_mut().zip(&b) {
        *ai *= bi;
    }
    inv.process(&mut a);
    a[..x.len()].iter().map(|v| v.re / n as f64).collect()
}

/// Dispatches on `cfg.method`.
pub fn simulate(model: &SpectralModel, theta0: &[f64], t: usize, cfg: &SimConfig) -> Result<SamplePath, SimError> {
    match cfg.method {
        SimMethod::Circulant => simulate_gaussian(model, theta0, t, cfg),
        SimMethod::MaTruncation => simulate_ma(model, theta0, t, cfg),
    }
}

/// `(1/T) Σ_t X_{t+lag} ⊗ X_t` as a real `L × L` matrix, entry `(a, b)` pairing
/// component `a` at time `t + lag` with component `b` at time `t`.
///
/// Only lag 0 is guaranteed symmetric; see [`lag_zero_frame`].
pub fn empirical_covariance(path: &SamplePath, lag: i64) -> Result<DMatrix<f64>, SimError> {
    let t = path.len();
    if lag.unsigned_abs() as usize >= t {
        return Err(SimError::Lag { lag, t });
    }
    let x = path.coeffs();
    let k = lag.unsigned_abs() as usize;
    let n = t - k;
    let (lead, lagged) = if lag >= 0 {
        (x.rows(k, n), x.rows(0, n))
    } else {
        (x.rows(0, n), x.rows(k, n))
    };
    Ok(lead.transpose() * lagged / t as f64)
}

/// Lag-0 empirical covariance as a Hermitian frame.
pub fn lag_zero_frame(path: &SamplePath) -> Result<HermitianFrame, SimError> {
    let c = empirical_covariance(path, 0)?;
    let sym = (&c + c.transpose()) * 0.5;
    Ok(HermitianFrame::new(
        path.basis().clone(),
        sym.map(|v| Complex64::new(v, 0.0)),
    )?)
}

/// Biased (divide by `T`) autocovariances of a zero-mean series for lags `0..=max_lag`.
pub fn sample_autocovariance(x: &[f64], max_lag: usize) -> Vec<f64> {
    let t = x.len();
    let v = DVector::from_column_slice(x);
    (0..=max_lag.min(t - 1))
        .map(|k| v.rows(k, t - k).dot(&v.rows(0, t - k)) / t as f64)
        .collect()
}
