//! Minimum-contrast estimation of the long-memory parameter θ.
//!
//! With weight `W(ω, l) = W̃_l |ω|^β` and normalizer
//! `Σ²_θ(l) = ∫ M(ω, l) W(ω, l) K(ω)^{-α(l,θ)} dω`, the standardized symbol
//! `Υ = M K^{-α} / Σ²_θ` integrates against `W` to one. The contrast of a
//! spectral measure `μ` (periodogram diagonals or a model density) is
//!
//! ```text
//! U_θ(k) = -∫ ln Υ(ω, k, θ) W(ω, k) μ(dω, k)
//! ```
//!
//! and `θ̂ = argmin_θ sup_k U_{T,θ}(k)`. The standardization kernel `K` is
//! `|ω|` unless configured otherwise.

mod optimizer;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{wrap_frequency, GridError, HalfRule, QuadratureConfig};
use crate::models::{LrdKernel, ModelError, SpectralModel};
use crate::spectral::PeriodogramSet;

pub use optimizer::{nelder_mead, NelderMeadConfig, SimplexOutcome};

#[derive(Debug, Error)]
pub enum EstimationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid weight: {0}")]
    Weight(String),
    #[error("normalizer {value:e} for component {l} lies outside the bracket [{lower:e}, {upper:e}]")]
    Bracket {
        l: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("frequency zero is excluded")]
    ZeroFrequency,
    #[error("contrast is not finite at theta = {theta:?} after {} evaluations", trace.len())]
    NonFinite { theta: Vec<f64>, trace: Vec<TraceEntry> },
    #[error("spectral measure has {found} components, model has {expected}")]
    Dimension { expected: usize, found: usize },
}

/// `W(ω, l) = W̃_l |ω|^β` with `W̃_l > 0` and `β > 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSymbol {
    wtilde: Vec<f64>,
    beta: f64,
}

impl WeightSymbol {
    pub fn new(wtilde: Vec<f64>, beta: f64) -> Result<Self, EstimationError> {
        if wtilde.is_empty() || wtilde.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(EstimationError::Weight("wtilde must be positive and finite".into()));
        }
        if !(beta > 1.0 && beta.is_finite()) {
            return Err(EstimationError::Weight(format!("beta must exceed 1, got {beta}")));
        }
        Ok(Self { wtilde, beta })
    }

    /// `W̃ ≡ 1`, `β = 2`.
    pub fn uniform(size: usize) -> Self {
        Self {
            wtilde: vec![1.0; size],
            beta: 2.0,
        }
    }

    pub fn wtilde(&self) -> &[f64] {
        &self.wtilde
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(m_W̃, M_W̃)`.
    pub fn bounds(&self) -> (f64, f64) {
        self.wtilde
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), w| (lo.min(*w), hi.max(*w)))
    }

    pub fn eval(&self, omega: f64, l: usize) -> f64 {
        self.wtilde[l - 1] * omega.abs().powf(self.beta)
    }
}

/// `Σ²_θ(l)` for one θ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Normalizer {
    pub theta: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub kernel: LrdKernel,
    /// Fingerprint of the quadrature settings used.
    pub quad: String,
}

fn quad_fingerprint(q: &QuadratureConfig) -> String {
    format!(
        "omega_min={:e};ratio={};nodes={};width={}",
        q.omega_min, q.panel_ratio, q.nodes_per_panel, q.max_panel_width
    )
}

/// A model, a weight and a standardization kernel, with the short-memory
/// symbol cached on the quadrature nodes.
#[derive(Debug, Clone)]
pub struct Standardization {
    model: SpectralModel,
    weight: WeightSymbol,
    kernel: LrdKernel,
    quad: QuadratureConfig,
    rule: HalfRule,
    /// `M(ω_i, l) W̃_l ω_i^β` per component, per half-rule node.
    mw: Vec<Vec<f64>>,
    ln_k: Vec<f64>,
    m_bounds: (f64, f64),
}

impl Standardization {
    pub fn new(
        model: &SpectralModel,
        weight: &WeightSymbol,
        kernel: LrdKernel,
        quad: &QuadratureConfig,
    ) -> Result<Self, EstimationError> {
        if weight.wtilde.len() != model.size() {
            return Err(EstimationError::Dimension {
                expected: model.size(),
                found: weight.wtilde.len(),
            });
        }
        let rule = HalfRule::new(quad, 0)?;
        let mut m_bounds = (f64::INFINITY, 0.0f64);
        let mut mw = Vec::with_capacity(model.size());
        for l in 1..=model.size() {
            let mut row = Vec::with_capacity(rule.len());
            for &w in &rule.nodes {
                let m = model.m_symbol_eval(w, l)?;
                m_bounds = (m_bounds.0.min(m), m_bounds.1.max(m));
                row.push(m * weight.eval(w, l));
            }
            mw.push(row);
        }
        let ln_k = rule.nodes.iter().map(|w| kernel.eval(*w).ln()).collect();
        Ok(Self {
            model: model.clone(),
            weight: weight.clone(),
            kernel,
            quad: *quad,
            rule,
            mw,
            ln_k,
            m_bounds,
        })
    }

    pub fn model(&self) -> &SpectralModel {
        &self.model
    }

    pub fn weight(&self) -> &WeightSymbol {
        &self.weight
    }

    pub fn kernel(&self) -> LrdKernel {
        self.kernel
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    /// Analytic bracket `[lower, upper]` of every `Σ²_θ(l)`.
    pub fn bracket(&self, alphas: &[f64]) -> (f64, f64) {
        let lo_a = alphas.iter().copied().fold(f64::INFINITY, f64::min);
        let hi_a = alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let beta = self.weight.beta;
        let (m_w, big_w) = self.weight.bounds();
        let (m, big_m) = self.m_bounds;
        let part = |outer: f64, inner: f64| {
            2.0 * (PI.powf(1.0 + beta - outer) - 1.0) / (1.0 + beta - outer) + 2.0 / (1.0 + beta - inner)
        };
        let mut upper = big_m * big_w * part(lo_a, hi_a);
        if self.kernel == LrdKernel::ExactDiff {
            // 2|sin(ω/2)| ≥ 2|ω|/π on [-π, π]
            upper *= (0.5 * PI).powf(hi_a);
        }
        (m * m_w * part(hi_a, lo_a), upper)
    }

    /// `Σ²_θ(l)` for every `l`, with the bracket check.
    pub fn normalizer(&self, theta: &[f64]) -> Result<Normalizer, EstimationError> {
        let alphas = self.model.alpha_values(theta)?;
        let eps = self.rule.omega_min;
        let mut sigma2 = Vec::with_capacity(alphas.len());
        for (i, a) in alphas.iter().enumerate() {
            let mut acc = 0.0;
            for ((wt, mw), lk) in self.rule.weights.iter().zip(&self.mw[i]).zip(&self.ln_k) {
                acc += wt * mw * (-a * lk).exp();
            }
            // the hole, where the integrand is ~ ω^{β-α}
            let edge = self.mw[i][0] * (-a * self.ln_k[0]).exp();
            let beta = self.weight.beta;
            acc += edge * eps / (1.0 + beta - a) * (eps / self.rule.nodes[0]).powf(beta - a);
            sigma2.push(2.0 * acc);
        }
        let (lower, upper) = self.bracket(&alphas);
        for (i, s) in sigma2.iter().enumerate() {
            if !(*s >= lower * (1.0 - 1e-8) && *s <= upper * (1.0 + 1e-8)) {
                return Err(EstimationError::Bracket {
                    l: i + 1,
                    value: *s,
                    lower,
                    upper,
                });
            }
        }
        Ok(Normalizer {
            theta: theta.to_vec(),
            sigma2,
            kernel: self.kernel,
            quad: quad_fingerprint(&self.quad),
        })
    }
}

/// `Σ²_θ` with the default `|ω|` standardization.
pub fn normalizer(
    model: &SpectralModel,
    theta: &[f64],
    w: &WeightSymbol,
    quad: &QuadratureConfig,
) -> Result<Normalizer, EstimationError> {
    Standardization::new(model, w, LrdKernel::PowerLaw, quad)?.normalizer(theta)
}

/// `Υ(ω, l, θ) = M(ω, l) / (K(ω)^{α(l,θ)} Σ²_θ(l))`.
pub fn upsilon_symbol(
    model: &SpectralModel,
    omega: f64,
    l: usize,
    theta: &[f64],
    norm: &Normalizer,
) -> Result<f64, EstimationError> {
    if omega == 0.0 {
        return Err(EstimationError::ZeroFrequency);
    }
    let a = model.alpha_eval(l, theta)?;
    Ok(model.m_symbol_eval(omega, l)? * norm.kernel.eval(omega).powf(-a) / norm.sigma2[l - 1])
}

/// `[ln M - ln Σ² - α ln K] · W̃_l |ω|^β`.
pub fn log_weight_symbol(
    model: &SpectralModel,
    omega: f64,
    l: usize,
    theta: &[f64],
    norm: &Normalizer,
    w: &WeightSymbol,
) -> Result<f64, EstimationError> {
    if omega == 0.0 {
        return Err(EstimationError::ZeroFrequency);
    }
    let a = model.alpha_eval(l, theta)?;
    let bracket = model.m_symbol_eval(omega, l)?.ln() - norm.sigma2[l - 1].ln() - a * norm.kernel.eval(omega).ln();
    Ok(bracket * w.eval(omega, l))
}

/// Nonnegative spectral mass per component on a set of frequencies: the
/// periodogram diagonals with weights `2π/T`, or a model density on a
/// quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDiagonals {
    omegas: Vec<f64>,
    weights: Vec<f64>,
    values: DMatrix<f64>,
}

impl SpectralDiagonals {
    pub fn new(omegas: Vec<f64>, weights: Vec<f64>, values: DMatrix<f64>) -> Result<Self, EstimationError> {
        if omegas.len() != weights.len() || omegas.len() != values.nrows() {
            return Err(EstimationError::Dimension {
                expected: omegas.len(),
                found: values.nrows(),
            });
        }
        if omegas.contains(&0.0) {
            return Err(EstimationError::ZeroFrequency);
        }
        Ok(Self {
            omegas,
            weights,
            values,
        })
    }

    /// Periodogram diagonals, frequencies wrapped into `(-π, π]`.
    pub fn from_periodogram(pset: &PeriodogramSet) -> Self {
        let t = pset.sample_len() as f64;
        let omegas: Vec<f64> = pset.grid().nodes().iter().map(|w| wrap_frequency(*w)).collect();
        let n = omegas.len();
        Self {
            omegas,
            weights: vec![2.0 * PI / t; n],
            values: pset.diagonals(),
        }
    }

    /// `f(ω_j, k, θ0)` on the Fourier grid of length `t`, in place of the periodogram.
    pub fn plug_in(model: &SpectralModel, theta0: &[f64], t: usize) -> Result<Self, EstimationError> {
        let omegas: Vec<f64> = (1..t).map(|j| wrap_frequency(2.0 * PI * j as f64 / t as f64)).collect();
        let mut values = DMatrix::zeros(omegas.len(), model.size());
        for (j, w) in omegas.iter().enumerate() {
            for l in 1..=model.size() {
                values[(j, l - 1)] = model.spectral_density_symbol(*w, l, theta0)?;
            }
        }
        let n = omegas.len();
        Ok(Self {
            omegas,
            weights: vec![2.0 * PI / t as f64; n],
            values,
        })
    }

    /// `M(ω, k) K(ω)^{-α(k,θ0)}` on the folded quadrature rule.
    pub fn from_density(
        model: &SpectralModel,
        theta0: &[f64],
        kernel: LrdKernel,
        quad: &QuadratureConfig,
    ) -> Result<Self, EstimationError> {
        let rule = HalfRule::new(quad, 0)?;
        let alphas = model.alpha_values(theta0)?;
        let mut values = DMatrix::zeros(rule.len(), model.size());
        for (j, w) in rule.nodes.iter().enumerate() {
            for (i, a) in alphas.iter().enumerate() {
                values[(j, i)] = model.m_symbol_eval(*w, i + 1)? * kernel.eval(*w).powf(-a);
            }
        }
        Ok(Self {
            omegas: rule.nodes.clone(),
            weights: rule.weights.iter().map(|w| 2.0 * w).collect(),
            values,
        })
    }

    /// `λ a + (1 - λ) b` on a common grid.
    pub fn convex_combination(a: &Self, b: &Self, lambda: f64) -> Result<Self, EstimationError> {
        if a.omegas != b.omegas || a.values.shape() != b.values.shape() {
            return Err(EstimationError::Dimension {
                expected: a.values.nrows(),
                found: b.values.nrows(),
            });
        }
        Ok(Self {
            omegas: a.omegas.clone(),
            weights: a.weights.clone(),
            values: &a.values * lambda + &b.values * (1.0 - lambda),
        })
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// θ-independent sums that make each contrast evaluation `O(L)` once `Σ²_θ` is known:
/// `A_k = ∫ W ln M dμ_k`, `B_k = ∫ W dμ_k`, `C_k = ∫ W ln K dμ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastStatistics {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ContrastStatistics {
    pub fn new(data: &SpectralDiagonals, std: &Standardization) -> Result<Self, EstimationError> {
        let model = std.model();
        let size = model.size();
        if data.values.ncols() != size {
            return Err(EstimationError::Dimension {
                expected: size,
                found: data.values.ncols(),
            });
        }
        let (mut a, mut b, mut c) = (vec![0.0; size], vec![0.0; size], vec![0.0; size]);
        for (j, (w, wt)) in data.omegas.iter().zip(&data.weights).enumerate() {
            let ln_k = std.kernel.eval(*w).ln();
            for k in 0..size {
                let mass = wt * data.values[(j, k)] * std.weight.eval(*w, k + 1);
                if mass == 0.0 {
                    continue;
                }
                a[k] += mass * model.m_symbol_eval(*w, k + 1)?.ln();
                b[k] += mass;
                c[k] += mass * ln_k;
            }
        }
        Ok(Self { a, b, c })
    }

    /// `U_θ(k) = -(A_k - B_k ln Σ²_θ(k) - α(k,θ) C_k)`.
    pub fn contrast(
        &self,
        model: &SpectralModel,
        theta: &[f64],
        norm: &Normalizer,
    ) -> Result<Vec<f64>, EstimationError> {
        let alphas = model.alpha_values(theta)?;
        Ok((0..self.a.len())
            .map(|k| -(self.a[k] - self.b[k] * norm.sigma2[k].ln() - alphas[k] * self.c[k]))
            .collect())
    }
}

/// Diagonal contrast values at one θ and their supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastRow {
    pub theta: Vec<f64>,
    pub values: Vec<f64>,
    pub sup: f64,
}

impl ContrastRow {
    fn new(theta: &[f64], values: Vec<f64>) -> Self {
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            theta: theta.to_vec(),
            values,
            sup,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Contrast rows over a θ grid or along an optimizer trace.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContrastSurface {
    pub rows: Vec<ContrastRow>,
}

impl ContrastSurface {
    /// First row with the smallest supremum.
    pub fn argmin(&self) -> Option<&ContrastRow> {
        self.rows.iter().fold(None, |best: Option<&ContrastRow>, r| match best {
            Some(b) if b.sup <= r.sup => Some(b),
            _ => Some(r),
        })
    }
}

/// `U_{T,θ}(k) = -(2π/T) Σ_j p_{ω_j}(k, k) w(ω_j, k, θ)`.
pub fn empirical_contrast(
    pset: &PeriodogramSet,
    model: &SpectralModel,
    theta: &[f64],
    norm: &Normalizer,
    w: &WeightSymbol,
) -> Result<ContrastRow, EstimationError> {
    let std = Standardization::new(model, w, norm.kernel, &QuadratureConfig::default())?;
    let stats = ContrastStatistics::new(&SpectralDiagonals::from_periodogram(pset), &std)?;
    Ok(ContrastRow::new(theta, stats.contrast(model, theta, norm)?))
}

/// `U_θ(k) = -∫ f(ω, k, θ0) w(ω, k, θ) dω`, with `f` built on the standardization kernel.
pub fn theoretical_contrast(
    model: &SpectralModel,
    theta0: &[f64],
    theta: &[f64],
    norm: &Normalizer,
    w: &WeightSymbol,
    quad: &QuadratureConfig,
) -> Result<ContrastRow, EstimationError> {
    let std = Standardization::new(model, w, norm.kernel, quad)?;
    let stats = ContrastStatistics::new(
        &SpectralDiagonals::from_density(model, theta0, norm.kernel, quad)?,
        &std,
    )?;
    Ok(ContrastRow::new(theta, stats.contrast(model, theta, norm)?))
}

/// `K(θ0, θ)(k) = U_θ(k) - U_{θ0}(k)` for each θ in `thetas`.
pub fn divergence(
    std: &Standardization,
    theta0: &[f64],
    thetas: &[Vec<f64>],
) -> Result<Vec<ContrastRow>, EstimationError> {
    let model = std.model();
    let data = SpectralDiagonals::from_density(model, theta0, std.kernel(), std.quadrature())?;
    let stats = ContrastStatistics::new(&data, std)?;
    let base = stats.contrast(model, theta0, &std.normalizer(theta0)?)?;
    thetas
        .iter()
        .map(|theta| {
            let u = stats.contrast(model, theta, &std.normalizer(theta)?)?;
            Ok(ContrastRow::new(
                theta,
                u.iter().zip(&base).map(|(a, b)| a - b).collect(),
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Points per axis of the coarse grid.
    pub grid_points: usize,
    /// Simplex refinement after the grid search.
    pub refine: bool,
    pub max_iter: usize,
    pub xtol: f64,
    pub ftol: f64,
    /// Kernel used in `Σ²_θ` and `Υ`.
    pub standardization: LrdKernel,
    pub quadrature: QuadratureConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            grid_points: 21,
            refine: true,
            max_iter: 200,
            xtol: 1e-7,
            ftol: 1e-12,
            standardization: LrdKernel::PowerLaw,
            quadrature: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub theta: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    pub theta_hat: Vec<f64>,
    pub objective: f64,
    /// `U_{T,θ̂}(k)`, `k = 1..L`.
    pub contrast: Vec<f64>,
    pub surface: ContrastSurface,
    pub trace: Vec<TraceEntry>,
    /// θ̂ lies on a face of the parameter box.
    pub on_boundary: bool,
}

/// Objective `θ ↦ sup_k U_θ(k)` for fixed data.
#[derive(Debug, Clone)]
pub struct Objective {
    std: Standardization,
    stats: ContrastStatistics,
}

impl Objective {
    pub fn new(
        data: &SpectralDiagonals,
        model: &SpectralModel,
        w: &WeightSymbol,
        opt: &OptimizerConfig,
    ) -> Result<Self, EstimationError> {
        let std = Standardization::new(model, w, opt.standardization, &opt.quadrature)?;
        let stats = ContrastStatistics::new(data, &std)?;
        Ok(Self { std, stats })
    }

    pub fn row(&self, theta: &[f64]) -> Result<ContrastRow, EstimationError> {
        let norm = self.std.normalizer(theta)?;
        Ok(ContrastRow::new(
            theta,
            self.stats.contrast(self.std.model(), theta, &norm)?,
        ))
    }

    pub fn surface(&self, grid: &[Vec<f64>]) -> Result<ContrastSurface, EstimationError> {
        let rows = grid.par_iter().map(|t| self.row(t)).collect::<Result<Vec<_>, _>>()?;
        Ok(ContrastSurface { rows })
    }
}

/// `θ̂_T = argmin_θ sup_k U_{T,θ}(k)`: coarse grid, then box-clamped simplex descent.
pub fn estimate_theta(
    pset: &PeriodogramSet,
    model: &SpectralModel,
    w: &WeightSymbol,
    opt: &OptimizerConfig,
) -> Result<Estimate, EstimationError> {
    estimate_from_diagonals(&SpectralDiagonals::from_periodogram(pset), model, w, opt)
}

pub fn estimate_from_diagonals(
    data: &SpectralDiagonals,
    model: &SpectralModel,
    w: &WeightSymbol,
    opt: &OptimizerConfig,
) -> Result<Estimate, EstimationError> {
    let objective = Objective::new(data, model, w, opt)?;
    let domain = model.theta_domain();
    let surface = objective.surface(&domain.grid(opt.grid_points))?;
    let mut trace: Vec<TraceEntry> = Vec::new();
    if let Some(bad) = surface.rows.iter().find(|r| !r.is_finite()) {
        return Err(EstimationError::NonFinite {
            theta: bad.theta.clone(),
            trace: surface
                .rows
                .iter()
                .map(|r| TraceEntry {
                    theta: r.theta.clone(),
                    objective: r.sup,
                })
                .collect(),
        });
    }
    let best = surface.argmin().expect("grid is non-empty").clone();
    trace.push(TraceEntry {
        theta: best.theta.clone(),
        objective: best.sup,
    });
    let mut theta_hat = best.theta.clone();
    let mut value = best.sup;
    if opt.refine {
        let cfg = NelderMeadConfig {
            max_iter: opt.max_iter,
            xtol: opt.xtol,
            ftol: opt.ftol,
        };
        let step: Vec<f64> = domain.cell(opt.grid_points).iter().map(|c| 0.5 * c).collect();
        let mut failure: Option<EstimationError> = None;
        let outcome = nelder_mead(
            |x| match objective.row(x) {
                Ok(r) if r.is_finite() => r.sup,
                Ok(_) => f64::NAN,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            },
            &best.theta,
            &step,
            domain.lower(),
            domain.upper(),
            &cfg,
        );
        trace.extend(outcome.trace.iter().map(|(theta, objective)| TraceEntry {
            theta: theta.clone(),
            objective: *objective,
        }));
        if let Some(e) = failure {
            return Err(e);
        }
        if let Some(bad) = outcome.trace.iter().find(|(_, v)| !v.is_finite()) {
            return Err(EstimationError::NonFinite {
                theta: bad.0.clone(),
                trace,
            });
        }
        if outcome.value < value {
            theta_hat = outcome.x;
            value = outcome.value;
        }
    }
    let row = objective.row(&theta_hat)?;
    Ok(Estimate {
        on_boundary: domain.on_boundary(&theta_hat),
        theta_hat,
        objective: value,
        contrast: row.values,
        surface,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{AlphaFamily, LongMemorySymbol, ShortMemorySymbol, ThetaBox};
    use crate::operator::BasisSpec;
    use crate::simulation::{simulate_gaussian, SimConfig};

    fn fn_model(size: usize, kernel: LrdKernel) -> SpectralModel {
        SpectralModel::fractional_noise(vec![2.0 * PI; size], kernel, (0.05, 0.95)).unwrap()
    }

    #[test]
    fn normalizer_closed_form() {
        let m = fn_model(1, LrdKernel::PowerLaw);
        let n = normalizer(&m, &[0.5], &WeightSymbol::uniform(1), &QuadratureConfig::default()).unwrap();
        // M ≡ 1 here, so Σ² = 2π^{2.5}/2.5
        let m1 = SpectralModel::fractional_noise(vec![1.0], LrdKernel::PowerLaw, (0.05, 0.95)).unwrap();
        let n1 = normalizer(&m1, &[0.5], &WeightSymbol::uniform(1), &QuadratureConfig::default()).unwrap();
        assert!((n.sigma2[0] - 2.0 * PI.powf(2.5) / 2.5).abs() < 1e-9);
        assert!((n1.sigma2[0] - PI.powf(1.5) / 2.5).abs() < 1e-10);
        // quoted as ≈ 2.2272; π^{1.5}/2.5 = 2.22733
        assert!((n1.sigma2[0] - 2.2272).abs() < 2e-4);
    }

    #[test]
    fn normalizer_is_linear_in_wtilde() {
        let m = fn_model(2, LrdKernel::PowerLaw);
        let q = QuadratureConfig::default();
        let a = normalizer(&m, &[0.3], &WeightSymbol::new(vec![1.0, 1.0], 2.0).unwrap(), &q).unwrap();
        let b = normalizer(&m, &[0.3], &WeightSymbol::new(vec![1.0, 2.0], 2.0).unwrap(), &q).unwrap();
        assert_eq!(a.sigma2[0], b.sigma2[0]);
        assert!((b.sigma2[1] - 2.0 * a.sigma2[1]).abs() < 1e-12 * a.sigma2[1]);
    }

    #[test]
    fn weight_validation() {
        assert!(WeightSymbol::new(vec![1.0], 1.0).is_err());
        assert!(WeightSymbol::new(vec![0.0], 2.0).is_err());
        assert_eq!(WeightSymbol::new(vec![0.5, 3.0], 1.5).unwrap().bounds(), (0.5, 3.0));
    }

    #[test]
    fn upsilon_value_at_pi() {
        let m = SpectralModel::fractional_noise(vec![1.0], LrdKernel::PowerLaw, (0.05, 0.95)).unwrap();
        let w = WeightSymbol::uniform(1);
        let n = normalizer(&m, &[0.5], &w, &QuadratureConfig::default()).unwrap();
        let u = upsilon_symbol(&m, PI, 1, &[0.5], &n).unwrap();
        let oracle = PI.powf(-0.5) / (2.0 * PI) / (PI.powf(1.5) / 2.5);
        assert!((u - oracle).abs() < 1e-12);
        assert!((u - 0.04031).abs() < 1e-5);
        let lw = log_weight_symbol(&m, 0.7, 1, &[0.5], &n, &w).unwrap();
        let direct = upsilon_symbol(&m, 0.7, 1, &[0.5], &n).unwrap().ln() * 0.49;
        assert!((lw - direct).abs() < 1e-12);
        assert!(log_weight_symbol(&m, 1e-8, 1, &[0.5], &n, &w).unwrap().abs() < 1e-13);
    }

    #[test]
    fn exact_diff_standardization_brackets() {
        let m = fn_model(3, LrdKernel::ExactDiff);
        let std = Standardization::new(
            &m,
            &WeightSymbol::uniform(3),
            LrdKernel::ExactDiff,
            &QuadratureConfig::default(),
        )
        .unwrap();
        for a in [0.05, 0.5, 0.95] {
            assert!(std.normalizer(&[a]).is_ok());
        }
    }

    #[test]
    fn contrast_matches_direct_sum() {
        let m = SpectralModel::fractional_noise(vec![1.0], LrdKernel::ExactDiff, (0.05, 0.95)).unwrap();
        let path = simulate_gaussian(&m, &[0.05], 256, &SimConfig::with_seed(9)).unwrap();
        let pset = PeriodogramSet::from_path(&path).unwrap();
        let w = WeightSymbol::uniform(1);
        for theta in [0.1, 0.4, 0.8] {
            let n = normalizer(&m, &[theta], &w, &QuadratureConfig::default()).unwrap();
            let row = empirical_contrast(&pset, &m, &[theta], &n, &w).unwrap();
            let mut direct = 0.0;
            for (frame, w_j) in pset.frames().iter().zip(pset.grid().nodes()) {
                let omega = wrap_frequency(*w_j);
                direct -= 2.0 * PI / 256.0
                    * frame.entries()[(0, 0)].re
                    * log_weight_symbol(&m, omega, 1, &[theta], &n, &w).unwrap();
            }
            assert!((row.values[0] - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn divergence_vanishes_at_truth() {
        let m = fn_model(2, LrdKernel::PowerLaw);
        let std = Standardization::new(
            &m,
            &WeightSymbol::uniform(2),
            LrdKernel::PowerLaw,
            &QuadratureConfig::default(),
        )
        .unwrap();
        let rows = divergence(&std, &[0.4], &[vec![0.4], vec![0.3], vec![0.5]]).unwrap();
        assert!(rows[0].values.iter().all(|v| v.abs() < 1e-12));
        assert!(rows[1].values.iter().chain(&rows[2].values).all(|v| *v > 0.0));
    }

    #[test]
    fn plug_in_minimizer_is_truth() {
        let m = SpectralModel::fractional_noise(vec![1.0, 0.25, 1.0 / 9.0], LrdKernel::PowerLaw, (0.2, 0.6)).unwrap();
        let data = SpectralDiagonals::plug_in(&m, &[0.4], 1024).unwrap();
        let opt = OptimizerConfig {
            refine: false,
            ..OptimizerConfig::default()
        };
        let est = estimate_from_diagonals(&data, &m, &WeightSymbol::uniform(3), &opt).unwrap();
        assert!(
            (est.theta_hat[0] - 0.4).abs() < m.theta_domain().cell(21)[0],
            "{:?}",
            est.theta_hat
        );
    }

    #[test]
    fn plug_in_two_parameter_objective_is_minimal_at_truth() {
        // sup_k only sees the dominant component, so the argmin may be a segment through θ0
        let basis = BasisSpec::new(3).unwrap();
        let m = SpectralModel::new(
            basis,
            LongMemorySymbol::new(AlphaFamily::Exponential, 0.01, 0.99).unwrap(),
            ShortMemorySymbol::FarimaRational {
                sigma_eigs: vec![1.0, 0.25, 1.0 / 9.0],
                ar: vec![vec![]; 3],
                ma: vec![vec![]; 3],
            },
            LrdKernel::PowerLaw,
            ThetaBox::new(vec![0.1, 0.0], vec![0.5, 0.4]).unwrap(),
        )
        .unwrap();
        let theta0 = [0.3, 0.2];
        let data = SpectralDiagonals::plug_in(&m, &theta0, 1024).unwrap();
        let opt = OptimizerConfig {
            grid_points: 11,
            ..OptimizerConfig::default()
        };
        let w = WeightSymbol::uniform(3);
        let est = estimate_from_diagonals(&data, &m, &w, &opt).unwrap();
        let at_truth = Objective::new(&data, &m, &w, &opt).unwrap().row(&theta0).unwrap().sup;
        assert!(est.objective <= at_truth + 1e-9);
        assert!(at_truth - est.objective < 1e-3 * at_truth.abs());
    }
}
