//! Semiparametric spectral models.
//!
//! A [`SpectralModel`] describes, for every basis index `l` (1-based), a
//! spectral density symbol
//!
//! ```text
//! f(ω, l, θ) = M(ω, l) · K(ω)^{-α(l, θ)}
//! ```
//!
//! where `α` is the long-memory symbol (values in `(0, 1)`), `M` is the
//! bounded short-memory symbol and `K(ω)` is either `|1 - e^{-iω}|`
//! (fractional differencing, the default) or `|ω|` (pure power law).

mod config;
mod covariance;
mod validate;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::grid::GridError;
use crate::operator::{BasisSpec, OperatorError};

pub use config::{AlphaConfig, LoadedModel, ModelConfig, ShortMemoryConfig, ThetaBoxConfig};
pub use covariance::{
    autocovariances, covariance_on_rule, covariance_sequence, covariance_symbol, power_law_constant_covariances,
    CovarianceRoute,
};
pub use validate::{validate_assumptions, AssumptionReport};

/// Magnitude below which `Φ` or `Q` is considered to vanish.
const POLE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("basis index {l} outside 1..={size}")]
    BasisIndex { l: usize, size: usize },
    #[error("theta has {found} coordinates, the {family:?} family needs {expected}")]
    ThetaDimension {
        family: AlphaFamily,
        expected: usize,
        found: usize,
    },
    #[error("theta {theta:?} lies outside the parameter domain")]
    ThetaOutsideDomain { theta: Vec<f64> },
    #[error("alpha({l}, {theta:?}) = {value} violates the bounds [{lower}, {upper}]")]
    AlphaOutOfBounds {
        l: usize,
        theta: Vec<f64>,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("spectral density is singular at omega = 0")]
    Singularity,
    #[error("{which} polynomial vanishes at omega = {omega} (|value| = {magnitude:e})")]
    Pole {
        which: &'static str,
        omega: f64,
        magnitude: f64,
    },
    #[error("non-positive spectral density {value:e} at omega = {omega}, l = {l}")]
    NonPositive { omega: f64, l: usize, value: f64 },
    #[error("operation requires the FARIMA rational short-memory symbol")]
    NotFarima,
    #[error("{0} must be < 1 for the covariance asymptote (Gamma pole)")]
    GammaPole(f64),
    #[error("quadrature produced a non-finite value at lag {lag}")]
    QuadratureFailure { lag: i64 },
    #[error("imaginary part {imag:e} of the covariance at lag {lag} is not negligible (real part {real:e})")]
    ImaginaryResidual { lag: i64, real: f64, imag: f64 },
    #[error("MA truncation J = {j} is below p + q = {min}")]
    Truncation { j: usize, min: usize },
    #[error("{assumption} failed: {detail}")]
    Assumption { assumption: &'static str, detail: String },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaFamily {
    /// `α(l, θ) = θ₁`.
    Constant,
    /// `α(l, θ) = θ₁ + θ₂ / (1 + ln l)`.
    LogDecay,
    /// `α(l, θ) = θ₁ + θ₂ e^{-(l-1)}`.
    Exponential,
}

impl AlphaFamily {
    pub fn dim(self) -> usize {
        match self {
            AlphaFamily::Constant => 1,
            AlphaFamily::LogDecay | AlphaFamily::Exponential => 2,
        }
    }

    fn raw(self, l: usize, theta: &[f64]) -> f64 {
        match self {
            AlphaFamily::Constant => theta[0],
            AlphaFamily::LogDecay => theta[0] + theta[1] / (1.0 + (l as f64).ln()),
            AlphaFamily::Exponential => theta[0] + theta[1] * (-(l as f64 - 1.0)).exp(),
        }
    }

    /// Partial derivatives of `α(l, ·)`; all families are affine in θ.
    pub fn gradient(self, l: usize) -> Vec<f64> {
        match self {
            AlphaFamily::Constant => vec![1.0],
            AlphaFamily::LogDecay => vec![1.0, 1.0 / (1.0 + (l as f64).ln())],
            AlphaFamily::Exponential => vec![1.0, (-(l as f64 - 1.0)).exp()],
        }
    }
}

/// Long-memory symbol `α(l, θ)` with hard bounds `lower ≤ α ≤ upper`.
///
/// Values outside the bounds are reported as errors, never clamped.
#[derive(Debug, Clone, PartialEq)]
pub struct LongMemorySymbol {
    family: AlphaFamily,
    lower: f64,
    upper: f64,
}

impl LongMemorySymbol {
    pub fn new(family: AlphaFamily, lower: f64, upper: f64) -> Result<Self, ModelError> {
        if !(lower > 0.0 && lower <= upper && upper < 1.0) {
            return Err(ModelError::Assumption {
                assumption: "alpha range",
                detail: format!("alpha bounds must satisfy 0 < lower <= upper < 1, got [{lower}, {upper}]"),
            });
        }
        Ok(Self { family, lower, upper })
    }

    pub fn family(&self) -> AlphaFamily {
        self.family
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn eval(&self, l: usize, theta: &[f64]) -> Result<f64, ModelError> {
        if theta.len() != self.family.dim() {
            return Err(ModelError::ThetaDimension {
                family: self.family,
                expected: self.family.dim(),
                found: theta.len(),
            });
        }
        let value = self.family.raw(l, theta);
        if !(value >= self.lower && value <= self.upper && value > 0.0 && value < 1.0) {
            return Err(ModelError::AlphaOutOfBounds {
                l,
                theta: theta.to_vec(),
                value,
                lower: self.lower,
                upper: self.upper,
            });
        }
        Ok(value)
    }
}

/// Zero-free kernel raised to `-α` in the spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrdKernel {
    /// `|1 - e^{-iω}| = 2|sin(ω/2)|`.
    #[default]
    ExactDiff,
    /// `|ω|`.
    PowerLaw,
}

impl LrdKernel {
    pub fn eval(self, omega: f64) -> f64 {
        match self {
            LrdKernel::ExactDiff => 2.0 * (0.5 * omega).sin().abs(),
            LrdKernel::PowerLaw => omega.abs(),
        }
    }
}

/// Taper `h` on `[-π, π]`: even, positive inside, zero at `±π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Taper {
    /// `h(ω) = cos²(ω/2)`.
    CosineSquared,
    /// `h(ω) = 1 - |ω|/π`.
    Triangular,
}

impl Taper {
    pub fn eval(self, omega: f64) -> f64 {
        if omega.abs() >= PI {
            return 0.0;
        }
        match self {
            Taper::CosineSquared => (0.5 * omega).cos().powi(2),
            Taper::Triangular => 1.0 - omega.abs() / PI,
        }
    }
}

/// Short-memory symbol `M(ω, l)`. All per-component arrays have length `L`.
#[derive(Debug, Clone, PartialEq)]
pub enum ShortMemorySymbol {
    /// `M(ω, l) = (λ_l / 2π) |Ψ_l(e^{-iω}) / Φ_l(e^{-iω})|²` with
    /// `Φ_l(z) = 1 - Σ_j ar[l][j] z^j` and `Ψ_l(z) = Σ_j ma[l][j] z^{j}`
    /// (`j ≥ 1`; an empty MA list means `Ψ_l ≡ 1`).
    FarimaRational {
        sigma_eigs: Vec<f64>,
        ar: Vec<Vec<f64>>,
        ma: Vec<Vec<f64>>,
    },
    /// `M(ω, l) = P(λ_l, ω) / Q(λ_l, ω) · h(ω)` where
    /// `P(λ, ω) = Σ_{i,j} p[i][j] λ^i ω^{2j}` and likewise for `Q`.
    TaperedRational {
        lambda: Vec<f64>,
        p: Vec<Vec<f64>>,
        q: Vec<Vec<f64>>,
        taper: Taper,
    },
}

fn poly_eval(coeffs: &[f64], z: Complex64, shift: usize) -> Complex64 {
    // Σ_j c_j z^{j+shift}, Horner in z
    let mut acc = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc * z.powi(shift as i32)
}

fn poly2_eval(coeffs: &[Vec<f64>], lambda: f64, omega: f64) -> f64 {
    let w2 = omega * omega;
    coeffs
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let inner = row.iter().rev().fold(0.0, |acc, c| acc * w2 + c);
            lambda.powi(i as i32) * inner
        })
        .sum()
}

impl ShortMemorySymbol {
    fn components(&self) -> usize {
        match self {
            ShortMemorySymbol::FarimaRational { sigma_eigs, .. } => sigma_eigs.len(),
            ShortMemorySymbol::TaperedRational { lambda, .. } => lambda.len(),
        }
    }

    /// Evaluates `M(ω, l)` for a 0-based component index.
    fn eval_index(&self, omega: f64, idx: usize) -> Result<f64, ModelError> {
        match self {
            ShortMemorySymbol::FarimaRational { sigma_eigs, ar, ma } => {
                let z = Complex64::from_polar(1.0, -omega);
                let phi = Complex64::new(1.0, 0.0) - poly_eval(&ar[idx], z, 1);
                if phi.norm() < POLE_TOL {
                    return Err(ModelError::Pole {
                        which: "AR",
                        omega,
                        magnitude: phi.norm(),
                    });
                }
                let psi = if ma[idx].is_empty() {
                    Complex64::new(1.0, 0.0)
                } else {
                    poly_eval(&ma[idx], z, 1)
                };
                Ok(sigma_eigs[idx] / (2.0 * PI) * (psi / phi).norm_sqr())
            }
            ShortMemorySymbol::TaperedRational { lambda, p, q, taper } => {
                let den = poly2_eval(q, lambda[idx], omega);
                if den.abs() < POLE_TOL {
                    return Err(ModelError::Pole {
                        which: "Q",
                        omega,
                        magnitude: den.abs(),
                    });
                }
                Ok(poly2_eval(p, lambda[idx], omega) / den * taper.eval(omega))
            }
        }
    }

    /// True when `M(ω, l)` does not depend on `ω` for any `l`.
    pub fn is_frequency_constant(&self) -> bool {
        match self {
            ShortMemorySymbol::FarimaRational { ar, ma, .. } => {
                ar.iter().all(|a| a.iter().all(|c| *c == 0.0))
                    && ma.iter().all(|m| {
                        m.iter().filter(|c| **c != 0.0).count() <= 1 && (m.is_empty() || m.iter().any(|c| *c != 0.0))
                    })
            }
            ShortMemorySymbol::TaperedRational { .. } => false,
        }
    }
}

/// Axis-aligned compact parameter box `Θ ⊂ R^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl ThetaBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ModelError> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(ModelError::Invalid(
                "theta box bounds must be non-empty and of equal length".into(),
            ));
        }
        if lower
            .iter()
            .zip(&upper)
            .any(|(a, b)| !(a.is_finite() && b.is_finite() && a <= b))
        {
            return Err(ModelError::Invalid(format!(
                "theta box lower {lower:?} must not exceed upper {upper:?}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && theta
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(t, (lo, hi))| *t >= lo - 1e-12 && *t <= hi + 1e-12)
    }

    pub fn clamp(&self, theta: &[f64]) -> Vec<f64> {
        theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(t, (lo, hi))| t.clamp(*lo, *hi))
            .collect()
    }

    /// True when some coordinate sits on a face of the box.
    pub fn on_boundary(&self, theta: &[f64]) -> bool {
        theta
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(t, (lo, hi))| (t - lo).abs() < 1e-12 || (t - hi).abs() < 1e-12)
    }

    /// Width of one cell of an `n`-point-per-axis grid.
    pub fn cell(&self, n: usize) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| if n > 1 { (hi - lo) / (n - 1) as f64 } else { hi - lo })
            .collect()
    }

    /// Tensor grid with `n` points per axis, in lexicographic order.
    pub fn grid(&self, n: usize) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| {
                if n <= 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..n)
                        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).min(*hi))
                        .collect()
                }
            })
            .collect();
        let mut out: Vec<Vec<f64>> = vec![Vec::new()];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |v| {
                        let mut p = prefix.clone();
                        p.push(*v);
                        p
                    })
                })
                .collect();
        }
        out
    }
}

/// The semiparametric family `{F_{ω,θ}}` in the fixed basis.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    basis: Arc<BasisSpec>,
    alpha: LongMemorySymbol,
    mshort: ShortMemorySymbol,
    kernel: LrdKernel,
    theta_domain: ThetaBox,
}

impl SpectralModel {
    pub fn new(
        basis: Arc<BasisSpec>,
        alpha: LongMemorySymbol,
        mshort: ShortMemorySymbol,
        kernel: LrdKernel,
        theta_domain: ThetaBox,
    ) -> Result<Self, ModelError> {
        let n = basis.size();
        if mshort.components() != n {
            return Err(ModelError::Invalid(format!(
                "short-memory symbol has {} components, basis has {n}",
                mshort.components()
            )));
        }
        match &mshort {
            ShortMemorySymbol::FarimaRational { sigma_eigs, ar, ma } => {
                if ar.len() != n || ma.len() != n {
                    return Err(ModelError::Invalid(
                        "AR and MA coefficient lists need one entry per component".into(),
                    ));
                }
                if sigma_eigs.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
                    return Err(ModelError::Invalid("innovation eigenvalues must be positive".into()));
                }
            }
            ShortMemorySymbol::TaperedRational { p, q, .. } => {
                if p.is_empty() || q.is_empty() {
                    return Err(ModelError::Invalid("P and Q need at least one coefficient".into()));
                }
            }
        }
        if theta_domain.dim() != alpha.family().dim() {
            return Err(ModelError::Invalid(format!(
                "theta domain has dimension {}, {:?} family needs {}",
                theta_domain.dim(),
                alpha.family(),
                alpha.family().dim()
            )));
        }
        Ok(Self {
            basis,
            alpha,
            mshort,
            kernel,
            theta_domain,
        })
    }

    /// Pure fractional noise: constant-α family, `M(ω, l) = λ_l / 2π`.
    pub fn fractional_noise(
        sigma_eigs: Vec<f64>,
        kernel: LrdKernel,
        theta_domain: (f64, f64),
    ) -> Result<Self, ModelError> {
        let n = sigma_eigs.len();
        let basis = BasisSpec::new(n)?;
        Self::new(
            basis,
            LongMemorySymbol::new(AlphaFamily::Constant, theta_domain.0, theta_domain.1)?,
            ShortMemorySymbol::FarimaRational {
                sigma_eigs,
                ar: vec![Vec::new(); n],
                ma: vec![Vec::new(); n],
            },
            kernel,
            ThetaBox::new(vec![theta_domain.0], vec![theta_domain.1])?,
        )
    }

    pub fn with_kernel(&self, kernel: LrdKernel) -> Self {
        Self { kernel, ..self.clone() }
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn size(&self) -> usize {
        self.basis.size()
    }

    pub fn alpha(&self) -> &LongMemorySymbol {
        &self.alpha
    }

    pub fn short_memory(&self) -> &ShortMemorySymbol {
        &self.mshort
    }

    pub fn kernel(&self) -> LrdKernel {
        self.kernel
    }

    pub fn theta_domain(&self) -> &ThetaBox {
        &self.theta_domain
    }

    fn check_index(&self, l: usize) -> Result<usize, ModelError> {
        if l == 0 || l > self.size() {
            return Err(ModelError::BasisIndex { l, size: self.size() });
        }
        Ok(l - 1)
    }

    /// `α(l, θ)` for basis index `l` (1-based); θ must lie in the domain.
    pub fn alpha_eval(&self, l: usize, theta: &[f64]) -> Result<f64, ModelError> {
        self.check_index(l)?;
        if theta.len() == self.theta_domain.dim() && !self.theta_domain.contains(theta) {
            return Err(ModelError::ThetaOutsideDomain { theta: theta.to_vec() });
        }
        self.alpha.eval(l, theta)
    }

    /// All `α(l, θ)`, `l = 1..=L`.
    pub fn alpha_values(&self, theta: &[f64]) -> Result<Vec<f64>, ModelError> {
        (1..=self.size()).map(|l| self.alpha_eval(l, theta)).collect()
    }

    /// `M(ω, l)`; zero is possible only where a taper vanishes.
    pub fn m_symbol_eval(&self, omega: f64, l: usize) -> Result<f64, ModelError> {
        let idx = self.check_index(l)?;
        self.mshort.eval_index(omega, idx)
    }

    /// `f(ω, l, θ)` with the model's own kernel.
    pub fn spectral_density_symbol(&self, omega: f64, l: usize, theta: &[f64]) -> Result<f64, ModelError> {
        self.density_with_kernel(omega, l, theta, self.kernel)
    }

    /// `M(ω, l) · K(ω)^{-α(l,θ)}` for an explicit kernel.
    pub fn density_with_kernel(
        &self,
        omega: f64,
        l: usize,
        theta: &[f64],
        kernel: LrdKernel,
    ) -> Result<f64, ModelError> {
        if omega == 0.0 {
            return Err(ModelError::Singularity);
        }
        let a = self.alpha_eval(l, theta)?;
        self.density_given_alpha(omega, l, a, kernel)
    }

    pub(crate) fn density_given_alpha(
        &self,
        omega: f64,
        l: usize,
        alpha: f64,
        kernel: LrdKernel,
    ) -> Result<f64, ModelError> {
        let m = self.m_symbol_eval(omega, l)?;
        let value = m * kernel.eval(omega).powf(-alpha);
        if !(value > 0.0 && value.is_finite()) {
            return Err(ModelError::NonPositive { omega, l, value });
        }
        Ok(value)
    }

    /// `M̃_t(l) · t^{α(l,θ) - 1}` with `M̃_t(l) = 2Γ(1-α) sin(πα/2) M(1/t, l)`.
    pub fn lrd_asymptote(&self, t: u64, l: usize, theta: &[f64]) -> Result<f64, ModelError> {
        if t == 0 {
            return Err(ModelError::Invalid("asymptote needs t >= 1".into()));
        }
        let a = self.alpha_eval(l, theta)?;
        if a >= 1.0 {
            return Err(ModelError::GammaPole(a));
        }
        let t = t as f64;
        let amplitude = 2.0 * gamma(1.0 - a) * (0.5 * PI * a).sin() * self.m_symbol_eval(1.0 / t, l)?;
        Ok(amplitude * t.powf(a - 1.0))
    }

    /// Coefficients `b_0..=b_J` of the MA(∞) representation of component `l`.
    ///
    /// `b` is the convolution of the fractional filter `a_j` (`a_0 = 1`,
    /// `a_j = a_{j-1}(j-1+d)/j`, `d = α/2`) with the impulse response of `Ψ_l/Φ_l`.
    pub fn ma_coefficients(&self, l: usize, theta: &[f64], j_max: usize) -> Result<Vec<f64>, ModelError> {
        let idx = self.check_index(l)?;
        let (ar, ma) = match &self.mshort {
            ShortMemorySymbol::FarimaRational { ar, ma, .. } => (&ar[idx], &ma[idx]),
            _ => return Err(ModelError::NotFarima),
        };
        if j_max < ar.len() + ma.len() {
            return Err(ModelError::Truncation {
                j: j_max,
                min: ar.len() + ma.len(),
            });
        }
        let d = 0.5 * self.alpha_eval(l, theta)?;
        let frac = fractional_coefficients(d, j_max);
        let arma = arma_impulse_response(ar, ma, j_max + 1);
        Ok((0..=j_max)
            .map(|j| (0..=j).map(|i| frac[i] * arma[j - i]).sum())
            .collect())
    }
}

/// `a_0..=a_J` of `(1 - z)^{-d}`.
pub fn fractional_coefficients(d: f64, j_max: usize) -> Vec<f64> {
    let mut a = Vec::with_capacity(j_max + 1);
    a.push(1.0);
    for j in 1..=j_max {
        let prev = a[j - 1];
        a.push(prev * (j as f64 - 1.0 + d) / j as f64);
    }
    a
}

/// First `n` impulse-response coefficients of `Ψ(z)/Φ(z)`, with
/// `Φ(z) = 1 - Σ ar_j z^j` and `Ψ(z) = Σ_{j≥1} ma_j z^j` (or 1 when empty).
pub fn arma_impulse_response(ar: &[f64], ma: &[f64], n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n];
    for j in 0..n {
        let mut v = if ma.is_empty() {
            if j == 0 {
                1.0
            } else {
                0.0
            }
        } else if j >= 1 && j <= ma.len() {
            ma[j - 1]
        } else {
            0.0
        };
        for (i, phi) in ar.iter().enumerate() {
            if j > i {
                v += phi * h[j - i - 1];
            }
        }
        h[j] = v;
    }
    h
}
