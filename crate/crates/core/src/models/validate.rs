//! Numerical checks of the model assumptions.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{ModelError, ShortMemorySymbol, SpectralModel};
use crate::grid::{HalfRule, QuadratureConfig};

const SLOW_VARIATION_WARN: f64 = 0.05;
const THETA_POINTS: usize = 5;

#[derive(Debug, Clone, Serialize)]
pub struct SummabilityEntry {
    pub theta: Vec<f64>,
    pub integral: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// `∫ max_l f(ω, l, θ) dω` over a grid of θ.
    pub summability: Vec<SummabilityEntry>,
    /// Empirical `(m, M_up)` of the short-memory symbol on the quadrature grid.
    pub m_lower: f64,
    pub m_upper: f64,
    /// Largest modulus of an inverse AR or MA root (must be < 1).
    pub max_inverse_root: f64,
    /// `max_l |M(ω/ξ, l)/M(ω, l) - 1|` over the spot grid.
    pub slow_variation: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub warnings: Vec<String>,
}

fn fail(assumption: &'static str, detail: String) -> ModelError {
    ModelError::Assumption { assumption, detail }
}

/// Inverse roots of `1 + Σ_k c_k z^k` (companion eigenvalues).
fn inverse_roots(c: &[f64]) -> Vec<num_complex::Complex64> {
    let n = c.len();
    if n == 0 {
        return Vec::new();
    }
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for (k, ck) in c.iter().enumerate() {
        comp[(0, k)] = -ck;
    }
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    comp.complex_eigenvalues().iter().copied().collect()
}

fn trim_trailing(v: &[f64]) -> &[f64] {
    let end = v.iter().rposition(|c| *c != 0.0).map_or(0, |i| i + 1);
    &v[..end]
}

/// Checks the assumptions numerically; any hard failure is an error naming it.
pub fn validate_assumptions(model: &SpectralModel, cfg: &QuadratureConfig) -> Result<AssumptionReport, ModelError> {
    let size = model.size();
    let family = model.alpha().family();
    let mut warnings = Vec::new();

    // identifiability: the map θ ↦ (α(1, θ), ..., α(L, θ)) is affine; it must be injective
    let p = family.dim();
    let jac = DMatrix::from_fn(size, p, |i, j| family.gradient(i + 1)[j]);
    let rank = jac.rank(1e-10);
    if rank < p {
        return Err(fail(
            "identifiability",
            format!("{family:?} family needs at least {p} distinguishable components, basis has {size}"),
        ));
    }

    // α bounds over a θ grid
    let grid = model.theta_domain().grid(THETA_POINTS);
    let (mut alpha_min, mut alpha_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for theta in &grid {
        for l in 1..=size {
            let a = model
                .alpha_eval(l, theta)
                .map_err(|e| fail("alpha range", e.to_string()))?;
            alpha_min = alpha_min.min(a);
            alpha_max = alpha_max.max(a);
        }
    }

    // roots of Φ and Ψ
    let mut max_inverse_root: f64 = 0.0;
    if let ShortMemorySymbol::FarimaRational { ar, ma, .. } = model.short_memory() {
        for l in 0..size {
            let phi: Vec<f64> = trim_trailing(&ar[l]).iter().map(|c| -c).collect();
            let ar_roots = inverse_roots(&phi);
            let ma_trim = trim_trailing(&ma[l]);
            let ma_roots = match ma_trim.iter().position(|c| *c != 0.0) {
                None if ma_trim.is_empty() && ma[l].is_empty() => Vec::new(),
                None => {
                    return Err(fail(
                        "root location",
                        format!("MA polynomial of component {} is zero", l + 1),
                    ))
                }
                Some(s) => {
                    let lead = ma_trim[s];
                    let c: Vec<f64> = ma_trim[s + 1..].iter().map(|v| v / lead).collect();
                    inverse_roots(&c)
                }
            };
            for r in ar_roots.iter().chain(&ma_roots) {
                max_inverse_root = max_inverse_root.max(r.norm());
            }
            if let Some(r) = ar_roots.iter().chain(&ma_roots).find(|r| r.norm() >= 1.0) {
                return Err(fail(
                    "root location",
                    format!(
                        "component {} has a root at |z| = {:.6} (inside or on the unit circle)",
                        l + 1,
                        1.0 / r.norm()
                    ),
                ));
            }
            for a in &ar_roots {
                if ma_roots.iter().any(|m| (a - m).norm() < 1e-8) {
                    return Err(fail(
                        "root location",
                        format!("component {} has a common AR/MA root", l + 1),
                    ));
                }
            }
        }
    }

    // bounds of M
    let rule = HalfRule::new(cfg, 0)?;
    let (mut m_lower, mut m_upper) = (f64::INFINITY, 0.0f64);
    for l in 1..=size {
        for &w in &rule.nodes {
            let m = model.m_symbol_eval(w, l)?;
            let m_neg = model.m_symbol_eval(-w, l)?;
            if !(m > 0.0 && m.is_finite()) {
                return Err(fail(
                    "short-memory positivity",
                    format!("M({w}, {l}) = {m:e} is not positive"),
                ));
            }
            if (m - m_neg).abs() > 1e-12 * m {
                return Err(fail(
                    "short-memory positivity",
                    format!("M(., {l}) is not even at omega = {w}"),
                ));
            }
            m_lower = m_lower.min(m);
            m_upper = m_upper.max(m);
        }
    }

    // summability proxy
    let mut summability = Vec::with_capacity(grid.len());
    for theta in &grid {
        let alphas = model.alpha_values(theta)?;
        let mut integral = 0.0;
        for (&w, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let mut best = 0.0f64;
            for (i, a) in alphas.iter().enumerate() {
                best = best.max(model.density_given_alpha(w, i + 1, *a, model.kernel())?);
            }
            integral += 2.0 * wt * best;
        }
        let mut hole = 0.0f64;
        for (i, a) in alphas.iter().enumerate() {
            let f = model.density_given_alpha(rule.omega_min, i + 1, *a, model.kernel())?;
            hole = hole.max(2.0 * f * rule.omega_min / (1.0 - a));
        }
        integral += hole;
        if !integral.is_finite() {
            return Err(fail(
                "summability",
                format!("integral of sup_l f is not finite at theta = {theta:?}"),
            ));
        }
        summability.push(SummabilityEntry {
            theta: theta.clone(),
            integral,
        });
    }

    // slow variation of M at zero
    let mut slow_variation: f64 = 0.0;
    for l in 1..=size {
        for w in [1e-2, 1e-3] {
            let base = model.m_symbol_eval(w, l)?;
            for xi in [2.0, 5.0] {
                slow_variation = slow_variation.max((model.m_symbol_eval(w / xi, l)? / base - 1.0).abs());
            }
        }
    }
    if slow_variation > SLOW_VARIATION_WARN {
        warnings.push(format!(
            "slow variation: deviation {slow_variation:.4} exceeds {SLOW_VARIATION_WARN}"
        ));
    }

    Ok(AssumptionReport {
        summability,
        m_lower,
        m_upper,
        max_inverse_root,
        slow_variation,
        alpha_min,
        alpha_max,
        warnings,
    })
}
