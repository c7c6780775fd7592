//! Autocovariances `r_t(l, θ) = ∫ e^{iωt} f(ω, l, θ) dω`.
//!
//! The quadrature routes skip the hole `(-ω_min, ω_min)` and add its mass
//! analytically, using `f(ω) ≈ f(ω_min)(ω/ω_min)^{-α}` there.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use super::{arma_impulse_response, LrdKernel, ModelError, ShortMemorySymbol, SpectralModel};
use crate::grid::{FrequencyGrid, GridKind, HalfRule, QuadratureConfig};

/// How a covariance sequence was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceRoute {
    /// Fractional-noise recursion convolved with the ARMA autocovariance.
    FractionalClosedForm,
    /// Power-law kernel with a frequency-constant short-memory symbol.
    PowerLawClosedForm,
    /// Batch Gauss–Legendre quadrature.
    Quadrature,
}

fn hole_mass(model: &SpectralModel, l: usize, alpha: f64, omega_min: f64) -> Result<f64, ModelError> {
    let f = model.density_given_alpha(omega_min, l, alpha, model.kernel())?;
    Ok(2.0 * f * omega_min / (1.0 - alpha))
}

/// `r_t(l, θ)` on an explicit symmetric quadrature grid.
///
/// Both halves of the grid are evaluated, so evenness of `f` is not assumed
/// and the imaginary residual is a genuine check.
pub fn covariance_on_rule(
    model: &SpectralModel,
    t: i64,
    l: usize,
    theta: &[f64],
    grid: &FrequencyGrid,
) -> Result<f64, ModelError> {
    let omega_min = match grid.kind() {
        GridKind::Quadrature { omega_min } => omega_min,
        GridKind::Fourier { .. } => {
            return Err(ModelError::Invalid(
                "covariance quadrature needs a quadrature grid".into(),
            ));
        }
    };
    let alpha = model.alpha_eval(l, theta)?;
    let (mut re, mut im) = (0.0, 0.0);
    for (&w, &wt) in grid.nodes().iter().zip(grid.weights()) {
        let f = model.density_given_alpha(w, l, alpha, model.kernel())?;
        let (s, c) = (w * t as f64).sin_cos();
        re += wt * f * c;
        im += wt * f * s;
    }
    re += hole_mass(model, l, alpha, omega_min)?;
    if !(re.is_finite() && im.is_finite()) {
        return Err(ModelError::QuadratureFailure { lag: t });
    }
    if im.abs() >= 1e-8 * re.abs() + 1e-10 {
        return Err(ModelError::ImaginaryResidual {
            lag: t,
            real: re,
            imag: im,
        });
    }
    Ok(re)
}

/// `r_t(l, θ)` by quadrature on the grid resolved for lag `t`.
pub fn covariance_symbol(
    model: &SpectralModel,
    t: i64,
    l: usize,
    theta: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64, ModelError> {
    let grid = FrequencyGrid::quadrature(cfg, t.unsigned_abs() as usize)?;
    covariance_on_rule(model, t, l, theta, &grid)
}

/// `r_0..=r_{max_lag}` by one batch quadrature on the grid resolved for `max_lag`.
pub fn covariance_sequence(
    model: &SpectralModel,
    l: usize,
    theta: &[f64],
    max_lag: usize,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>, ModelError> {
    let alpha = model.alpha_eval(l, theta)?;
    let rule = HalfRule::new(cfg, max_lag)?;
    let mut wf = Vec::with_capacity(rule.len());
    for (&w, &wt) in rule.nodes.iter().zip(&rule.weights) {
        wf.push((w, 2.0 * wt * model.density_given_alpha(w, l, alpha, model.kernel())?));
    }
    let n = max_lag + 1;
    let chunk = 4096.max(wf.len() / 64 + 1);
    let partials: Vec<Vec<f64>> = wf
        .par_chunks(chunk)
        .map(|part| {
            let mut acc = vec![0.0; n];
            for &(w, a) in part {
                let (s1, c1) = w.sin_cos();
                let (mut c, mut s) = (1.0, 0.0);
                for (u, slot) in acc.iter_mut().enumerate() {
                    if u % 256 == 0 {
                        (s, c) = (w * u as f64).sin_cos();
                    }
                    *slot += a * c;
                    (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
                }
            }
            acc
        })
        .collect();
    let mut r = vec![0.0; n];
    for p in &partials {
        for (ri, pi) in r.iter_mut().zip(p) {
            *ri += pi;
        }
    }
    let hole = hole_mass(model, l, alpha, rule.omega_min)?;
    for v in r.iter_mut() {
        *v += hole;
    }
    if let Some(lag) = r.iter().position(|v| !v.is_finite()) {
        return Err(ModelError::QuadratureFailure { lag: lag as i64 });
    }
    Ok(r)
}

/// `r_0..=r_{max_lag}` through the cheapest exact route available.
pub fn autocovariances(
    model: &SpectralModel,
    l: usize,
    theta: &[f64],
    max_lag: usize,
    cfg: &QuadratureConfig,
) -> Result<(Vec<f64>, CovarianceRoute), ModelError> {
    let alpha = model.alpha_eval(l, theta)?;
    match (model.kernel(), model.short_memory()) {
        (LrdKernel::ExactDiff, ShortMemorySymbol::FarimaRational { sigma_eigs, ar, ma }) => {
            let idx = l - 1;
            let r = farima_autocovariances(sigma_eigs[idx], 0.5 * alpha, &ar[idx], &ma[idx], max_lag)?;
            Ok((r, CovarianceRoute::FractionalClosedForm))
        }
        (LrdKernel::PowerLaw, sm) if sm.is_frequency_constant() => {
            let m0 = model.m_symbol_eval(0.0, l)?;
            Ok((
                power_law_constant_covariances(m0, alpha, max_lag),
                CovarianceRoute::PowerLawClosedForm,
            ))
        }
        _ => Ok((
            covariance_sequence(model, l, theta, max_lag, cfg)?,
            CovarianceRoute::Quadrature,
        )),
    }
}

/// Autocovariance of `(1 - B)^{-d}` noise with innovation variance `sigma2`.
pub fn fractional_noise_autocovariances(sigma2: f64, d: f64, max_lag: usize) -> Vec<f64> {
    let mut g = Vec::with_capacity(max_lag + 1);
    g.push(sigma2 * (ln_gamma(1.0 - 2.0 * d) - 2.0 * ln_gamma(1.0 - d)).exp());
    for k in 1..=max_lag {
        let prev = g[k - 1];
        g.push(prev * (k as f64 - 1.0 + d) / (k as f64 - d));
    }
    g
}

const ARMA_TAIL_TOL: f64 = 1e-17;
const ARMA_MAX_LEN: usize = 1 << 20;

fn farima_autocovariances(sigma2: f64, d: f64, ar: &[f64], ma: &[f64], max_lag: usize) -> Result<Vec<f64>, ModelError> {
    // impulse response of Ψ/Φ, grown until the tail is negligible
    let mut len = 64 + ar.len() + ma.len();
    let h = loop {
        let h = arma_impulse_response(ar, ma, len);
        let peak = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tail = h[len.saturating_sub(ar.len().max(1) + 8)..]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        if tail <= ARMA_TAIL_TOL * peak.max(f64::MIN_POSITIVE) || ar.is_empty() {
            break h;
        }
        if len >= ARMA_MAX_LEN {
            return Err(ModelError::Invalid(
                "ARMA impulse response does not decay; check AR roots".into(),
            ));
        }
        len *= 2;
    };
    let last = h.iter().rposition(|v| *v != 0.0).unwrap_or(0);
    let h = &h[..=last];
    let k = h.len();
    let c: Vec<f64> = (0..k).map(|m| (0..k - m).map(|i| h[i] * h[i + m]).sum()).collect();
    let g = fractional_noise_autocovariances(sigma2, d, max_lag + k);
    Ok((0..=max_lag)
        .map(|lag| {
            let mut acc = c[0] * g[lag];
            for (m, cm) in c.iter().enumerate().skip(1) {
                acc += cm * (g[lag + m] + g[(lag as i64 - m as i64).unsigned_abs() as usize]);
            }
            acc
        })
        .collect())
}

/// `∫_{-π}^{π} e^{iωt} m0 |ω|^{-α} dω` for `t = 0..=max_lag`.
pub fn power_law_constant_covariances(m0: f64, alpha: f64, max_lag: usize) -> Vec<f64> {
    let mut r = Vec::with_capacity(max_lag + 1);
    r.push(2.0 * m0 * PI.powf(1.0 - alpha) / (1.0 - alpha));
    for t in 1..=max_lag {
        let t = t as f64;
        r.push(2.0 * m0 * t.powf(alpha - 1.0) * cosine_power_integral(alpha, PI * t));
    }
    r
}

/// `∫_0^X x^{-a} cos x dx` for `0 < a < 1`.
fn cosine_power_integral(a: f64, x: f64) -> f64 {
    if x >= 40.0 {
        // complete integral minus the asymptotic tail ∫_X^∞ x^{-a} e^{ix} dx
        let complete = gamma(1.0 - a) * (0.5 * PI * a).sin();
        let mut sum = num_complex::Complex64::new(0.0, 0.0);
        let mut term = num_complex::Complex64::new(1.0, 0.0);
        let step = num_complex::Complex64::new(0.0, -1.0 / x);
        let mut prev_mag = f64::INFINITY;
        for k in 0..60 {
            let mag = term.norm();
            if mag > prev_mag || mag < 1e-18 {
                break;
            }
            sum += term;
            prev_mag = mag;
            term *= step * (a + k as f64);
        }
        let tail = num_complex::Complex64::new(0.0, 1.0) * num_complex::Complex64::from_polar(x.powf(-a), x) * sum;
        complete - tail.re
    } else {
        // s = x^{1-a} removes the endpoint singularity
        let p = 1.0 / (1.0 - a);
        let upper = x.powf(1.0 - a);
        let panels = 400;
        let h = upper / panels as f64;
        let gl = gl_reference();
        let mut acc = 0.0;
        for k in 0..panels {
            let mid = h * (k as f64 + 0.5);
            for (xi, wi) in &gl {
                let s = mid + 0.5 * h * xi;
                acc += 0.5 * h * wi * s.powf(p).cos();
            }
        }
        acc * p
    }
}

fn gl_reference() -> Vec<(f64, f64)> {
    let gl = gauss_quad::legendre::GaussLegendre::new(std::num::NonZeroUsize::new(32).unwrap());
    gl.nodes().copied().zip(gl.weights().copied()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{AlphaFamily, LongMemorySymbol, ThetaBox};
    use crate::operator::BasisSpec;

    fn farima(ar: Vec<f64>, ma: Vec<f64>, kernel: LrdKernel, lo: f64) -> SpectralModel {
        SpectralModel::new(
            BasisSpec::new(1).unwrap(),
            LongMemorySymbol::new(AlphaFamily::Constant, lo, 0.99).unwrap(),
            ShortMemorySymbol::FarimaRational {
                sigma_eigs: vec![1.0],
                ar: vec![ar],
                ma: vec![ma],
            },
            kernel,
            ThetaBox::new(vec![lo], vec![0.95]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn near_white_noise_mass_and_orthogonality() {
        // α cannot be zero, so use the smallest admissible value and compare to white noise
        let m = farima(vec![], vec![], LrdKernel::PowerLaw, 1e-9);
        let cfg = QuadratureConfig::default();
        let r0 = covariance_symbol(&m, 0, 1, &[1e-9], &cfg).unwrap();
        assert!((r0 - 1.0).abs() < 1e-7);
        let r5 = covariance_symbol(&m, 5, 1, &[1e-9], &cfg).unwrap();
        assert!(r5.abs() < 1e-8);
    }

    #[test]
    fn power_law_half_matches_asymptote() {
        let m = farima(vec![], vec![], LrdKernel::PowerLaw, 0.01);
        let r = covariance_symbol(&m, 100, 1, &[0.5], &QuadratureConfig::default()).unwrap();
        assert!((r / 0.03989 - 1.0).abs() < 0.05);
    }

    #[test]
    fn covariance_is_even_in_lag() {
        let m = farima(vec![0.3], vec![], LrdKernel::ExactDiff, 0.01);
        let cfg = QuadratureConfig::default();
        for t in [1, 7, 40] {
            let a = covariance_symbol(&m, t, 1, &[0.4], &cfg).unwrap();
            let b = covariance_symbol(&m, -t, 1, &[0.4], &cfg).unwrap();
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn fractional_closed_form_matches_quadrature() {
        let cfg = QuadratureConfig::default();
        for (ar, ma) in [(vec![], vec![]), (vec![0.5], vec![]), (vec![0.3], vec![0.0, 0.6])] {
            let m = farima(ar, ma, LrdKernel::ExactDiff, 0.01);
            let (fast, route) = autocovariances(&m, 1, &[0.4], 30, &cfg).unwrap();
            assert_eq!(route, CovarianceRoute::FractionalClosedForm);
            for t in [0usize, 1, 2, 10, 30] {
                let q = covariance_symbol(&m, t as i64, 1, &[0.4], &cfg).unwrap();
                assert!(
                    (fast[t] - q).abs() < 1e-8 * q.abs().max(1e-3),
                    "t = {t}: {} vs {q}",
                    fast[t]
                );
            }
        }
    }

    #[test]
    fn power_law_closed_form_matches_quadrature() {
        let cfg = QuadratureConfig::default();
        for alpha in [0.3, 0.7] {
            let m = farima(vec![], vec![], LrdKernel::PowerLaw, 0.01);
            let (fast, route) = autocovariances(&m, 1, &[alpha], 200, &cfg).unwrap();
            assert_eq!(route, CovarianceRoute::PowerLawClosedForm);
            for t in [0usize, 1, 5, 12, 13, 50, 200] {
                let q = covariance_symbol(&m, t as i64, 1, &[alpha], &cfg).unwrap();
                assert!(
                    (fast[t] - q).abs() < 1e-7 * q.abs(),
                    "α = {alpha}, t = {t}: {} vs {q}",
                    fast[t]
                );
            }
        }
    }

    #[test]
    fn batch_sequence_matches_single_lags() {
        let m = farima(vec![0.4], vec![], LrdKernel::PowerLaw, 0.01);
        let cfg = QuadratureConfig::default();
        let seq = covariance_sequence(&m, 1, &[0.3], 64, &cfg).unwrap();
        for t in [0usize, 3, 17, 64] {
            let q = covariance_symbol(&m, t as i64, 1, &[0.3], &cfg).unwrap();
            assert!((seq[t] - q).abs() < 1e-9 * q.abs().max(1e-2), "t = {t}");
        }
    }
}
