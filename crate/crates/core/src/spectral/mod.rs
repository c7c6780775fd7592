//! Frequency-domain statistics: functional DFT, periodogram operator, Fejér
//! kernel and the expected periodogram.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::grid::{wrap_frequency, FrequencyGrid, GridError, HalfRule, QuadratureConfig};
use crate::models::{autocovariances, ModelError, SpectralModel};
use crate::operator::{BasisSpec, DiagonalOperator, HermitianFrame, OperatorError};
use crate::simulation::SamplePath;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("expected periodogram is negative ({value:e}) at omega = {omega}, l = {l}")]
    Negative { omega: f64, l: usize, value: f64 },
    #[error("frequency zero is excluded")]
    ZeroFrequency,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// fDFT on the Fourier grid; row `j - 1` holds `X̃_{ω_j}`, `j = 1..T-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdftFrame {
    basis: Arc<BasisSpec>,
    grid: FrequencyGrid,
    values: DMatrix<Complex64>,
}

impl FdftFrame {
    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<Complex64> {
        &self.values
    }

    pub fn sample_len(&self) -> usize {
        self.values.nrows() + 1
    }

    /// `X̃_{ω_j}` for `j = 1..T-1`.
    pub fn at(&self, j: usize) -> Vec<Complex64> {
        self.values.row(j - 1).iter().copied().collect()
    }
}

/// `(2πT)^{-1/2} Σ_{t=1}^{T} X_t e^{-iω_j t}` for every `j = 0..T-1`, as a `T × L` matrix.
///
/// Row 0 (`ω = 0`) is included; [`fdft`] drops it.
pub fn fdft_all_nodes(path: &SamplePath) -> DMatrix<Complex64> {
    let t = path.len();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(t);
    let scale = 1.0 / (2.0 * PI * t as f64).sqrt();
    let phases: Vec<Complex64> = (0..t)
        .map(|j| Complex64::from_polar(scale, -2.0 * PI * j as f64 / t as f64))
        .collect();
    let mut out = DMatrix::<Complex64>::zeros(t, path.size());
    for l in 1..=path.size() {
        let mut buf: Vec<Complex64> = path.component(l).iter().map(|v| Complex64::new(*v, 0.0)).collect();
        fft.process(&mut buf);
        // the sum starts at t = 1, hence the extra e^{-iω_j}
        for (j, v) in buf.into_iter().enumerate() {
            out[(j, l - 1)] = v * phases[j];
        }
    }
    out
}

pub fn fdft(path: &SamplePath) -> Result<FdftFrame, SpectralError> {
    let t = path.len();
    let all = fdft_all_nodes(path);
    Ok(FdftFrame {
        basis: path.basis().clone(),
        grid: FrequencyGrid::fourier(t)?,
        values: all.rows(1, t - 1).into_owned(),
    })
}

/// Direct `O(T)` evaluation of the fDFT at an arbitrary frequency.
pub fn fdft_at(path: &SamplePath, omega: f64) -> Vec<Complex64> {
    let t = path.len();
    let scale = 1.0 / (2.0 * PI * t as f64).sqrt();
    (1..=path.size())
        .map(|l| {
            path.component(l)
                .iter()
                .enumerate()
                .map(|(s, x)| Complex64::from_polar(*x, -omega * (s + 1) as f64))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Rank-one periodogram frames `p_{ω_j} = X̃_{ω_j} ⊗ conj(X̃_{ω_j})` on the Fourier grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodogramSet {
    basis: Arc<BasisSpec>,
    grid: FrequencyGrid,
    frames: Vec<HermitianFrame>,
}

pub fn periodogram(f: &FdftFrame) -> Result<PeriodogramSet, SpectralError> {
    let frames = (1..f.sample_len())
        .into_par_iter()
        .map(|j| HermitianFrame::rank_one(f.basis.clone(), &f.at(j)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PeriodogramSet {
        basis: f.basis.clone(),
        grid: f.grid.clone(),
        frames,
    })
}

impl PeriodogramSet {
    pub fn from_path(path: &SamplePath) -> Result<Self, SpectralError> {
        periodogram(&fdft(path)?)
    }

    pub fn basis(&self) -> &Arc<BasisSpec> {
        &self.basis
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn frames(&self) -> &[HermitianFrame] {
        &self.frames
    }

    pub fn sample_len(&self) -> usize {
        self.frames.len() + 1
    }

    /// Diagonal entries `p_{ω_j}(l, l)` as a `(T-1) × L` matrix.
    pub fn diagonals(&self) -> DMatrix<f64> {
        let l = self.basis.size();
        DMatrix::from_fn(self.frames.len(), l, |j, k| self.frames[j].entries()[(k, k)].re)
    }

    /// CSV with header `j,omega,l,value`.
    pub fn write_diagonals_csv<W: Write>(&self, mut out: W) -> Result<(), SpectralError> {
        writeln!(out, "j,omega,l,value")?;
        for (j, (frame, w)) in self.frames.iter().zip(self.grid.nodes()).enumerate() {
            for (l, v) in frame.diagonal().iter().enumerate() {
                writeln!(out, "{},{:e},{},{:e}", j + 1, w, l + 1, v)?;
            }
        }
        Ok(())
    }
}

/// `F_T(ω) = sin²(Tω/2) / (T sin²(ω/2))`, with `F_T(0) = T`.
pub fn fejer(omega: f64, t: usize) -> f64 {
    let tf = t as f64;
    let s = (0.5 * omega).sin();
    if s.abs() < 1e-8 {
        // removable singularity; the Taylor remainder is O(ω²T³)
        let w = wrap_frequency(omega);
        return tf * (1.0 - (tf * tf - 1.0) * w * w / 12.0);
    }
    let num = (0.5 * tf * omega).sin();
    num * num / (tf * s * s)
}

/// Covariances `r_0..r_{T-1}` of every component, enough to evaluate the
/// expected periodogram at any frequency.
#[derive(Debug, Clone)]
pub struct ExpectedPeriodogram {
    basis: Arc<BasisSpec>,
    t: usize,
    covariances: Vec<Vec<f64>>,
}

impl ExpectedPeriodogram {
    pub fn new(model: &SpectralModel, theta: &[f64], t: usize, quad: &QuadratureConfig) -> Result<Self, SpectralError> {
        if t < 2 {
            return Err(GridError::TooShort(t).into());
        }
        let covariances = (1..=model.size())
            .into_par_iter()
            .map(|l| autocovariances(model, l, theta, t - 1, quad).map(|(r, _)| r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            basis: model.basis().clone(),
            t,
            covariances,
        })
    }

    pub fn sample_len(&self) -> usize {
        self.t
    }

    /// `(1/2π) Σ_{|u|<T} e^{-iωu}(1 - |u|/T) r_u(l)` for component `l` (1-based).
    pub fn component(&self, omega: f64, l: usize) -> f64 {
        let r = &self.covariances[l - 1];
        let tf = self.t as f64;
        let (s1, c1) = omega.sin_cos();
        let (mut c, mut s) = (c1, s1);
        let mut acc = r[0];
        for (u, ru) in r.iter().enumerate().skip(1) {
            if u % 256 == 0 {
                (s, c) = (omega * u as f64).sin_cos();
            }
            acc += 2.0 * (1.0 - u as f64 / tf) * ru * c;
            (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
        }
        acc / (2.0 * PI)
    }

    pub fn eval(&self, omega: f64) -> Result<DiagonalOperator, SpectralError> {
        if omega == 0.0 {
            return Err(SpectralError::ZeroFrequency);
        }
        let mut values = Vec::with_capacity(self.covariances.len());
        for l in 1..=self.covariances.len() {
            let v = self.component(omega, l);
            if v < -1e-10 {
                return Err(SpectralError::Negative { omega, l, value: v });
            }
            values.push(v.max(0.0));
        }
        Ok(DiagonalOperator::new(self.basis.clone(), values)?)
    }
}

/// `F^{(T)}_ω` as a diagonal operator.
pub fn expected_periodogram(
    model: &SpectralModel,
    theta: &[f64],
    t: usize,
    omega: f64,
    quad: &QuadratureConfig,
) -> Result<DiagonalOperator, SpectralError> {
    ExpectedPeriodogram::new(model, theta, t, quad)?.eval(omega)
}

/// Per-component integrals over `[-π, -ω_min] ∪ [ω_min, π]` of `|F - F^{(T)}|`
/// and of `F - F^{(T)}`, on a grid that resolves the Fejér ripples of width `2π/T`.
pub fn bias_integrals(
    model: &SpectralModel,
    theta0: &[f64],
    t: usize,
    quad: &QuadratureConfig,
) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    let expected = ExpectedPeriodogram::new(model, theta0, t, quad)?;
    let rule = HalfRule::new(quad, t)?;
    let per_l = (1..=model.size())
        .into_par_iter()
        .map(|l| {
            let (mut abs, mut signed) = (0.0, 0.0);
            for (&w, &wt) in rule.nodes.iter().zip(&rule.weights) {
                let f = model.spectral_density_symbol(w, l, theta0)?;
                let d = f - expected.component(w, l);
                abs += 2.0 * wt * d.abs();
                signed += 2.0 * wt * d;
            }
            Ok((abs, signed))
        })
        .collect::<Result<Vec<_>, SpectralError>>()?;
    Ok(per_l.into_iter().unzip())
}

/// `sqrt(Σ_l (∫ |F_ω(l) - F^{(T)}_ω(l)| dω)²)`.
///
/// The signed integral `∫ (F - F^{(T)}) dω` vanishes identically (both sides
/// integrate to `r_0`), so the bias is measured in the per-component `L¹`
/// distance; see [`integrated_signed_difference`] for the signed version.
pub fn integrated_bias(
    model: &SpectralModel,
    theta0: &[f64],
    t: usize,
    quad: &QuadratureConfig,
) -> Result<f64, SpectralError> {
    let (abs, _) = bias_integrals(model, theta0, t, quad)?;
    Ok(abs.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Hilbert–Schmidt norm of `∫ (F_ω - F^{(T)}_ω) dω` over the grid with the hole removed.
pub fn integrated_signed_difference(
    model: &SpectralModel,
    theta0: &[f64],
    t: usize,
    quad: &QuadratureConfig,
) -> Result<f64, SpectralError> {
    let (_, signed) = bias_integrals(model, theta0, t, quad)?;
    Ok(signed.iter().map(|v| v * v).sum::<f64>().sqrt())
}
