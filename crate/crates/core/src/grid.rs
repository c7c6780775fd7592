//! Frequency grids and the singular-integrand quadrature rule.
//!
//! Frequency zero is never a node: spectral densities here behave like
//! `|ω|^{-α}` at the origin, and the Fourier grid starts at `j = 1`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("Fourier grid needs T >= 2, got {0}")]
    TooShort(usize),
    #[error("invalid quadrature setting: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GridKind {
    /// `ω_j = 2πj/T`, `j = 1..T-1`, weights `2π/T`.
    Fourier { t: usize },
    /// Symmetric composite Gauss–Legendre rule on `[-π, -ω_min] ∪ [ω_min, π]`.
    Quadrature { omega_min: f64 },
}

/// Settings for the composite Gauss–Legendre rule used for every `∫ ... dω`.
///
/// Panels start at `omega_min` and grow geometrically by `panel_ratio` until
/// they reach the maximum width, after which `[a, π]` is split into equal
/// panels. For lag-`t` oscillatory integrands the maximum width is further
/// capped at `π/(4t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub omega_min: f64,
    pub panel_ratio: f64,
    pub nodes_per_panel: usize,
    pub max_panel_width: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            omega_min: 1e-6,
            panel_ratio: 2.0,
            nodes_per_panel: 32,
            max_panel_width: 0.25,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.omega_min > 0.0 && self.omega_min < 0.1) {
            return Err(GridError::Config(format!(
                "omega_min must lie in (0, 0.1), got {}",
                self.omega_min
            )));
        }
        if self.panel_ratio.is_nan() || self.panel_ratio <= 1.0 {
            return Err(GridError::Config(format!(
                "panel_ratio must exceed 1, got {}",
                self.panel_ratio
            )));
        }
        if self.nodes_per_panel < 2 {
            return Err(GridError::Config("nodes_per_panel must be at least 2".into()));
        }
        if self.max_panel_width.is_nan() || self.max_panel_width <= 0.0 {
            return Err(GridError::Config("max_panel_width must be positive".into()));
        }
        Ok(())
    }

    /// A strictly finer rule: half the hole, 1.5x the nodes, half the panel width.
    pub fn refined(&self) -> Self {
        Self {
            omega_min: self.omega_min / 2.0,
            panel_ratio: self.panel_ratio,
            nodes_per_panel: self.nodes_per_panel + self.nodes_per_panel / 2,
            max_panel_width: self.max_panel_width / 2.0,
        }
    }

    /// Maximum panel width that resolves `e^{iωt}`.
    pub fn panel_width_for_lag(&self, lag: usize) -> f64 {
        if lag == 0 {
            self.max_panel_width
        } else {
            self.max_panel_width.min(PI / (4.0 * lag as f64))
        }
    }
}

/// One-sided rule on `[omega_min, π]`; all symmetric integrals are folded onto it.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub omega_min: f64,
}

impl HalfRule {
    pub fn new(cfg: &QuadratureConfig, lag: usize) -> Result<Self, GridError> {
        cfg.validate()?;
        let h = cfg.panel_width_for_lag(lag);
        let mut edges = vec![cfg.omega_min];
        let mut a = cfg.omega_min;
        while a * (cfg.panel_ratio - 1.0) < h && a * cfg.panel_ratio < PI {
            a *= cfg.panel_ratio;
            edges.push(a);
        }
        let n_uniform = ((PI - a) / h).ceil().max(1.0) as usize;
        let step = (PI - a) / n_uniform as f64;
        for k in 1..=n_uniform {
            edges.push(if k == n_uniform { PI } else { a + step * k as f64 });
        }

        let n = NonZeroUsize::new(cfg.nodes_per_panel).expect("validated above");
        let gl = GaussLegendre::new(n);
        let ref_nodes: Vec<f64> = gl.nodes().copied().collect();
        let ref_weights: Vec<f64> = gl.weights().copied().collect();

        let panels = edges.len() - 1;
        let mut nodes = Vec::with_capacity(panels * ref_nodes.len());
        let mut weights = Vec::with_capacity(panels * ref_nodes.len());
        for win in edges.windows(2) {
            let (lo, hi) = (win[0], win[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            let mut pairs: Vec<(f64, f64)> = ref_nodes
                .iter()
                .zip(&ref_weights)
                .map(|(x, w)| (mid + half * x, half * w))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            for (x, w) in pairs {
                nodes.push(x);
                weights.push(w);
            }
        }
        Ok(Self {
            nodes,
            weights,
            omega_min: cfg.omega_min,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_{ω_min}^{π} g(ω) dω`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * g(x)).sum()
    }
}

/// Ordered frequency nodes with positive quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: GridKind,
}

impl FrequencyGrid {
    pub fn fourier(t: usize) -> Result<Self, GridError> {
        if t < 2 {
            return Err(GridError::TooShort(t));
        }
        let w = 2.0 * PI / t as f64;
        let nodes = (1..t).map(|j| w * j as f64).collect();
        Ok(Self {
            nodes,
            weights: vec![w; t - 1],
            kind: GridKind::Fourier { t },
        })
    }

    /// Symmetric grid mirrored from the half rule for lag `lag`.
    pub fn quadrature(cfg: &QuadratureConfig, lag: usize) -> Result<Self, GridError> {
        let half = HalfRule::new(cfg, lag)?;
        Ok(Self::from_half(&half))
    }

    pub fn from_half(half: &HalfRule) -> Self {
        let n = half.len();
        let mut nodes = Vec::with_capacity(2 * n);
        let mut weights = Vec::with_capacity(2 * n);
        for i in (0..n).rev() {
            nodes.push(-half.nodes[i]);
            weights.push(half.weights[i]);
        }
        nodes.extend_from_slice(&half.nodes);
        weights.extend_from_slice(&half.weights);
        Self {
            nodes,
            weights,
            kind: GridKind::Quadrature {
                omega_min: half.omega_min,
            },
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Length of the interval the weights are meant to cover.
    pub fn covered_length(&self) -> f64 {
        match self.kind {
            GridKind::Fourier { t } => 2.0 * PI * (t as f64 - 1.0) / t as f64,
            GridKind::Quadrature { omega_min } => 2.0 * (PI - omega_min),
        }
    }
}

/// Maps a frequency onto `(-π, π]` using 2π-periodicity.
pub fn wrap_frequency(omega: f64) -> f64 {
    let mut w = omega % (2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    } else if w <= -PI {
        w += 2.0 * PI;
    }
    w
}
