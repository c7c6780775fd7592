//! JSON model definitions.
//!
//! ```json
//! {
//!   "basis_size": 3,
//!   "alpha": { "family": "constant", "bounds": [0.01, 0.99] },
//!   "short_memory": { "kind": "farima_rational", "ar": [[0.3]], "ma": [] },
//!   "kernel": "exact_diff",
//!   "theta_domain": { "lower": [0.05], "upper": [0.95] },
//!   "quadrature": { "omega_min": 1e-6 }
//! }
//! ```
//!
//! Per-component coefficient lists (`sigma_eigs`, `ar`, `ma`, `lambda`) hold
//! either one entry per component or a single entry shared by all of them.
//! `sigma_eigs` defaults to `l^{-2}` and `lambda` to `l`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AlphaFamily, LongMemorySymbol, LrdKernel, ModelError, ShortMemorySymbol, SpectralModel, Taper, ThetaBox};
use crate::grid::QuadratureConfig;
use crate::operator::BasisSpec;

fn default_bounds() -> [f64; 2] {
    [0.01, 0.99]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaConfig {
    pub family: AlphaFamily,
    #[serde(default = "default_bounds")]
    pub bounds: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShortMemoryConfig {
    FarimaRational {
        #[serde(default)]
        sigma_eigs: Option<Vec<f64>>,
        #[serde(default)]
        ar: Vec<Vec<f64>>,
        #[serde(default)]
        ma: Vec<Vec<f64>>,
    },
    TaperedRational {
        #[serde(default)]
        lambda: Option<Vec<f64>>,
        p: Vec<Vec<f64>>,
        q: Vec<Vec<f64>>,
        taper: Taper,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThetaBoxConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub basis_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub alpha: AlphaConfig,
    pub short_memory: ShortMemoryConfig,
    #[serde(default)]
    pub kernel: LrdKernel,
    pub theta_domain: ThetaBoxConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

/// A model together with the quadrature settings it was declared with.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: SpectralModel,
    pub quadrature: QuadratureConfig,
}

fn broadcast<T: Clone>(
    name: &str,
    values: Vec<T>,
    size: usize,
    default: impl Fn(usize) -> T,
) -> Result<Vec<T>, ModelError> {
    match values.len() {
        0 => Ok((1..=size).map(default).collect()),
        1 => Ok(vec![values[0].clone(); size]),
        n if n == size => Ok(values),
        n => Err(ModelError::Invalid(format!(
            "{name} has {n} entries, expected 1 or {size}"
        ))),
    }
}

impl ModelConfig {
    pub fn from_json_str(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn from_path(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ModelError::Invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| ModelError::Invalid(format!("{}: {e}", path.display())))
    }

    pub fn build(&self) -> Result<LoadedModel, ModelError> {
        let size = self.basis_size;
        let basis = match &self.labels {
            Some(labels) => BasisSpec::with_labels(labels.clone())?,
            None => BasisSpec::new(size)?,
        };
        if basis.size() != size {
            return Err(ModelError::Invalid(format!(
                "{} labels for basis_size {size}",
                basis.size()
            )));
        }
        let alpha = LongMemorySymbol::new(self.alpha.family, self.alpha.bounds[0], self.alpha.bounds[1])?;
        let mshort = match &self.short_memory {
            ShortMemoryConfig::FarimaRational { sigma_eigs, ar, ma } => ShortMemorySymbol::FarimaRational {
                sigma_eigs: broadcast("sigma_eigs", sigma_eigs.clone().unwrap_or_default(), size, |l| {
                    1.0 / (l * l) as f64
                })?,
                ar: broadcast("ar", ar.clone(), size, |_| Vec::new())?,
                ma: broadcast("ma", ma.clone(), size, |_| Vec::new())?,
            },
            ShortMemoryConfig::TaperedRational { lambda, p, q, taper } => ShortMemorySymbol::TaperedRational {
                lambda: broadcast("lambda", lambda.clone().unwrap_or_default(), size, |l| l as f64)?,
                p: p.clone(),
                q: q.clone(),
                taper: *taper,
            },
        };
        let domain = ThetaBox::new(self.theta_domain.lower.clone(), self.theta_domain.upper.clone())?;
        self.quadrature.validate()?;
        Ok(LoadedModel {
            model: SpectralModel::new(basis, alpha, mshort, self.kernel, domain)?,
            quadrature: self.quadrature,
        })
    }
}
