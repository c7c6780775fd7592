//! Versioned thresholds shipped with the crate (`fixtures/thresholds.json`).

use std::sync::OnceLock;

use serde::Deserialize;

const RAW: &str = include_str!("../../fixtures/thresholds.json");

#[derive(Debug, Clone, Deserialize)]
pub struct Thresholds {
    pub version: u32,
    pub bias_decay: BiasDecay,
    pub cov_tail: CovTail,
    pub mc_consistency: McConsistency,
    pub estimation: Estimation,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BiasDecay {
    pub max_ratio_last_over_first: f64,
    pub negligible_bias: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CovTail {
    pub tolerance: f64,
    pub relative_floor: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct McConsistency {
    pub min_replicates: usize,
    pub min_t_values: usize,
    pub max_failure_fraction: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Estimation {
    pub single_run_tolerance: f64,
    pub fine_grid_max_relative_drop: f64,
}

pub fn thresholds() -> &'static Thresholds {
    static CELL: OnceLock<Thresholds> = OnceLock::new();
    CELL.get_or_init(|| serde_json::from_str(RAW).expect("fixtures/thresholds.json is valid"))
}

/// The raw fixture document, provenance included.
pub fn raw() -> &'static str {
    RAW
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_parses() {
        let t = thresholds();
        assert_eq!(t.version, 1);
        assert!(t.bias_decay.max_ratio_last_over_first < 0.5);
        let doc: serde_json::Value = serde_json::from_str(raw()).unwrap();
        assert!(doc["bias_decay"]["provenance"]["values"].is_object());
    }
}
