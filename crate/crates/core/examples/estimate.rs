//! Estimate θ from one simulated path: coarse grid then simplex refinement.
//!
//! `cargo run --release --example estimate`

use lrd_fts::estimation::{estimate_theta, OptimizerConfig, WeightSymbol};
use lrd_fts::models::ModelConfig;
use lrd_fts::simulation::{simulate_gaussian, SimConfig};
use lrd_fts::spectral::PeriodogramSet;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = ModelConfig::from_json_str(
        r#"{
            "basis_size": 3,
            "alpha": { "family": "constant" },
            "short_memory": { "kind": "farima_rational" },
            "kernel": "power_law",
            "theta_domain": { "lower": [0.05], "upper": [0.95] }
        }"#,
    )?
    .build()?
    .model;
    let theta0 = [0.4];
    for (t, seed) in [(512, 3), (2048, 3), (8192, 3)] {
        let path = simulate_gaussian(&model, &theta0, t, &SimConfig::with_seed(seed))?;
        let pset = PeriodogramSet::from_path(&path)?;
        let est = estimate_theta(&pset, &model, &WeightSymbol::uniform(3), &OptimizerConfig::default())?;
        println!(
            "T = {t:>5}: theta_hat = {:.4}, objective = {:.5}, contrast = {:.4?}, {} trace entries",
            est.theta_hat[0],
            est.objective,
            est.contrast,
            est.trace.len()
        );
    }
    Ok(())
}
