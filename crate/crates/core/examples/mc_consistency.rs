//! A small Monte Carlo run through the harness: median estimation error over T.
//!
//! `cargo run --release --example mc_consistency`

use lrd_fts::harness::{execute, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_json_str(
        r#"{
            "experiment": "mc_consistency",
            "model": {
                "basis_size": 3,
                "alpha": { "family": "constant" },
                "short_memory": { "kind": "farima_rational" },
                "kernel": "power_law",
                "theta_domain": { "lower": [0.05], "upper": [0.95] }
            },
            "theta0": [0.4],
            "t_values": [128, 512, 2048],
            "replicates": 20,
            "seed": 11
        }"#,
    )?;
    let dir = std::env::temp_dir().join(format!("lrd-fts-mc-{}", cfg.hash()));
    let report = execute(&cfg, &dir)?;
    for m in &report.metrics {
        println!("{m}");
    }
    for v in &report.verdicts {
        println!("{:?} {}: {}", v.status, v.criterion, v.detail);
    }
    println!("outputs in {}", dir.display());
    Ok(())
}
