//! Divergence `K(θ0, θ)(k) = U_θ(k) - U_{θ0}(k)` on a θ grid, for the
//! constant and log-decay families.
//!
//! `cargo run --release --example divergence`

use lrd_fts::estimation::{divergence, Standardization, WeightSymbol};
use lrd_fts::grid::QuadratureConfig;
use lrd_fts::models::{LrdKernel, ModelConfig, ThetaBox};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let quad = QuadratureConfig::default();
    let constant = ModelConfig::from_json_str(
        r#"{
            "basis_size": 3,
            "alpha": { "family": "constant" },
            "short_memory": { "kind": "farima_rational" },
            "kernel": "power_law",
            "theta_domain": { "lower": [0.2], "upper": [0.6] }
        }"#,
    )?
    .build()?
    .model;
    let std = Standardization::new(&constant, &WeightSymbol::uniform(3), LrdKernel::PowerLaw, &quad)?;
    println!("constant family, theta0 = 0.4");
    for row in divergence(&std, &[0.4], &constant.theta_domain().grid(21))? {
        println!("  theta = {:.2}  sup_k K = {:.3e}", row.theta[0], row.sup);
    }

    let log_decay = ModelConfig::from_json_str(
        r#"{
            "basis_size": 4,
            "alpha": { "family": "log_decay" },
            "short_memory": { "kind": "farima_rational" },
            "kernel": "power_law",
            "theta_domain": { "lower": [0.1, 0.0], "upper": [0.5, 0.4] }
        }"#,
    )?
    .build()?
    .model;
    let std = Standardization::new(&log_decay, &WeightSymbol::uniform(4), LrdKernel::PowerLaw, &quad)?;
    let grid = ThetaBox::new(vec![0.1, 0.0], vec![0.5, 0.4])?.grid(5);
    let rows = divergence(&std, &[0.3, 0.2], &grid)?;
    let min = rows
        .iter()
        .flat_map(|r| r.values.iter().copied())
        .fold(f64::INFINITY, f64::min);
    println!("log-decay family, theta0 = (0.3, 0.2): smallest diagonal entry over a 5x5 grid = {min:.3e}");
    Ok(())
}
