//! Numerical assumption checks on a tapered rational model and a rejected one.
//!
//! `cargo run --release --example validate_model`

use lrd_fts::models::{validate_assumptions, ModelConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ok = ModelConfig::from_json_str(
        r#"{
            "basis_size": 4,
            "alpha": { "family": "exponential" },
            "short_memory": {
                "kind": "tapered_rational",
                "p": [[1.0, 0.2]],
                "q": [[1.0], [0.1]],
                "taper": "cosine_squared"
            },
            "theta_domain": { "lower": [0.1, 0.0], "upper": [0.5, 0.4] }
        }"#,
    )?
    .build()?;
    let report = validate_assumptions(&ok.model, &ok.quadrature)?;
    println!("{}", serde_json::to_string_pretty(&report)?);

    let explosive = ModelConfig::from_json_str(
        r#"{
            "basis_size": 1,
            "alpha": { "family": "constant" },
            "short_memory": { "kind": "farima_rational", "ar": [[1.2]] },
            "theta_domain": { "lower": [0.1], "upper": [0.9] }
        }"#,
    )?
    .build()?;
    match validate_assumptions(&explosive.model, &explosive.quadrature) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
