//! Integrated bias of the expected periodogram, `sqrt(Σ_l (∫|F - F^{(T)}|)²)`,
//! for five-component fractional noise with `λ_l = l^{-2}`.
//!
//! `cargo run --release --example bias_decay`

use lrd_fts::grid::QuadratureConfig;
use lrd_fts::models::{LrdKernel, SpectralModel};
use lrd_fts::spectral::integrated_bias;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let eigs = (1..=5).map(|l| 1.0 / (l * l) as f64).collect();
    let model = SpectralModel::fractional_noise(eigs, LrdKernel::ExactDiff, (0.05, 0.95))?;
    let quad = QuadratureConfig::default();
    let mut first = None;
    for t in [64, 128, 256, 512, 1024] {
        let b = integrated_bias(&model, &[0.4], t, &quad)?;
        let f = *first.get_or_insert(b);
        println!("T = {t:>5}  bias = {b:.6e}  ratio to T=64 = {:.4}", b / f);
    }
    Ok(())
}
