//! fDFT and periodogram operators of a simulated path, the integrated
//! periodogram identity, and the expected periodogram at a few frequencies.
//!
//! `cargo run --release --example periodogram`

use std::f64::consts::PI;

use lrd_fts::models::{LrdKernel, SpectralModel};
use lrd_fts::simulation::{lag_zero_frame, simulate_gaussian, SimConfig};
use lrd_fts::spectral::{fdft_all_nodes, ExpectedPeriodogram, PeriodogramSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let model = SpectralModel::fractional_noise(vec![1.0, 0.25, 1.0 / 9.0], LrdKernel::ExactDiff, (0.05, 0.95))?;
    let theta = [0.4];
    let t = 256;
    let path = simulate_gaussian(&model, &theta, t, &SimConfig::with_seed(1))?;

    // (2π/T) Σ_j p_{ω_j} over all T Fourier nodes equals the lag-0 sample covariance.
    let all = fdft_all_nodes(&path);
    let gamma0 = lag_zero_frame(&path)?;
    let mut max_err: f64 = 0.0;
    for a in 0..model.size() {
        for b in 0..model.size() {
            let s: f64 = (0..t).map(|j| (all[(j, a)] * all[(j, b)].conj()).re).sum::<f64>() * 2.0 * PI / t as f64;
            max_err = max_err.max((s - gamma0.entries()[(a, b)].re).abs());
        }
    }
    println!("integrated periodogram identity, max entry error {max_err:.2e}");

    let pset = PeriodogramSet::from_path(&path)?;
    let expected = ExpectedPeriodogram::new(&model, &theta, t, &Default::default())?;
    println!("{:>10} {:>14} {:>14}", "omega", "p(1,1)", "E p(1,1)");
    for (j, frame) in pset.frames().iter().enumerate().step_by(32) {
        let w = pset.grid().nodes()[j];
        println!(
            "{w:>10.4} {:>14.6} {:>14.6}",
            frame.diagonal()[0],
            expected.component(w, 1)
        );
    }
    Ok(())
}
