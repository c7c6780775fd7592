//! Quadrature covariance `r_t(l)` against the long-memory asymptote
//! `2Γ(1-α) sin(πα/2) M(1/t) t^{α-1}` for both kernels.
//!
//! `cargo run --release --example covariance_tail`

use lrd_fts::grid::QuadratureConfig;
use lrd_fts::models::{covariance_symbol, LrdKernel, SpectralModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let quad = QuadratureConfig::default();
    for kernel in [LrdKernel::PowerLaw, LrdKernel::ExactDiff] {
        let model = SpectralModel::fractional_noise(vec![1.0], kernel, (0.05, 0.95))?;
        println!("{kernel:?}");
        println!(
            "{:>6} {:>6} {:>14} {:>14} {:>10}",
            "alpha", "t", "r_t", "asymptote", "ratio"
        );
        for alpha in [0.3, 0.5, 0.7] {
            for t in [50u64, 200, 400] {
                let r = covariance_symbol(&model, t as i64, 1, &[alpha], &quad)?;
                let a = model.lrd_asymptote(t, 1, &[alpha])?;
                println!("{alpha:>6} {t:>6} {r:>14.6e} {a:>14.6e} {:>10.6}", r / a);
            }
        }
    }
    Ok(())
}
