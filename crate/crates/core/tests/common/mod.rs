//! Reference routines shared by the integration tests. They are written
//! independently of the library so that comparisons are genuine two-route checks.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use lrd_fts::models::{ModelConfig, SpectralModel};
use num_complex::Complex64;

/// Composite Gauss–Legendre with `n` nodes per panel over the given edges.
pub fn gl_composite<F: FnMut(f64) -> f64>(edges: &[f64], n: usize, mut f: F) -> f64 {
    let gl = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
    let mut sum = 0.0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (half, mid) = (0.5 * (b - a), 0.5 * (b + a));
        for (x, wt) in gl.nodes().zip(gl.weights()) {
            sum += half * wt * f(mid + half * x);
        }
    }
    sum
}

/// Panel edges on `[eps, b]`: geometric (ratio 1.5) up to the point where the
/// panel width reaches `h`, then uniform with width at most `h`.
pub fn graded_edges(eps: f64, b: f64, h: f64) -> Vec<f64> {
    let mut edges = vec![eps];
    let mut x = eps;
    while x * 0.5 < h && x * 1.5 < b {
        x *= 1.5;
        edges.push(x);
    }
    let n = ((b - x) / h).ceil().max(1.0) as usize;
    for k in 1..=n {
        edges.push(x + (b - x) * k as f64 / n as f64);
    }
    edges
}

/// `(2πT)^{-1/2} Σ_{t=1}^{T} x_t e^{-iωt}` by direct summation.
pub fn direct_dft(x: &[f64], omega: f64) -> Complex64 {
    let t = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(s, v)| *v * Complex64::new(0.0, -omega * (s + 1) as f64).exp())
        .sum::<Complex64>()
        / (2.0 * PI * t).sqrt()
}

/// `|Σ_{t=1}^{T} e^{-iωt}|² / T` by direct summation.
pub fn fejer_direct(omega: f64, t: usize) -> f64 {
    let s: Complex64 = (1..=t).map(|k| Complex64::new(0.0, -omega * k as f64).exp()).sum();
    s.norm_sqr() / t as f64
}

pub fn model(json: &str) -> SpectralModel {
    ModelConfig::from_json_str(json).unwrap().build().unwrap().model
}

/// Median of a non-empty slice.
pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

pub fn mean_and_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}
