//! Long-range-dependent functional time series in a fixed orthonormal basis.
//!
//! The crate simulates Gaussian LRD sequences whose operators are all
//! diagonal in one basis, computes their functional DFT, periodogram operators
//! and expected periodogram, and estimates the parameter of the long-memory
//! operator by minimizing a weighted divergence contrast.
//!
//! Modules, bottom up:
//!
//! * [`operator`] and [`grid`]: diagonal and Hermitian operators, norms,
//!   Fourier and quadrature frequency grids.
//! * [`models`]: spectral density symbols, covariances, model validation.
//! * [`simulation`]: circulant-embedding and MA(∞) simulators.
//! * [`spectral`]: fDFT, periodogram, Fejér kernel, expected periodogram.
//! * [`estimation`]: normalizer, contrasts, divergence and the estimator.
//! * [`harness`]: experiment configs, reports and the CLI drivers.

pub mod estimation;
pub mod grid;
pub mod harness;
pub mod models;
pub mod operator;
pub mod simulation;
pub mod spectral;
