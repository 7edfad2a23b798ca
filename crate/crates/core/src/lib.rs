//! Optimal conversion from Rényi differential privacy to approximate
//! differential privacy, and accounting for T-fold compositions of the
//! Gaussian mechanism built on top of it.
//!
//! The library is organised bottom-up:
//!
//! - [`divergences`]: two-point f-divergences (hockey-stick, χ^α, Rényi) and
//!   the χ ↔ γ parameter maps.
//! - [`optimizer`]: bracketed golden-section minimisation, monotone
//!   bisection and log-domain arithmetic.
//! - [`conversion`]: the exact RDP→DP boundary γ_α^ε(δ), its inversions, the
//!   closed-form bounds and the literature baselines.
//! - [`gaussian`]: moments-accountant baseline and the improved composition
//!   bounds for Gaussian noise, iteration budgets and noise calibration.
//! - [`oracle`]: an independent brute-force validator over pairs of
//!   Bernoulli distributions.
//!
//! All privacy quantities are in nats.

pub mod conversion;
pub mod divergences;
mod error;
pub mod gaussian;
pub mod optimizer;
pub mod oracle;

pub use error::{Error, Result};
