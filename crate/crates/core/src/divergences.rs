//! Divergences between two Bernoulli distributions and the maps between
//! Rényi and χ^α parameters.
//!
//! All quantities are in nats. The χ^α and Rényi divergences are evaluated
//! through `log(p^α q^(1-α) + (1-p)^α (1-q)^(1-α))`, combining the two atoms
//! with [`log_add`] so that large orders do not overflow.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::optimizer::log_add;

/// A pair of Bernoulli distributions `P = Bern(p)`, `Q = Bern(q)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliPair {
    p: f64,
    q: f64,
}

impl BernoulliPair {
    /// Both parameters must lie in the open interval `(0, 1)`.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("p must lie in (0, 1), got {p}"));
        }
        if !(q > 0.0 && q < 1.0) {
            return domain(format!("q must lie in (0, 1), got {q}"));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `log Σ_x P(x)^α Q(x)^(1-α)`.
    fn log_power_sum(&self, alpha: f64) -> f64 {
        let (p, q) = (self.p, self.q);
        log_add(
            alpha * p.ln() + (1.0 - alpha) * q.ln(),
            alpha * (-p).ln_1p() + (1.0 - alpha) * (-q).ln_1p(),
        )
    }
}

/// An `(α, γ)` Rényi-DP guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiGuarantee {
    alpha: f64,
    gamma: f64,
}

impl RenyiGuarantee {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        check_alpha(alpha)?;
        check_gamma(gamma)?;
        Ok(Self { alpha, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

/// An `(ε, δ)` approximate-DP guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpGuarantee {
    epsilon: f64,
    delta: f64,
}

impl DpGuarantee {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(0.0..1.0).contains(&delta) {
            return domain(format!("delta must lie in [0, 1), got {delta}"));
        }
        Ok(Self { epsilon, delta })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return domain(format!("alpha must be a finite real > 1, got {alpha}"));
    }
    Ok(())
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return domain(format!("gamma must be a finite real >= 0, got {gamma}"));
    }
    Ok(())
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return domain(format!("epsilon must be a finite real >= 0, got {epsilon}"));
    }
    Ok(())
}

/// Hockey-stick divergence `E_λ(P‖Q) = Σ_x (P(x) - λ Q(x))₊`.
pub fn hockey_stick_binary(pair: &BernoulliPair, lambda: f64) -> Result<f64> {
    if !(lambda >= 1.0 && lambda.is_finite()) {
        return domain(format!("lambda must be a finite real >= 1, got {lambda}"));
    }
    let (p, q) = (pair.p, pair.q);
    Ok((p - lambda * q).max(0.0) + ((1.0 - p) - lambda * (1.0 - q)).max(0.0))
}

/// χ^α divergence, the f-divergence of `f(t) = (t^α - 1) / (α - 1)`.
pub fn chi_alpha_binary(pair: &BernoulliPair, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    // the power sum is >= 1 by Jensen; clamp away rounding below it
    let log_sum = pair.log_power_sum(alpha).max(0.0);
    Ok(log_sum.exp_m1() / (alpha - 1.0))
}

/// Rényi divergence `D_α(P‖Q)`.
pub fn renyi_binary(pair: &BernoulliPair, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(pair.log_power_sum(alpha).max(0.0) / (alpha - 1.0))
}

/// `χ(γ) = (e^((α-1)γ) - 1) / (α - 1)`: the χ^α level matching Rényi level γ.
///
/// Returns `+inf` once `(α-1)γ` leaves the representable exponent range.
pub fn chi_of_gamma(gamma: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    let x = (alpha - 1.0) * gamma;
    if x > f64::MAX.ln() {
        return Ok(f64::INFINITY);
    }
    Ok(x.exp_m1() / (alpha - 1.0))
}

/// Inverse of [`chi_of_gamma`]: `log(1 + (α-1)t) / (α - 1)`.
pub fn gamma_of_chi(t: f64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if t.is_nan() || t < 0.0 {
        return domain(format!("chi value must be >= 0, got {t}"));
    }
    Ok(((alpha - 1.0) * t).ln_1p() / (alpha - 1.0))
}
