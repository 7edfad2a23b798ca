//! Accounting for T-fold adaptive composition of Gaussian mechanisms.
//!
//! A Gaussian mechanism with L2 sensitivity Δ and noise scale σ is
//! `(α, αρ)`-RDP for every α > 1 with `ρ = Δ²/(2σ²)`, so its T-fold
//! composition is `(α, αρT)`-RDP. The moments accountant converts this with
//! the classical RDP→DP map, which gives `ε = ρT + sqrt(4ρT log(1/δ))`. The
//! functions here replace that conversion with the optimal one (closed-form
//! bounds or the exact boundary) and search over α in `(1, 1/δ]`; beyond
//! `1/δ` the exact conversion is increasing in α, so nothing is lost.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conversion::{epsilon_exact, ln_zeta};
use crate::error::{domain, Error, Result};
use crate::optimizer::{log_add, log_expm1, minimize_unimodal, ScalarSearchConfig};

/// Noise configuration of a (possibly subsampled) Gaussian mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianConfig {
    sigma: f64,
    sensitivity: f64,
    subsampling_q: Option<f64>,
    rho: f64,
}

impl GaussianConfig {
    /// Plain Gaussian mechanism: `ρ = Δ²/(2σ²)`.
    pub fn new(sigma: f64, sensitivity: f64) -> Result<Self> {
        Ok(Self {
            sigma,
            sensitivity,
            subsampling_q: None,
            rho: rho_gaussian(sigma, sensitivity)?,
        })
    }

    /// Noisy SGD step with Poisson subsampling rate `q` and unit sensitivity:
    /// `ρ = q²/((1-q)σ²)`.
    pub fn subsampled(sigma: f64, q: f64) -> Result<Self> {
        Ok(Self {
            sigma,
            sensitivity: 1.0,
            subsampling_q: Some(q),
            rho: rho_subsampled(sigma, q)?,
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    pub fn subsampling_q(&self) -> Option<f64> {
        self.subsampling_q
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }
}

/// Which conversion drives the composition bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Closed-form bounds (`ε₀`, `ε₁` and the `α = 1/δ` term).
    ClosedForm,
    /// Numeric inversion of the exact conversion boundary at every α.
    Exact,
}

pub fn rho_gaussian(sigma: f64, sensitivity: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    if !(sensitivity > 0.0 && sensitivity.is_finite()) {
        return domain(format!("sensitivity must be positive, got {sensitivity}"));
    }
    Ok(sensitivity * sensitivity / (2.0 * sigma * sigma))
}

pub fn rho_subsampled(sigma: f64, q: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return domain(format!("sigma must be positive, got {sigma}"));
    }
    if !(q > 0.0 && q < 1.0) {
        return domain(format!("subsampling rate must lie in (0, 1), got {q}"));
    }
    Ok(q * q / ((1.0 - q) * sigma * sigma))
}

/// Epochs covered by `iterations` steps at sampling rate `q`.
pub fn epochs(q: f64, iterations: f64) -> f64 {
    q * iterations
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return domain(format!("rho must be positive, got {rho}"));
    }
    Ok(())
}

fn check_iterations(t: f64) -> Result<()> {
    if !(t >= 1.0 && t.is_finite()) {
        return domain(format!("iteration count must be >= 1, got {t}"));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

fn check_positive_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return domain(format!("epsilon must be positive, got {epsilon}"));
    }
    Ok(())
}

/// Moments-accountant epsilon `ρT + sqrt(4ρT log(1/δ))`.
pub fn ma_epsilon(rho: f64, t: f64, delta: f64) -> Result<f64> {
    check_rho(rho)?;
    check_iterations(t)?;
    check_delta(delta)?;
    let rt = rho * t;
    Ok(rt + (4.0 * rt * -delta.ln()).sqrt())
}

/// Value and minimising order of one α-minimised term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaTerm {
    pub value: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositionBranch {
    Eps0,
    Eps1,
    AlphaInvDelta,
    Exact,
}

/// ε for a T-fold composition together with its closed-form breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompositionEpsilon {
    pub epsilon: f64,
    pub mode: Mode,
    /// Order α at which `epsilon` is attained.
    pub argmin_alpha: f64,
    pub active: CompositionBranch,
    /// `inf_α (ραT - log(δ/ζ_α)/(α-1))₊`.
    pub eps0: AlphaTerm,
    /// `inf_α log(1 + (e^(ρα(α-1)T) - 1)/(αδ)) / (α-1)`.
    pub eps1: AlphaTerm,
    /// `(ρT/δ + log(1-δ))₊`, the exact conversion at `α = 1/δ`.
    pub eps_alpha_inv_delta: f64,
}

/// Search range in `v = log(α - 1)` covering `α ∈ (1, 1/δ]`.
fn alpha_log_range(delta: f64) -> (f64, f64) {
    let hi = (1.0 / delta - 1.0).ln();
    (hi.min(0.0) - 40.0, hi)
}

fn eps0_objective(rho: f64, t: f64, delta: f64, v: f64) -> f64 {
    let am1 = v.exp();
    let alpha = 1.0 + am1;
    rho * alpha * t - (delta.ln() - ln_zeta(alpha)) / am1
}

fn eps1_objective(rho: f64, t: f64, delta: f64, v: f64) -> f64 {
    let am1 = v.exp();
    let alpha = 1.0 + am1;
    let x = rho * alpha * am1 * t;
    log_add(0.0, log_expm1(x) - (alpha * delta).ln()) / am1
}

/// Improved ε for T-fold composition of a mechanism with RDP rate ρ.
///
/// `ClosedForm` takes the minimum of the three closed-form terms.
/// `Exact` minimises the exact conversion [`epsilon_exact`]`(α, ραT, δ)`
/// over α; it is also evaluated at the closed-form minimisers, so it never
/// exceeds the closed-form value.
pub fn acct_epsilon(
    rho: f64,
    t: f64,
    delta: f64,
    mode: Mode,
    cfg: &ScalarSearchConfig,
) -> Result<CompositionEpsilon> {
    check_rho(rho)?;
    check_iterations(t)?;
    check_delta(delta)?;
    let (v_lo, v_hi) = alpha_log_range(delta);

    let m0 = minimize_unimodal(|v| eps0_objective(rho, t, delta, v), v_lo, v_hi, cfg)?;
    let eps0 = AlphaTerm {
        value: m0.value.max(0.0),
        alpha: 1.0 + m0.argmin.exp(),
    };
    let m1 = minimize_unimodal(|v| eps1_objective(rho, t, delta, v), v_lo, v_hi, cfg)?;
    let eps1 = AlphaTerm {
        value: m1.value,
        alpha: 1.0 + m1.argmin.exp(),
    };
    let third = (rho * t / delta + (-delta).ln_1p()).max(0.0);

    let mut candidates = [
        (eps0.value, eps0.alpha, CompositionBranch::Eps0),
        (eps1.value, eps1.alpha, CompositionBranch::Eps1),
        (third, 1.0 / delta, CompositionBranch::AlphaInvDelta),
    ];
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut epsilon, mut argmin_alpha, mut active) = candidates[0];

    if mode == Mode::Exact {
        let exact_at = |alpha: f64| -> f64 {
            epsilon_exact(alpha, rho * alpha * t, delta, cfg)
                .map(|r| r.value)
                .unwrap_or(f64::NAN)
        };
        let m = minimize_unimodal(|v| exact_at(1.0 + v.exp()), v_lo, v_hi, cfg)?;
        let mut best = (m.value, 1.0 + m.argmin.exp());
        for &(_, alpha, _) in &candidates {
            let alpha = alpha.min(1.0 / delta);
            let v = exact_at(alpha);
            if v < best.0 {
                best = (v, alpha);
            }
        }
        if !best.0.is_finite() {
            return Err(Error::Infeasible(
                "exact conversion failed at every order".into(),
            ));
        }
        epsilon = best.0;
        argmin_alpha = best.1;
        active = CompositionBranch::Exact;
    }

    Ok(CompositionEpsilon {
        epsilon,
        mode,
        argmin_alpha,
        active,
        eps0,
        eps1,
        eps_alpha_inv_delta: third,
    })
}

const MAX_ITERATIONS: u64 = 1 << 52;

/// Largest integer `t >= 0` with `eps_of(t) <= epsilon`, for `eps_of`
/// nondecreasing in `t`. Exponential bracketing, then integer bisection.
fn largest_within<F>(eps_of: F, epsilon: f64) -> Result<u64>
where
    F: Fn(u64) -> Result<f64>,
{
    if eps_of(1)? > epsilon {
        return Ok(0);
    }
    let mut lo = 1u64;
    let mut hi = 2u64;
    while eps_of(hi)? <= epsilon {
        lo = hi;
        hi *= 2;
        if hi > MAX_ITERATIONS {
            return Err(Error::Infeasible(format!(
                "privacy budget {epsilon} is not exhausted within {MAX_ITERATIONS} iterations"
            )));
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eps_of(mid)? <= epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Largest T whose composition stays `(ε, δ)`-DP under [`acct_epsilon`];
/// `0` if a single step already exceeds ε.
pub fn max_iterations(
    rho: f64,
    epsilon: f64,
    delta: f64,
    mode: Mode,
    cfg: &ScalarSearchConfig,
) -> Result<u64> {
    check_rho(rho)?;
    check_positive_epsilon(epsilon)?;
    check_delta(delta)?;
    largest_within(
        |t| acct_epsilon(rho, t as f64, delta, mode, cfg).map(|r| r.epsilon),
        epsilon,
    )
}

/// Largest T allowed by the moments accountant ([`ma_epsilon`]).
pub fn ma_max_iterations(rho: f64, epsilon: f64, delta: f64) -> Result<u64> {
    check_rho(rho)?;
    check_positive_epsilon(epsilon)?;
    check_delta(delta)?;
    largest_within(|t| ma_epsilon(rho, t as f64, delta), epsilon)
}

/// Noise variance the moments accountant requires for T steps to be
/// `(ε, δ)`-DP: `σ² = T / (2X)` with
/// `X = sup_α ε/α + log(δ)/(α(α-1)) = (sqrt(ε + L) - sqrt(L))²`, `L = log(1/δ)`.
///
/// For small δ this behaves like `(2T/ε²) log(1/δ) + T/ε`.
pub fn ma_required_variance(t: f64, epsilon: f64, delta: f64) -> Result<f64> {
    check_iterations(t)?;
    check_positive_epsilon(epsilon)?;
    check_delta(delta)?;
    let l = -delta.ln();
    // (sqrt(ε+L) - sqrt(L))² written without the cancellation
    let x = (epsilon / ((epsilon + l).sqrt() + l.sqrt())).powi(2);
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Infeasible(format!(
            "moments-accountant variance bound degenerates (X = {x})"
        )));
    }
    Ok(t / (2.0 * x))
}

/// Variance evaluated at a specific order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceAtAlpha {
    pub alpha: f64,
    pub sigma_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequiredVariance {
    /// Smallest sufficient σ² over feasible orders `α ∈ (1, 1/δ]`.
    pub sigma_sq: f64,
    pub alpha_opt: f64,
    /// The same expression at `α* = 2 log(1/δ)/ε`, when that order is
    /// admissible.
    pub plug_in: Option<VarianceAtAlpha>,
    /// Three-term small-δ expansion of the plug-in value. Informational
    /// only; it is not a guaranteed bound at finite δ.
    pub asymptotic: f64,
}

fn variance_at(alpha: f64, t: f64, epsilon: f64, delta: f64) -> f64 {
    let denom = 2.0 * epsilon + 2.0 / (alpha - 1.0) * (delta.ln() - ln_zeta(alpha));
    if denom > 0.0 {
        alpha * t / denom
    } else {
        f64::INFINITY
    }
}

/// Noise variance sufficient for T compositions to be `(ε, δ)`-DP under the
/// g-bound conversion:
/// `σ² = inf_{1<α≤1/δ} αT / (2ε + 2 log(δ/ζ_α)/(α-1))`.
///
/// Requires `ε > 2δ log(1/δ)`.
pub fn required_variance(
    t: f64,
    epsilon: f64,
    delta: f64,
    cfg: &ScalarSearchConfig,
) -> Result<RequiredVariance> {
    check_iterations(t)?;
    check_positive_epsilon(epsilon)?;
    check_delta(delta)?;
    let l = -delta.ln();
    let threshold = 2.0 * delta * l;
    if epsilon <= threshold {
        return domain(format!(
            "epsilon must exceed 2 delta log(1/delta) = {threshold}, got {epsilon}"
        ));
    }
    let (v_lo, v_hi) = alpha_log_range(delta);
    let m = minimize_unimodal(
        |v| variance_at(1.0 + v.exp(), t, epsilon, delta),
        v_lo,
        v_hi,
        cfg,
    )?;

    let alpha_star = 2.0 * l / epsilon;
    let plug_in = (alpha_star > 1.0 && alpha_star <= 1.0 / delta)
        .then(|| VarianceAtAlpha {
            alpha: alpha_star,
            sigma_sq: variance_at(alpha_star, t, epsilon, delta),
        })
        .filter(|v| v.sigma_sq.is_finite());

    let e2 = epsilon * epsilon;
    let asymptotic =
        2.0 * t * l / e2 + t / epsilon - 2.0 * t / e2 * ((2.0 * l).ln() + 1.0 - epsilon.ln());

    Ok(RequiredVariance {
        sigma_sq: m.value,
        alpha_opt: 1.0 + m.argmin.exp(),
        plug_in,
        asymptotic,
    })
}

/// One row of a privacy curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub t: u64,
    pub epochs: Option<f64>,
    pub eps_ma: f64,
    pub eps_ours: f64,
    pub eps_ours_exact: Option<f64>,
    /// `eps_ma - eps_ours`.
    pub gap: f64,
}

/// Evaluates the moments accountant and the improved bounds at every T.
/// Rows are computed in parallel and returned in input order.
pub fn privacy_curve(
    config: &GaussianConfig,
    delta: f64,
    t_values: &[u64],
    modes: &[Mode],
    cfg: &ScalarSearchConfig,
) -> Result<Vec<CurveRow>> {
    if t_values.is_empty() {
        return domain("privacy curve needs at least one iteration count");
    }
    check_delta(delta)?;
    let rho = config.rho();
    let with_exact = modes.contains(&Mode::Exact);
    t_values
        .par_iter()
        .map(|&t| {
            let tf = t as f64;
            let eps_ma = ma_epsilon(rho, tf, delta)?;
            let eps_ours = acct_epsilon(rho, tf, delta, Mode::ClosedForm, cfg)?.epsilon;
            let eps_ours_exact = if with_exact {
                Some(acct_epsilon(rho, tf, delta, Mode::Exact, cfg)?.epsilon)
            } else {
                None
            };
            Ok(CurveRow {
                t,
                epochs: config.subsampling_q().map(|q| epochs(q, tf)),
                eps_ma,
                eps_ours,
                eps_ours_exact,
                gap: eps_ma - eps_ours,
            })
        })
        .collect()
}
