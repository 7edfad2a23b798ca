//! RDP → DP conversion.
//!
//! For an `(α, γ)`-RDP mechanism the tightest DP statement is described by a
//! single convex boundary in the (δ, γ) plane:
//!
//! ```text
//! γ_α^ε(δ) = ε + min_{p ∈ (δ, 1)} 1/(α-1) · log( p^α (p-δ)^(1-α) + (1-p)^α (e^ε - p + δ)^(1-α) )
//! ```
//!
//! [`gamma_exact`] evaluates it numerically; [`delta_exact`] and
//! [`epsilon_exact`] invert it in δ and in ε. The `*_bound` functions are the
//! closed-form relaxations of the same boundary, and [`baseline_delta`],
//! [`baseline_epsilon`] and [`balle_epsilon`] are the classical conversions
//! they improve upon.

use serde::{Deserialize, Serialize};

use crate::divergences::{check_alpha, check_epsilon, check_gamma};
use crate::error::{domain, Error, Result};
use crate::optimizer::{
    invert_monotone, log_add, log_exp_minus, log_expm1, log_sigmoid, minimize_unimodal, sigmoid,
    ScalarSearchConfig,
};

/// How a [`ConversionResult`] was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ExactNumeric,
    ClosedFormBound,
    Baseline,
    Balle,
}

/// Which piece of a closed-form bound was active.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `αδ ≥ 1`, where the boundary is known exactly.
    #[serde(rename = "alpha_delta_ge_1")]
    AlphaDeltaGe1,
    GBound,
    FBound,
    ChiBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConversionResult {
    /// The computed ε, δ or γ.
    pub value: f64,
    pub method: Method,
    /// Minimising `p` of the boundary objective (exact results only).
    pub argmin_p: Option<f64>,
    pub active_branch: Option<Branch>,
}

impl ConversionResult {
    fn exact(value: f64, argmin_p: Option<f64>) -> Self {
        Self {
            value,
            method: Method::ExactNumeric,
            argmin_p,
            active_branch: None,
        }
    }

    fn bound(value: f64, branch: Option<Branch>) -> Self {
        Self {
            value,
            method: Method::ClosedFormBound,
            argmin_p: None,
            active_branch: branch,
        }
    }
}

/// `ζ_α = (1/α)(1 - 1/α)^(α-1)`, which lies in `(1/(αe), 1/α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZetaAlpha {
    alpha: f64,
    zeta: f64,
}

impl ZetaAlpha {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            zeta: ln_zeta(alpha).exp(),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn value(&self) -> f64 {
        self.zeta
    }
}

pub(crate) fn ln_zeta(alpha: f64) -> f64 {
    -alpha.ln() + (alpha - 1.0) * (-1.0 / alpha).ln_1p()
}

fn check_delta_closed(delta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&delta) {
        return domain(format!("delta must lie in [0, 1), got {delta}"));
    }
    Ok(())
}

fn check_delta_open(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

/// Log of the boundary objective at `p`:
/// `log[p^α (p-δ)^(1-α) + (1-p)^α (e^ε - p + δ)^(1-α)]`.
pub fn boundary_objective(p: f64, alpha: f64, epsilon: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_epsilon(epsilon)?;
    check_delta_closed(delta)?;
    if !(p > delta && p < 1.0) {
        return domain(format!("p must lie in (delta, 1) = ({delta}, 1), got {p}"));
    }
    let head = alpha * p.ln() + (1.0 - alpha) * (p - delta).ln();
    let tail = alpha * (-p).ln_1p() + (1.0 - alpha) * log_exp_minus(epsilon, p - delta);
    Ok(log_add(head, tail))
}

/// The boundary objective in the coordinate `p = δ + (1-δ)·sigmoid(u)`.
///
/// Every factor is formed from `sigmoid(±u)` directly so that neither `p - δ`
/// nor `1 - p` suffers cancellation near the ends of `(δ, 1)`.
fn boundary_objective_logit(u: f64, alpha: f64, epsilon: f64, delta: f64) -> f64 {
    let ln_span = (-delta).ln_1p();
    let ln_p_minus_delta = ln_span + log_sigmoid(u);
    let ln_one_minus_p = ln_span + log_sigmoid(-u);
    let one_minus_p = (1.0 - delta) * sigmoid(-u);
    let ln_p = (-one_minus_p).ln_1p();
    // e^ε - (p - δ) = (e^ε - 1) + δ + (1 - p)
    let ln_slack = if epsilon < 30.0 {
        (epsilon.exp_m1() + delta + one_minus_p).ln()
    } else {
        log_exp_minus(epsilon, (1.0 - delta) * sigmoid(u))
    };
    log_add(
        alpha * ln_p + (1.0 - alpha) * ln_p_minus_delta,
        alpha * ln_one_minus_p + (1.0 - alpha) * ln_slack,
    )
}

fn p_from_logit(u: f64, delta: f64) -> f64 {
    if u > 0.0 {
        1.0 - (1.0 - delta) * sigmoid(-u)
    } else {
        delta + (1.0 - delta) * sigmoid(u)
    }
}

const LOGIT_LO: f64 = -60.0;

/// Exact boundary `γ_α^ε(δ)`: the largest Rényi level γ for which every
/// `(α, γ)`-RDP mechanism is `(ε, δ)`-DP.
///
/// The one-dimensional minimisation over `p` runs in a logit coordinate on
/// `(δ, 1)`; the upper end keeps `1 - p` above `4e-16` so the returned witness
/// stays strictly inside the interval. `δ = 0` short-circuits to `0`.
pub fn gamma_exact(
    alpha: f64,
    epsilon: f64,
    delta: f64,
    cfg: &ScalarSearchConfig,
) -> Result<ConversionResult> {
    check_alpha(alpha)?;
    check_epsilon(epsilon)?;
    check_delta_closed(delta)?;
    if delta == 0.0 {
        return Ok(ConversionResult::exact(0.0, None));
    }
    let logit_hi = ((1.0 - delta) / 4e-16).ln();
    let min = minimize_unimodal(
        |u| boundary_objective_logit(u, alpha, epsilon, delta),
        LOGIT_LO,
        logit_hi,
        cfg,
    )?;
    let gamma = (epsilon + min.value / (alpha - 1.0)).max(0.0);
    Ok(ConversionResult::exact(
        gamma,
        Some(p_from_logit(min.argmin, delta)),
    ))
}

/// `g(α, ε, δ) = ε - log(ζ_α / δ) / (α - 1)`.
pub fn g_bound(alpha: f64, epsilon: f64, delta: f64) -> f64 {
    epsilon - (ln_zeta(alpha) - delta.ln()) / (alpha - 1.0)
}

/// `f(α, ε, δ) = ε + log((e^ε - αδ)((δ-1)/(δ-e^ε))^α + αδ) / (α - 1)`, valid
/// for `αδ < 1`.
pub fn f_bound(alpha: f64, epsilon: f64, delta: f64) -> f64 {
    let ad = alpha * delta;
    let head = log_exp_minus(epsilon, ad)
        + alpha * ((-delta).ln_1p() - log_exp_minus(epsilon, delta));
    epsilon + log_add(head, ad.ln()) / (alpha - 1.0)
}

/// Closed-form lower bound on [`gamma_exact`]; exact when `δ = 0` or `αδ ≥ 1`.
pub fn gamma_bound(alpha: f64, epsilon: f64, delta: f64) -> Result<ConversionResult> {
    check_alpha(alpha)?;
    check_epsilon(epsilon)?;
    check_delta_closed(delta)?;
    if delta == 0.0 {
        return Ok(ConversionResult::bound(0.0, None));
    }
    if alpha * delta >= 1.0 {
        return Ok(ConversionResult::bound(
            epsilon - (-delta).ln_1p(),
            Some(Branch::AlphaDeltaGe1),
        ));
    }
    let g = g_bound(alpha, epsilon, delta);
    let f = f_bound(alpha, epsilon, delta);
    Ok(if g > f {
        ConversionResult::bound(g, Some(Branch::GBound))
    } else {
        ConversionResult::bound(f, Some(Branch::FBound))
    })
}

const DELTA_CEILING: f64 = 1.0 - 1e-12;

/// Exact `δ_α^ε(γ)`: the smallest δ such that every `(α, γ)`-RDP mechanism
/// is `(ε, δ)`-DP, found by inverting [`gamma_exact`] in δ.
///
/// Fails with [`Error::Infeasible`] when γ lies above the boundary even for
/// δ → 1.
pub fn delta_exact(
    alpha: f64,
    gamma: f64,
    epsilon: f64,
    cfg: &ScalarSearchConfig,
) -> Result<ConversionResult> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    check_epsilon(epsilon)?;
    if gamma == 0.0 {
        return Ok(ConversionResult::exact(0.0, None));
    }
    let boundary = |d: f64| {
        gamma_exact(alpha, epsilon, d, cfg)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    let delta = invert_monotone(boundary, gamma, 0.0, DELTA_CEILING, true, cfg).map_err(|e| match e {
        Error::OutOfRange { hi_value, .. } => Error::Infeasible(format!(
            "gamma = {gamma} exceeds the boundary value {hi_value} reached as delta -> 1; \
             no delta < 1 is guaranteed"
        )),
        other => other,
    })?;
    let witness = if delta > 0.0 {
        gamma_exact(alpha, epsilon, delta, cfg)?.argmin_p
    } else {
        None
    };
    Ok(ConversionResult::exact(delta, witness))
}

/// Closed-form upper bound on [`delta_exact`].
///
/// Takes the smallest δ at which a lower bound on the boundary already
/// reaches γ: the g-piece in closed form, the f-piece by bisection, and the
/// exact `αδ ≥ 1` piece.
pub fn delta_bound(alpha: f64, gamma: f64, epsilon: f64) -> Result<ConversionResult> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    check_epsilon(epsilon)?;
    if gamma == 0.0 {
        return Ok(ConversionResult::bound(0.0, None));
    }
    let inv_alpha = 1.0 / alpha;
    // boundary value at δ = 1/α, known exactly
    let gamma_at_inv_alpha = epsilon - (-inv_alpha).ln_1p();
    if gamma >= gamma_at_inv_alpha {
        let delta = -(epsilon - gamma).exp_m1();
        return Ok(ConversionResult::bound(
            delta.min(DELTA_CEILING),
            Some(Branch::AlphaDeltaGe1),
        ));
    }

    let mut best = (inv_alpha, Branch::AlphaDeltaGe1);
    let delta_g = (ln_zeta(alpha) - (alpha - 1.0) * (epsilon - gamma)).exp();
    if delta_g < best.0 {
        best = (delta_g, Branch::GBound);
    }
    let f_top = f_bound(alpha, epsilon, inv_alpha);
    if f_top >= gamma {
        let cfg = ScalarSearchConfig {
            abs_tol: 1e-14,
            ..ScalarSearchConfig::default()
        };
        let delta_f = invert_monotone(
            |d| f_bound(alpha, epsilon, d),
            gamma,
            0.0,
            inv_alpha,
            true,
            &cfg,
        )?;
        if delta_f < best.0 {
            best = (delta_f, Branch::FBound);
        }
    }
    Ok(ConversionResult::bound(best.0.clamp(0.0, DELTA_CEILING), Some(best.1)))
}

/// Exact `ε_α^δ(γ)`: the smallest ε ≥ 0 with `γ_α^ε(δ) ≥ γ`.
pub fn epsilon_exact(
    alpha: f64,
    gamma: f64,
    delta: f64,
    cfg: &ScalarSearchConfig,
) -> Result<ConversionResult> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    check_delta_open(delta)?;
    if gamma == 0.0 {
        return Ok(ConversionResult::exact(0.0, None));
    }
    let boundary = |e: f64| {
        gamma_exact(alpha, e, delta, cfg)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    let at_zero = gamma_exact(alpha, 0.0, delta, cfg)?;
    if at_zero.value >= gamma {
        return Ok(ConversionResult::exact(0.0, at_zero.argmin_p));
    }

    let mut hi = epsilon_bound(alpha, gamma, delta)?.value.max(1e-12);
    let mut expansions = 0;
    while boundary(hi) < gamma {
        hi = hi * 1.5 + 1e-9;
        expansions += 1;
        if expansions > 200 || !hi.is_finite() {
            return Err(Error::Infeasible(format!(
                "no epsilon reaches gamma = {gamma} at alpha = {alpha}, delta = {delta}"
            )));
        }
    }
    let eps = invert_monotone(boundary, gamma, 0.0, hi, true, cfg)?;
    let witness = gamma_exact(alpha, eps, delta, cfg)?.argmin_p;
    Ok(ConversionResult::exact(eps, witness))
}

/// Closed-form upper bound on [`epsilon_exact`]; exact when `αδ ≥ 1`.
pub fn epsilon_bound(alpha: f64, gamma: f64, delta: f64) -> Result<ConversionResult> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    check_delta_open(delta)?;
    if gamma == 0.0 {
        return Ok(ConversionResult::bound(0.0, None));
    }
    if alpha * delta >= 1.0 {
        return Ok(ConversionResult::bound(
            (gamma + (-delta).ln_1p()).max(0.0),
            Some(Branch::AlphaDeltaGe1),
        ));
    }
    let am1 = alpha - 1.0;
    let g_piece = (am1 * gamma - (delta.ln() - ln_zeta(alpha))).max(0.0);
    // log((α-1)χ(γ)/(αδ) + 1) with (α-1)χ(γ) = e^((α-1)γ) - 1
    let chi_piece = log_add(0.0, log_expm1(am1 * gamma) - (alpha * delta).ln());
    Ok(if g_piece <= chi_piece {
        ConversionResult::bound(g_piece / am1, Some(Branch::GBound))
    } else {
        ConversionResult::bound(chi_piece / am1, Some(Branch::ChiBound))
    })
}

/// Classical conversion: `δ = e^(-(α-1)(ε-γ))`, clamped to `[0, 1]`.
pub fn baseline_delta(alpha: f64, gamma: f64, epsilon: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    check_epsilon(epsilon)?;
    Ok((-(alpha - 1.0) * (epsilon - gamma)).exp().clamp(0.0, 1.0))
}

/// Classical conversion: `ε = γ - log(δ) / (α - 1)`.
pub fn baseline_epsilon(alpha: f64, gamma: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    check_delta_open(delta)?;
    Ok(gamma - delta.ln() / (alpha - 1.0))
}

/// Classical conversion solved for the Rényi level:
/// `γ = ε + log(δ) / (α - 1)`, clamped at 0.
pub fn baseline_gamma(alpha: f64, epsilon: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_epsilon(epsilon)?;
    check_delta_closed(delta)?;
    Ok((epsilon + delta.ln() / (alpha - 1.0)).max(0.0))
}

/// Balle et al.'s conversion solved for δ: `ζ_α e^(-(α-1)(ε-γ))`, clamped
/// to `[0, 1]`.
pub fn balle_delta(alpha: f64, gamma: f64, epsilon: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    check_epsilon(epsilon)?;
    Ok((ln_zeta(alpha) - (alpha - 1.0) * (epsilon - gamma)).exp().clamp(0.0, 1.0))
}

/// Balle et al.'s conversion solved for the Rényi level:
/// `γ = ε + log(δ/ζ_α) / (α - 1)`, clamped at 0.
pub fn balle_gamma(alpha: f64, epsilon: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_epsilon(epsilon)?;
    check_delta_closed(delta)?;
    Ok((epsilon + (delta.ln() - ln_zeta(alpha)) / (alpha - 1.0)).max(0.0))
}

/// Balle et al.'s conversion `ε = γ - log(δ/ζ_α) / (α - 1)`, reported
/// unclamped (it may be negative).
pub fn balle_epsilon(alpha: f64, gamma: f64, delta: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    check_delta_open(delta)?;
    Ok(gamma - (delta.ln() - ln_zeta(alpha)) / (alpha - 1.0))
}

/// Range of δ for which an `(α, γ)`-RDP mechanism is `(0, δ)`-DP.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroEpsilonRegion {
    /// `[ζ_α e^((α-1)γ), 1/α]`, present when `1 - e^(-γ) < 1/α`.
    pub interval: Option<(f64, f64)>,
    /// ε is zero for every δ above `max(1 - e^(-γ), 1/α)`.
    pub delta_free: f64,
}

pub fn zero_epsilon_region(alpha: f64, gamma: f64) -> Result<ZeroEpsilonRegion> {
    check_alpha(alpha)?;
    check_gamma(gamma)?;
    let inv_alpha = 1.0 / alpha;
    let tail = -(-gamma).exp_m1();
    let interval = if tail < inv_alpha {
        let lo = (ln_zeta(alpha) + (alpha - 1.0) * gamma).exp();
        Some((lo.min(inv_alpha), inv_alpha))
    } else {
        None
    };
    Ok(ZeroEpsilonRegion {
        interval,
        delta_free: tail.max(inv_alpha),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ScalarSearchConfig {
        ScalarSearchConfig::default()
    }

    #[test]
    fn zeta_values() {
        let z = ZetaAlpha::new(2.0).unwrap();
        assert!((z.value() - 0.25).abs() < 1e-15);
        for &a in &[1.01, 1.5, 3.0, 50.0, 1e5] {
            let z = ZetaAlpha::new(a).unwrap().value();
            assert!(z > 1.0 / (a * std::f64::consts::E) && z < 1.0 / a, "{a} {z}");
        }
        assert!(ZetaAlpha::new(1.0).is_err());
    }

    #[test]
    fn boundary_objective_examples() {
        assert!(boundary_objective(0.5, 2.0, 0.0, 0.0).unwrap().abs() < 1e-15);
        let e = std::f64::consts::E;
        let v = boundary_objective(0.5, 2.0, 1.0, 0.1).unwrap();
        let direct = (0.25 / 0.4 + 0.25 / (e - 0.4)).ln();
        assert!((v - direct).abs() < 1e-14);
        assert!((v.exp() - 0.73284).abs() < 1e-5);
        assert!(boundary_objective(0.1, 2.0, 1.0, 0.1).is_err());
        assert!(boundary_objective(1.0, 2.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn logit_objective_matches_direct() {
        for &(a, e, d) in &[(2.0, 1.0, 0.1), (30.0, 0.2, 0.01), (1.3, 4.0, 0.4)] {
            for &u in &[-8.0, -3.0, 0.0, 1.5, 12.0] {
                let p = p_from_logit(u, d);
                let direct = boundary_objective(p, a, e, d).unwrap();
                let logit = boundary_objective_logit(u, a, e, d);
                assert!((direct - logit).abs() < 1e-9 * direct.abs().max(1.0), "{a} {e} {d} {u}");
            }
        }
    }

    #[test]
    fn classical_inverses() {
        let g = baseline_gamma(3.0, 4.0, 0.01).unwrap();
        assert!((baseline_epsilon(3.0, g, 0.01).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(baseline_gamma(3.0, 0.1, 1e-9).unwrap(), 0.0);
        let g = balle_gamma(3.0, 2.0, 0.01).unwrap();
        assert!((balle_epsilon(3.0, g, 0.01).unwrap() - 2.0).abs() < 1e-12);
        let d = balle_delta(3.0, 0.5, 2.0).unwrap();
        assert!((balle_epsilon(3.0, 0.5, d).unwrap() - 2.0).abs() < 1e-12);
        assert!(d >= delta_bound(3.0, 0.5, 2.0).unwrap().value - 1e-15);
    }

    #[test]
    fn gamma_exact_zero_delta() {
        let r = gamma_exact(3.0, 2.0, 0.0, &cfg()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.method, Method::ExactNumeric);
    }

    #[test]
    fn gamma_exact_matches_alpha_delta_ge_one_branch() {
        let r = gamma_exact(20.0, 1.0, 0.1, &cfg()).unwrap();
        let closed = 1.0 - 0.9f64.ln();
        assert!((r.value - closed).abs() < 1e-9, "{}", r.value);
        assert!((r.value - 1.10536).abs() < 1e-5);
        let p = r.argmin_p.unwrap();
        assert!(p > 0.1 && p < 1.0);
    }

    #[test]
    fn gamma_exact_above_closed_form_bounds() {
        let r = gamma_exact(2.0, 1.0, 0.1, &cfg()).unwrap();
        let g = g_bound(2.0, 1.0, 0.1);
        let f = f_bound(2.0, 1.0, 0.1);
        assert!((g - 0.0837).abs() < 1e-4, "{g}");
        assert!((f - 0.3019).abs() < 1e-3, "{f}");
        assert!(r.value >= g.max(f));
    }

    #[test]
    fn gamma_bound_branches() {
        let r = gamma_bound(20.0, 1.0, 0.1).unwrap();
        assert_eq!(r.active_branch, Some(Branch::AlphaDeltaGe1));
        assert!((r.value - 1.105_360_515_657_826).abs() < 1e-12);
        let r = gamma_bound(2.0, 1.0, 0.1).unwrap();
        assert_eq!(r.active_branch, Some(Branch::FBound));
        assert_eq!(r.value, f_bound(2.0, 1.0, 0.1));
        assert_eq!(gamma_bound(7.0, 3.0, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn delta_exact_examples() {
        assert_eq!(delta_exact(2.0, 0.0, 1.0, &cfg()).unwrap().value, 0.0);
        let d = delta_exact(2.0, 1.0, 2.0, &cfg()).unwrap().value;
        assert!(d <= baseline_delta(2.0, 1.0, 2.0).unwrap());
        let g = gamma_exact(2.0, 2.0, d, &cfg()).unwrap().value;
        assert!((g - 1.0).abs() < 1e-8);
    }

    #[test]
    fn delta_exact_infeasible_near_one() {
        let err = delta_exact(2.0, 100.0, 0.0, &cfg()).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)), "{err:?}");
    }

    #[test]
    fn delta_bound_example() {
        let r = delta_bound(2.0, 1.0, 2.0).unwrap();
        let g_piece = 0.25 * (-1.0f64).exp();
        assert!((g_piece - 0.09197).abs() < 1e-5);
        assert!(r.value <= g_piece + 1e-15);
        assert!(r.value >= delta_exact(2.0, 1.0, 2.0, &cfg()).unwrap().value);
        assert_eq!(delta_bound(2.0, 0.0, 2.0).unwrap().value, 0.0);
    }

    #[test]
    fn delta_bound_exact_branch() {
        // γ above the boundary value at δ = 1/α
        let r = delta_bound(4.0, 3.0, 1.0).unwrap();
        assert_eq!(r.active_branch, Some(Branch::AlphaDeltaGe1));
        assert!((r.value - (1.0 - (-2.0f64).exp())).abs() < 1e-15);
        let exact = delta_exact(4.0, 3.0, 1.0, &cfg()).unwrap().value;
        assert!((exact - r.value).abs() < 1e-8);
    }

    #[test]
    fn epsilon_exact_examples() {
        assert_eq!(epsilon_exact(3.0, 0.0, 0.2, &cfg()).unwrap().value, 0.0);
        // inside the zero-ε interval [0.2763, 0.5]
        let e = epsilon_exact(2.0, 0.1, 0.3, &cfg()).unwrap().value;
        assert!(e <= 1e-3, "{e}");
        let g = gamma_exact(2.0, 1.5, 0.05, &cfg()).unwrap().value;
        let e = epsilon_exact(2.0, g, 0.05, &cfg()).unwrap().value;
        assert!((e - 1.5).abs() <= 1e-6, "{e}");
        assert!(epsilon_exact(2.0, 0.1, 0.0, &cfg()).is_err());
    }

    #[test]
    fn epsilon_bound_examples() {
        assert_eq!(epsilon_bound(2.0, 0.0, 0.05).unwrap().value, 0.0);
        let r = epsilon_bound(20.0, 1.0, 0.1).unwrap();
        assert!((r.value - (1.0 + 0.9f64.ln())).abs() < 1e-15);
        assert!((r.value - 0.89464).abs() < 1e-5);
        let r = epsilon_bound(2.0, 0.5, 0.01).unwrap();
        let g_piece = (0.5 - (0.01f64.ln() - 0.25f64.ln())).max(0.0);
        let chi_piece = ((0.5f64.exp() - 1.0) / 0.02 + 1.0).ln();
        assert!((r.value - g_piece.min(chi_piece)).abs() < 1e-12);
        assert!(r.value <= balle_epsilon(2.0, 0.5, 0.01).unwrap().max(0.0));
    }

    #[test]
    fn epsilon_bound_large_gamma_is_finite() {
        let r = epsilon_bound(1000.0, 50.0, 1e-5).unwrap();
        assert!(r.value.is_finite());
    }

    #[test]
    fn baselines() {
        let d = baseline_delta(2.0, 1.0, 2.0).unwrap();
        assert!((d - (-1.0f64).exp()).abs() < 1e-15);
        assert!((d - 0.36788).abs() < 1e-5);
        let e = baseline_epsilon(2.0, 1.0, (-1.0f64).exp()).unwrap();
        assert!((e - 2.0).abs() < 1e-14);
        assert_eq!(baseline_delta(2.0, 1.0, 0.5).unwrap(), 1.0);
        assert!((balle_epsilon(2.0, 1.0, 0.25).unwrap() - 1.0).abs() < 1e-14);
        let z = ZetaAlpha::new(5.0).unwrap().value();
        assert!(balle_epsilon(5.0, 0.0, z).unwrap().abs() < 1e-14);
    }

    #[test]
    fn zero_epsilon_examples() {
        let r = zero_epsilon_region(2.0, 0.1).unwrap();
        let (lo, hi) = r.interval.unwrap();
        assert!((lo - 0.25 * 0.1f64.exp()).abs() < 1e-15);
        assert!((lo - 0.27629).abs() < 1e-5);
        assert_eq!(hi, 0.5);
        assert_eq!(r.delta_free, 0.5);

        let r = zero_epsilon_region(2.0, 0.0).unwrap();
        assert_eq!(r.interval, Some((0.25, 0.5)));

        let r = zero_epsilon_region(10.0, 1.0).unwrap();
        assert!(r.interval.is_none());
        assert!((r.delta_free - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }
}
