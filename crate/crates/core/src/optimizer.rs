//! One-dimensional search routines and log-domain arithmetic.
//!
//! Every conversion and composition quantity in this crate reduces to either
//! minimising a scalar objective over an interval or inverting a monotone
//! scalar function. Both are done derivative-free: minimisation scans a
//! coarse grid to bracket the best sample and then refines with golden-section
//! search; inversion is plain bisection.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerances shared by the scalar searches.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarSearchConfig {
    /// Absolute tolerance on the search argument.
    pub abs_tol: f64,
    /// Iteration cap for golden-section and bisection loops.
    pub max_iters: usize,
    /// Number of coarse samples used to bracket a minimum.
    pub coarse_grid: usize,
}

impl Default for ScalarSearchConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            max_iters: 200,
            coarse_grid: 256,
        }
    }
}

impl ScalarSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return domain(format!("abs_tol must be positive, got {}", self.abs_tol));
        }
        if self.max_iters < 1 {
            return domain("max_iters must be at least 1");
        }
        if self.coarse_grid < 8 {
            return domain(format!(
                "coarse_grid must be at least 8, got {}",
                self.coarse_grid
            ));
        }
        Ok(())
    }
}

/// Location and value of a minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub argmin: f64,
    pub value: f64,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8; // (sqrt(5) - 1) / 2

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimises `objective` over the open interval `(lo, hi)`.
///
/// The interval is sampled on `cfg.coarse_grid` equispaced points (the
/// endpoints are pulled inwards by `max(1e-12, 1e-12 * (hi - lo))`), the best
/// sample is bracketed by its neighbours and the bracket is refined by
/// golden-section search until it is narrower than `cfg.abs_tol`. NaN values
/// are treated as `+inf`. The returned value is never worse than the best
/// coarse sample.
pub fn minimize_unimodal<F>(objective: F, lo: f64, hi: f64, cfg: &ScalarSearchConfig) -> Result<Minimum>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return domain(format!("invalid search interval ({lo}, {hi})"));
    }
    let eta = 1e-12_f64.max(1e-12 * (hi - lo));
    let (a, b) = if hi - lo > 2.0 * eta {
        (lo + eta, hi - eta)
    } else {
        (lo, hi)
    };

    let n = cfg.coarse_grid;
    let step = (b - a) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect();
    let fs: Vec<f64> = xs.iter().map(|&x| sanitize(objective(x))).collect();

    let (best_i, &best_f) = fs
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("grid is non-empty");
    if !best_f.is_finite() {
        if best_f == f64::NEG_INFINITY {
            return Ok(Minimum {
                argmin: xs[best_i],
                value: best_f,
            });
        }
        return Err(Error::Infeasible(format!(
            "objective is not finite at any of the {n} grid points on ({lo}, {hi})"
        )));
    }

    let mut best = Minimum {
        argmin: xs[best_i],
        value: best_f,
    };
    let mut left = xs[best_i.saturating_sub(1)];
    let mut right = xs[(best_i + 1).min(n - 1)];

    let mut x1 = right - INV_PHI * (right - left);
    let mut x2 = left + INV_PHI * (right - left);
    let mut f1 = sanitize(objective(x1));
    let mut f2 = sanitize(objective(x2));
    let mut iters = 0;
    while right - left > cfg.abs_tol && iters < cfg.max_iters {
        if f1 <= f2 {
            right = x2;
            x2 = x1;
            f2 = f1;
            x1 = right - INV_PHI * (right - left);
            f1 = sanitize(objective(x1));
        } else {
            left = x1;
            x1 = x2;
            f1 = f2;
            x2 = left + INV_PHI * (right - left);
            f2 = sanitize(objective(x2));
        }
        iters += 1;
    }
    for (x, f) in [(x1, f1), (x2, f2)] {
        if f < best.value {
            best = Minimum { argmin: x, value: f };
        }
    }
    Ok(best)
}

/// Inverts a monotone function by bisection.
///
/// For an increasing `func` this returns (up to `cfg.abs_tol`) the leftmost
/// `x` in `[lo, hi]` with `func(x) >= target`; for a decreasing one the
/// leftmost `x` with `func(x) <= target`. The returned point always satisfies
/// that predicate, so flat segments resolve to their left end and the result
/// errs on the conservative side of the crossing.
pub fn invert_monotone<F>(
    func: F,
    target: f64,
    lo: f64,
    hi: f64,
    increasing: bool,
    cfg: &ScalarSearchConfig,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return domain(format!("invalid bracket [{lo}, {hi}]"));
    }
    if target.is_nan() {
        return domain("target is NaN");
    }
    let eval = |x: f64| -> Result<f64> {
        let v = func(x);
        if v.is_nan() {
            Err(Error::Infeasible(format!("function is NaN at {x}")))
        } else {
            Ok(v)
        }
    };
    let hit = |v: f64| if increasing { v >= target } else { v <= target };

    let f_lo = eval(lo)?;
    let f_hi = eval(hi)?;
    let in_range = if increasing {
        f_lo <= target && target <= f_hi
    } else {
        f_hi <= target && target <= f_lo
    };
    if !in_range {
        return Err(Error::OutOfRange {
            target,
            lo_value: f_lo,
            hi_value: f_hi,
        });
    }
    if hit(f_lo) {
        return Ok(lo);
    }

    let (mut a, mut b) = (lo, hi);
    let mut iters = 0;
    while b - a > cfg.abs_tol && iters < cfg.max_iters {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if hit(eval(mid)?) {
            b = mid;
        } else {
            a = mid;
        }
        iters += 1;
    }
    Ok(b)
}

/// `log(exp(a) + exp(b))` without overflow. `-inf` stands for `log 0`.
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(exp(x) - 1)` for `x >= 0`; `-inf` at zero.
pub fn log_expm1(x: f64) -> f64 {
    if x <= 0.0 {
        return if x == 0.0 { f64::NEG_INFINITY } else { f64::NAN };
    }
    if x < std::f64::consts::LN_2 {
        x.exp_m1().ln()
    } else {
        x + (-(-x).exp_m1()).ln()
    }
}

/// `log(exp(x) - c)` for `0 <= c < exp(x)`, evaluated without forming
/// `exp(x)`.
pub fn log_exp_minus(x: f64, c: f64) -> f64 {
    x + (-c * (-x).exp()).ln_1p()
}

/// `log(1 / (1 + exp(-u)))`, the log of the logistic function.
pub fn log_sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        -(-u).exp().ln_1p()
    } else {
        u - u.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + exp(-u))`.
pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}
