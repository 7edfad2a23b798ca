//! Brute-force checks of the conversion boundary over binary distribution
//! pairs.
//!
//! Everything here evaluates divergences of explicit Bernoulli pairs on
//! grids or random samples, and shares no optimisation code with
//! [`crate::conversion`], so agreement between the two is a meaningful test.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conversion::gamma_exact;
use crate::divergences::{
    check_alpha, check_epsilon, chi_alpha_binary, chi_of_gamma, hockey_stick_binary,
    renyi_binary, BernoulliPair,
};
use crate::error::{domain, Error, Result};
use crate::optimizer::{log_add, log_sigmoid, sigmoid, ScalarSearchConfig};

/// Seed used by [`joint_range_containment`] when the caller has none.
pub const DEFAULT_SEED: u64 = 0x5eed_2019;

/// Grid layout for [`brute_force_gamma`] and [`verify_q_star`].
///
/// Both coordinates are spaced uniformly in logit over
/// `[-logit_bound, logit_bound]` with `n_coarse` intervals. Every row whose
/// coarse minimum is within `refine_slack` of the global coarse minimum is
/// refined in `q` around its own best point, over a window of
/// `refine_window` times the logit domain (at least one coarse cell) with
/// `n_refine` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_coarse: usize,
    pub n_refine: usize,
    pub refine_window: f64,
    pub refine_slack: f64,
    pub logit_bound: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_coarse: 4096,
            n_refine: 4096,
            refine_window: 0.001,
            refine_slack: 0.05,
            logit_bound: 36.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_coarse < 64 || self.n_refine < 64 {
            return domain(format!(
                "grid sizes must be >= 64, got n_coarse={} n_refine={}",
                self.n_coarse, self.n_refine
            ));
        }
        if !(self.refine_window > 0.0 && self.refine_window <= 1.0) {
            return domain(format!(
                "refine_window must lie in (0, 1], got {}",
                self.refine_window
            ));
        }
        if !(self.refine_slack >= 0.0 && self.refine_slack.is_finite()) {
            return domain(format!("refine_slack must be >= 0, got {}", self.refine_slack));
        }
        if !(self.logit_bound > 0.0 && self.logit_bound <= 700.0) {
            return domain(format!(
                "logit_bound must lie in (0, 700], got {}",
                self.logit_bound
            ));
        }
        Ok(())
    }

    fn coarse_step(&self) -> f64 {
        2.0 * self.logit_bound / self.n_coarse as f64
    }

    /// Half-width of a refinement window: the configured fraction of the
    /// domain, but never less than one coarse cell.
    fn refine_half_width(&self) -> f64 {
        (self.refine_window * self.logit_bound * 2.0).max(self.coarse_step())
    }

    fn coarse_logit(&self, i: usize) -> f64 {
        -self.logit_bound + i as f64 * self.coarse_step()
    }
}

/// A point on the probability simplex stored with accurate logs of both
/// atoms, parametrised by its logit.
#[derive(Debug, Clone, Copy)]
struct Atom {
    x: f64,
    one_mx: f64,
    ln_x: f64,
    ln_1mx: f64,
}

impl Atom {
    fn from_logit(u: f64) -> Self {
        Self {
            x: sigmoid(u),
            one_mx: sigmoid(-u),
            ln_x: log_sigmoid(u),
            ln_1mx: log_sigmoid(-u),
        }
    }
}

struct Problem {
    alpha: f64,
    exp_eps: f64,
    delta: f64,
}

impl Problem {
    fn hockey_stick(&self, p: &Atom, q: &Atom) -> f64 {
        (p.x - self.exp_eps * q.x).max(0.0) + (p.one_mx - self.exp_eps * q.one_mx).max(0.0)
    }

    /// Rényi divergence of the pair, `+inf` if infeasible.
    fn value(&self, p: &Atom, q: &Atom) -> f64 {
        if self.hockey_stick(p, q) < self.delta {
            return f64::INFINITY;
        }
        let a = self.alpha;
        let s = log_add(
            a * p.ln_x + (1.0 - a) * q.ln_x,
            a * p.ln_1mx + (1.0 - a) * q.ln_1mx,
        );
        s.max(0.0) / (a - 1.0)
    }
}

/// Minimiser found by [`brute_force_gamma`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub gamma: f64,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, Copy)]
struct RowBest {
    value: f64,
    q_logit: f64,
}

fn scan_row(problem: &Problem, p: &Atom, q_atoms: &[Atom], grid: &GridSpec) -> RowBest {
    let mut best = RowBest {
        value: f64::INFINITY,
        q_logit: f64::NAN,
    };
    for (j, q) in q_atoms.iter().enumerate() {
        let v = problem.value(p, q);
        if v < best.value {
            best = RowBest {
                value: v,
                q_logit: grid.coarse_logit(j),
            };
        }
    }
    best
}

/// Refines one row in `q` around `center`. Points are nested under doubling
/// of `n_refine`, and the coarse value is kept, so more refinement never
/// gives a larger result.
fn refine_row(problem: &Problem, p: &Atom, center: f64, coarse: RowBest, grid: &GridSpec) -> RowBest {
    let half = grid.refine_half_width();
    let step = 2.0 * half / grid.n_refine as f64;
    let mut best = coarse;
    for k in 0..=grid.n_refine {
        let u = center - half + k as f64 * step;
        let v = problem.value(p, &Atom::from_logit(u));
        if v < best.value {
            best = RowBest { value: v, q_logit: u };
        }
    }
    best
}

fn check_inputs(alpha: f64, epsilon: f64, delta: f64, grid: &GridSpec) -> Result<Problem> {
    check_alpha(alpha)?;
    check_epsilon(epsilon)?;
    if !(0.0..1.0).contains(&delta) {
        return domain(format!("delta must lie in [0, 1), got {delta}"));
    }
    grid.validate()?;
    Ok(Problem {
        alpha,
        exp_eps: epsilon.exp(),
        delta,
    })
}

fn coarse_atoms(grid: &GridSpec) -> Vec<Atom> {
    (0..=grid.n_coarse)
        .map(|i| Atom::from_logit(grid.coarse_logit(i)))
        .collect()
}

/// Grid minimum of `D_α(P‖Q)` over Bernoulli pairs with
/// `E_{e^ε}(P‖Q) >= δ`.
///
/// Every evaluated point is a feasible pair, so the result can only sit
/// above the true infimum (up to rounding in the feasibility test).
pub fn brute_force_gamma(
    alpha: f64,
    epsilon: f64,
    delta: f64,
    grid: &GridSpec,
) -> Result<BruteForceResult> {
    let problem = check_inputs(alpha, epsilon, delta, grid)?;
    let atoms = coarse_atoms(grid);

    let rows: Vec<RowBest> = atoms
        .par_iter()
        .map(|p| scan_row(&problem, p, &atoms, grid))
        .collect();
    let coarse_min = rows.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    if !coarse_min.is_finite() {
        return Err(Error::Infeasible(format!(
            "no feasible grid point for alpha={alpha}, epsilon={epsilon}, delta={delta}"
        )));
    }

    let refined: Vec<RowBest> = atoms
        .par_iter()
        .zip(rows.par_iter())
        .map(|(p, row)| {
            if row.value <= coarse_min + grid.refine_slack {
                refine_row(&problem, p, row.q_logit, *row, grid)
            } else {
                *row
            }
        })
        .collect();

    // first minimum in row order keeps the witness independent of scheduling
    let (i, best) = refined
        .iter()
        .enumerate()
        .fold((0, refined[0]), |acc, (i, r)| {
            if r.value < acc.1.value {
                (i, *r)
            } else {
                acc
            }
        });
    Ok(BruteForceResult {
        gamma: best.value,
        p: atoms[i].x,
        q: sigmoid(best.q_logit),
    })
}

/// Outcome of [`verify_q_star`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QStarReport {
    /// Largest `|grid row minimum - value at q*|` over the checked rows.
    pub max_gap: f64,
    pub rows_checked: usize,
    /// Rows where some grid `q` strictly beats `q*` by more than `1e-12`.
    pub grid_beats_q_star: usize,
    /// Adjacent grid pairs on `(0, q*]` where the objective increases in `q`.
    pub monotone_violations: usize,
}

/// Checks that for each fixed `p ∈ (δ, 1)` the constrained minimum over `q`
/// (with `p - e^ε q >= δ`) is attained at `q* = (p - δ)/e^ε`, and that the
/// objective decreases in `q` on `(0, q*]`.
pub fn verify_q_star(alpha: f64, epsilon: f64, delta: f64, grid: &GridSpec) -> Result<QStarReport> {
    let problem = check_inputs(alpha, epsilon, delta, grid)?;
    let atoms = coarse_atoms(grid);
    let lb = grid.logit_bound;

    let value_at = |p: &Atom, q: &Atom| -> f64 {
        let a = alpha;
        log_add(
            a * p.ln_x + (1.0 - a) * q.ln_x,
            a * p.ln_1mx + (1.0 - a) * q.ln_1mx,
        )
        .max(0.0)
            / (a - 1.0)
    };
    let in_constraint = |p: &Atom, q: &Atom| p.x - problem.exp_eps * q.x >= delta;

    let per_row: Vec<Option<(f64, bool, usize)>> = atoms
        .par_iter()
        .map(|p| {
            if p.x <= delta {
                return None;
            }
            let q_star = (p.x - delta) / problem.exp_eps;
            let u_star = (q_star / (1.0 - q_star)).ln();
            if u_star.is_nan() || u_star <= -lb || (q_star >= p.x && delta > 0.0) {
                return None;
            }
            let star = Atom::from_logit(u_star);
            let at_star = value_at(p, &star);

            let mut row_min = f64::INFINITY;
            let mut best_u = f64::NAN;
            let mut violations = 0usize;
            let mut prev = f64::INFINITY;
            for (j, q) in atoms.iter().enumerate() {
                if !in_constraint(p, q) {
                    break;
                }
                let v = value_at(p, q);
                if v > prev + 1e-12 * prev.abs().max(1.0) {
                    violations += 1;
                }
                prev = v;
                if v < row_min {
                    row_min = v;
                    best_u = grid.coarse_logit(j);
                }
            }
            if !row_min.is_finite() {
                return None;
            }
            let half = grid.refine_half_width();
            let step = 2.0 * half / grid.n_refine as f64;
            for k in 0..=grid.n_refine {
                let q = Atom::from_logit(best_u - half + k as f64 * step);
                if in_constraint(p, &q) {
                    row_min = row_min.min(value_at(p, &q));
                }
            }
            let beats = row_min < at_star - 1e-12 * at_star.abs().max(1.0);
            Some(((row_min - at_star).abs(), beats, violations))
        })
        .collect();

    let mut report = QStarReport {
        max_gap: 0.0,
        rows_checked: 0,
        grid_beats_q_star: 0,
        monotone_violations: 0,
    };
    for (gap, beats, violations) in per_row.into_iter().flatten() {
        report.max_gap = report.max_gap.max(gap);
        report.rows_checked += 1;
        report.grid_beats_q_star += usize::from(beats);
        report.monotone_violations += violations;
    }
    Ok(report)
}

/// Outcome of [`joint_range_containment`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub samples: usize,
    pub violations: usize,
    pub seed: u64,
    /// Largest `boundary - χ^α` seen, negative when every sample is inside.
    pub max_excess: f64,
    /// Largest `|D_α(P*‖Q*) - γ|` over the boundary witnesses checked.
    pub witness_max_error: f64,
}

const CONTAINMENT_TOL: f64 = 1e-8;
const WITNESS_DELTAS: [f64; 5] = [1e-4, 1e-3, 1e-2, 0.1, 0.3];

fn sample_pair(rng: &mut ChaCha8Rng) -> BernoulliPair {
    loop {
        // half the draws uniform in logit to reach the corners of the square
        let (p, q) = if rng.gen_bool(0.5) {
            (rng.gen::<f64>(), rng.gen::<f64>())
        } else {
            (
                sigmoid(rng.gen_range(-30.0..30.0)),
                sigmoid(rng.gen_range(-30.0..30.0)),
            )
        };
        if let Ok(pair) = BernoulliPair::new(p, q) {
            return pair;
        }
    }
}

/// Samples `n_samples` Bernoulli pairs and checks that each point
/// `(E_{e^ε}, χ^α)` lies on or above the boundary `χ(γ_α^ε(E_{e^ε}))`.
/// Also substitutes the boundary witnesses `(p*, (p* - δ)/e^ε)` from the
/// exact conversion at a few δ and records how far they land from it.
pub fn joint_range_containment(
    alpha: f64,
    epsilon: f64,
    n_samples: usize,
    seed: u64,
) -> Result<ContainmentReport> {
    check_alpha(alpha)?;
    check_epsilon(epsilon)?;
    if n_samples == 0 {
        return domain("n_samples must be >= 1");
    }
    let cfg = ScalarSearchConfig::default();
    let lambda = epsilon.exp();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs: Vec<BernoulliPair> = (0..n_samples).map(|_| sample_pair(&mut rng)).collect();

    let excess: Vec<f64> = pairs
        .par_iter()
        .map(|pair| -> Result<f64> {
            let e = hockey_stick_binary(pair, lambda)?.min(1.0 - 1e-15);
            let chi = chi_alpha_binary(pair, alpha)?;
            let gamma = gamma_exact(alpha, epsilon, e, &cfg)?.value;
            let boundary = chi_of_gamma(gamma, alpha)?;
            if boundary.is_infinite() {
                return Ok(if chi.is_infinite() { 0.0 } else { f64::INFINITY });
            }
            if chi.is_infinite() {
                return Ok(f64::NEG_INFINITY);
            }
            Ok((boundary - chi) / boundary.max(1.0))
        })
        .collect::<Result<_>>()?;
    let violations = excess.iter().filter(|&&x| x > CONTAINMENT_TOL).count();
    let max_excess = excess.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let mut witness_max_error: f64 = 0.0;
    for &delta in &WITNESS_DELTAS {
        let r = gamma_exact(alpha, epsilon, delta, &cfg)?;
        let Some(p) = r.argmin_p else { continue };
        let q = (p - delta) / lambda;
        let pair = BernoulliPair::new(p, q)?;
        let d = renyi_binary(&pair, alpha)?;
        witness_max_error = witness_max_error.max((d - r.value).abs());
    }

    Ok(ContainmentReport {
        samples: n_samples,
        violations,
        seed,
        max_excess,
        witness_max_error,
    })
}
