use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

use rdp_accountant::conversion::{
    balle_delta, balle_epsilon, balle_gamma, baseline_delta, baseline_epsilon, baseline_gamma,
    delta_bound, delta_exact, epsilon_bound, epsilon_exact, gamma_bound, gamma_exact,
};
use rdp_accountant::gaussian::{
    acct_epsilon, ma_epsilon, ma_max_iterations, ma_required_variance, max_iterations,
    privacy_curve, required_variance, GaussianConfig, Mode,
};
use rdp_accountant::optimizer::ScalarSearchConfig;
use rdp_accountant::oracle::{brute_force_gamma, joint_range_containment, verify_q_star, GridSpec};

use crate::error::CliError;
use crate::output::{emit, to_value, write_json, OutputRecord, Table};
use crate::{
    ComposeArgs, ConvertArgs, CurveArgs, Format, MaxTArgs, Mechanism, MethodArg, ModeArg,
    OracleArgs, Tolerance, VarianceArgs,
};

type CmdResult = Result<(), CliError>;

fn search_cfg(tol: &Tolerance) -> Result<ScalarSearchConfig, CliError> {
    let cfg = ScalarSearchConfig {
        abs_tol: tol.tol,
        ..ScalarSearchConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn echo_cfg(record: &mut OutputRecord, cfg: &ScalarSearchConfig) {
    record.query("tolerances", cfg);
}

fn finish(mut record: OutputRecord, timing: Option<Instant>) -> CmdResult {
    record.metadata.wall_time_s = timing.map(|t| t.elapsed().as_secs_f64());
    emit(None, |w| write_json(w, &record))
}

fn methods(m: MethodArg) -> Vec<MethodArg> {
    match m {
        MethodArg::All => vec![
            MethodArg::Exact,
            MethodArg::Bound,
            MethodArg::Baseline,
            MethodArg::Balle,
        ],
        one => vec![one],
    }
}

fn method_key(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Exact => "exact",
        MethodArg::Bound => "bound",
        MethodArg::Baseline => "baseline",
        MethodArg::Balle => "balle",
        MethodArg::All => "all",
    }
}

fn plain(value: f64, method: &str) -> serde_json::Value {
    json!({ "value": value, "method": method })
}

pub fn convert(a: &ConvertArgs, timing: Option<Instant>) -> CmdResult {
    let cfg = search_cfg(&a.tol)?;
    let alpha = a.alpha;
    let mut record = OutputRecord::new("convert");
    record.query("alpha", alpha);

    let solve_for = match (a.gamma, a.eps, a.delta) {
        (Some(_), Some(_), None) => "delta",
        (Some(_), None, Some(_)) => "epsilon",
        (None, Some(_), Some(_)) => "gamma",
        _ => {
            return Err(CliError::Usage(
                "supply exactly two of --gamma, --eps, --delta".into(),
            ))
        }
    };
    if let Some(g) = a.gamma {
        record.query("gamma", g);
    }
    if let Some(e) = a.eps {
        record.query("epsilon", e);
    }
    if let Some(d) = a.delta {
        record.query("delta", d);
    }
    record
        .query("solve_for", solve_for)
        .query("method", method_key(a.method));
    echo_cfg(&mut record, &cfg);

    for m in methods(a.method) {
        let value = match (solve_for, m) {
            ("delta", _) => {
                let (g, e) = (a.gamma.unwrap(), a.eps.unwrap());
                match m {
                    MethodArg::Exact => to_value(delta_exact(alpha, g, e, &cfg)?),
                    MethodArg::Bound => to_value(delta_bound(alpha, g, e)?),
                    MethodArg::Baseline => plain(baseline_delta(alpha, g, e)?, "baseline"),
                    _ => plain(balle_delta(alpha, g, e)?, "balle"),
                }
            }
            ("epsilon", _) => {
                let (g, d) = (a.gamma.unwrap(), a.delta.unwrap());
                match m {
                    MethodArg::Exact => to_value(epsilon_exact(alpha, g, d, &cfg)?),
                    MethodArg::Bound => to_value(epsilon_bound(alpha, g, d)?),
                    MethodArg::Baseline => plain(baseline_epsilon(alpha, g, d)?, "baseline"),
                    _ => plain(balle_epsilon(alpha, g, d)?, "balle"),
                }
            }
            _ => {
                let (e, d) = (a.eps.unwrap(), a.delta.unwrap());
                match m {
                    MethodArg::Exact => to_value(gamma_exact(alpha, e, d, &cfg)?),
                    MethodArg::Bound => to_value(gamma_bound(alpha, e, d)?),
                    MethodArg::Baseline => plain(baseline_gamma(alpha, e, d)?, "baseline"),
                    _ => plain(balle_gamma(alpha, e, d)?, "balle"),
                }
            }
        };
        record.result(method_key(m), value);
    }
    finish(record, timing)
}

fn gaussian(mech: &Mechanism) -> Result<GaussianConfig, CliError> {
    Ok(match mech.q {
        Some(q) => GaussianConfig::subsampled(mech.sigma, q)?,
        None => GaussianConfig::new(mech.sigma, mech.sensitivity.unwrap_or(1.0))?,
    })
}

fn echo_mechanism(record: &mut OutputRecord, c: &GaussianConfig) {
    record
        .query("sigma", c.sigma())
        .query("sensitivity", c.sensitivity())
        .query("q", c.subsampling_q());
}

fn modes(m: ModeArg) -> Vec<Mode> {
    match m {
        ModeArg::ClosedForm => vec![Mode::ClosedForm],
        ModeArg::Exact => vec![Mode::Exact],
        ModeArg::Both => vec![Mode::ClosedForm, Mode::Exact],
    }
}

fn mode_key(m: Mode) -> &'static str {
    match m {
        Mode::ClosedForm => "closed_form",
        Mode::Exact => "exact",
    }
}

fn mode_arg_key(m: ModeArg) -> &'static str {
    match m {
        ModeArg::ClosedForm => "closed-form",
        ModeArg::Exact => "exact",
        ModeArg::Both => "both",
    }
}

pub fn compose(a: &ComposeArgs, timing: Option<Instant>) -> CmdResult {
    let cfg = search_cfg(&a.tol)?;
    let c = gaussian(&a.mech)?;
    let t = a.t as f64;
    let mut record = OutputRecord::new("compose");
    echo_mechanism(&mut record, &c);
    record
        .query("T", a.t)
        .query("delta", a.delta)
        .query("mode", mode_arg_key(a.mode));
    echo_cfg(&mut record, &cfg);

    let ma = ma_epsilon(c.rho(), t, a.delta)?;
    record.result("moments_accountant", json!({ "epsilon": ma }));
    let mut best = f64::INFINITY;
    for m in modes(a.mode) {
        let r = acct_epsilon(c.rho(), t, a.delta, m, &cfg)?;
        best = best.min(r.epsilon);
        record.result(mode_key(m), r);
    }
    let mut summary = json!({ "rho": c.rho(), "eps_ma": ma, "eps_ours": best, "gap": ma - best });
    if let Some(q) = c.subsampling_q() {
        summary["epochs"] = json!(q * t);
    }
    record.result("summary", summary);
    finish(record, timing)
}

pub fn max_t(a: &MaxTArgs, timing: Option<Instant>) -> CmdResult {
    let cfg = search_cfg(&a.tol)?;
    let c = gaussian(&a.mech)?;
    let mut record = OutputRecord::new("max-t");
    echo_mechanism(&mut record, &c);
    record
        .query("epsilon", a.eps)
        .query("delta", a.delta)
        .query("mode", mode_arg_key(a.mode));
    echo_cfg(&mut record, &cfg);

    let t_ma = ma_max_iterations(c.rho(), a.eps, a.delta)?;
    record.result("moments_accountant", json!({ "max_iterations": t_ma }));
    let mut best = 0u64;
    for m in modes(a.mode) {
        let t = max_iterations(c.rho(), a.eps, a.delta, m, &cfg)?;
        let eps_at = if t > 0 {
            Some(acct_epsilon(c.rho(), t as f64, a.delta, m, &cfg)?.epsilon)
        } else {
            None
        };
        best = best.max(t);
        record.result(
            mode_key(m),
            json!({ "max_iterations": t, "epsilon_at_max": eps_at }),
        );
    }
    let advantage = best as i128 - t_ma as i128;
    let mut summary = json!({ "rho": c.rho(), "advantage": advantage as i64 });
    if let Some(q) = c.subsampling_q() {
        summary["epochs_advantage"] = json!(q * advantage as f64);
    }
    record.result("summary", summary);
    finish(record, timing)
}

pub fn variance(a: &VarianceArgs, timing: Option<Instant>) -> CmdResult {
    let cfg = search_cfg(&a.tol)?;
    let t = a.t as f64;
    let mut record = OutputRecord::new("variance");
    record
        .query("T", a.t)
        .query("epsilon", a.eps)
        .query("delta", a.delta);
    echo_cfg(&mut record, &cfg);

    let ma = ma_required_variance(t, a.eps, a.delta)?;
    let threshold = 2.0 * a.delta * -a.delta.ln();
    if a.eps <= threshold {
        return Err(CliError::Infeasible(format!(
            "epsilon must exceed 2 delta log(1/delta) = {threshold}, got {}",
            a.eps
        )));
    }
    let ours = required_variance(t, a.eps, a.delta, &cfg)?;
    record
        .result("ours", ours)
        .result("moments_accountant", json!({ "sigma_sq": ma }))
        .result(
            "summary",
            json!({ "reduction": ma - ours.sigma_sq, "ratio": ours.sigma_sq / ma }),
        );
    finish(record, timing)
}

struct Sweep {
    config: GaussianConfig,
    delta: f64,
    ts: Vec<u64>,
}

fn t_sweep(a: &CurveArgs, from: u64, to: Option<u64>, step: u64) -> Result<Vec<u64>, CliError> {
    let from = a.t_from.unwrap_or(from);
    let to = a
        .t_to
        .or(to)
        .ok_or_else(|| CliError::Usage("--t-to is required without --fig".into()))?;
    let step = a.t_step.unwrap_or(step);
    if from == 0 || step == 0 {
        return Err(CliError::Usage("--t-from and --t-step must be >= 1".into()));
    }
    if from > to {
        return Err(CliError::Usage(format!("empty sweep: t-from {from} > t-to {to}")));
    }
    Ok((from..=to).step_by(step as usize).collect())
}

fn sweep(a: &CurveArgs) -> Result<Sweep, CliError> {
    match a.fig {
        Some(2) => Ok(Sweep {
            config: GaussianConfig::new(20.0, 1.0)?,
            delta: 1e-5,
            ts: t_sweep(a, 1, Some(1000), 1)?,
        }),
        Some(3) => Ok(Sweep {
            config: GaussianConfig::subsampled(4.0, 0.001)?,
            delta: 1e-5,
            ts: t_sweep(a, 1000, Some(1_000_000), 1000)?,
        }),
        _ => {
            let sigma = a
                .sigma
                .ok_or_else(|| CliError::Usage("curve needs --fig or --sigma".into()))?;
            let delta = a
                .delta
                .ok_or_else(|| CliError::Usage("curve needs --delta with --sigma".into()))?;
            let mech = Mechanism {
                sigma,
                q: a.q,
                sensitivity: a.sensitivity,
            };
            Ok(Sweep {
                config: gaussian(&mech)?,
                delta,
                ts: t_sweep(a, 1, None, 1)?,
            })
        }
    }
}

fn delta_curve(a: &CurveArgs, cfg: &ScalarSearchConfig) -> Result<(Table, OutputRecord), CliError> {
    if a.alpha.is_empty() || a.alpha.len() != a.eps.len() {
        return Err(CliError::Usage(
            "--fig 1 needs matching --alpha and --eps pairs".into(),
        ));
    }
    let (lo, hi, n) = (a.delta_from, a.delta_to, a.delta_points);
    if !(lo > 0.0 && lo <= hi && hi < 1.0) || n < 2 {
        return Err(CliError::Usage(
            "delta sweep needs 0 < delta-from <= delta-to < 1 and at least 2 points".into(),
        ));
    }
    let deltas: Vec<f64> = (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect();
    let jobs: Vec<(f64, f64, f64)> = a
        .alpha
        .iter()
        .zip(&a.eps)
        .flat_map(|(&al, &e)| deltas.iter().map(move |&d| (al, e, d)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(al, e, d)| -> Result<Vec<serde_json::Value>, CliError> {
            let exact = gamma_exact(al, e, d, cfg)?.value;
            let bound = gamma_bound(al, e, d)?.value;
            Ok(vec![
                to_value(al),
                to_value(e),
                to_value(d),
                to_value(exact),
                to_value(bound),
            ])
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut table = Table::new(&["alpha", "eps", "delta", "gamma_exact", "gamma_bound"]);
    table.rows = rows;
    let mut record = OutputRecord::new("curve");
    record
        .query("fig", 1)
        .query("alpha", &a.alpha)
        .query("epsilon", &a.eps)
        .query("delta_from", lo)
        .query("delta_to", hi)
        .query("delta_points", n);
    Ok((table, record))
}

fn t_curve(a: &CurveArgs, cfg: &ScalarSearchConfig) -> Result<(Table, OutputRecord), CliError> {
    let s = sweep(a)?;
    let ms = modes(a.mode);
    let rows = privacy_curve(&s.config, s.delta, &s.ts, &ms, cfg)?;
    let with_epochs = s.config.subsampling_q().is_some();
    let with_exact = ms.contains(&Mode::Exact);
    let mut cols = vec!["T"];
    if with_epochs {
        cols.push("epochs");
    }
    cols.extend(["eps_ma", "eps_ours", "gap"]);
    if with_exact {
        cols.push("eps_ours_exact");
    }
    let mut table = Table::new(&cols);
    for r in rows {
        let mut row = vec![to_value(r.t)];
        if let Some(e) = r.epochs {
            row.push(to_value(e));
        }
        row.extend([to_value(r.eps_ma), to_value(r.eps_ours), to_value(r.gap)]);
        if with_exact {
            row.push(to_value(r.eps_ours_exact));
        }
        table.rows.push(row);
    }
    let mut record = OutputRecord::new("curve");
    record.query("fig", a.fig);
    echo_mechanism(&mut record, &s.config);
    record
        .query("delta", s.delta)
        .query("t_from", s.ts.first())
        .query("t_to", s.ts.last())
        .query("points", s.ts.len())
        .query("mode", mode_arg_key(a.mode));
    Ok((table, record))
}

pub fn curve(a: &CurveArgs, timing: Option<Instant>) -> CmdResult {
    let cfg = search_cfg(&a.tol)?;
    let (table, mut record) = if a.fig == Some(1) {
        delta_curve(a, &cfg)?
    } else {
        t_curve(a, &cfg)?
    };
    echo_cfg(&mut record, &cfg);
    let out = a.out.as_deref();
    match a.format {
        Format::Csv => emit(out, |w| table.write_csv(w)),
        Format::Json => {
            record.result("curve", &table);
            record.metadata.wall_time_s = timing.map(|t| t.elapsed().as_secs_f64());
            emit(out, |w| write_json(w, &record))
        }
    }
}

const WITNESS_TOL: f64 = 1e-6;

pub fn oracle_check(a: &OracleArgs, timing: Option<Instant>) -> CmdResult {
    let cfg = ScalarSearchConfig::default();
    let grid = GridSpec {
        n_coarse: a.grid_n,
        n_refine: a.refine_n,
        ..GridSpec::default()
    };
    let mut record = OutputRecord::new("oracle-check");
    record
        .query("alpha", a.alpha)
        .query("epsilon", a.eps)
        .query("delta", a.delta)
        .query("grid", grid)
        .query("samples", a.samples)
        .query("gap_tol", a.gap_tol)
        .query("witness_tol", WITNESS_TOL);
    echo_cfg(&mut record, &cfg);
    record.metadata.seed = Some(a.seed);

    let exact = gamma_exact(a.alpha, a.eps, a.delta, &cfg)?;
    let brute = brute_force_gamma(a.alpha, a.eps, a.delta, &grid)?;
    let gap = (exact.value - brute.gamma).abs();
    let qs = verify_q_star(a.alpha, a.eps, a.delta, &grid)?;
    let cr = joint_range_containment(a.alpha, a.eps, a.samples, a.seed)?;

    let checks = [
        (
            "brute_force_agreement",
            gap <= a.gap_tol && brute.gamma >= exact.value - 1e-9,
        ),
        (
            "q_star",
            qs.max_gap <= a.gap_tol && qs.grid_beats_q_star == 0 && qs.monotone_violations == 0,
        ),
        (
            "containment",
            cr.violations == 0 && cr.witness_max_error <= WITNESS_TOL,
        ),
    ];
    record
        .result("exact", exact)
        .result("brute_force", json!({ "gamma": brute.gamma, "p": brute.p, "q": brute.q, "gap": gap }))
        .result("q_star", qs)
        .result("containment", cr)
        .result(
            "checks",
            checks
                .iter()
                .map(|(k, v)| (k.to_string(), json!(v)))
                .collect::<serde_json::Map<_, _>>(),
        );
    finish(record, timing)?;
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed.join(", ")))
    }
}
