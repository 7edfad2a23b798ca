//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints one PASS/FAIL line; exits non-zero on any failure.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rdp_accountant::conversion::{
    balle_epsilon, baseline_delta, delta_bound, delta_exact, epsilon_bound, epsilon_exact,
    gamma_bound, gamma_exact, zero_epsilon_region,
};
use rdp_accountant::divergences::{
    chi_alpha_binary, chi_of_gamma, gamma_of_chi, hockey_stick_binary, renyi_binary,
    BernoulliPair,
};
use rdp_accountant::gaussian::{
    acct_epsilon, ma_epsilon, ma_max_iterations, ma_required_variance, max_iterations,
    required_variance, rho_gaussian, rho_subsampled, Mode,
};
use rdp_accountant::optimizer::{invert_monotone, minimize_unimodal, ScalarSearchConfig};
use rdp_accountant::oracle::{
    brute_force_gamma, joint_range_containment, verify_q_star, GridSpec, DEFAULT_SEED,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn cfg() -> ScalarSearchConfig {
    ScalarSearchConfig::default()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: rdp_accountant::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xacce_0000 + tag)
}

/// Uniform on `(0, 1]`.
fn open_unit(r: &mut ChaCha8Rng) -> f64 {
    1.0 - r.gen::<f64>()
}

fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + r.gen::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn oracle_equivalence() -> Outcome {
    let mut r = rng(1);
    let grid = GridSpec::default();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let alpha = 1.0 + 49.0 * open_unit(&mut r);
        let eps = 5.0 * r.gen::<f64>();
        let delta = 0.5 * r.gen::<f64>();
        let exact = ok(gamma_exact(alpha, eps, delta, &cfg()))?.value;
        let brute = ok(brute_force_gamma(alpha, eps, delta, &grid))?.gamma;
        let gap = (exact - brute).abs();
        worst = worst.max(gap);
        ensure(gap <= 1e-4, || {
            format!("alpha={alpha} eps={eps} delta={delta}: exact={exact} brute={brute}")
        })?;
        ensure(brute >= exact - 1e-9, || {
            format!("grid beat the optimiser at alpha={alpha} eps={eps} delta={delta}")
        })?;
    }
    Ok(format!("20 triples, max |gap| = {worst:.2e}"))
}

fn exact_branch_identity() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let delta = 0.01 + 0.98 * r.gen::<f64>();
        let alpha = (1.0 / delta).max(1.0 + 1e-9) * (1.0 + 10.0 * r.gen::<f64>());
        let eps = 5.0 * r.gen::<f64>();
        let v = ok(gamma_exact(alpha, eps, delta, &cfg()))?.value;
        let expect = eps - (-delta).ln_1p();
        let err = (v - expect).abs();
        worst = worst.max(err);
        ensure(err <= 1e-9, || {
            format!("alpha={alpha} eps={eps} delta={delta}: {v} vs {expect}")
        })?;
    }
    Ok(format!("50 triples, max error = {worst:.2e}"))
}

fn bound_soundness() -> Outcome {
    let mut r = rng(3);
    let mut slack: f64 = f64::INFINITY;
    for i in 0..500 {
        let alpha = 1.0 + 49.0 * open_unit(&mut r);
        let eps = 5.0 * r.gen::<f64>();
        let delta = if i % 25 == 0 { 0.0 } else { 0.5 * r.gen::<f64>() };
        let exact = ok(gamma_exact(alpha, eps, delta, &cfg()))?.value;
        let bound = ok(gamma_bound(alpha, eps, delta))?.value;
        ensure(bound <= exact + 1e-8, || {
            format!("alpha={alpha} eps={eps} delta={delta}: bound {bound} > exact {exact}")
        })?;
        if delta == 0.0 || alpha * delta >= 1.0 {
            ensure((bound - exact).abs() <= 1e-9, || {
                format!("no equality at alpha={alpha} eps={eps} delta={delta}")
            })?;
        }
        slack = slack.min(exact - bound);
    }
    Ok(format!("500 triples, min(exact - bound) = {slack:.2e}"))
}

fn figure_two() -> Outcome {
    let rho = ok(rho_gaussian(20.0, 1.0))?;
    let mut max_gap: f64 = 0.0;
    let mut at = 0;
    for t in 1..=1000u64 {
        let ma = ok(ma_epsilon(rho, t as f64, 1e-5))?;
        let ours = ok(acct_epsilon(rho, t as f64, 1e-5, Mode::ClosedForm, &cfg()))?.epsilon;
        ensure(ours <= ma, || format!("T={t}: ours {ours} > MA {ma}"))?;
        if ma - ours > max_gap {
            max_gap = ma - ours;
            at = t;
        }
    }
    ensure((max_gap - 0.75).abs() <= 0.05, || {
        format!("max gap {max_gap} at T={at}")
    })?;
    Ok(format!("max gap {max_gap:.4} at T={at}"))
}

fn iteration_advantage() -> Outcome {
    let rho = ok(rho_gaussian(20.0, 1.0))?;
    let mut parts = Vec::new();
    for eps in [6.0, 6.5, 7.0, 7.5, 8.0] {
        let ours = ok(max_iterations(rho, eps, 1e-5, Mode::ClosedForm, &cfg()))?;
        let ma = ok(ma_max_iterations(rho, eps, 1e-5))?;
        let adv = ours as i64 - ma as i64;
        ensure(adv >= 100, || format!("eps={eps}: ours {ours}, MA {ma}"))?;
        parts.push(format!("{eps}:+{adv}"));
    }
    Ok(parts.join(" "))
}

fn ma_closed_form() -> Outcome {
    let mut r = rng(6);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rho = log_uniform(&mut r, 1e-6, 1.0);
        let t = r.gen_range(1..=10_000u64) as f64;
        let delta = log_uniform(&mut r, 1e-10, 0.5);
        let l = -delta.ln();
        // classical conversion of (α, αρT)-RDP, minimised over v = log(α - 1)
        let m = ok(minimize_unimodal(
            |v| {
                let am1 = v.exp();
                (1.0 + am1) * rho * t + l / am1
            },
            -30.0,
            30.0,
            &cfg(),
        ))?;
        let closed = ok(ma_epsilon(rho, t, delta))?;
        let err = (m.value - closed).abs() / closed.max(1.0);
        worst = worst.max(err);
        ensure(err <= 1e-6, || {
            format!("rho={rho} T={t} delta={delta}: numeric {} closed {closed}", m.value)
        })?;
    }
    Ok(format!("100 samples, max scaled error = {worst:.2e}"))
}

fn balle_comparison() -> Outcome {
    let mut r = rng(7);
    let mut margin: f64 = f64::INFINITY;
    for _ in 0..200 {
        let alpha = 1.0 + 49.0 * open_unit(&mut r);
        let gamma = 5.0 * r.gen::<f64>();
        let delta = log_uniform(&mut r, 1e-10, 0.999 / alpha);
        let ours = ok(epsilon_bound(alpha, gamma, delta))?.value;
        let balle = ok(balle_epsilon(alpha, gamma, delta))?.max(0.0);
        ensure(ours <= balle + 1e-10, || {
            format!("alpha={alpha} gamma={gamma} delta={delta}: {ours} > {balle}")
        })?;
        margin = margin.min(balle - ours);
    }
    Ok(format!("200 samples, min margin = {margin:.2e}"))
}

fn zero_epsilon() -> Outcome {
    let mut r = rng(8);
    let mut found = 0;
    let mut worst: f64 = 0.0;
    let mut attempts = 0;
    while found < 50 {
        attempts += 1;
        ensure(attempts < 100_000, || "could not sample 50 regions".into())?;
        let alpha = 1.0 + 49.0 * open_unit(&mut r);
        let gamma = log_uniform(&mut r, 1e-6, 1.0);
        let region = ok(zero_epsilon_region(alpha, gamma))?;
        let Some((lo, hi)) = region.interval else {
            continue;
        };
        if hi <= lo {
            continue;
        }
        found += 1;
        let mut deltas: Vec<f64> = (1..=5).map(|k| lo + (hi - lo) * k as f64 / 6.0).collect();
        let free = region.delta_free;
        deltas.extend([0.1, 0.5, 0.9].map(|f| free + (1.0 - free) * f));
        for d in deltas {
            let e = ok(epsilon_exact(alpha, gamma, d, &cfg()))?.value;
            worst = worst.max(e);
            ensure(e <= 1e-3, || {
                format!("alpha={alpha} gamma={gamma} delta={d}: epsilon {e}")
            })?;
        }
    }
    Ok(format!("50 regions, max epsilon = {worst:.2e}"))
}

fn variance_dominance() -> Outcome {
    let mut parts = Vec::new();
    for delta in [1e-4, 1e-6, 1e-8] {
        let ours = ok(required_variance(100.0, 1.0, delta, &cfg()))?;
        let ma = ok(ma_required_variance(100.0, 1.0, delta))?;
        ensure(ours.sigma_sq <= ma, || {
            format!("delta={delta}: ours {} > MA {ma}", ours.sigma_sq)
        })?;
        let rho = 1.0 / (2.0 * ours.sigma_sq);
        let back = ok(acct_epsilon(rho, 100.0, delta, Mode::ClosedForm, &cfg()))?.epsilon;
        ensure(back <= 1.0 + 1e-6, || {
            format!("delta={delta}: sigma^2={} gives epsilon {back}", ours.sigma_sq)
        })?;
        parts.push(format!("{delta:e}: {:.3}/{ma:.3}", ours.sigma_sq));
    }
    Ok(parts.join(" "))
}

fn figure_three() -> Outcome {
    let q = 0.001;
    let delta = 1e-5;
    let rho = ok(rho_subsampled(4.0, q))?;
    let t_max = 1_000_000u64;
    for t in (1000..=t_max).step_by(1000) {
        let ma = ok(ma_epsilon(rho, t as f64, delta))?;
        let ours = ok(acct_epsilon(rho, t as f64, delta, Mode::ClosedForm, &cfg()))?.epsilon;
        ensure(ours <= ma, || format!("T={t}: ours {ours} > MA {ma}"))?;
    }
    let eps_top = ok(ma_epsilon(rho, t_max as f64, delta))?;
    let t_ma = ok(ma_max_iterations(rho, eps_top, delta))?;
    let t_ours = ok(max_iterations(rho, eps_top, delta, Mode::ClosedForm, &cfg()))?;
    let epochs = q * (t_ours as f64 - t_ma as f64);
    ensure(epochs >= 80.0, || {
        format!("eps={eps_top}: T_ours={t_ours} T_MA={t_ma}, {epochs} epochs")
    })?;
    Ok(format!("at eps={eps_top:.3}: +{epochs:.1} epochs"))
}

fn property_suite() -> Outcome {
    let mut r = rng(11);
    let c = cfg();

    // divergences
    for _ in 0..1000 {
        let pair = ok(BernoulliPair::new(open_unit(&mut r) * 0.999, open_unit(&mut r) * 0.999))?;
        let alpha = 1.0 + 20.0 * open_unit(&mut r);
        let mut prev = f64::INFINITY;
        for k in 0..20 {
            let h = ok(hockey_stick_binary(&pair, 1.0 + 0.25 * k as f64))?;
            ensure((0.0..1.0).contains(&h) && h <= prev, || format!("hockey-stick {pair:?}"))?;
            prev = h;
        }
        let chi = ok(chi_alpha_binary(&pair, alpha))?;
        let d = ok(renyi_binary(&pair, alpha))?;
        ensure(chi >= 0.0, || format!("negative chi at {pair:?}"))?;
        if chi.is_finite() {
            let via = ((alpha - 1.0) * chi).ln_1p() / (alpha - 1.0);
            ensure((via - d).abs() <= 1e-10 * d.max(1.0), || {
                format!("identity fails at {pair:?} alpha={alpha}")
            })?;
        }
        let g = 50.0 / (alpha - 1.0) * r.gen::<f64>();
        let back = ok(gamma_of_chi(ok(chi_of_gamma(g, alpha))?, alpha))?;
        ensure((back - g).abs() <= 1e-10 * g.max(1e-300), || {
            format!("chi/gamma round trip at gamma={g} alpha={alpha}")
        })?;
    }

    // optimizer
    let inv = ok(invert_monotone(|x| x.powi(3) + x, 3.0, -5.0, 5.0, true, &c))?;
    ensure((inv.powi(3) + inv - 3.0).abs() <= 1e-8, || "invert round trip".into())?;

    // conversion: convexity, monotonicity, dominance, witnesses
    for _ in 0..40 {
        let alpha = 1.0 + 30.0 * open_unit(&mut r);
        let eps = 3.0 * r.gen::<f64>();
        let mut ds = [0.45 * r.gen::<f64>(), 0.45 * r.gen::<f64>()];
        ds.sort_by(f64::total_cmp);
        let mid = 0.5 * (ds[0] + ds[1]);
        let h = |d: f64| -> Result<f64, String> {
            Ok(((alpha - 1.0) * ok(gamma_exact(alpha, eps, d, &c))?.value).exp())
        };
        let (a, m, b) = (h(ds[0])?, h(mid)?, h(ds[1])?);
        ensure(m <= 0.5 * (a + b) + 1e-8 * m.max(1.0), || {
            format!("convexity alpha={alpha} eps={eps} deltas={ds:?}")
        })?;
        let g0 = ok(gamma_exact(alpha, eps, ds[0], &c))?.value;
        let g1 = ok(gamma_exact(alpha, eps, ds[1], &c))?.value;
        let g2 = ok(gamma_exact(alpha, eps + 0.1, ds[1], &c))?.value;
        ensure(g0 <= g1 + 1e-12 && g1 <= g2 + 1e-12, || {
            format!("monotonicity alpha={alpha} eps={eps}")
        })?;

        let gamma = 0.5 * g1.max(0.05) + 0.05;
        let de = ok(delta_exact(alpha, gamma, eps, &c))?.value;
        let db = ok(delta_bound(alpha, gamma, eps))?.value;
        let dbase = ok(baseline_delta(alpha, gamma, eps))?;
        ensure(de <= db + 1e-9 && db <= dbase + 1e-12, || {
            format!("delta chain alpha={alpha} gamma={gamma} eps={eps}: {de} {db} {dbase}")
        })?;
        let delta = (0.999 / alpha) * r.gen::<f64>() + 1e-12;
        let ee = ok(epsilon_exact(alpha, gamma, delta, &c))?.value;
        let eb = ok(epsilon_bound(alpha, gamma, delta))?.value;
        let balle = ok(balle_epsilon(alpha, gamma, delta))?.max(0.0);
        ensure(ee <= eb + 1e-9 && eb <= balle + 1e-10, || {
            format!("epsilon chain alpha={alpha} gamma={gamma} delta={delta}")
        })?;

        if ds[1] > 0.0 {
            let res = ok(gamma_exact(alpha, eps, ds[1], &c))?;
            if let Some(p) = res.argmin_p {
                let pair = ok(BernoulliPair::new(p, (p - ds[1]) / eps.exp()))?;
                let d = ok(renyi_binary(&pair, alpha))?;
                ensure((d - res.value).abs() <= 1e-6, || {
                    format!("witness alpha={alpha} eps={eps} delta={}", ds[1])
                })?;
            }
        }
    }

    // composition
    let rho = ok(rho_gaussian(20.0, 1.0))?;
    let at = |rho: f64, t: f64, d: f64| {
        acct_epsilon(rho, t, d, Mode::ClosedForm, &c).map(|x| x.epsilon)
    };
    for t in [1.0, 10.0, 100.0, 1000.0] {
        let base = ok(at(rho, t, 1e-5))?;
        ensure(ok(at(rho, t + 1.0, 1e-5))? >= base - 1e-12, || format!("T-monotone at {t}"))?;
        ensure(ok(at(rho * 1.1, t, 1e-5))? >= base - 1e-12, || format!("rho-monotone at {t}"))?;
        ensure(ok(at(rho, t, 2e-5))? <= base + 1e-12, || format!("delta-monotone at {t}"))?;
        let ex = ok(acct_epsilon(rho, t, 1e-5, Mode::Exact, &c))?.epsilon;
        ensure(ex <= base + 1e-9, || format!("exact above closed form at T={t}"))?;
    }
    for eps in [1.0, 4.0] {
        let t = ok(max_iterations(rho, eps, 1e-5, Mode::ClosedForm, &c))?;
        ensure(
            ok(at(rho, t as f64, 1e-5))? <= eps && ok(at(rho, (t + 1) as f64, 1e-5))? > eps,
            || format!("max_iterations pair at eps={eps}"),
        )?;
    }
    let rv = ok(required_variance(100.0, 1.0, 1e-6, &c))?;
    let e0 = ok(acct_epsilon(1.0 / (2.0 * rv.sigma_sq), 100.0, 1e-6, Mode::ClosedForm, &c))?.eps0;
    ensure((e0.value - 1.0).abs() <= 1e-6, || format!("variance feedback gives {}", e0.value))?;

    // oracle
    let coarse = GridSpec {
        n_coarse: 1024,
        n_refine: 256,
        ..GridSpec::default()
    };
    let b1 = ok(brute_force_gamma(3.0, 0.5, 0.05, &coarse))?.gamma;
    let b2 = ok(brute_force_gamma(3.0, 0.5, 0.05, &GridSpec { n_refine: 512, ..coarse }))?.gamma;
    ensure(b2 <= b1, || format!("refinement increased the minimum: {b1} -> {b2}"))?;
    let qs = ok(verify_q_star(2.0, 1.0, 0.1, &GridSpec::default()))?;
    ensure(
        qs.max_gap <= 1e-4 && qs.grid_beats_q_star == 0 && qs.monotone_violations == 0,
        || format!("q* report {qs:?}"),
    )?;
    let cr = ok(joint_range_containment(2.0, 1.0, 100_000, DEFAULT_SEED))?;
    ensure(cr.violations == 0 && cr.witness_max_error <= 1e-6, || {
        format!("containment report {cr:?}")
    })?;

    Ok(format!(
        "q* gap {:.1e}, containment 0/{} (exit codes: cli tests)",
        qs.max_gap, cr.samples
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("oracle equivalence", oracle_equivalence),
        ("exact branch identity", exact_branch_identity),
        ("bound soundness", bound_soundness),
        ("sigma=20 curve gap", figure_two),
        ("iteration advantage", iteration_advantage),
        ("moments accountant closed form", ma_closed_form),
        ("bound vs Balle et al.", balle_comparison),
        ("zero-epsilon region", zero_epsilon),
        ("variance dominance", variance_dominance),
        ("noisy SGD curve", figure_three),
        ("property suites", property_suite),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail}; {secs:.1}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why}; {secs:.1}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
