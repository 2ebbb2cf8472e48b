//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use common::{power_pair, queue_pair, random_flows, random_network, rng};
use commonlines::charac::{alpha_for_threshold, lambda_bar, psi_eval, thresholds};
use commonlines::cli::sweep::{demand_grid, sweep, SweepRow};
use commonlines::cost::{cost_report, optimal_social_cost, wardrop_social_cost};
use commonlines::model::{freq_eval, rho_solve, Network};
use commonlines::strategy::{brute_force_social_optimum, phi_oracle};
use commonlines::wfun::{concavity_margin, w_deriv, w_eval};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(value: f64, expected: f64, tol: f64, name: &str) -> Result<(), String> {
    ensure((value - expected).abs() <= tol, || {
        format!("{name} = {value}, expected {expected} +/- {tol}")
    })
}

fn timed<F: FnOnce() -> Outcome>(limit: Duration, f: F) -> Outcome {
    let start = Instant::now();
    let detail = f()?;
    let elapsed = start.elapsed();
    ensure(elapsed < limit, || {
        format!("took {elapsed:?}, limit {limit:?}")
    })?;
    Ok(format!("{detail}; {elapsed:.2?}"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn check_thresholds(net: &Network, expected: [f64; 4]) -> Outcome {
    let report = thresholds(net).map_err(e)?;
    let got = [report.l_so(), report.u_so(), report.l_w(), report.u_w()];
    for ((name, value), exp) in ["l_so", "u_so", "l_w", "u_w"].iter().zip(got).zip(expected) {
        within(value.ok_or(format!("{name} missing"))?, exp, 0.5, name)?;
    }
    Ok(format!(
        "l_so={:.4} u_so={:.4} l_w={:.4} u_w={:.4}",
        got[0].unwrap(),
        got[1].unwrap(),
        got[2].unwrap(),
        got[3].unwrap()
    ))
}

fn queue_thresholds() -> Outcome {
    timed(Duration::from_secs(1), || {
        check_thresholds(&queue_pair(), [202.77, 329.51, 276.09, 448.65])
    })
}

fn power_table() -> Outcome {
    timed(Duration::from_secs(1), || {
        let net = power_pair();
        let r = cost_report(&net, 100.0).map_err(e)?;
        within(r.ue_flows.v[0], 75.94, 0.05, "v_ue_1")?;
        within(r.ue_flows.v[1], 24.06, 0.05, "v_ue_2")?;
        within(r.so_flows.v[0], 61.54, 0.05, "v_so_1")?;
        within(r.so_flows.v[1], 38.46, 0.05, "v_so_2")?;
        within(r.wsc, 50.0, 0.05, "WSC")?;
        within(r.osc, 48.309, 0.05, "OSC")?;
        within(r.poa, 1.035, 0.005, "PoA")?;
        Ok(format!(
            "UE=({:.4}, {:.4}) SO=({:.4}, {:.4}) WSC={:.5} OSC={:.5} PoA={:.6}",
            r.ue_flows.v[0], r.ue_flows.v[1], r.so_flows.v[0], r.so_flows.v[1], r.wsc, r.osc, r.poa
        ))
    })
}

fn power_thresholds() -> Outcome {
    check_thresholds(&power_pair(), [38.59, 62.72, 75.94, 123.4])
}

fn poa_regime_one(net: &Network, to: f64) -> Result<String, String> {
    let report = thresholds(net).map_err(e)?;
    let (l_so, u_w, l_w) = (
        report.l_so().unwrap(),
        report.u_w().unwrap(),
        report.l_w().unwrap(),
    );
    let rows: Vec<SweepRow> = sweep(net, 1.0, to, 500).map_err(e)?;
    let step = (to - 1.0) / 499.0;
    let mut min_inside = f64::INFINITY;
    let mut max_outside_dev: f64 = 0.0;
    for r in &rows {
        ensure(r.poa >= 1.0 - 1e-9, || {
            format!("PoA {} < 1 at x = {}", r.poa, r.x)
        })?;
        if r.x < l_so || r.x > u_w {
            max_outside_dev = max_outside_dev.max((r.poa - 1.0).abs());
            ensure((r.poa - 1.0).abs() <= 1e-6, || {
                format!("PoA {} at x = {} outside", r.poa, r.x)
            })?;
        } else if r.x > l_so && r.x < u_w {
            min_inside = min_inside.min(r.poa - 1.0);
            ensure(r.poa > 1.0, || {
                format!("PoA {} at x = {} inside", r.poa, r.x)
            })?;
        }
    }
    let peak = rows.iter().max_by(|a, b| a.poa.total_cmp(&b.poa)).unwrap();
    ensure((peak.x - l_w).abs() <= 2.0 * step, || {
        format!("PoA peaks at x = {}, l_w = {l_w}, step {step}", peak.x)
    })?;
    Ok(format!(
        "peak PoA {:.5} at x={:.2} (l_w={:.2}), max |PoA-1| outside {:.1e}, min PoA-1 inside {:.1e}",
        peak.poa, peak.x, l_w, max_outside_dev, min_inside
    ))
}

fn poa_regime() -> Outcome {
    let a = poa_regime_one(&queue_pair(), 500.0).map_err(|m| format!("queue: {m}"))?;
    let b = poa_regime_one(&power_pair(), 160.0).map_err(|m| format!("power: {m}"))?;
    Ok(format!("queue: {a} | power: {b}"))
}

fn phi_equivalence() -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = r.gen_range(1..=4);
        let net = random_network(&mut r, n);
        let v = random_flows(&mut r, &net);
        let freqs: Vec<f64> = net
            .lines()
            .iter()
            .zip(&v)
            .map(|(l, &vi)| freq_eval(l, vi))
            .collect::<Result<_, _>>()
            .map_err(e)?;
        let ratios: Vec<f64> = v.iter().zip(&freqs).map(|(vi, fi)| vi / fi).collect();
        let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
        let (value, h) = phi_oracle(&net, &v).map_err(e)?;
        worst = worst.max((value - max_ratio).abs());
        within(value, max_ratio, 1e-8, &format!("case {case}: value"))?;
        // Constraints: h >= 0 and sum_{s ni i} h_s tau_s = v_i / f_i(v_i).
        let mut lhs = vec![0.0; n];
        let mut objective = 0.0;
        for (s, hs) in h.iter() {
            ensure(hs >= 0.0, || format!("case {case}: negative flow on {s}"))?;
            let tau = 1.0 / s.members().map(|j| freqs[j]).sum::<f64>();
            objective += hs * tau;
            for i in s.members() {
                lhs[i] += hs * tau;
            }
        }
        for i in 0..n {
            worst = worst.max((lhs[i] - ratios[i]).abs());
            within(
                lhs[i],
                ratios[i],
                1e-8,
                &format!("case {case}: constraint {i}"),
            )?;
        }
        within(objective, value, 1e-8, &format!("case {case}: objective"))?;
    }
    Ok(format!("100 instances, worst deviation {worst:.1e}"))
}

fn brute_force_agreement() -> Outcome {
    let mut r = rng(6);
    let mut worst_gap: f64 = 0.0;
    let mut detail = Vec::new();
    for case in 0..20 {
        let n = if case < 10 { 2 } else { 3 };
        let net = random_network(&mut r, n);
        let x = r.gen_range(0.05..0.6) * net.total_saturation();
        let osc = optimal_social_cost(&net, x).map_err(e)?;
        let resolution = if n == 2 { 40 } else { 12 };
        let best = brute_force_social_optimum(&net, x, resolution).map_err(e)?;
        ensure(osc <= best.cost + 1e-6, || {
            format!(
                "case {case}: characterization {osc} above brute force {}",
                best.cost
            )
        })?;
        ensure(best.history.windows(2).all(|w| w[1] <= w[0]), || {
            format!(
                "case {case}: refinement history not monotone: {:?}",
                best.history
            )
        })?;
        let coarse_gap = best.history[0] - osc;
        let gap = best.cost - osc;
        ensure(gap <= 1e-3 * osc, || {
            format!(
                "case {case}: brute force {} exceeds {osc} by more than 0.1%",
                best.cost
            )
        })?;
        ensure(gap <= coarse_gap + 1e-12, || {
            format!("case {case}: refinement moved away")
        })?;
        worst_gap = worst_gap.max(gap / osc);
        if case == 0 || case == 10 {
            detail.push(format!("n={n} history {:?} vs {osc:.6}", best.history));
        }
    }
    Ok(format!(
        "worst relative gap {worst_gap:.1e}; {}",
        detail.join("; ")
    ))
}

/// Lowest `alpha` with `w_1'(alpha) = target`, by bisection on the closed form.
fn queue_alpha(capacity: f64, target_rhs: f64, with_derivative_factor: bool) -> f64 {
    let g = |a: f64| {
        let r = (a / (1.0 + a)).powf(capacity);
        if with_derivative_factor {
            r * (1.0 + capacity / (1.0 + a))
        } else {
            r
        }
    };
    let (mut lo, mut hi) = (0.0, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < target_rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn piecewise_closed_forms() -> Outcome {
    let net = queue_pair();
    let (t1, t2, mu1, mu2, k) = (0.25, 0.5, 16.0, 10.0, 20.0);
    let rhs = 1.0 - 1.0 / (mu1 * (t2 - t1));
    let w = |mu: f64, a: f64| mu * a * (1.0 - (a / (1.0 + a)).powf(k));
    let wd = |mu: f64, a: f64| mu * (1.0 - (a / (1.0 + a)).powf(k) * (1.0 + k / (1.0 + a)));
    let a_so = queue_alpha(k, rhs, true);
    let a_w = queue_alpha(k, rhs, false);
    let (l_so, u_so) = (w(mu1, a_so), w(mu1, a_so) + w(mu2, a_so));
    let (l_w, u_w) = (w(mu1, a_w), w(mu1, a_w) + w(mu2, a_w));
    let share = mu1 / (mu1 + mu2);
    let t_mu = share * t1 + (1.0 - share) * t2;
    let wait = |flow: f64| -> Result<f64, String> {
        let rho = rho_solve(mu1, 20, flow).map_err(e)?;
        Ok(rho / (1.0 - rho))
    };
    let mut worst: f64 = 0.0;
    let mut branches = [[0usize; 3]; 2];
    for x in demand_grid(10.0, 510.0, 30) {
        let (osc_ref, b) = if x <= l_so {
            (t1 * x + wait(x)?, 0)
        } else if x < u_so {
            (t2 * x - w(mu1, a_so) / wd(mu1, a_so) + a_so, 1)
        } else {
            (t_mu * x + wait(share * x)?, 2)
        };
        branches[0][b] += 1;
        let (wsc_ref, b) = if x <= l_w {
            (t1 * x + wait(x)?, 0)
        } else if x < u_w {
            (t2 * x, 1)
        } else {
            (t_mu * x + wait(share * x)?, 2)
        };
        branches[1][b] += 1;
        let osc = optimal_social_cost(&net, x).map_err(e)?;
        let wsc = wardrop_social_cost(&net, x).map_err(e)?;
        for (name, got, want) in [("OSC", osc, osc_ref), ("WSC", wsc, wsc_ref)] {
            let rel = (got - want).abs() / want;
            worst = worst.max(rel);
            ensure(rel <= 1e-4, || {
                format!("{name} at x = {x}: {got} vs {want}")
            })?;
        }
    }
    ensure(branches.iter().all(|b| b.iter().all(|&c| c > 0)), || {
        format!("not every branch sampled: {branches:?}")
    })?;
    Ok(format!(
        "30 demands, branch counts OSC {:?} WSC {:?}, worst relative error {worst:.1e}",
        branches[0], branches[1]
    ))
}

fn derivative_checks() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut max_margin = f64::NEG_INFINITY;
    for net in [queue_pair(), power_pair()] {
        for line in net.lines() {
            for j in 0..100 {
                let alpha = 0.05 + (20.0 - 0.05) * j as f64 / 99.0;
                let h = 1e-5;
                let fd = (w_eval(line, alpha + h).map_err(e)?
                    - w_eval(line, alpha - h).map_err(e)?)
                    / (2.0 * h);
                let d = w_deriv(line, alpha).map_err(e)?;
                let rel = (d - fd).abs() / fd.abs();
                worst = worst.max(rel);
                ensure(rel <= 1e-4, || {
                    format!("w' at alpha = {alpha}: {d} vs {fd}")
                })?;
                let m = concavity_margin(line, alpha).map_err(e)?;
                max_margin = max_margin.max(m);
                ensure(m < 0.0, || {
                    format!("concavity margin {m} at alpha = {alpha}")
                })?;
            }
        }
    }
    Ok(format!(
        "4 lines x 100 points, worst relative error {worst:.1e}, largest margin {max_margin:.3e}"
    ))
}

/// Log grid search of `psi_alpha(t_k) - 1` for a sign change, computed from `w'` directly.
fn root_exists_by_scan(net: &Network, k: usize) -> Result<bool, String> {
    let tk = net.line(k).t;
    let psi = |alpha: f64| -> Result<f64, String> {
        let mut s = 0.0;
        for line in &net.lines()[..k] {
            s += (tk - line.t).max(0.0) * w_deriv(line, alpha).map_err(e)?;
        }
        Ok(s)
    };
    let mut above = false;
    let mut below = false;
    for j in 0..=400 {
        let alpha = 10f64.powf(-8.0 + 16.0 * j as f64 / 400.0);
        let p = psi(alpha)?;
        above |= p > 1.0;
        below |= p < 1.0;
    }
    Ok(above && below)
}

fn psi_lambda_properties() -> Outcome {
    // psi decreasing in alpha, lambda_bar increasing and continuous at alpha_k.
    // With capacity 20 the queue family has f'(v) ~ (v/mu)^19, so below alpha = 0.5
    // successive psi values agree to the last bit; there only non-increase is checked.
    let log_grid = |lo: f64, hi: f64, m: usize| -> Vec<f64> {
        (0..m)
            .map(|j| 10f64.powf(lo + (hi - lo) * j as f64 / (m - 1) as f64))
            .collect()
    };
    let strict = log_grid(0.5f64.log10(), 2.0, 200);
    let small = log_grid(-2.0, 0.5f64.log10(), 100);
    let alphas: Vec<f64> = small.iter().chain(&strict).copied().collect();
    for net in [queue_pair(), power_pair()] {
        let t1 = net.line(0).t;
        for lambda in [t1 + 0.05, t1 + 0.25, 1.0] {
            let eval = |grid: &[f64]| -> Result<Vec<f64>, String> {
                grid.iter()
                    .map(|&a| psi_eval(&net, a, lambda).map_err(e))
                    .collect()
            };
            ensure(eval(&strict)?.windows(2).all(|w| w[1] < w[0]), || {
                format!("psi not strictly decreasing at lambda = {lambda}")
            })?;
            ensure(eval(&small)?.windows(2).all(|w| w[1] <= w[0]), || {
                format!("psi increased at lambda = {lambda}")
            })?;
        }
        let lb: Vec<f64> = alphas
            .iter()
            .map(|&a| lambda_bar(&net, a))
            .collect::<Result<_, _>>()
            .map_err(e)?;
        ensure(lb.windows(2).all(|w| w[1] >= w[0] - 1e-12), || {
            "lambda_bar decreased".to_string()
        })?;
    }
    let mut r = rng(9);
    let mut roots = 0;
    let mut continuity: f64 = 0.0;
    for case in 0..50 {
        let n = r.gen_range(2..=4);
        let net = random_network(&mut r, n);
        for k in 1..n {
            let predicted = alpha_for_threshold(&net, k).map_err(e)?;
            let scanned = root_exists_by_scan(&net, k)?;
            ensure(predicted.is_some() == scanned, || {
                format!("case {case}, line {k}: existence test {predicted:?}, scan {scanned}")
            })?;
            if let Some(ak) = predicted {
                roots += 1;
                let psi = psi_eval(&net, ak, net.line(k).t).map_err(e)?;
                within(psi, 1.0, 1e-6, &format!("case {case}: psi at alpha_{k}"))?;
                let tk = net.line(k).t;
                let below = lambda_bar(&net, ak * (1.0 - 1e-9)).map_err(e)?;
                let above = lambda_bar(&net, ak * (1.0 + 1e-9)).map_err(e)?;
                continuity = continuity
                    .max((above - below).abs())
                    .max((below - tk).abs());
                ensure(
                    (above - below).abs() <= 1e-4 && (below - tk).abs() <= 1e-4,
                    || {
                        format!("case {case}: lambda_bar jumps around alpha_{k}: {below} {above} vs {tk}")
                    },
                )?;
            }
        }
    }
    Ok(format!(
        "monotonicity on 300-point alpha grids; 50 random instances, {roots} thresholds found, worst jump {continuity:.1e}"
    ))
}

fn reproduce_commands() -> Outcome {
    let start = Instant::now();
    for which in ["a", "b"] {
        let out = Command::new(env!("CARGO_BIN_EXE_commonlines"))
            .args(["reproduce", which])
            .output()
            .map_err(e)?;
        ensure(out.status.success(), || {
            format!(
                "reproduce {which} exited with {:?}\n{}",
                out.status.code(),
                String::from_utf8_lossy(&out.stdout)
            )
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!("both exit 0 in {elapsed:.2?}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("queue-family thresholds", queue_thresholds),
        ("power-family flows and costs at x = 100", power_table),
        ("power-family thresholds", power_thresholds),
        ("price-of-anarchy regimes on 500-point sweeps", poa_regime),
        ("waiting-cost LP value and feasibility", phi_equivalence),
        (
            "characterization against brute force",
            brute_force_agreement,
        ),
        ("piecewise closed-form costs", piecewise_closed_forms),
        (
            "w' against finite differences, concavity",
            derivative_checks,
        ),
        (
            "psi and lambda_bar properties, threshold existence",
            psi_lambda_properties,
        ),
        ("reproduce commands", reproduce_commands),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
