//! Built-in two-line scenarios and their published reference values.
//!
//! Both use travel times of 1/4 h and 1/2 h, nominal frequencies of 16 and
//! 10 vehicles/h and capacity 20. Scenario `a` uses the queue family;
//! scenario `b` the power family with `beta = 0.2`.

use std::fmt::Write as _;

use super::config::{LineConfig, ScenarioConfig, SweepConfig};
use super::sweep::{demand_grid, sweep};
use super::{fmt6, CliError};
use crate::charac::{thresholds, ThresholdReport};
use crate::cost::cost_report;
use crate::model::Network;

pub fn scenario_a() -> ScenarioConfig {
    ScenarioConfig {
        lines: vec![
            LineConfig::queue(0.25, 16.0, 20),
            LineConfig::queue(0.5, 10.0, 20),
        ],
        sweep: Some(SweepConfig {
            from: 1.0,
            to: 500.0,
            steps: 500,
        }),
        demand: None,
    }
}

pub fn scenario_b() -> ScenarioConfig {
    ScenarioConfig {
        lines: vec![
            LineConfig::power(0.25, 16.0, 20.0, 0.2),
            LineConfig::power(0.5, 10.0, 20.0, 0.2),
        ],
        sweep: Some(SweepConfig {
            from: 1.0,
            to: 160.0,
            steps: 500,
        }),
        demand: Some(100.0),
    }
}

/// One comparison against a reference value.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: &str, value: f64, expected: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            expected,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        (self.value - self.expected).abs() <= self.tolerance
    }
}

fn threshold_checks(report: &ThresholdReport, expected: [f64; 4]) -> Vec<Check> {
    let values = [report.l_so(), report.u_so(), report.l_w(), report.u_w()];
    ["l_so", "u_so", "l_w", "u_w"]
        .iter()
        .zip(values.iter().zip(expected))
        .map(|(name, (value, exp))| Check::new(name, value.unwrap_or(f64::NAN), exp, 0.5))
        .collect()
}

/// The price of anarchy peaks where the equilibrium starts using the second line.
fn peak_check(network: &Network, sweep_cfg: SweepConfig, l_w: f64) -> Result<Check, CliError> {
    let rows = sweep(network, sweep_cfg.from, sweep_cfg.to, sweep_cfg.steps)?;
    let peak = rows
        .iter()
        .max_by(|a, b| a.poa.total_cmp(&b.poa))
        .map_or(f64::NAN, |r| r.x);
    let grid = demand_grid(sweep_cfg.from, sweep_cfg.to, sweep_cfg.steps);
    let step = grid[1] - grid[0];
    Ok(Check::new("argmax PoA", peak, l_w, 2.0 * step))
}

fn scenario_checks(which: &str) -> Result<(Vec<Check>, String), CliError> {
    let (cfg, expected) = match which {
        "a" => (scenario_a(), [202.77, 329.51, 276.09, 448.65]),
        "b" => (scenario_b(), [38.59, 62.72, 75.94, 123.4]),
        other => {
            return Err(CliError::InvalidConfig(format!(
                "unknown scenario {other:?}; expected \"a\" or \"b\""
            )))
        }
    };
    let network = cfg.validated()?;
    let report = thresholds(&network)?;
    let mut text = String::new();
    for (label, t) in [
        ("social optimum", report.social_optimum),
        ("equilibrium", report.equilibrium),
    ] {
        if let Some(t) = t {
            let _ = writeln!(text, "{label:<15} alpha_2 = {}", fmt6(t.alpha));
        }
    }
    let mut checks = threshold_checks(&report, expected);
    if which == "b" {
        let x = cfg.demand.unwrap_or(100.0);
        let costs = cost_report(&network, x)?;
        let ue = network.to_input_order(&costs.ue_flows.v);
        let so = network.to_input_order(&costs.so_flows.v);
        checks.extend([
            Check::new("v_ue_1", ue[0], 75.94, 0.05),
            Check::new("v_ue_2", ue[1], 24.06, 0.05),
            Check::new("v_so_1", so[0], 61.54, 0.05),
            Check::new("v_so_2", so[1], 38.46, 0.05),
            Check::new("WSC", costs.wsc, 50.0, 0.05),
            Check::new("OSC", costs.osc, 48.309, 0.05),
            Check::new("PoA", costs.poa, 1.035, 0.005),
        ]);
    }
    let l_w = report.l_w().unwrap_or(f64::NAN);
    checks.push(peak_check(
        &network,
        cfg.sweep.expect("built-in sweep"),
        l_w,
    )?);
    Ok((checks, text))
}

/// Runs scenario `which`, returning the printed report and whether every check passed.
pub fn reproduce(which: &str) -> Result<(String, bool), CliError> {
    let (checks, mut text) = scenario_checks(which)?;
    let mut ok = true;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        ok &= c.passed();
        let _ = writeln!(
            text,
            "{status} {:<10} {:>10}  expected {} +/- {}",
            c.name,
            fmt6(c.value),
            fmt6(c.expected),
            fmt6(c.tolerance)
        );
    }
    let _ = writeln!(
        text,
        "{}",
        if ok {
            "all checks passed"
        } else {
            "reproduction FAILED"
        }
    );
    Ok((text, ok))
}
