//! Demand sweeps and their CSV form.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::cost::cost_report;
use crate::error::Result;
use crate::model::Network;

/// Equilibrium and optimum at one demand level, line flows in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub v_ue: Vec<f64>,
    pub v_so: Vec<f64>,
    pub wsc: f64,
    pub osc: f64,
    pub poa: f64,
}

/// `steps` evenly spaced demands from `from` to `to`, both included.
pub fn demand_grid(from: f64, to: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![from];
    }
    let last = (steps - 1) as f64;
    (0..steps)
        .map(|j| {
            if j + 1 == steps {
                to
            } else {
                from + (to - from) * j as f64 / last
            }
        })
        .collect()
}

pub fn sweep_row(network: &Network, x: f64) -> Result<SweepRow> {
    let report = cost_report(network, x)?;
    Ok(SweepRow {
        x,
        v_ue: network.to_input_order(&report.ue_flows.v),
        v_so: network.to_input_order(&report.so_flows.v),
        wsc: report.wsc,
        osc: report.osc,
        poa: report.poa,
    })
}

/// Rows are computed in parallel and returned ordered by `x`.
pub fn sweep(network: &Network, from: f64, to: f64, steps: usize) -> Result<Vec<SweepRow>> {
    demand_grid(from, to, steps)
        .into_par_iter()
        .map(|x| sweep_row(network, x))
        .collect()
}

/// Rounds to 9 significant digits and prints the shortest decimal that reads back as the rounded value.
pub fn format_number(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return if value == 0.0 {
            "0".into()
        } else {
            value.to_string()
        };
    }
    let rounded: f64 = format!("{value:.8e}")
        .parse()
        .expect("formatted float parses");
    let plain = rounded.to_string();
    let sci = format!("{rounded:e}");
    if sci.len() < plain.len() {
        sci
    } else {
        plain
    }
}

pub fn csv_header(n: usize) -> String {
    let mut cols = vec!["x".to_string()];
    cols.extend((1..=n).map(|i| format!("v_ue_{i}")));
    cols.extend((1..=n).map(|i| format!("v_so_{i}")));
    cols.extend(["wsc", "osc", "poa"].map(String::from));
    cols.join(",")
}

pub fn to_csv(rows: &[SweepRow], n: usize) -> String {
    let mut out = csv_header(n);
    out.push('\n');
    for row in rows {
        let fields: Vec<String> = std::iter::once(row.x)
            .chain(row.v_ue.iter().copied())
            .chain(row.v_so.iter().copied())
            .chain([row.wsc, row.osc, row.poa])
            .map(format_number)
            .collect();
        let _ = writeln!(out, "{}", fields.join(","));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FrequencyModel, Line};

    #[test]
    fn grid_endpoints() {
        assert_eq!(demand_grid(1.0, 3.0, 3), vec![1.0, 2.0, 3.0]);
        let g = demand_grid(1.0, 500.0, 500);
        assert_eq!(g.len(), 500);
        assert_eq!(g[0], 1.0);
        assert_eq!(g[499], 500.0);
    }

    #[test]
    fn number_formatting() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(150.0), "150");
        assert_eq!(format_number(48.308449), "48.308449");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333");
        assert_eq!(format_number(123456789012.0), "123456789000");
        assert_eq!(format_number(1.234567891e20), "1.23456789e20");
        assert_eq!(format_number(-2.5e-12), "-2.5e-12");
    }

    #[test]
    fn header_layout() {
        assert_eq!(csv_header(2), "x,v_ue_1,v_ue_2,v_so_1,v_so_2,wsc,osc,poa");
    }

    #[test]
    fn two_row_sweep_is_consistent() {
        let net = Network::new(vec![
            Line::new(0.25, FrequencyModel::queue(16.0, 20).unwrap()).unwrap(),
            Line::new(0.5, FrequencyModel::queue(10.0, 20).unwrap()).unwrap(),
        ])
        .unwrap();
        let rows = sweep(&net, 10.0, 300.0, 2).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!((r.poa * r.osc - r.wsc).abs() <= 1e-9 * r.wsc);
        }
        let csv = to_csv(&rows, 2);
        assert_eq!(csv.lines().count(), 3);
    }
}
