//! Social cost of line flows, of the equilibrium and of the optimum, and the
//! price of anarchy.
//!
//! All costs are in passenger-hours.

use crate::charac::{equilibrium_flows, social_optimum_flows, t_hat};
use crate::error::{Result, SolverError};
use crate::model::{Assignment, Network};
use crate::strategy::phi_value;

/// Arc-form social cost `sum t_i v_i + max_i v_i / f_i(v_i)`.
pub fn social_cost_arcs(network: &Network, v: &[f64]) -> Result<f64> {
    let travel: f64 = network.times().zip(v).map(|(t, vi)| t * vi).sum();
    Ok(travel + phi_value(network, v)?)
}

fn equilibrium_cost(network: &Network, ue: &Assignment) -> Result<f64> {
    if ue.demand == 0.0 {
        return Ok(0.0);
    }
    Ok(t_hat(network, &ue.v)? * ue.demand)
}

/// Social cost at equilibrium: every passenger pays `T_hat(v)`, so the cost is `T_hat(v) x`.
pub fn wardrop_social_cost(network: &Network, x: f64) -> Result<f64> {
    equilibrium_cost(network, &equilibrium_flows(network, x)?)
}

/// Social cost of the social-optimum line flows.
pub fn optimal_social_cost(network: &Network, x: f64) -> Result<f64> {
    social_cost_arcs(network, &social_optimum_flows(network, x)?.v)
}

fn ratio(wsc: f64, osc: f64) -> Result<f64> {
    if osc > 0.0 {
        Ok(wsc / osc)
    } else {
        Err(SolverError::DomainError(
            "price of anarchy is undefined at zero demand".into(),
        ))
    }
}

/// Ratio of the equilibrium social cost to the optimal one, for `x > 0`.
pub fn price_of_anarchy(network: &Network, x: f64) -> Result<f64> {
    let report = cost_report(network, x)?;
    Ok(report.poa)
}

/// Equilibrium and optimum at one demand level with their costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostReport {
    /// Social cost at equilibrium, passenger-hours.
    pub wsc: f64,
    /// Optimal social cost, passenger-hours.
    pub osc: f64,
    /// `wsc / osc`.
    pub poa: f64,
    pub ue_flows: Assignment,
    pub so_flows: Assignment,
}

/// Solves both regimes at demand `x > 0` and compares their costs.
pub fn cost_report(network: &Network, x: f64) -> Result<CostReport> {
    let ue = equilibrium_flows(network, x)?;
    let so = social_optimum_flows(network, x)?;
    let wsc = equilibrium_cost(network, &ue)?;
    let osc = social_cost_arcs(network, &so.v)?;
    Ok(CostReport {
        wsc,
        osc,
        poa: ratio(wsc, osc)?,
        ue_flows: ue,
        so_flows: so,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charac::thresholds;
    use crate::model::{rho_solve, FrequencyModel, Line};
    use approx::assert_relative_eq;

    fn queue_net() -> Network {
        Network::new(vec![
            Line::new(0.25, FrequencyModel::queue(16.0, 20).unwrap()).unwrap(),
            Line::new(0.5, FrequencyModel::queue(10.0, 20).unwrap()).unwrap(),
        ])
        .unwrap()
    }

    fn power_net() -> Network {
        let eps = 1.0 / 999.0;
        Network::new(vec![
            Line::new(0.25, FrequencyModel::power(16.0, 20.0, 0.2, eps).unwrap()).unwrap(),
            Line::new(0.5, FrequencyModel::power(10.0, 20.0, 0.2, eps).unwrap()).unwrap(),
        ])
        .unwrap()
    }

    fn queue_wait(mu: f64, flow: f64) -> f64 {
        let rho = rho_solve(mu, 20, flow).unwrap();
        rho / (1.0 - rho)
    }

    #[test]
    fn zero_flow_costs_nothing() {
        assert_eq!(social_cost_arcs(&queue_net(), &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(wardrop_social_cost(&queue_net(), 0.0).unwrap(), 0.0);
        assert_eq!(optimal_social_cost(&queue_net(), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn single_line_arc_cost() {
        let net = queue_net();
        let x = 150.0;
        let expected = 0.25 * x + queue_wait(16.0, x);
        assert_relative_eq!(
            social_cost_arcs(&net, &[x, 0.0]).unwrap(),
            expected,
            max_relative = 1e-9
        );
    }

    #[test]
    fn power_example_costs() {
        let net = power_net();
        let report = cost_report(&net, 100.0).unwrap();
        assert!((report.wsc - 50.0).abs() < 0.05);
        assert!((report.osc - 48.309).abs() < 0.05);
        assert!((report.poa - 1.035).abs() < 0.005);
        let v = [61.54, 38.46];
        assert!((social_cost_arcs(&net, &v).unwrap() - 48.309).abs() < 0.01);
    }

    #[test]
    fn queue_example_costs() {
        let net = queue_net();
        assert_relative_eq!(
            wardrop_social_cost(&net, 300.0).unwrap(),
            150.0,
            max_relative = 1e-8
        );
        let low = 0.25 * 100.0 + queue_wait(16.0, 100.0);
        assert_relative_eq!(
            optimal_social_cost(&net, 100.0).unwrap(),
            low,
            max_relative = 1e-9
        );
        let share = 16.0 / 26.0;
        let t_mu = share * 0.25 + (1.0 - share) * 0.5;
        let high = t_mu * 400.0 + queue_wait(16.0, share * 400.0);
        assert_relative_eq!(
            optimal_social_cost(&net, 400.0).unwrap(),
            high,
            max_relative = 1e-7
        );
    }

    #[test]
    fn no_anarchy_outside_the_mixed_range() {
        let net = queue_net();
        let report = thresholds(&net).unwrap();
        let l_so = report.l_so().unwrap();
        let u_w = report.u_w().unwrap();
        for x in [0.5 * l_so, l_so - 1.0, u_w + 1.0, 500.0] {
            assert!(
                (price_of_anarchy(&net, x).unwrap() - 1.0).abs() < 1e-6,
                "x = {x}"
            );
        }
        for x in [l_so + 5.0, 300.0, u_w - 5.0] {
            assert!(price_of_anarchy(&net, x).unwrap() > 1.0 + 1e-6, "x = {x}");
        }
    }

    #[test]
    fn infeasible_demand_is_rejected() {
        assert!(matches!(
            wardrop_social_cost(&queue_net(), 600.0),
            Err(SolverError::InfeasibleDemand { .. })
        ));
        assert!(price_of_anarchy(&queue_net(), 0.0).is_err());
    }
}
