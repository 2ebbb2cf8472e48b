//! JSON scenario files.
//!
//! ```json
//! {
//!   "lines": [
//!     {"t": 0.25, "family": "queue", "mu": 16, "K": 20},
//!     {"t": 0.5, "family": "power", "mu": 10, "K": 20, "beta": 0.2}
//!   ],
//!   "sweep": {"from": 1, "to": 500, "steps": 500},
//!   "demand": 100
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::model::{FrequencyModel, Line, Network};

/// Floor of the power family's effective frequency when a scenario omits it.
pub const DEFAULT_EPSILON: f64 = 1.0 / 999.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Queue,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    /// In-vehicle travel time, hours.
    pub t: f64,
    pub family: Family,
    /// Nominal frequency, vehicles/hour.
    pub mu: f64,
    /// Vehicle capacity; must be an integer for the queue family.
    #[serde(rename = "K")]
    pub capacity: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub lines: Vec<LineConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demand: Option<f64>,
}

impl LineConfig {
    pub fn queue(t: f64, mu: f64, capacity: u32) -> Self {
        Self {
            t,
            family: Family::Queue,
            mu,
            capacity: f64::from(capacity),
            beta: None,
            epsilon: None,
        }
    }

    pub fn power(t: f64, mu: f64, capacity: f64, beta: f64) -> Self {
        Self {
            t,
            family: Family::Power,
            mu,
            capacity,
            beta: Some(beta),
            epsilon: None,
        }
    }

    fn to_line(&self, index: usize) -> Result<Line, CliError> {
        let invalid = |msg: String| CliError::InvalidConfig(format!("line {}: {msg}", index + 1));
        let model = match self.family {
            Family::Queue => {
                if self.beta.is_some() || self.epsilon.is_some() {
                    return Err(invalid(
                        "beta and epsilon apply to the power family only".into(),
                    ));
                }
                let k = self.capacity;
                if !(k >= 1.0 && k <= f64::from(u32::MAX) && k.fract() == 0.0) {
                    return Err(invalid(format!(
                        "queue capacity K must be a positive integer, got {k}"
                    )));
                }
                FrequencyModel::queue(self.mu, k as u32)
            }
            Family::Power => {
                let beta = self
                    .beta
                    .ok_or_else(|| invalid("power family needs beta".into()))?;
                let epsilon = self.epsilon.unwrap_or(DEFAULT_EPSILON);
                FrequencyModel::power(self.mu, self.capacity, beta, epsilon)
            }
        }
        .map_err(|e| invalid(e.to_string()))?;
        Line::new(self.t, model).map_err(|e| invalid(e.to_string()))
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::InvalidConfig(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Builds the network; line order in results follows `lines`.
    pub fn network(&self) -> Result<Network, CliError> {
        if self.lines.is_empty() {
            return Err(CliError::InvalidConfig("no lines given".into()));
        }
        let lines = self
            .lines
            .iter()
            .enumerate()
            .map(|(i, l)| l.to_line(i))
            .collect::<Result<Vec<_>, _>>()?;
        Network::new(lines).map_err(|e| CliError::InvalidConfig(e.to_string()))
    }

    /// Network and validated sweep, if the scenario has one.
    pub fn validated(&self) -> Result<Network, CliError> {
        let network = self.network()?;
        if let Some(sweep) = self.sweep {
            validate_sweep(&network, sweep)?;
        }
        if let Some(x) = self.demand {
            if !x.is_finite() {
                return Err(CliError::InvalidConfig(format!(
                    "demand must be finite, got {x}"
                )));
            }
        }
        Ok(network)
    }
}

/// Checks `0 < from < to < total saturation` and `steps >= 2`.
pub fn validate_sweep(network: &Network, sweep: SweepConfig) -> Result<(), CliError> {
    let SweepConfig { from, to, steps } = sweep;
    if steps < 2 {
        return Err(CliError::InvalidConfig(format!(
            "sweep needs at least 2 steps, got {steps}"
        )));
    }
    if !(from > 0.0 && from < to && to.is_finite()) {
        return Err(CliError::InvalidConfig(format!(
            "sweep range must satisfy 0 < from < to, got {from}..{to}"
        )));
    }
    let capacity = network.total_saturation();
    if to >= capacity {
        return Err(CliError::Infeasible(format!(
            "infeasible demand: sweep end {to} reaches the total saturation flow {capacity}"
        )));
    }
    Ok(())
}
