//! Inverse social waiting cost `w(alpha)`.
//!
//! For a line with effective frequency `f`, the social waiting cost at flow
//! `v` is `v / f(v)`. It is strictly increasing from 0 and unbounded as `v`
//! approaches saturation, so it has an inverse `w: [0, inf) -> [0, v_sat)`.
//! The characterization of both the social optimum and the equilibrium is
//! written in terms of `w` and `w'`.

use crate::error::{Result, SolverError};
use crate::model::{FrequencyModel, Line};
use crate::roots;

/// How `w` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionMode {
    /// Closed form, available for the queue family:
    /// `w(alpha) = mu alpha (1 - (alpha / (1 + alpha))^K)`.
    ClosedForm,
    /// Bisection on `v -> v / f(v)` over `[0, v_sat (1 - 1e-12)]`.
    NumericInversion,
}

/// Inverse of the social waiting cost of a single frequency model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaitCostInverse {
    model: FrequencyModel,
    mode: InversionMode,
}

impl WaitCostInverse {
    /// Picks the closed form when the family has one.
    pub fn new(model: FrequencyModel) -> Self {
        let mode = match model {
            FrequencyModel::QueueCapacity { .. } => InversionMode::ClosedForm,
            FrequencyModel::PowerSaturation { .. } => InversionMode::NumericInversion,
        };
        Self { model, mode }
    }

    /// Forces numeric inversion, for any family.
    pub fn numeric(model: FrequencyModel) -> Self {
        Self {
            model,
            mode: InversionMode::NumericInversion,
        }
    }

    pub fn mode(&self) -> InversionMode {
        self.mode
    }

    pub fn model(&self) -> &FrequencyModel {
        &self.model
    }

    /// `w(alpha)`: the flow whose social waiting cost equals `alpha`.
    pub fn eval(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        if alpha == 0.0 {
            return Ok(0.0);
        }
        match (self.mode, self.model) {
            (InversionMode::ClosedForm, FrequencyModel::QueueCapacity { mu, capacity }) => {
                // 1 - (alpha/(1+alpha))^K, written with expm1 to survive large alpha.
                let s = 1.0 / (1.0 + alpha);
                Ok(-mu * alpha * (f64::from(capacity) * (-s).ln_1p()).exp_m1())
            }
            _ => Ok(self.invert(alpha)),
        }
    }

    fn invert(&self, alpha: f64) -> f64 {
        let hi = self.model.saturation_flow() * (1.0 - 1e-12);
        let cost = |v: f64| v / self.model.eval_unfloored(v);
        if cost(hi) <= alpha {
            return hi;
        }
        roots::bisect_increasing(0.0, hi, 0.0, |v| cost(v) - alpha)
    }

    /// `w'(alpha) = f(w) / (1 - alpha f'(w))`, or its closed form for the queue family.
    pub fn deriv(&self, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        if alpha == 0.0 {
            return Ok(self.model.nominal());
        }
        match (self.mode, self.model) {
            (InversionMode::ClosedForm, FrequencyModel::QueueCapacity { mu, capacity }) => {
                // mu (1 - r^K (1 + K s)) with r = alpha/(1+alpha), s = 1 - r.
                let k = f64::from(capacity);
                let s = 1.0 / (1.0 + alpha);
                Ok(-mu * (k * (-s).ln_1p() + (k * s).ln_1p()).exp_m1())
            }
            _ => {
                let v = self.eval(alpha)?;
                let f = v / alpha;
                let fp = self.model.deriv(v)?;
                Ok(f / (1.0 - alpha * fp))
            }
        }
    }

    /// `2 f'(w) + alpha f''(w) w'`: negative exactly where `w` is locally strictly concave.
    pub fn concavity_margin(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(SolverError::DomainError(format!(
                "concavity margin needs alpha > 0, got {alpha}"
            )));
        }
        let v = self.eval(alpha)?;
        let wd = self.deriv(alpha)?;
        Ok(2.0 * self.model.deriv(v)? + alpha * self.model.deriv2(v)? * wd)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && !alpha.is_nan() {
        Ok(())
    } else {
        Err(SolverError::DomainError(format!(
            "alpha must be nonnegative, got {alpha}"
        )))
    }
}

pub fn w_eval(line: &Line, alpha: f64) -> Result<f64> {
    WaitCostInverse::new(line.freq).eval(alpha)
}

pub fn w_deriv(line: &Line, alpha: f64) -> Result<f64> {
    WaitCostInverse::new(line.freq).deriv(alpha)
}

pub fn concavity_margin(line: &Line, alpha: f64) -> Result<f64> {
    WaitCostInverse::new(line.freq).concavity_margin(alpha)
}
