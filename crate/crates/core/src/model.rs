//! Domain types: frequency models, lines, networks and assignments.
//!
//! Two congestion-dependent effective frequency families are supported.
//! Both start at the nominal frequency `mu` for an empty line and decay to
//! zero as the boarding flow approaches the saturation flow `mu * K`.
//!
//! * [`FrequencyModel::QueueCapacity`]: buses arrive as a Poisson process of
//!   rate `mu` and carry `K` passengers. With `rho` the unique root in
//!   `[0, 1)` of `mu * (rho + rho^2 + ... + rho^K) = v`, the effective
//!   frequency is `v * (1/rho - 1)`, which telescopes to `mu * (1 - rho^K)`.
//! * [`FrequencyModel::PowerSaturation`]: `mu * (1 - (v / (mu K))^beta)` below
//!   saturation and the floor `epsilon` at or beyond it.

use crate::error::{Result, SolverError};
use crate::roots;

/// Congestion-dependent effective frequency family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrequencyModel {
    /// Poisson bus arrivals of rate `mu` (buses/hour), `capacity` passengers per bus.
    QueueCapacity { mu: f64, capacity: u32 },
    /// Power-law saturation with exponent `beta` and post-saturation floor `epsilon`.
    PowerSaturation {
        mu: f64,
        capacity: f64,
        beta: f64,
        epsilon: f64,
    },
}

impl FrequencyModel {
    pub fn queue(mu: f64, capacity: u32) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(SolverError::InvalidModel(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if capacity < 1 || capacity > i32::MAX as u32 {
            return Err(SolverError::InvalidModel(format!(
                "capacity K must lie in 1..={}, got {capacity}",
                i32::MAX
            )));
        }
        Ok(Self::QueueCapacity { mu, capacity })
    }

    pub fn power(mu: f64, capacity: f64, beta: f64, epsilon: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(SolverError::InvalidModel(format!(
                "mu must be positive, got {mu}"
            )));
        }
        if !(capacity.is_finite() && capacity >= 1.0) {
            return Err(SolverError::InvalidModel(format!(
                "capacity K must be at least 1, got {capacity}"
            )));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(SolverError::InvalidModel(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if !(epsilon > 0.0 && epsilon < mu) {
            return Err(SolverError::InvalidModel(format!(
                "epsilon must lie in (0, mu), got {epsilon}"
            )));
        }
        Ok(Self::PowerSaturation {
            mu,
            capacity,
            beta,
            epsilon,
        })
    }

    /// Nominal frequency, which is also the effective frequency of an empty line.
    pub fn nominal(&self) -> f64 {
        match *self {
            Self::QueueCapacity { mu, .. } | Self::PowerSaturation { mu, .. } => mu,
        }
    }

    /// Saturation flow `mu * K`.
    pub fn saturation_flow(&self) -> f64 {
        match *self {
            Self::QueueCapacity { mu, capacity } => mu * f64::from(capacity),
            Self::PowerSaturation { mu, capacity, .. } => mu * capacity,
        }
    }

    /// Effective frequency at boarding flow `v`.
    pub fn eval(&self, v: f64) -> Result<f64> {
        check_nonnegative(v)?;
        match *self {
            Self::QueueCapacity { mu, capacity } => {
                let rho = rho_solve(mu, capacity, v)?;
                Ok(mu * (1.0 - rho.powi(capacity as i32)))
            }
            Self::PowerSaturation { epsilon, .. } => {
                if v < self.saturation_flow() {
                    Ok(self.eval_unfloored(v))
                } else {
                    Ok(epsilon)
                }
            }
        }
    }

    /// Power-family formula without the `epsilon` floor; queue family as [`eval`](Self::eval).
    ///
    /// Only meaningful on `[0, saturation_flow)`.
    pub(crate) fn eval_unfloored(&self, v: f64) -> f64 {
        match *self {
            Self::QueueCapacity { .. } => self.eval(v).unwrap_or(0.0),
            Self::PowerSaturation { mu, beta, .. } => {
                let u = (v / self.saturation_flow()).clamp(0.0, 1.0);
                mu * (1.0 - u.powf(beta))
            }
        }
    }

    /// Flow and unfloored frequency as explicit functions of `p` in `[0, 1]`:
    /// the utilization `rho` for the queue family, `v / v_sat` for the power
    /// family. Flow increases and frequency decreases with `p`; `p = 1` is saturation.
    pub(crate) fn parametric(&self, p: f64) -> (f64, f64) {
        match *self {
            Self::QueueCapacity { mu, capacity } => {
                let (s0, _, _) = queue_sums(capacity, p);
                (mu * s0, mu * (1.0 - p.powi(capacity as i32)))
            }
            Self::PowerSaturation { mu, beta, .. } => {
                (p * self.saturation_flow(), mu * (1.0 - p.powf(beta)))
            }
        }
    }

    /// First derivative `f'(v)` on the open interval `(0, saturation_flow)`.
    pub fn deriv(&self, v: f64) -> Result<f64> {
        self.check_interior(v)?;
        match *self {
            Self::QueueCapacity { mu, capacity } => {
                let rho = rho_solve(mu, capacity, v)?;
                Ok(queue_deriv_at_rho(capacity, rho))
            }
            Self::PowerSaturation { mu, beta, .. } => {
                let sat = self.saturation_flow();
                Ok(-mu * beta * v.powf(beta - 1.0) / sat.powf(beta))
            }
        }
    }

    /// Second derivative `f''(v)` on the open interval `(0, saturation_flow)`.
    pub fn deriv2(&self, v: f64) -> Result<f64> {
        self.check_interior(v)?;
        match *self {
            Self::QueueCapacity { mu, capacity } => {
                let rho = rho_solve(mu, capacity, v)?;
                Ok(queue_deriv2_at_rho(mu, capacity, rho))
            }
            Self::PowerSaturation { mu, beta, .. } => {
                let sat = self.saturation_flow();
                Ok(-mu * beta * (beta - 1.0) * v.powf(beta - 2.0) / sat.powf(beta))
            }
        }
    }

    fn check_interior(&self, v: f64) -> Result<()> {
        let sat = self.saturation_flow();
        if v > 0.0 && v < sat {
            Ok(())
        } else {
            Err(SolverError::DomainError(format!(
                "derivative requested at v = {v}, outside (0, {sat})"
            )))
        }
    }
}

fn check_nonnegative(v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SolverError::DomainError(format!(
            "flow must be nonnegative, got {v}"
        )))
    }
}

/// Sums `sum_{k=1}^{K} c_k rho^(k-1)` style polynomials needed by the queue family.
///
/// Returns `(S0, S1, S2)` with `S0 = sum rho^k`, `S1 = sum k rho^(k-1)`,
/// `S2 = sum k (k-1) rho^(k-2)`, for `k = 1..=K`.
fn queue_sums(capacity: u32, rho: f64) -> (f64, f64, f64) {
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    // Horner from the highest power down.
    for k in (1..=capacity).rev() {
        let kf = f64::from(k);
        s0 = s0 * rho + 1.0;
        s1 = s1 * rho + kf;
        if k >= 2 {
            s2 = s2 * rho + kf * (kf - 1.0);
        }
    }
    (rho * s0, s1, s2)
}

// With v(rho) = mu * S0 and f(rho) = mu (1 - rho^K):
// f'(v) = -K rho^(K-1) / S1, and f''(v) = d/drho[f'] / (mu S1).
fn queue_deriv_at_rho(capacity: u32, rho: f64) -> f64 {
    let k = f64::from(capacity);
    let (_, s1, _) = queue_sums(capacity, rho);
    -k * rho.powi(capacity as i32 - 1) / s1
}

fn queue_deriv2_at_rho(mu: f64, capacity: u32, rho: f64) -> f64 {
    let k = f64::from(capacity);
    let (_, s1, s2) = queue_sums(capacity, rho);
    let lead = if capacity >= 2 {
        (k - 1.0) * rho.powi(capacity as i32 - 2)
    } else {
        0.0
    };
    let dg = -k * (lead * s1 - rho.powi(capacity as i32 - 1) * s2) / (s1 * s1);
    dg / (mu * s1)
}

/// Utilization `rho` in `[0, 1)` solving `mu * (rho + rho^2 + ... + rho^K) = v`.
///
/// The left-hand side is strictly increasing in `rho`, so bisection on
/// `[0, 1 - 1e-14]` always converges.
pub fn rho_solve(mu: f64, capacity: u32, v: f64) -> Result<f64> {
    check_nonnegative(v)?;
    let sat = mu * f64::from(capacity);
    if v >= sat {
        return Err(SolverError::SaturatedFlow {
            flow: v,
            saturation: sat,
        });
    }
    if v == 0.0 {
        return Ok(0.0);
    }
    let poly = |rho: f64| mu * queue_sums(capacity, rho).0 - v;
    let hi = 1.0 - 1e-14;
    if poly(hi) <= 0.0 {
        return Ok(hi);
    }
    Ok(roots::bisect_increasing(0.0, hi, 0.0, poly))
}

/// One transit line: in-vehicle travel time (hours) and frequency model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub t: f64,
    pub freq: FrequencyModel,
}

impl Line {
    pub fn new(t: f64, freq: FrequencyModel) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(SolverError::InvalidModel(format!(
                "travel time must be nonnegative, got {t}"
            )));
        }
        Ok(Self { t, freq })
    }

    pub fn saturation_flow(&self) -> f64 {
        self.freq.saturation_flow()
    }
}

/// Saturation flow `mu * K` of a frequency model.
pub fn saturation_flow(model: &FrequencyModel) -> f64 {
    model.saturation_flow()
}

/// Effective frequency of `line` at boarding flow `v`.
pub fn freq_eval(line: &Line, v: f64) -> Result<f64> {
    line.freq.eval(v)
}

pub fn freq_deriv(line: &Line, v: f64) -> Result<f64> {
    line.freq.deriv(v)
}

pub fn freq_deriv2(line: &Line, v: f64) -> Result<f64> {
    line.freq.deriv2(v)
}

/// Lines sharing one origin-destination pair, stored by nondecreasing travel time.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    lines: Vec<Line>,
    input_index: Vec<usize>,
}

impl Network {
    /// Builds a network, stably sorting the lines by travel time.
    pub fn new(lines: Vec<Line>) -> Result<Self> {
        if lines.is_empty() {
            return Err(SolverError::InvalidModel(
                "a network needs at least one line".into(),
            ));
        }
        let mut indexed: Vec<(usize, Line)> = lines.into_iter().enumerate().collect();
        indexed.sort_by(|a, b| a.1.t.total_cmp(&b.1.t));
        let (input_index, lines) = indexed.into_iter().unzip();
        Ok(Self { lines, input_index })
    }

    pub fn lines(&self) -> &[Line] {
        &self.lines
    }

    pub fn line(&self, i: usize) -> &Line {
        &self.lines[i]
    }

    pub fn len(&self) -> usize {
        self.lines.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.lines.iter().map(|l| l.t)
    }

    pub fn total_saturation(&self) -> f64 {
        self.lines.iter().map(Line::saturation_flow).sum()
    }

    /// Position of stored line `i` in the caller's original ordering.
    pub fn input_index(&self, i: usize) -> usize {
        self.input_index[i]
    }

    /// Reorders a per-line vector from storage order back to input order.
    pub fn to_input_order(&self, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; values.len()];
        for (pos, &orig) in self.input_index.iter().enumerate() {
            out[orig] = values[pos];
        }
        out
    }
}

/// Line flows produced by a solver with the certificates that justify them.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// Per-line flows in network (sorted) order, passengers/hour.
    pub v: Vec<f64>,
    /// Demand the flows were computed for.
    pub demand: f64,
    /// Maximal social waiting cost level `alpha_x`, hours.
    pub alpha: f64,
    /// Time threshold `lambda_bar(alpha_x)` of the social optimum.
    pub lambda_bar: Option<f64>,
    /// Minimal expected transit time `T_hat(w(alpha_x))` of the equilibrium.
    pub t_hat: Option<f64>,
}

impl Assignment {
    pub fn total(&self) -> f64 {
        self.v.iter().sum()
    }
}
