//! Social optimum and Wardrop equilibrium line flows through the waiting-cost
//! level `alpha`.
//!
//! At the social optimum every line is either unused, loaded to `w_i(alpha)`,
//! or sits exactly on the time threshold `lambda_bar(alpha)`, the unique root
//! of
//!
//! ```text
//! psi_alpha(lambda) = sum_i (lambda - t_i)_+ w_i'(alpha) = 1.
//! ```
//!
//! The equilibrium has the same shape with `lambda_bar(alpha)` replaced by the
//! minimal expected transit time `T_hat(w(alpha))`. In both cases the total
//! flow served at level `alpha` lies between the envelopes
//! `x_hat(alpha) = sum{w_i : t_i < threshold}` and
//! `x_check(alpha) = sum{w_i : t_i <= threshold}`, which are nondecreasing in
//! `alpha`, so the level serving a demand `x` is found by bisection.

use crate::error::{Result, SolverError};
use crate::model::{freq_eval, Assignment, Network};
use crate::roots;
use crate::wfun::WaitCostInverse;

/// Absolute tolerance, in hours, for deciding `t_i == threshold`.
pub const TIE_TOL: f64 = 1e-9;

fn inverses(network: &Network) -> Vec<WaitCostInverse> {
    network
        .lines()
        .iter()
        .map(|l| WaitCostInverse::new(l.freq))
        .collect()
}

fn w_all(inv: &[WaitCostInverse], alpha: f64) -> Result<Vec<f64>> {
    inv.iter().map(|w| w.eval(alpha)).collect()
}

fn wd_all(inv: &[WaitCostInverse], alpha: f64) -> Result<Vec<f64>> {
    inv.iter().map(|w| w.deriv(alpha)).collect()
}

fn check_positive_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(SolverError::DomainError(format!(
            "alpha must be positive, got {alpha}"
        )))
    }
}

fn psi_from(ts: &[f64], wd: &[f64], lambda: f64) -> f64 {
    ts.iter()
        .zip(wd)
        .map(|(&t, &d)| (lambda - t).max(0.0) * d)
        .sum()
}

/// Root of the piecewise linear `psi` by walking its breakpoints.
///
/// `ts` must be sorted; ties are harmless (zero-length segments).
fn lambda_from_slopes(ts: &[f64], wd: &[f64]) -> f64 {
    let n = ts.len();
    let mut psi = 0.0;
    let mut slope = 0.0;
    for k in 0..n {
        slope += wd[k];
        if k + 1 == n {
            break;
        }
        let reach = psi + slope * (ts[k + 1] - ts[k]);
        if reach >= 1.0 {
            return ts[k] + (1.0 - psi) / slope;
        }
        psi = reach;
    }
    ts[n - 1] + (1.0 - psi) / slope
}

/// `psi_alpha(lambda) = sum_i (lambda - t_i)_+ w_i'(alpha)`.
///
/// `alpha = 0` is accepted and uses the limit `w_i'(0+) = f_i(0)`.
pub fn psi_eval(network: &Network, alpha: f64, lambda: f64) -> Result<f64> {
    let wd = wd_all(&inverses(network), alpha)?;
    let ts: Vec<f64> = network.times().collect();
    Ok(psi_from(&ts, &wd, lambda))
}

/// The unique `lambda` with `psi_alpha(lambda) = 1`.
pub fn lambda_bar(network: &Network, alpha: f64) -> Result<f64> {
    check_positive_alpha(alpha)?;
    let wd = wd_all(&inverses(network), alpha)?;
    let ts: Vec<f64> = network.times().collect();
    Ok(lambda_from_slopes(&ts, &wd))
}

/// Level `alpha_k` at which `lambda_bar(alpha_k) = t_k`, if it exists.
///
/// `k` is a 0-based index into the (sorted) network and must not be the
/// first line. Existence is decided by the limit
/// `psi_0(t_k) = sum_{i<k} (t_k - t_i)_+ f_i(0) >= 1`; since
/// `psi_alpha(t_k)` decreases in `alpha`, the root is then found by bisection.
pub fn alpha_for_threshold(network: &Network, k: usize) -> Result<Option<f64>> {
    if k == 0 || k >= network.len() {
        return Err(SolverError::DomainError(format!(
            "threshold line index {k} outside 1..{}",
            network.len()
        )));
    }
    let inv = inverses(network);
    let ts: Vec<f64> = network.times().collect();
    let tk = ts[k];
    let psi = |alpha: f64| -> Result<f64> { Ok(psi_from(&ts, &wd_all(&inv, alpha)?, tk)) };
    if psi(0.0)? < 1.0 {
        return Ok(None);
    }
    let mut failure = None;
    let mut below_one = |alpha: f64| match psi(alpha) {
        Ok(p) => p <= 1.0,
        Err(e) => {
            failure.get_or_insert(e);
            true
        }
    };
    let hi = roots::expand_upper(1.0, &mut below_one)?;
    let (lo, hi) = roots::bisect_predicate(0.0, hi, 0.0, &mut below_one);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Envelopes `(x_hat(alpha), x_check(alpha))` of the total social-optimum flow.
pub fn x_bounds(network: &Network, alpha: f64) -> Result<(f64, f64)> {
    check_positive_alpha(alpha)?;
    let level = Regime::SocialOptimum.level(network, &inverses(network), alpha)?;
    Ok((level.lower(network), level.upper(network)))
}

/// The unique `alpha_x` with `x_hat(alpha_x) <= x <= x_check(alpha_x)`.
pub fn alpha_for_demand(network: &Network, x: f64) -> Result<f64> {
    Ok(Regime::SocialOptimum.solve(network, x)?.alpha)
}

/// Social-optimum line flows for demand `x`.
///
/// Lines tied with the threshold share the residual flow in proportion to
/// `w_i(alpha_x)`.
pub fn social_optimum_flows(network: &Network, x: f64) -> Result<Assignment> {
    Regime::SocialOptimum.solve(network, x)
}

/// Wardrop-equilibrium line flows for demand `x`.
pub fn equilibrium_flows(network: &Network, x: f64) -> Result<Assignment> {
    Regime::Equilibrium.solve(network, x)
}

/// Minimal expected transit time over all nonempty strategies at line flows `v`.
pub fn t_hat(network: &Network, v: &[f64]) -> Result<f64> {
    let freqs = network
        .lines()
        .iter()
        .zip(v)
        .map(|(l, &vi)| freq_eval(l, vi))
        .collect::<Result<Vec<f64>>>()?;
    let ts: Vec<f64> = network.times().collect();
    min_transit_time(&ts, &freqs)
}

/// Greedy common-lines rule: scanning lines by increasing travel time, a line
/// joins the attractive set while it is faster than the set's current
/// expected transit time. `ts` must be sorted.
pub(crate) fn min_transit_time(ts: &[f64], freqs: &[f64]) -> Result<f64> {
    let mut num = 1.0;
    let mut den = 0.0;
    let mut best = f64::INFINITY;
    for (&t, &f) in ts.iter().zip(freqs) {
        if f <= 0.0 {
            continue;
        }
        if t >= best {
            break;
        }
        num += t * f;
        den += f;
        best = num / den;
    }
    if den > 0.0 {
        Ok(best)
    } else {
        Err(SolverError::DegenerateNetwork)
    }
}

/// Level `alpha^w_k` at which line `k` joins the equilibrium, i.e.
/// `T_hat(w(alpha)) = t_k`, if it exists.
pub fn equilibrium_alpha_for_threshold(network: &Network, k: usize) -> Result<Option<f64>> {
    if k == 0 || k >= network.len() {
        return Err(SolverError::DomainError(format!(
            "threshold line index {k} outside 1..{}",
            network.len()
        )));
    }
    let inv = inverses(network);
    let tk = network.line(k).t;
    let time = |alpha: f64| Ok(Regime::Equilibrium.level(network, &inv, alpha)?.time);
    if time(0.0)? > tk {
        return Ok(None);
    }
    let mut failure: Option<SolverError> = None;
    let mut reached = |alpha: f64| match time(alpha) {
        Ok(t) => t >= tk,
        Err(e) => {
            failure.get_or_insert(e);
            true
        }
    };
    let hi = roots::expand_upper(1.0, &mut reached)?;
    let (lo, hi) = roots::bisect_predicate(0.0, hi, 0.0, &mut reached);
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Demand interval on which the second line is partially loaded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    /// Level `alpha_2` at which the second line's travel time is reached.
    pub alpha: f64,
    /// Demand below which only the first line is used.
    pub lower: f64,
    /// Demand above which both lines carry `w_i(alpha_x)`.
    pub upper: f64,
}

/// Threshold demands of a two-line network.
///
/// `None` means the second line is used from the first passenger on, so the
/// single-line regime never occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdReport {
    pub social_optimum: Option<Threshold>,
    pub equilibrium: Option<Threshold>,
}

impl ThresholdReport {
    pub fn l_so(&self) -> Option<f64> {
        self.social_optimum.map(|t| t.lower)
    }
    pub fn u_so(&self) -> Option<f64> {
        self.social_optimum.map(|t| t.upper)
    }
    pub fn l_w(&self) -> Option<f64> {
        self.equilibrium.map(|t| t.lower)
    }
    pub fn u_w(&self) -> Option<f64> {
        self.equilibrium.map(|t| t.upper)
    }
}

/// Threshold report for a two-line network.
pub fn thresholds(network: &Network) -> Result<ThresholdReport> {
    if network.len() != 2 {
        return Err(SolverError::Unsupported(format!(
            "threshold report needs exactly 2 lines, got {}",
            network.len()
        )));
    }
    let inv = inverses(network);
    let tk = network.line(1).t;
    let interval = |alpha: Option<f64>| -> Result<Option<Threshold>> {
        let Some(alpha) = alpha else { return Ok(None) };
        let w = w_all(&inv, alpha)?;
        let (mut lower, mut upper) = (0.0, 0.0);
        for (t, wi) in network.times().zip(&w) {
            if t < tk - TIE_TOL {
                lower += wi;
            }
            if t <= tk + TIE_TOL {
                upper += wi;
            }
        }
        Ok(Some(Threshold {
            alpha,
            lower,
            upper,
        }))
    };
    Ok(ThresholdReport {
        social_optimum: interval(alpha_for_threshold(network, 1)?)?,
        equilibrium: interval(equilibrium_alpha_for_threshold(network, 1)?)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Regime {
    SocialOptimum,
    Equilibrium,
}

/// Flows `w_i(alpha)` and the time threshold at one level `alpha`.
struct Level {
    alpha: f64,
    w: Vec<f64>,
    time: f64,
}

impl Level {
    fn lower(&self, network: &Network) -> f64 {
        network
            .times()
            .zip(&self.w)
            .filter(|(t, _)| *t < self.time - TIE_TOL)
            .map(|(_, w)| w)
            .sum()
    }

    fn upper(&self, network: &Network) -> f64 {
        network
            .times()
            .zip(&self.w)
            .filter(|(t, _)| *t <= self.time + TIE_TOL)
            .map(|(_, w)| w)
            .sum()
    }

    /// Lines below the threshold take `w_i`; tied lines share the residual.
    fn assign(&self, network: &Network, x: f64) -> Vec<f64> {
        let n = network.len();
        let mut v = vec![0.0; n];
        let mut base = 0.0;
        let mut tied_cap = 0.0;
        let mut tied = Vec::new();
        for (i, t) in network.times().enumerate() {
            if t < self.time - TIE_TOL {
                v[i] = self.w[i];
                base += self.w[i];
            } else if t <= self.time + TIE_TOL {
                tied.push(i);
                tied_cap += self.w[i];
            }
        }
        let residual = x - base;
        if residual > 0.0 && tied_cap > 0.0 {
            let share = residual.min(tied_cap) / tied_cap;
            for &i in &tied {
                v[i] = self.w[i] * share;
            }
        }
        // Bisection leaves O(1e-15) relative slack; absorb it so the flows sum to x.
        let total: f64 = v.iter().sum();
        if total > 0.0 && total != x {
            let scale = x / total;
            v.iter_mut().for_each(|vi| *vi *= scale);
        }
        v
    }
}

impl Regime {
    fn level(self, network: &Network, inv: &[WaitCostInverse], alpha: f64) -> Result<Level> {
        let w = w_all(inv, alpha)?;
        let ts: Vec<f64> = network.times().collect();
        let time = match self {
            Regime::SocialOptimum => lambda_from_slopes(&ts, &wd_all(inv, alpha)?),
            Regime::Equilibrium => {
                // f_i(w_i(alpha)) = w_i(alpha) / alpha by definition of w.
                let freqs: Vec<f64> = if alpha > 0.0 {
                    w.iter().map(|wi| wi / alpha).collect()
                } else {
                    inv.iter().map(|i| i.model().nominal()).collect()
                };
                min_transit_time(&ts, &freqs)?
            }
        };
        Ok(Level { alpha, w, time })
    }

    fn solve(self, network: &Network, x: f64) -> Result<Assignment> {
        let capacity = network.total_saturation();
        if !(x >= 0.0 && x < capacity) {
            return Err(SolverError::InfeasibleDemand {
                demand: x,
                capacity,
            });
        }
        if x == 0.0 {
            let ts: Vec<f64> = network.times().collect();
            let nominal: Vec<f64> = network.lines().iter().map(|l| l.freq.nominal()).collect();
            let time = min_transit_time(&ts, &nominal)?;
            let (lambda_bar, t_hat) = match self {
                Regime::SocialOptimum => (Some(network.line(0).t), None),
                Regime::Equilibrium => (None, Some(time)),
            };
            return Ok(Assignment {
                v: vec![0.0; network.len()],
                demand: 0.0,
                alpha: 0.0,
                lambda_bar,
                t_hat,
            });
        }
        let inv = inverses(network);
        let mut failure = None;
        let mut covers = |alpha: f64| match self.level(network, &inv, alpha) {
            Ok(level) => level.upper(network) >= x,
            Err(e) => {
                failure.get_or_insert(e);
                true
            }
        };
        let hi = roots::expand_upper(1.0, &mut covers)?;
        let (_, alpha) = roots::bisect_predicate(0.0, hi, 0.0, &mut covers);
        if let Some(e) = failure {
            return Err(e);
        }
        let level = self.level(network, &inv, alpha)?;
        let lower = level.lower(network);
        let upper = level.upper(network);
        if x < lower - 1e-8 || x > upper + 1e-8 {
            return Err(SolverError::ConvergenceError(format!(
                "demand {x} not bracketed by [{lower}, {upper}] at alpha {alpha}"
            )));
        }
        let v = level.assign(network, x);
        let (lambda_bar, t_hat) = match self {
            Regime::SocialOptimum => (Some(level.time), None),
            Regime::Equilibrium => (None, Some(level.time)),
        };
        Ok(Assignment {
            v,
            demand: x,
            alpha: level.alpha,
            lambda_bar,
            t_hat,
        })
    }
}
