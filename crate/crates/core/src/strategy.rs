//! Strategy-space view of the common-lines problem.
//!
//! A strategy is a nonempty set of attractive lines; a passenger using it
//! boards whichever of its lines serves first, so line `i` in strategy `s`
//! gets the share `f_i / sum_{j in s} f_j` of that strategy's flow. These
//! routines work directly with strategy flows and serve as independent
//! oracles for the line-flow characterization in [`crate::charac`].

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Result, SolverError};
use crate::model::{freq_eval, FrequencyModel, Network};
use crate::roots;

/// Largest network [`enumerate_strategies`] accepts.
pub const MAX_ENUMERATION: usize = 16;
/// Largest network [`brute_force_social_optimum`] accepts.
pub const MAX_BRUTE_FORCE: usize = 3;

const FIXED_POINT_TOL: f64 = 1e-9;
const FIXED_POINT_MAX_SWEEPS: usize = 100_000;
const SATURATION_MARGIN: f64 = 1e-9;
const CAPACITY_CHECK_MAX: usize = 10;

/// Nonempty set of line indices (0-based, in network order), stored as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Strategy(u32);

impl Strategy {
    pub fn from_mask(mask: u32) -> Result<Self> {
        if mask == 0 {
            return Err(SolverError::DomainError(
                "a strategy must be nonempty".into(),
            ));
        }
        Ok(Self(mask))
    }

    pub fn from_lines(lines: &[usize]) -> Result<Self> {
        let mut mask = 0u32;
        for &i in lines {
            if i >= 32 {
                return Err(SolverError::DomainError(format!(
                    "line index {i} too large"
                )));
            }
            mask |= 1 << i;
        }
        Self::from_mask(mask)
    }

    pub fn mask(&self) -> u32 {
        self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        i < 32 && self.0 & (1 << i) != 0
    }

    pub fn members(&self) -> impl Iterator<Item = usize> + '_ {
        (0..32).filter(move |&i| self.contains(i))
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.members().map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// Nonnegative flow per strategy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StrategyFlowVector {
    flows: BTreeMap<Strategy, f64>,
}

impl StrategyFlowVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `flow` to strategy `s`.
    pub fn add(&mut self, s: Strategy, flow: f64) -> Result<()> {
        if !(flow >= 0.0 && flow.is_finite()) {
            return Err(SolverError::DomainError(format!(
                "strategy flow must be nonnegative, got {flow}"
            )));
        }
        *self.flows.entry(s).or_insert(0.0) += flow;
        Ok(())
    }

    pub fn get(&self, s: Strategy) -> f64 {
        self.flows.get(&s).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Strategy, f64)> + '_ {
        self.flows.iter().map(|(s, h)| (*s, *h))
    }

    pub fn total(&self) -> f64 {
        self.flows.values().sum()
    }

    /// Strategies carrying positive flow.
    pub fn support(&self) -> Vec<Strategy> {
        self.iter()
            .filter(|(_, h)| *h > 0.0)
            .map(|(s, _)| s)
            .collect()
    }
}

/// All `2^n - 1` nonempty strategies, ordered by bit mask.
pub fn enumerate_strategies(n: usize) -> Result<Vec<Strategy>> {
    if n > MAX_ENUMERATION {
        return Err(SolverError::TooLarge {
            n,
            limit: MAX_ENUMERATION,
        });
    }
    if n == 0 {
        return Err(SolverError::DomainError("no lines to enumerate".into()));
    }
    Ok((1..(1u32 << n)).map(Strategy).collect())
}

fn check_strategy(network: &Network, s: Strategy) -> Result<()> {
    if s.members().any(|i| i >= network.len()) {
        return Err(SolverError::DomainError(format!(
            "strategy {s} refers to lines outside the network"
        )));
    }
    Ok(())
}

fn frequencies(network: &Network, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != network.len() {
        return Err(SolverError::DomainError(format!(
            "expected {} line flows, got {}",
            network.len(),
            v.len()
        )));
    }
    network
        .lines()
        .iter()
        .zip(v)
        .map(|(l, &vi)| freq_eval(l, vi))
        .collect()
}

fn time_from_freqs(network: &Network, s: Strategy, freqs: &[f64]) -> Result<f64> {
    let (mut num, mut den) = (1.0, 0.0);
    for i in s.members() {
        num += network.line(i).t * freqs[i];
        den += freqs[i];
    }
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(SolverError::DegenerateStrategy)
    }
}

/// Expected transit time `(1 + sum t_i f_i) / sum f_i` of strategy `s` at line flows `v`.
pub fn strategy_time(network: &Network, s: Strategy, v: &[f64]) -> Result<f64> {
    check_strategy(network, s)?;
    time_from_freqs(network, s, &frequencies(network, v)?)
}

/// Flow of strategies confined to a set of lines must stay below the
/// set's total saturation flow. Checked for every set when `n` is small.
fn check_capacity(network: &Network, active: &[(u32, f64)]) -> Result<()> {
    let n = network.len();
    if n > CAPACITY_CHECK_MAX {
        return Ok(());
    }
    for set in 1u32..(1 << n) {
        let confined: f64 = active
            .iter()
            .filter(|(mask, _)| mask & !set == 0)
            .map(|t| t.1)
            .sum();
        let capacity: f64 = (0..n)
            .filter(|&i| set & (1 << i) != 0)
            .map(|i| network.line(i).saturation_flow())
            .sum();
        if confined >= capacity {
            return Err(SolverError::SaturatedFlow {
                flow: confined,
                saturation: capacity,
            });
        }
    }
    Ok(())
}

/// Solves `v_i = f_i(v_i) sum_{s ni i} h_s / sum_{j in s} f_j(v_j)` by
/// nonlinear Gauss-Seidel.
///
/// With the other lines fixed, the right-hand side decreases in `v_i`, so
/// each line update is a monotone scalar root found by bisection on the
/// line's parameter (see `FrequencyModel::parametric`). Starting from zero
/// flows the sweeps increase monotonically to the solution.
fn induced_raw(network: &Network, strategies: &[Strategy], h: &[f64]) -> Result<Vec<f64>> {
    let n = network.len();
    let models: Vec<FrequencyModel> = network.lines().iter().map(|l| l.freq).collect();
    let active: Vec<(u32, f64)> = strategies
        .iter()
        .zip(h)
        .filter(|(_, &hs)| hs > 0.0)
        .map(|(s, &hs)| (s.mask(), hs))
        .collect();
    check_capacity(network, &active)?;
    let mut v = vec![0.0; n];
    let mut f: Vec<f64> = models.iter().map(|m| m.nominal()).collect();
    let mut terms: Vec<(f64, f64)> = Vec::new();
    let others = |f: &[f64], mask: u32, skip: usize| -> f64 {
        (0..n)
            .filter(|&j| j != skip && mask & (1 << j) != 0)
            .map(|j| f[j])
            .sum()
    };

    for _ in 0..FIXED_POINT_MAX_SWEEPS {
        for i in 0..n {
            terms.clear();
            terms.extend(
                active
                    .iter()
                    .filter(|(mask, _)| mask & (1 << i) != 0)
                    .map(|&(mask, hs)| (hs, others(&f, mask, i))),
            );
            if terms.is_empty() {
                continue;
            }
            let model = models[i];
            if terms.iter().all(|t| t.1 == 0.0) {
                // Every passenger who may board this line has no alternative.
                let load: f64 = terms.iter().map(|t| t.0).sum();
                if load >= model.saturation_flow() {
                    return Err(SolverError::SaturatedFlow {
                        flow: load,
                        saturation: model.saturation_flow(),
                    });
                }
                (v[i], f[i]) = (load, model.eval_unfloored(load));
                continue;
            }
            let gap = |p: f64| {
                let (vp, fp) = model.parametric(p);
                let load: f64 = terms
                    .iter()
                    .map(|&(hs, c)| if fp + c > 0.0 { hs * fp / (fp + c) } else { hs })
                    .sum();
                vp - load
            };
            if gap(1.0) <= 0.0 {
                // Strategies made of this line alone exceed its saturation flow.
                let alone: f64 = terms.iter().filter(|t| t.1 == 0.0).map(|t| t.0).sum();
                return Err(SolverError::SaturatedFlow {
                    flow: alone,
                    saturation: model.saturation_flow(),
                });
            }
            let p = roots::illinois_increasing(0.0, 1.0, 1e-12, gap);
            (v[i], f[i]) = model.parametric(p);
            // The sweeps only increase flows; reaching saturation means no
            // unsaturated solution exists.
            if v[i] >= model.saturation_flow() * (1.0 - SATURATION_MARGIN) {
                return Err(SolverError::SaturatedFlow {
                    flow: v[i],
                    saturation: model.saturation_flow(),
                });
            }
        }
        let mut residual: f64 = 0.0;
        for i in 0..n {
            let load: f64 = active
                .iter()
                .filter(|(mask, _)| mask & (1 << i) != 0)
                .map(|&(mask, hs)| hs * f[i] / (f[i] + others(&f, mask, i)))
                .sum();
            residual = residual.max((v[i] - load).abs());
        }
        if residual <= FIXED_POINT_TOL {
            return Ok(v);
        }
    }
    Err(SolverError::ConvergenceError(
        "induced line flow iteration did not converge".into(),
    ))
}

fn flatten(h: &StrategyFlowVector) -> (Vec<Strategy>, Vec<f64>) {
    h.iter().unzip()
}

/// Line flows induced by strategy flows `h`, solving
/// `v_i = sum_s h_s [i in s] f_i(v_i) / sum_{j in s} f_j(v_j)` to a residual
/// of at most 1e-9.
///
/// Fails with `SaturatedFlow` when the strategies confined to some set of
/// lines carry at least that set's total saturation flow, or when the
/// iteration drives a line to saturation.
pub fn induced_line_flows(network: &Network, h: &StrategyFlowVector) -> Result<Vec<f64>> {
    let (strategies, flows) = flatten(h);
    for &s in &strategies {
        check_strategy(network, s)?;
    }
    induced_raw(network, &strategies, &flows)
}

fn waiting_ratios(network: &Network, v: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let freqs = frequencies(network, v)?;
    let ratios = v
        .iter()
        .zip(&freqs)
        .map(|(&vi, &fi)| if vi == 0.0 { 0.0 } else { vi / fi })
        .collect();
    Ok((ratios, freqs))
}

/// `Phi(v) = max_i v_i / f_i(v_i)`, the minimal total waiting cost compatible with `v`.
pub fn phi_value(network: &Network, v: &[f64]) -> Result<f64> {
    let (ratios, _) = waiting_ratios(network, v)?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// Constructive solution of the waiting-cost LP at line flows `v`.
///
/// Lines are ranked by decreasing ratio `r_i = v_i / f_i(v_i)`; the nested
/// strategy made of the `k` highest-ranked lines receives
/// `h = (r_(k) - r_(k+1)) * sum f`, so that `h * tau` telescopes to each
/// line's ratio. Returns the objective `sum h_s tau_s` and the flows.
pub fn phi_oracle(network: &Network, v: &[f64]) -> Result<(f64, StrategyFlowVector)> {
    let (ratios, freqs) = waiting_ratios(network, v)?;
    let n = network.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| ratios[b].total_cmp(&ratios[a]));

    let mut h = StrategyFlowVector::new();
    let mut value = 0.0;
    let mut mask = 0u32;
    let mut freq_sum = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        mask |= 1 << i;
        freq_sum += freqs[i];
        let next = order.get(rank + 1).map_or(0.0, |&j| ratios[j]);
        let gap = ratios[i] - next;
        if gap > 0.0 {
            h.add(Strategy(mask), gap * freq_sum)?;
            value += gap;
        }
    }
    Ok((value, h))
}

/// Strategy flows inducing `v` at minimal total waiting cost.
pub fn strategy_decomposition(network: &Network, v: &[f64]) -> Result<StrategyFlowVector> {
    Ok(phi_oracle(network, v)?.1)
}

/// Strategy-form social cost `sum_s h_s T_s(v)`.
pub fn strategy_cost(network: &Network, h: &StrategyFlowVector, v: &[f64]) -> Result<f64> {
    let freqs = frequencies(network, v)?;
    let mut cost = 0.0;
    for (s, hs) in h.iter() {
        check_strategy(network, s)?;
        if hs > 0.0 {
            cost += hs * time_from_freqs(network, s, &freqs)?;
        }
    }
    Ok(cost)
}

/// Best strategy flows found by [`brute_force_social_optimum`].
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceOptimum {
    pub cost: f64,
    pub flows: StrategyFlowVector,
    pub line_flows: Vec<f64>,
    /// Best cost after the coarse grid and after each refinement stage.
    pub history: Vec<f64>,
}

/// Grid search for the social optimum directly over strategy flows.
///
/// Every composition of `resolution` equal parts of `x` over the `2^n - 1`
/// strategies is evaluated; the best point is then refined by compass search
/// over pairwise flow transfers, in two stages ending at transfers 10 and 100
/// times finer than the grid. Points whose induced flows
/// saturate a line are skipped. Ties keep the lexicographically first `h`.
pub fn brute_force_social_optimum(
    network: &Network,
    x: f64,
    resolution: usize,
) -> Result<BruteForceOptimum> {
    let n = network.len();
    if n > MAX_BRUTE_FORCE {
        return Err(SolverError::TooLarge {
            n,
            limit: MAX_BRUTE_FORCE,
        });
    }
    if !(x >= 0.0 && x < network.total_saturation()) {
        return Err(SolverError::InfeasibleDemand {
            demand: x,
            capacity: network.total_saturation(),
        });
    }
    if resolution == 0 {
        return Err(SolverError::DomainError(
            "resolution must be positive".into(),
        ));
    }
    let strategies = enumerate_strategies(n)?;
    let m = strategies.len();
    if x == 0.0 {
        return Ok(BruteForceOptimum {
            cost: 0.0,
            flows: StrategyFlowVector::new(),
            line_flows: vec![0.0; n],
            history: vec![0.0],
        });
    }

    let evaluate = |h: &[f64]| -> Option<(f64, Vec<f64>)> {
        let v = induced_raw(network, &strategies, h).ok()?;
        let freqs = frequencies(network, &v).ok()?;
        let mut cost = 0.0;
        for (s, &hs) in strategies.iter().zip(h) {
            if hs > 0.0 {
                cost += hs * time_from_freqs(network, *s, &freqs).ok()?;
            }
        }
        Some((cost, v))
    };

    let step = x / resolution as f64;
    let mut grid: Vec<Vec<f64>> = Vec::new();
    let mut parts = vec![0usize; m];
    for_each_composition(resolution, &mut parts, 0, &mut |c| {
        grid.push(c.iter().map(|&k| k as f64 * step).collect());
    });
    // Parallel evaluation; the reduction keeps the first minimum in grid
    // (lexicographic) order.
    let costs: Vec<Option<(f64, Vec<f64>)>> = grid.par_iter().map(|h| evaluate(h)).collect();
    let (index, (mut best_cost, mut best_v)) = costs
        .into_iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| (i, c)))
        .reduce(|a, b| if b.1 .0 < a.1 .0 { b } else { a })
        .ok_or_else(|| {
            SolverError::ConvergenceError("no grid point produced unsaturated line flows".into())
        })?;
    let mut best_h = grid.swap_remove(index);
    let mut history = vec![best_cost];

    // Compass search over pairwise transfers, halving the transfer size
    // whenever no transfer improves, until it is 10x and then 100x finer
    // than the grid.
    let mut delta = step;
    let mut budget = 1_000_000usize;
    for refine in [10.0, 100.0] {
        let finest = step / refine;
        while delta >= finest && budget > 0 {
            let mut improved = false;
            'scan: for from in 0..m {
                if best_h[from] <= 0.0 {
                    continue;
                }
                for to in (0..m).filter(|&to| to != from) {
                    budget = budget.saturating_sub(1);
                    let mut h = best_h.clone();
                    let moved = delta.min(h[from]);
                    h[from] -= moved;
                    h[to] += moved;
                    if let Some((cost, v)) = evaluate(&h) {
                        if cost < best_cost {
                            (best_cost, best_h, best_v) = (cost, h, v);
                            improved = true;
                            break 'scan;
                        }
                    }
                }
            }
            if !improved {
                delta /= 2.0;
            }
        }
        history.push(best_cost);
    }

    let mut flows = StrategyFlowVector::new();
    for (s, &hs) in strategies.iter().zip(&best_h) {
        if hs > 0.0 {
            flows.add(*s, hs)?;
        }
    }
    Ok(BruteForceOptimum {
        cost: best_cost,
        flows,
        line_flows: best_v,
        history,
    })
}

/// Visits every `c` with `c.len()` nonnegative parts summing to `total`, in
/// lexicographic order.
fn for_each_composition<F: FnMut(&[usize])>(
    total: usize,
    parts: &mut [usize],
    pos: usize,
    f: &mut F,
) {
    let m = parts.len();
    if pos + 1 == m {
        parts[pos] = total;
        f(parts);
        return;
    }
    for k in 0..=total {
        parts[pos] = k;
        for_each_composition(total - k, parts, pos + 1, f);
    }
}
