//! Column generation at one search node, with the heuristic injection hook.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::heuristic::IntegerHeuristic;
use super::network::ConnectionNetwork;
use super::pool::{solve_rmp_lp, ColumnPool, RmpSolution};
use crate::error::{Error, Result};
use crate::ilp::{Route, SetPartitioningInstance};

/// When the heuristic hook runs during column generation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeuristicPolicy {
    Never,
    Always,
    /// Only when [`is_promising`] holds.
    Promising,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PromisingConfig {
    /// First iteration at which the predicate may hold.
    pub warmup: usize,
    /// Iterations over which the relative LP decrease is measured.
    pub window: usize,
    pub max_relative_decrease: f64,
    pub near_one: f64,
    /// Required share of support variables above `near_one`.
    pub min_fraction: f64,
}

impl Default for PromisingConfig {
    fn default() -> Self {
        PromisingConfig {
            warmup: 3,
            window: 2,
            max_relative_decrease: 0.05,
            near_one: 0.9,
            min_fraction: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgConfig {
    pub max_iterations: usize,
    pub columns_per_iteration: usize,
    pub policy: HeuristicPolicy,
    pub promising: PromisingConfig,
    /// Stop once the pricing lower bound proves the node cannot beat the incumbent.
    pub early_stop: bool,
    /// Node views larger than this multiple of the free flights evict columns.
    pub eviction_factor: usize,
    /// Cap on heuristic invocations over the whole search.
    pub max_heuristic_calls: Option<usize>,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            max_iterations: 200,
            columns_per_iteration: 10,
            policy: HeuristicPolicy::Promising,
            promising: PromisingConfig::default(),
            early_stop: true,
            eviction_factor: 10,
            max_heuristic_calls: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CgIteration {
    pub iteration: usize,
    pub objective: f64,
    pub columns: usize,
    pub columns_added: usize,
    pub min_reduced_cost: Option<f64>,
    /// Valid lower bound on the node, fixed costs included.
    pub lower_bound: f64,
    pub promising: bool,
    pub heuristic_called: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CgStatus {
    Converged,
    IterationCap,
    /// The node cannot improve on the incumbent.
    BoundStop,
    /// An incumbent reached the configured threshold.
    Threshold,
}

/// Which part of the pool a search node sees.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeView {
    pub fixed: Vec<usize>,
    pub forbidden: BTreeSet<usize>,
    pub fixed_cost: f64,
    /// Flights covered by fixed columns.
    pub covered: Vec<bool>,
}

impl NodeView {
    pub fn new(pool: &ColumnPool, fixed: &[usize], forbidden: &BTreeSet<usize>) -> Result<Self> {
        let mut covered = vec![false; pool.n_flights()];
        let mut fixed_cost = 0.0;
        for &id in fixed {
            let c = pool.column(id);
            if c.overlaps(&covered) || forbidden.contains(&id) || c.is_slack() {
                return Err(Error::input(format!("inconsistent fixing of column {id}")));
            }
            c.flights.iter().for_each(|&f| covered[f] = true);
            fixed_cost += c.cost;
        }
        Ok(NodeView {
            fixed: fixed.to_vec(),
            forbidden: forbidden.clone(),
            fixed_cost,
            covered,
        })
    }

    pub fn rows(&self) -> Vec<usize> {
        (0..self.covered.len()).filter(|&f| !self.covered[f]).collect()
    }

    pub fn admits(&self, pool: &ColumnPool, id: usize) -> bool {
        !self.forbidden.contains(&id) && !pool.column(id).overlaps(&self.covered)
    }

    /// Admissible pool columns, slacks of free flights included.
    pub fn columns(&self, pool: &ColumnPool) -> Vec<usize> {
        (0..pool.len()).filter(|&id| self.admits(pool, id)).collect()
    }
}

/// Incumbent integer solution of the whole problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Incumbent {
    /// Routes as flight index sequences.
    pub routes: Vec<Vec<usize>>,
    pub cost: i64,
    pub origin: IncumbentOrigin,
    pub node: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IncumbentOrigin {
    Lp,
    Heuristic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeuristicCall {
    pub node: usize,
    pub iteration: usize,
    pub columns: usize,
    pub solutions: usize,
    pub best_cost: Option<i64>,
    pub improved_incumbent: bool,
    pub truncated: bool,
}

/// Mutable state shared by all nodes of one search.
pub struct SearchState<'n, 'h> {
    pub net: &'n ConnectionNetwork,
    pub pool: ColumnPool,
    pub incumbent: Option<Incumbent>,
    pub heuristic: Option<&'h mut dyn IntegerHeuristic>,
    pub heuristic_log: Vec<HeuristicCall>,
    pub threshold: Option<i64>,
    pub node: usize,
    pub columns_generated: usize,
}

impl<'n, 'h> SearchState<'n, 'h> {
    pub fn new(net: &'n ConnectionNetwork, heuristic: Option<&'h mut dyn IntegerHeuristic>) -> Self {
        SearchState {
            net,
            pool: ColumnPool::with_slacks(net.n_flights(), net.big_m()),
            incumbent: None,
            heuristic,
            heuristic_log: Vec::new(),
            threshold: None,
            node: 0,
            columns_generated: 0,
        }
    }

    pub fn upper_bound(&self) -> Option<i64> {
        self.incumbent.as_ref().map(|i| i.cost)
    }

    pub fn threshold_reached(&self) -> bool {
        matches!((self.threshold, self.upper_bound()), (Some(t), Some(u)) if u <= t)
    }

    /// Records a solution given by pool ids if it beats the incumbent.
    pub fn offer(&mut self, ids: &[usize], origin: IncumbentOrigin) -> bool {
        let cost = ids.iter().map(|&id| self.pool.column(id).cost).sum::<f64>().round() as i64;
        if self.upper_bound().is_some_and(|u| u <= cost) {
            return false;
        }
        self.incumbent = Some(Incumbent {
            routes: ids.iter().map(|&id| self.pool.column(id).path.clone()).collect(),
            cost,
            origin,
            node: self.node,
        });
        true
    }
}

/// `ceil(bound)` with a small tolerance, for integer costs.
pub fn cannot_improve(bound: f64, upper: Option<i64>) -> bool {
    upper.is_some_and(|u| (bound - 1e-6).ceil() >= u as f64)
}

/// The "RMP is promising" rule: past the warmup, the LP has stalled, and
/// enough of the support is near one.
pub fn is_promising(trace: &[CgIteration], rmp: &RmpSolution, cfg: &PromisingConfig) -> bool {
    let Some(last) = trace.last() else {
        return false;
    };
    if last.iteration < cfg.warmup || trace.len() <= cfg.window {
        return false;
    }
    let then = trace[trace.len() - 1 - cfg.window].objective;
    let decrease = (then - last.objective) / then.abs().max(1.0);
    if decrease >= cfg.max_relative_decrease {
        return false;
    }
    let support: Vec<f64> = rmp.x.iter().copied().filter(|&v| v > 1e-9).collect();
    if support.is_empty() {
        return false;
    }
    let near = support.iter().filter(|&&v| v > cfg.near_one).count();
    near as f64 >= cfg.min_fraction * support.len() as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgOutcome {
    pub rmp: RmpSolution,
    pub trace: Vec<CgIteration>,
    pub status: CgStatus,
    /// Best valid lower bound on the node, fixed costs included.
    pub bound: f64,
}

impl CgOutcome {
    pub fn uses_slack(&self, pool: &ColumnPool) -> bool {
        self.rmp
            .columns
            .iter()
            .zip(&self.rmp.x)
            .any(|(&id, &v)| v > 1e-6 && pool.column(id).is_slack())
    }

    /// Pool ids at value one when the LP solution is integral.
    pub fn integral_support(&self) -> Option<Vec<usize>> {
        let mut ones = Vec::new();
        for (&id, &v) in self.rmp.columns.iter().zip(&self.rmp.x) {
            if v > 1.0 - 1e-6 {
                ones.push(id);
            } else if v > 1e-6 {
                return None;
            }
        }
        Some(ones)
    }
}

fn call_heuristic(
    state: &mut SearchState,
    view: &NodeView,
    rmp: &RmpSolution,
    iteration: usize,
    cfg: &CgConfig,
) -> Result<bool> {
    if cfg
        .max_heuristic_calls
        .is_some_and(|cap| state.heuristic_log.len() >= cap)
    {
        return Ok(false);
    }
    let Some(h) = state.heuristic.as_deref_mut() else {
        return Ok(false);
    };
    let ids: Vec<usize> = rmp
        .columns
        .iter()
        .copied()
        .filter(|&id| !state.pool.column(id).is_slack())
        .collect();
    if ids.is_empty() {
        return Ok(false);
    }
    let routes = ids
        .iter()
        .map(|&id| {
            let c = state.pool.column(id);
            Route::new(c.flights.clone(), c.cost.round() as i64)
        })
        .collect();
    let b = view.covered.iter().map(|&c| u32::from(!c)).collect();
    let inst = SetPartitioningInstance::new(state.pool.n_flights(), routes, Some(b))?;
    let x: Vec<f64> = ids.iter().map(|&id| rmp.value_of(id)).collect();
    let out = h.solve(&inst, &x)?;
    let mut improved = false;
    if let Some((best, _)) = out.solutions.first() {
        debug_assert!(inst.check_feasible(best)?);
        let mut chosen = view.fixed.clone();
        chosen.extend(best.selected().map(|k| ids[k]));
        improved = state.offer(&chosen, IncumbentOrigin::Heuristic);
    }
    state.heuristic_log.push(HeuristicCall {
        node: state.node,
        iteration,
        columns: out.columns_used,
        solutions: out.solutions.len(),
        best_cost: out.best_feasible_cost.map(|c| c + view.fixed_cost.round() as i64),
        improved_incumbent: improved,
        truncated: out.truncated,
    });
    Ok(true)
}

/// Alternates RMP solves and pricing until no negative reduced cost remains.
pub fn column_generation(
    state: &mut SearchState,
    view: &NodeView,
    inherited_bound: f64,
    cfg: &CgConfig,
) -> Result<CgOutcome> {
    let rows = view.rows();
    let free = rows.len();
    let mut columns = view.columns(&state.pool);
    let excluded = view.covered.clone();
    let forbidden: Vec<Vec<usize>> = view
        .forbidden
        .iter()
        .map(|&id| state.pool.column(id).flights.clone())
        .collect();
    let mut trace: Vec<CgIteration> = Vec::new();
    let mut bound = inherited_bound;

    loop {
        let iteration = trace.len() + 1;
        let rmp = solve_rmp_lp(&state.pool, &columns, &rows)?;
        let pricing = state
            .net
            .price(&rmp.pi, &excluded, &forbidden, cfg.columns_per_iteration)?;
        let total = rmp.objective + view.fixed_cost;
        bound = bound.max(total + pricing.reduced_cost_bound());

        let mut added = 0;
        for route in &pricing.routes {
            let (id, new) = state.pool.add(&route.flights, route.cost as f64);
            if new {
                state.columns_generated += 1;
            }
            if !columns.contains(&id) && view.admits(&state.pool, id) {
                columns.push(id);
                added += 1;
            }
        }

        let promising = is_promising_with(&trace, iteration, rmp.objective, &rmp, &cfg.promising);
        let wants = match cfg.policy {
            HeuristicPolicy::Never => false,
            HeuristicPolicy::Always => true,
            HeuristicPolicy::Promising => promising,
        };
        let called = wants && call_heuristic(state, view, &rmp, iteration, cfg)?;
        trace.push(CgIteration {
            iteration,
            objective: total,
            columns: rmp.columns.len(),
            columns_added: added,
            min_reduced_cost: pricing.min_reduced_cost,
            lower_bound: bound,
            promising,
            heuristic_called: called,
        });

        let status = if state.threshold_reached() {
            Some(CgStatus::Threshold)
        } else if added == 0 {
            Some(CgStatus::Converged)
        } else if cfg.early_stop && cannot_improve(bound, state.upper_bound()) {
            Some(CgStatus::BoundStop)
        } else if iteration >= cfg.max_iterations {
            Some(CgStatus::IterationCap)
        } else {
            None
        };
        if let Some(status) = status {
            if status == CgStatus::Converged {
                bound = bound.max(total);
            }
            return Ok(CgOutcome {
                rmp,
                trace,
                status,
                bound,
            });
        }
        evict(&state.pool, &mut columns, &rmp, free, cfg.eviction_factor);
    }
}

fn is_promising_with(
    trace: &[CgIteration],
    iteration: usize,
    objective: f64,
    rmp: &RmpSolution,
    cfg: &PromisingConfig,
) -> bool {
    let mut t = trace.to_vec();
    t.push(CgIteration {
        iteration,
        objective,
        columns: 0,
        columns_added: 0,
        min_reduced_cost: None,
        lower_bound: f64::NEG_INFINITY,
        promising: false,
        heuristic_called: false,
    });
    is_promising(&t, rmp, cfg)
}

/// Drops nonbasic priced columns with the largest reduced cost beyond the cap.
fn evict(pool: &ColumnPool, columns: &mut Vec<usize>, rmp: &RmpSolution, free: usize, factor: usize) {
    let cap = factor.saturating_mul(free.max(1));
    let priced = columns.iter().filter(|&&id| !pool.column(id).is_slack()).count();
    if priced <= cap {
        return;
    }
    let basic: BTreeSet<usize> = rmp.basis.iter().copied().collect();
    let mut candidates: Vec<(f64, usize)> = columns
        .iter()
        .copied()
        .filter(|id| !basic.contains(id) && !pool.column(*id).is_slack())
        .map(|id| (rmp.reduced_cost(pool.column(id)), id))
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let drop: BTreeSet<usize> = candidates.iter().take(priced - cap).map(|c| c.1).collect();
    columns.retain(|id| !drop.contains(id));
}
