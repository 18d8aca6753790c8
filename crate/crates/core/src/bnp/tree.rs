//! Branch-and-Price search: full binary branching or the fixing dive.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::colgen::{
    cannot_improve, column_generation, CgConfig, CgIteration, CgOutcome, CgStatus, HeuristicCall, Incumbent,
    IncumbentOrigin, NodeView, SearchState,
};
use super::heuristic::IntegerHeuristic;
use super::network::ConnectionNetwork;
use super::pool::ColumnPool;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Binary branching on the most fractional column.
    FullBranch,
    /// Fix the column closest to one, backtracking on infeasibility.
    Dive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnpConfig {
    pub mode: SearchMode,
    pub cg: CgConfig,
    /// Stop as soon as an incumbent costs at most this much.
    pub threshold: Option<i64>,
    pub max_nodes: usize,
}

impl Default for BnpConfig {
    fn default() -> Self {
        BnpConfig {
            mode: SearchMode::FullBranch,
            cg: CgConfig::default(),
            threshold: None,
            max_nodes: 10_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BnpStatus {
    /// Search tree exhausted; the incumbent is optimal.
    Optimal,
    /// Search tree exhausted without a feasible solution.
    Infeasible,
    /// The dive ended with an incumbent, optimality not proven.
    Feasible,
    /// The dive ended without finding a solution.
    NoSolutionFound,
    ThresholdReached,
    NodeLimit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BnpStats {
    pub nodes_created: usize,
    pub pruned_bound: usize,
    pub pruned_integrality: usize,
    pub pruned_infeasibility: usize,
    pub branched: usize,
    pub open_at_exit: usize,
    pub cg_iterations: usize,
    pub columns_generated: usize,
    pub heuristic_calls: usize,
    pub max_depth: usize,
}

impl BnpStats {
    /// Every created node is pruned, branched or still open.
    pub fn accounting_holds(&self) -> bool {
        self.nodes_created
            == self.pruned_bound + self.pruned_integrality + self.pruned_infeasibility + self.branched + self.open_at_exit
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnpResult {
    pub status: BnpStatus,
    pub incumbent: Option<Incumbent>,
    /// Column generation LP value at the root.
    pub root_lp: f64,
    pub root_bound: f64,
    pub stats: BnpStats,
    pub heuristic_log: Vec<HeuristicCall>,
    pub root_trace: Vec<CgIteration>,
    pub columns: usize,
}

#[derive(Clone, Debug)]
struct Node {
    fixed: Vec<usize>,
    forbidden: BTreeSet<usize>,
    depth: usize,
    bound: f64,
}

enum Verdict {
    Bound,
    Integral,
    Infeasible,
    Fractional,
    Threshold,
}

/// Most fractional priced column, ties to the lowest pool id.
pub fn most_fractional(pool: &ColumnPool, cg: &CgOutcome) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (&id, &v) in cg.rmp.columns.iter().zip(&cg.rmp.x) {
        if pool.column(id).is_slack() || v <= 1e-6 || v >= 1.0 - 1e-6 {
            continue;
        }
        let dist = (v - 0.5).abs();
        if best.is_none_or(|(d, b)| dist < d - 1e-12 || (dist <= d + 1e-12 && id < b)) {
            best = Some((dist, id));
        }
    }
    best.map(|b| b.1)
}

/// Column with the largest value below one, ties to the lowest pool id.
pub fn dive_choice(pool: &ColumnPool, columns: &[usize], x: &[f64]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (&id, &v) in columns.iter().zip(x) {
        if pool.column(id).is_slack() || v >= 1.0 - 1e-6 || v <= 1e-6 {
            continue;
        }
        if best.is_none_or(|(bv, b)| v > bv + 1e-12 || (v >= bv - 1e-12 && id < b)) {
            best = Some((v, id));
        }
    }
    best.map(|b| b.1)
}

fn evaluate(state: &mut SearchState, cg: &CgOutcome, view: &NodeView) -> Verdict {
    if cg.status == CgStatus::Threshold {
        return Verdict::Threshold;
    }
    if cg.status == CgStatus::BoundStop {
        return Verdict::Bound;
    }
    if cg.uses_slack(&state.pool) {
        return Verdict::Infeasible;
    }
    if let Some(ones) = cg.integral_support() {
        let mut ids = view.fixed.clone();
        ids.extend(ones);
        state.offer(&ids, IncumbentOrigin::Lp);
        if state.threshold_reached() {
            return Verdict::Threshold;
        }
        return Verdict::Integral;
    }
    if cannot_improve(cg.bound, state.upper_bound()) {
        return Verdict::Bound;
    }
    Verdict::Fractional
}

/// Runs the search on `net` and returns the best incumbent with statistics.
pub fn branch_and_price(
    net: &ConnectionNetwork,
    cfg: &BnpConfig,
    heuristic: Option<&mut dyn IntegerHeuristic>,
) -> Result<BnpResult> {
    let mut state = SearchState::new(net, heuristic);
    state.threshold = cfg.threshold;
    let mut stats = BnpStats::default();
    let mut stack = vec![Node {
        fixed: Vec::new(),
        forbidden: BTreeSet::new(),
        depth: 0,
        bound: f64::NEG_INFINITY,
    }];
    stats.nodes_created = 1;
    let mut root: Option<(f64, f64, Vec<CgIteration>)> = None;
    let mut status = None;
    let mut root_infeasible = false;

    while let Some(node) = stack.pop() {
        if stats.nodes_created - stack.len() > cfg.max_nodes {
            stack.push(node);
            status = Some(BnpStatus::NodeLimit);
            break;
        }
        state.node += 1;
        stats.max_depth = stats.max_depth.max(node.depth);
        if cannot_improve(node.bound, state.upper_bound()) {
            stats.pruned_bound += 1;
            continue;
        }
        let view = NodeView::new(&state.pool, &node.fixed, &node.forbidden)?;
        let cg = column_generation(&mut state, &view, node.bound, &cfg.cg)?;
        stats.cg_iterations += cg.trace.len();
        if root.is_none() {
            root = Some((cg.rmp.objective, cg.bound, cg.trace.clone()));
        }

        match evaluate(&mut state, &cg, &view) {
            Verdict::Threshold => {
                stats.open_at_exit += 1;
                status = Some(BnpStatus::ThresholdReached);
                break;
            }
            Verdict::Integral => {
                stats.pruned_integrality += 1;
                if cfg.mode == SearchMode::Dive {
                    break;
                }
            }
            Verdict::Bound => {
                stats.pruned_bound += 1;
                if cfg.mode == SearchMode::Dive {
                    break;
                }
            }
            Verdict::Infeasible => {
                stats.pruned_infeasibility += 1;
                root_infeasible |= node.fixed.is_empty() && node.forbidden.is_empty();
                if cfg.mode == SearchMode::Dive {
                    // undo the most recent fix and forbid that column instead
                    if let Some((&last, rest)) = node.fixed.split_last() {
                        let mut forbidden = node.forbidden.clone();
                        forbidden.insert(last);
                        stack.push(Node {
                            fixed: rest.to_vec(),
                            forbidden,
                            depth: node.depth,
                            bound: node.bound,
                        });
                        stats.nodes_created += 1;
                    }
                }
            }
            Verdict::Fractional => {
                stats.branched += 1;
                let bound = cg.bound;
                match cfg.mode {
                    SearchMode::FullBranch => {
                        let j = most_fractional(&state.pool, &cg)
                            .ok_or_else(|| Error::Numerical("fractional LP without a branching column".into()))?;
                        let mut forbidden = node.forbidden.clone();
                        forbidden.insert(j);
                        stack.push(Node {
                            fixed: node.fixed.clone(),
                            forbidden,
                            depth: node.depth + 1,
                            bound,
                        });
                        let mut fixed = node.fixed.clone();
                        fixed.push(j);
                        stack.push(Node {
                            fixed,
                            forbidden: node.forbidden,
                            depth: node.depth + 1,
                            bound,
                        });
                        stats.nodes_created += 2;
                    }
                    SearchMode::Dive => {
                        let j = dive_choice(&state.pool, &cg.rmp.columns, &cg.rmp.x)
                            .ok_or_else(|| Error::Numerical("fractional LP without a dive column".into()))?;
                        let mut fixed = node.fixed.clone();
                        fixed.push(j);
                        stack.push(Node {
                            fixed,
                            forbidden: node.forbidden,
                            depth: node.depth + 1,
                            bound,
                        });
                        stats.nodes_created += 1;
                    }
                }
            }
        }
    }

    stats.open_at_exit += stack.len();
    stats.columns_generated = state.columns_generated;
    stats.heuristic_calls = state.heuristic_log.len();
    let status = status.unwrap_or(match (cfg.mode, &state.incumbent) {
        (SearchMode::FullBranch, Some(_)) => BnpStatus::Optimal,
        (SearchMode::FullBranch, None) => BnpStatus::Infeasible,
        (SearchMode::Dive, Some(_)) => BnpStatus::Feasible,
        (SearchMode::Dive, None) if root_infeasible => BnpStatus::Infeasible,
        (SearchMode::Dive, None) => BnpStatus::NoSolutionFound,
    });
    let (root_lp, root_bound, root_trace) = root.unwrap_or((f64::NAN, f64::NAN, Vec::new()));
    Ok(BnpResult {
        status,
        incumbent: state.incumbent,
        root_lp,
        root_bound,
        stats,
        heuristic_log: state.heuristic_log,
        root_trace,
        columns: state.pool.len(),
    })
}
