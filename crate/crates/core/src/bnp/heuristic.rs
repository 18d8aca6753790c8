//! Integer heuristics run on the restricted master problem.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::angles::{run_ladder, LadderConfig, LocalSearchConfig};
use crate::error::Result;
use crate::ilp::{Assignment, Route, SetPartitioningInstance};
use crate::instance_gen::simplify_costs;
use crate::ising::{map_to_ising, resolve_weights, WeightFactor};
use crate::qaoa::{sample, Simulator};

/// Feasible solutions over the columns of the instance handed to the heuristic.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HeuristicOutcome {
    /// Sorted by cost, then bitstring.
    pub solutions: Vec<(Assignment, i64)>,
    pub best_feasible_cost: Option<i64>,
    /// Columns were dropped to satisfy the size limit.
    pub truncated: bool,
    /// Columns the heuristic actually worked on.
    pub columns_used: usize,
}

impl HeuristicOutcome {
    fn from_solutions(mut solutions: Vec<(Assignment, i64)>, truncated: bool, columns_used: usize) -> Self {
        solutions.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        solutions.dedup_by(|a, b| a.0 == b.0);
        HeuristicOutcome {
            best_feasible_cost: solutions.first().map(|s| s.1),
            solutions,
            truncated,
            columns_used,
        }
    }
}

/// An integer heuristic over the restricted master problem.
pub trait IntegerHeuristic {
    fn name(&self) -> &'static str;

    /// `x` holds the LP value of each column of `inst`.
    fn solve(&mut self, inst: &SetPartitioningInstance, x: &[f64]) -> Result<HeuristicOutcome>;
}

/// Indices of the columns kept after removing empty and duplicate columns,
/// capped at `max_columns` by descending LP value.
pub fn preprocess(inst: &SetPartitioningInstance, x: &[f64], max_columns: usize) -> (Vec<usize>, bool) {
    let mut order: Vec<usize> = (0..inst.n_routes()).collect();
    // cheaper duplicate first so that it is the one kept
    order.sort_by_key(|&r| (inst.route(r).cost, r));
    let mut seen = BTreeSet::new();
    let mut kept: Vec<usize> = order
        .into_iter()
        .filter(|&r| !inst.route(r).flights.is_empty() && seen.insert(inst.route(r).flights.clone()))
        .collect();
    let truncated = kept.len() > max_columns;
    if truncated {
        kept.sort_by(|&a, &b| x[b].total_cmp(&x[a]).then(a.cmp(&b)));
        kept.truncate(max_columns);
    }
    kept.sort_unstable();
    (kept, truncated)
}

fn restrict(inst: &SetPartitioningInstance, keep: &[usize]) -> Result<SetPartitioningInstance> {
    let routes = keep.iter().map(|&r| inst.route(r).clone()).collect();
    SetPartitioningInstance::new(inst.n_flights(), routes, Some(inst.rhs().to_vec()))
}

fn embed(sub: &Assignment, keep: &[usize], n: usize) -> Assignment {
    let selected: Vec<usize> = sub.selected().map(|i| keep[i]).collect();
    Assignment::from_selected(&selected, n)
}

/// Exact covers by depth-first search on the lowest uncovered flight, for
/// right-hand sides in `{0, 1}`.
pub fn exact_covers(inst: &SetPartitioningInstance, limit: usize) -> Vec<Assignment> {
    let n = inst.n_flights();
    let mut by_flight: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, route) in inst.routes().iter().enumerate() {
        if let Some(&f) = route.flights.first() {
            by_flight[f].push(r);
        }
    }
    // a route can only be chosen when its smallest flight is the lowest uncovered one
    let mut out = Vec::new();
    // rows with b = 0 start covered, so routes touching them are never chosen
    let mut covered: Vec<bool> = inst.rhs().iter().map(|&b| b == 0).collect();
    let mut chosen = Vec::new();
    fn rec(
        inst: &SetPartitioningInstance,
        by_flight: &[Vec<usize>],
        covered: &mut [bool],
        chosen: &mut Vec<usize>,
        out: &mut Vec<Assignment>,
        limit: usize,
    ) {
        if out.len() >= limit {
            return;
        }
        let Some(f) = covered.iter().position(|&c| !c) else {
            out.push(Assignment::from_selected(chosen, inst.n_routes()));
            return;
        };
        for &r in &by_flight[f] {
            let route: &Route = inst.route(r);
            if route.flights.iter().any(|&g| covered[g]) {
                continue;
            }
            route.flights.iter().for_each(|&g| covered[g] = true);
            chosen.push(r);
            rec(inst, by_flight, covered, chosen, out, limit);
            chosen.pop();
            route.flights.iter().for_each(|&g| covered[g] = false);
        }
    }
    if inst.rhs().iter().all(|&b| b <= 1) {
        rec(inst, &by_flight, &mut covered, &mut chosen, &mut out, limit);
    }
    out
}

/// First-improvement 1-flip then 2-swap pass that keeps feasibility.
pub fn improve(inst: &SetPartitioningInstance, x: &Assignment) -> Result<(Assignment, i64)> {
    let mut best = x.clone();
    let mut cost = inst.cost(&best)?;
    let n = best.len();
    for r in 0..n {
        let mut y = best.clone();
        y.0[r] = !y.0[r];
        if inst.check_feasible(&y)? {
            let c = inst.cost(&y)?;
            if c < cost {
                best = y;
                cost = c;
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if best.0[i] && !best.0[j] {
                let mut y = best.clone();
                y.0[i] = false;
                y.0[j] = true;
                if inst.check_feasible(&y)? {
                    let c = inst.cost(&y)?;
                    if c < cost {
                        best = y;
                        cost = c;
                    }
                }
            }
        }
    }
    Ok((best, cost))
}

/// Exhaustive stand-in for the quantum solver.
#[derive(Clone, Debug)]
pub struct MockExact {
    pub max_solutions: usize,
}

impl Default for MockExact {
    fn default() -> Self {
        MockExact { max_solutions: 16 }
    }
}

impl IntegerHeuristic for MockExact {
    fn name(&self) -> &'static str {
        "mock-exact"
    }

    fn solve(&mut self, inst: &SetPartitioningInstance, x: &[f64]) -> Result<HeuristicOutcome> {
        let (keep, _) = preprocess(inst, x, usize::MAX);
        let sub = restrict(inst, &keep)?;
        let mut solutions = Vec::new();
        for a in exact_covers(&sub, 100_000) {
            let full = embed(&a, &keep, inst.n_routes());
            let c = inst.cost(&full)?;
            solutions.push((full, c));
        }
        let mut out = HeuristicOutcome::from_solutions(solutions, false, keep.len());
        out.solutions.truncate(self.max_solutions);
        Ok(out)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaHeuristicConfig {
    pub f: WeightFactor,
    pub p_max: usize,
    pub shots: u64,
    pub seed: u64,
    pub max_qubits: usize,
    pub global_budget: usize,
    pub local_tol: f64,
    pub local_max_iter: usize,
}

impl Default for QaoaHeuristicConfig {
    fn default() -> Self {
        QaoaHeuristicConfig {
            f: WeightFactor::Finite(1.0),
            p_max: 10,
            shots: 256,
            seed: 0,
            max_qubits: 8,
            global_budget: 1000,
            local_tol: 1e-5,
            local_max_iter: 60,
        }
    }
}

/// Simulated QAOA on the reduced master problem.
#[derive(Clone, Debug)]
pub struct QaoaHeuristic {
    pub config: QaoaHeuristicConfig,
    calls: u64,
    /// Final-depth `P_EC` of each call.
    pub success_log: Vec<f64>,
}

impl QaoaHeuristic {
    pub fn new(config: QaoaHeuristicConfig) -> Self {
        QaoaHeuristic {
            config,
            calls: 0,
            success_log: Vec::new(),
        }
    }
}

impl IntegerHeuristic for QaoaHeuristic {
    fn name(&self) -> &'static str {
        "qaoa"
    }

    fn solve(&mut self, inst: &SetPartitioningInstance, x: &[f64]) -> Result<HeuristicOutcome> {
        let cfg = &self.config;
        let seed = cfg.seed.wrapping_add(self.calls);
        self.calls += 1;
        let (keep, truncated) = preprocess(inst, x, cfg.max_qubits);
        if keep.is_empty() {
            return Ok(HeuristicOutcome::from_solutions(Vec::new(), truncated, 0));
        }
        let sub = restrict(inst, &keep)?;
        // Ising costs only; feasibility and final costs use the original instance
        let ising_inst = simplify_costs(&sub, seed).unwrap_or_else(|_| sub.clone());
        let weights = resolve_weights(&ising_inst, cfg.f)?;
        let model = map_to_ising(&ising_inst, weights)?;
        let feas = ising_inst.brute_force_solve()?;
        let ladder_cfg = LadderConfig {
            seed,
            global_budget: cfg.global_budget,
            gamma_periods: Some(2.0),
            local: LocalSearchConfig {
                tol: cfg.local_tol,
                max_iter: cfg.local_max_iter,
                ..Default::default()
            },
        };
        let ladder = run_ladder(&model, cfg.p_max, &feas, &ladder_cfg)?;
        self.success_log.push(ladder.last().p_ec);
        let state = Simulator::new(&model)?.evolve(&ladder.last().angles);
        let hist = sample(&state, cfg.shots, seed)?;
        let mut solutions = Vec::new();
        for &idx in hist.keys() {
            let full = embed(&Assignment::from_index(idx, keep.len()), &keep, inst.n_routes());
            if inst.check_feasible(&full)? {
                solutions.push(improve(inst, &full)?);
            }
        }
        Ok(HeuristicOutcome::from_solutions(solutions, truncated, keep.len()))
    }
}
