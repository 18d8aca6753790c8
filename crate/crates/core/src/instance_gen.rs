//! Synthetic Set Partitioning instances with an exact number of feasible covers.
//!
//! Instances are built by combining `k` random partitions of the flight set and
//! padding with random extra routes. The feasible count is then verified by
//! exhaustive enumeration and the draw is repeated until it matches.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ilp::{gf2_solution_bound, Route, SetPartitioningInstance, ENUMERATION_LIMIT};

const MAX_ATTEMPTS: usize = 500;
const PAD_CANDIDATES: usize = 200;
const PERTURB_BUDGET: usize = 1000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub n_routes: usize,
    pub target_solutions: usize,
    pub n_flights: usize,
    pub seed: u64,
}

/// Generates an instance with exactly `target_solutions` feasible assignments.
pub fn generate(cfg: &GenerateConfig) -> Result<SetPartitioningInstance> {
    let (n, k, m) = (cfg.n_routes, cfg.target_solutions, cfg.n_flights);
    if n > ENUMERATION_LIMIT {
        return Err(Error::Size {
            what: "routes",
            size: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    if k < 1 || 2 * k > n {
        return Err(Error::input(format!(
            "target solutions must satisfy 1 <= k <= |R|/2, got k = {k}, |R| = {n}"
        )));
    }
    if m < 1 {
        return Err(Error::input("need at least one flight"));
    }

    let mut last_reason = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(attempt as u64);
        match try_generate(&mut rng, n, k, m) {
            Ok(inst) => {
                let count = inst.brute_force_solve()?.len();
                if count == k {
                    return Ok(inst);
                }
                last_reason = format!("found {count} feasible solutions, wanted {k}");
            }
            Err(reason) => last_reason = reason,
        }
    }
    Err(Error::Generation {
        attempts: MAX_ATTEMPTS,
        reason: last_reason,
    })
}

fn random_partition(rng: &mut ChaCha8Rng, n_flights: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut flights: Vec<usize> = (0..n_flights).collect();
    flights.shuffle(rng);
    let mut cuts: Vec<usize> = (1..n_flights).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<usize> = cuts.into_iter().take(parts - 1).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut start = 0;
    for end in cuts.into_iter().chain(std::iter::once(n_flights)) {
        let mut part = flights[start..end].to_vec();
        part.sort_unstable();
        out.push(part);
        start = end;
    }
    out
}

fn try_generate(
    rng: &mut ChaCha8Rng,
    n_routes: usize,
    k: usize,
    n_flights: usize,
) -> std::result::Result<SetPartitioningInstance, String> {
    // bipartitions keep the conflict graph dense, as in extracted instances
    let parts = if n_flights >= 2 { 2 } else { 1 };
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut routes: Vec<Vec<usize>> = Vec::new();
    for _ in 0..k {
        for part in random_partition(rng, n_flights, parts) {
            if seen.insert(part.clone()) {
                routes.push(part);
            }
        }
    }
    if routes.len() > n_routes {
        return Err(format!("{} partition routes exceed |R| = {n_routes}", routes.len()));
    }

    let max_size = (n_flights / 2).max(2).min(n_flights);
    let min_size = 2.min(max_size);
    while routes.len() < n_routes {
        let mut placed = false;
        for _ in 0..PAD_CANDIDATES {
            let size = rng.gen_range(min_size..=max_size);
            let mut flights: Vec<usize> = (0..n_flights).collect();
            flights.shuffle(rng);
            let mut cand: Vec<usize> = flights[..size].to_vec();
            cand.sort_unstable();
            if seen.contains(&cand) {
                continue;
            }
            routes.push(cand.clone());
            if count_covers(&routes, n_flights, k + 1) <= k {
                seen.insert(cand);
                placed = true;
                break;
            }
            routes.pop();
        }
        if !placed {
            return Err("no padding route avoids new covers".into());
        }
    }

    routes.shuffle(rng);
    let routes = routes
        .into_iter()
        .map(|f| {
            let cost = rng.gen_range(100_000..1_000_000);
            Route::new(f, cost)
        })
        .collect();
    SetPartitioningInstance::new(n_flights, routes, None).map_err(|e| e.to_string())
}

/// Counts exact covers of all flights, stopping once `cap` is reached.
fn count_covers(routes: &[Vec<usize>], n_flights: usize, cap: usize) -> usize {
    fn go(routes: &[Vec<usize>], covered: &mut [bool], used: &mut [bool], cap: usize) -> usize {
        let Some(f) = covered.iter().position(|&c| !c) else {
            return 1;
        };
        let mut count = 0;
        for r in 0..routes.len() {
            if used[r] || routes[r].binary_search(&f).is_err() || routes[r].iter().any(|&g| covered[g]) {
                continue;
            }
            used[r] = true;
            routes[r].iter().for_each(|&g| covered[g] = true);
            count += go(routes, covered, used, cap - count);
            routes[r].iter().for_each(|&g| covered[g] = false);
            used[r] = false;
            if count >= cap {
                break;
            }
        }
        count
    }
    go(routes, &mut vec![false; n_flights], &mut vec![false; routes.len()], cap)
}

/// Maps costs to small distinct integers with minimum 1 and a unique optimum.
///
/// Costs are shifted by the minimum, divided by a constant chosen so the range
/// stays near `4|R|`, and rounded. Values are then made strictly increasing along
/// the original cost order, and routes of tied optimal solutions are bumped by +1
/// until the optimum is unique.
pub fn simplify_costs(inst: &SetPartitioningInstance, seed: u64) -> Result<SetPartitioningInstance> {
    let n = inst.n_routes();
    if n == 0 {
        return Err(Error::input("instance has no routes"));
    }
    let costs = inst.costs();
    let min = *costs.iter().min().unwrap();
    let max = *costs.iter().max().unwrap();
    let target_range = 4 * n as i64;
    let divisor = ((max - min) as f64 / target_range as f64).ceil().max(1.0);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&r| (costs[r], r));

    let mut out: Vec<i64> = costs
        .iter()
        .map(|&c| ((c - min) as f64 / divisor).round() as i64 + 1)
        .collect();
    let enforce_order = |out: &mut Vec<i64>| {
        let mut prev = i64::MIN;
        for &r in &order {
            if out[r] <= prev {
                out[r] = prev + 1;
            }
            prev = out[r];
        }
        let lo = *out.iter().min().unwrap();
        out.iter_mut().for_each(|c| *c -= lo - 1);
    };
    enforce_order(&mut out);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lowest = order[0];
    for _ in 0..PERTURB_BUDGET {
        let candidate = inst.with_costs(&out)?;
        let feas = candidate.brute_force_solve()?;
        let Some(best) = feas.optimal_cost() else {
            return Err(Error::input("instance has no feasible solution"));
        };
        let tied: Vec<usize> = (0..feas.len()).filter(|&i| feas.costs[i] == best).collect();
        if tied.len() == 1 {
            return Ok(candidate);
        }
        let (a, b) = (&feas.solutions[tied[0]], &feas.solutions[tied[1]]);
        let mut diff: Vec<usize> = (0..n).filter(|&r| a.0[r] != b.0[r]).collect();
        if diff.len() > 1 {
            diff.retain(|&r| r != lowest);
        }
        let r = *diff.choose(&mut rng).expect("distinct solutions differ somewhere");
        out[r] += 1;
        enforce_order(&mut out);
    }
    Err(Error::Degenerate(format!(
        "no unique optimum within {PERTURB_BUDGET} cost perturbations"
    )))
}

/// Degree statistics of the conflict graph (routes adjacent iff they share a flight).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub degrees: Vec<usize>,
    pub avg_degree: f64,
    pub density: f64,
}

pub fn graph_stats(inst: &SetPartitioningInstance) -> GraphStats {
    let n = inst.n_routes();
    let degrees: Vec<usize> = (0..n)
        .map(|r| {
            (0..n)
                .filter(|&q| q != r && inst.route(q).overlaps(inst.route(r)))
                .count()
        })
        .collect();
    let total: usize = degrees.iter().sum();
    let avg_degree = if n == 0 { 0.0 } else { total as f64 / n as f64 };
    let density = if n < 2 {
        0.0
    } else {
        (total / 2) as f64 / (n * (n - 1) / 2) as f64
    };
    GraphStats {
        degrees,
        avg_degree,
        density,
    }
}

/// Sidecar statistics written next to a generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceStats {
    pub n_routes: usize,
    pub n_flights: usize,
    pub n_feasible: usize,
    pub gf2_bound: String,
    pub optimal_cost: Option<i64>,
    pub degrees: Vec<usize>,
    pub avg_degree: f64,
    pub density: f64,
}

pub fn instance_stats(inst: &SetPartitioningInstance) -> Result<InstanceStats> {
    let feas = inst.brute_force_solve()?;
    let g = graph_stats(inst);
    Ok(InstanceStats {
        n_routes: inst.n_routes(),
        n_flights: inst.n_flights(),
        n_feasible: feas.len(),
        gf2_bound: gf2_solution_bound(inst).to_string(),
        optimal_cost: feas.optimal_cost(),
        degrees: g.degrees,
        avg_degree: g.avg_degree,
        density: g.density,
    })
}
