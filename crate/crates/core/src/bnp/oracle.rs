//! Exhaustive reference solutions for small networks.

use super::network::ConnectionNetwork;
use super::pool::{solve_rmp_lp, ColumnPool, RmpSolution};
use crate::error::Result;

/// Route enumeration cap of the oracles.
pub const ROUTE_LIMIT: usize = 1_000_000;

/// Cheapest partition of the flights into legal routes, by recursion on the
/// lowest uncovered flight. `None` if no partition exists.
pub fn integer_optimum(net: &ConnectionNetwork) -> Result<Option<i64>> {
    let routes = net.enumerate_routes(ROUTE_LIMIT)?;
    fn rec(routes: &[(Vec<usize>, i64)], covered: &mut Vec<bool>, cost: i64, best: &mut Option<i64>) {
        if best.is_some_and(|b| cost >= b) {
            return;
        }
        let Some(f) = covered.iter().position(|c| !c) else {
            *best = Some(cost);
            return;
        };
        for (path, c) in routes {
            if path.contains(&f) && path.iter().all(|&g| !covered[g]) {
                path.iter().for_each(|&g| covered[g] = true);
                rec(routes, covered, cost + c, best);
                path.iter().for_each(|&g| covered[g] = false);
            }
        }
    }
    let mut best = None;
    rec(&routes, &mut vec![false; net.n_flights()], 0, &mut best);
    Ok(best)
}

/// LP relaxation over every legal route plus the slack columns.
pub fn enumerated_lp(net: &ConnectionNetwork) -> Result<(ColumnPool, RmpSolution)> {
    let mut pool = ColumnPool::with_slacks(net.n_flights(), net.big_m());
    for (path, cost) in net.enumerate_routes(ROUTE_LIMIT)? {
        pool.add(&path, cost as f64);
    }
    let ids: Vec<usize> = (0..pool.len()).collect();
    let rows: Vec<usize> = (0..net.n_flights()).collect();
    let s = solve_rmp_lp(&pool, &ids, &rows)?;
    Ok((pool, s))
}
