//! Set Partitioning / Exact Cover instances.
//!
//! An instance is `min c·x  s.t.  A x = b,  x ∈ {0,1}^R` where each column of
//! `A` is a route covering a set of flights. Columns are stored sparsely as
//! sorted flight-index lists.

use std::cmp::Ordering;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of binary variables the exhaustive oracles will enumerate.
pub const ENUMERATION_LIMIT: usize = 26;

/// One column of the constraint matrix: the flights a route covers and its cost.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Route {
    pub flights: Vec<usize>,
    pub cost: i64,
}

impl Route {
    pub fn new(mut flights: Vec<usize>, cost: i64) -> Self {
        flights.sort_unstable();
        flights.dedup();
        Route { flights, cost }
    }

    pub fn covers(&self, flight: usize) -> bool {
        self.flights.binary_search(&flight).is_ok()
    }

    pub fn overlaps(&self, other: &Route) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.flights.len() && j < other.flights.len() {
            match self.flights[i].cmp(&other.flights[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => return true,
            }
        }
        false
    }

    /// Number of flights shared with `other`.
    pub fn shared(&self, other: &Route) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.flights.len() && j < other.flights.len() {
            match self.flights[i].cmp(&other.flights[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// A binary decision vector, one entry per route.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment(pub Vec<bool>);

impl Assignment {
    pub fn zeros(n: usize) -> Self {
        Assignment(vec![false; n])
    }

    /// Decodes a basis-state index: bit `r` of `index` is `x_r` (route 0 least significant).
    pub fn from_index(index: u64, n: usize) -> Self {
        Assignment((0..n).map(|r| (index >> r) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .fold(0u64, |acc, (r, _)| acc | (1u64 << r))
    }

    pub fn from_selected(selected: &[usize], n: usize) -> Self {
        let mut x = vec![false; n];
        for &r in selected {
            x[r] = true;
        }
        Assignment(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(r, _)| r)
    }

    /// Renders as a `0`/`1` string with route 0 first.
    pub fn bitstring(&self) -> String {
        self.0.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n_flights: usize,
    routes: Vec<Route>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<u32>>,
}

/// The ILP `min Σ c_r x_r  s.t.  Σ_r a_fr x_r = b_f ∀f,  x_r ∈ {0,1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPartitioningInstance {
    n_flights: usize,
    routes: Vec<Route>,
    b: Vec<u32>,
}

impl SetPartitioningInstance {
    /// Builds an instance; `b` defaults to all ones.
    pub fn new(n_flights: usize, routes: Vec<Route>, b: Option<Vec<u32>>) -> Result<Self> {
        let routes: Vec<Route> = routes
            .into_iter()
            .map(|r| Route::new(r.flights, r.cost))
            .collect();
        for (r, route) in routes.iter().enumerate() {
            if route.flights.is_empty() {
                return Err(Error::input(format!("route {r} covers no flight")));
            }
            if let Some(&f) = route.flights.iter().find(|&&f| f >= n_flights) {
                return Err(Error::input(format!(
                    "route {r} references flight {f} but n_flights = {n_flights}"
                )));
            }
        }
        let b = b.unwrap_or_else(|| vec![1; n_flights]);
        if b.len() != n_flights {
            return Err(Error::Dimension {
                expected: n_flights,
                actual: b.len(),
            });
        }
        Ok(SetPartitioningInstance {
            n_flights,
            routes,
            b,
        })
    }

    /// Convenience constructor from `(flights, cost)` pairs with `b = 1`.
    pub fn from_columns(n_flights: usize, columns: &[(&[usize], i64)]) -> Result<Self> {
        let routes = columns
            .iter()
            .map(|(f, c)| Route::new(f.to_vec(), *c))
            .collect();
        Self::new(n_flights, routes, None)
    }

    pub fn n_flights(&self) -> usize {
        self.n_flights
    }

    pub fn n_routes(&self) -> usize {
        self.routes.len()
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn route(&self, r: usize) -> &Route {
        &self.routes[r]
    }

    pub fn rhs(&self) -> &[u32] {
        &self.b
    }

    pub fn costs(&self) -> Vec<i64> {
        self.routes.iter().map(|r| r.cost).collect()
    }

    /// Returns a copy with the given costs.
    pub fn with_costs(&self, costs: &[i64]) -> Result<Self> {
        if costs.len() != self.n_routes() {
            return Err(Error::Dimension {
                expected: self.n_routes(),
                actual: costs.len(),
            });
        }
        let mut out = self.clone();
        for (route, &c) in out.routes.iter_mut().zip(costs) {
            route.cost = c;
        }
        Ok(out)
    }

    /// Dense `|F| × |R|` constraint matrix.
    pub fn dense_matrix(&self) -> Vec<Vec<u8>> {
        let mut a = vec![vec![0u8; self.n_routes()]; self.n_flights];
        for (r, route) in self.routes.iter().enumerate() {
            for &f in &route.flights {
                a[f][r] = 1;
            }
        }
        a
    }

    fn check_len(&self, x: &Assignment) -> Result<()> {
        if x.len() != self.n_routes() {
            return Err(Error::Dimension {
                expected: self.n_routes(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    /// `Σ_r a_fr x_r` per flight.
    pub fn coverage(&self, x: &Assignment) -> Result<Vec<u32>> {
        self.check_len(x)?;
        let mut cover = vec![0u32; self.n_flights];
        for r in x.selected() {
            for &f in &self.routes[r].flights {
                cover[f] += 1;
            }
        }
        Ok(cover)
    }

    pub fn cost(&self, x: &Assignment) -> Result<i64> {
        self.check_len(x)?;
        Ok(x.selected().map(|r| self.routes[r].cost).sum())
    }

    /// Quadratic constraint penalty `Σ_f (Σ_r a_fr x_r − b_f)²`.
    pub fn penalty(&self, x: &Assignment) -> Result<i64> {
        let cover = self.coverage(x)?;
        Ok(cover
            .iter()
            .zip(&self.b)
            .map(|(&c, &b)| {
                let d = c as i64 - b as i64;
                d * d
            })
            .sum())
    }

    /// True iff `A x = b`.
    pub fn check_feasible(&self, x: &Assignment) -> Result<bool> {
        let cover = self.coverage(x)?;
        Ok(cover == self.b)
    }

    fn feasible_index(&self, index: u64, cover: &mut [u32]) -> bool {
        cover.iter_mut().for_each(|c| *c = 0);
        let mut bits = index;
        while bits != 0 {
            let r = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for &f in &self.routes[r].flights {
                cover[f] += 1;
                if cover[f] > self.b[f] {
                    return false;
                }
            }
        }
        cover == self.b.as_slice()
    }

    fn index_cost(&self, index: u64) -> i64 {
        let mut bits = index;
        let mut cost = 0;
        while bits != 0 {
            let r = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            cost += self.routes[r].cost;
        }
        cost
    }

    /// Enumerates all `2^|R|` assignments and keeps the feasible ones.
    pub fn brute_force_solve(&self) -> Result<FeasibleSet> {
        let n = self.n_routes();
        if n > ENUMERATION_LIMIT {
            return Err(Error::Size {
                what: "enumeration",
                size: n,
                limit: ENUMERATION_LIMIT,
            });
        }
        let total = 1u64 << n;
        const CHUNK: u64 = 1 << 14;
        let chunks = total.div_ceil(CHUNK);
        let indices: Vec<u64> = (0..chunks)
            .into_par_iter()
            .flat_map_iter(|chunk| {
                let mut cover = vec![0u32; self.n_flights];
                let lo = chunk * CHUNK;
                let hi = (lo + CHUNK).min(total);
                (lo..hi)
                    .filter(|&i| self.feasible_index(i, &mut cover))
                    .collect::<Vec<_>>()
            })
            .collect();
        let solutions: Vec<Assignment> = indices
            .iter()
            .map(|&i| Assignment::from_index(i, n))
            .collect();
        let costs: Vec<i64> = indices.iter().map(|&i| self.index_cost(i)).collect();
        let optimal_index = (0..solutions.len()).min_by(|&a, &b| {
            costs[a]
                .cmp(&costs[b])
                .then_with(|| solutions[a].cmp(&solutions[b]))
        });
        Ok(FeasibleSet {
            solutions,
            costs,
            optimal_index,
        })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(s)?;
        Self::new(file.n_flights, file.routes, file.b)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let all_ones = self.b.iter().all(|&b| b == 1);
        let file = InstanceFile {
            n_flights: self.n_flights,
            routes: self.routes.clone(),
            b: (!all_ones).then(|| self.b.clone()),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json_string()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }
}

/// All feasible assignments of an instance together with the optimum.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeasibleSet {
    pub solutions: Vec<Assignment>,
    /// `c·x` for each solution.
    pub costs: Vec<i64>,
    /// Minimum-cost member; ties go to the lexicographically smallest bitstring.
    pub optimal_index: Option<usize>,
}

impl FeasibleSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn optimum(&self) -> Option<&Assignment> {
        self.optimal_index.map(|i| &self.solutions[i])
    }

    pub fn optimal_cost(&self) -> Option<i64> {
        self.optimal_index.map(|i| self.costs[i])
    }

    /// Basis-state indices of the feasible solutions.
    pub fn indices(&self) -> Vec<u64> {
        self.solutions.iter().map(Assignment::to_index).collect()
    }
}

/// Rank of `A` over GF(2) and whether `A x ≡ b (mod 2)` is consistent.
pub fn gf2_rank(inst: &SetPartitioningInstance) -> (usize, bool) {
    let n = inst.n_routes();
    // one extra column for b mod 2
    let words = (n + 1).div_ceil(64);
    let mut rows: Vec<Vec<u64>> = (0..inst.n_flights())
        .map(|_| vec![0u64; words])
        .collect();
    for (r, route) in inst.routes().iter().enumerate() {
        for &f in &route.flights {
            rows[f][r / 64] |= 1 << (r % 64);
        }
    }
    for (f, &b) in inst.rhs().iter().enumerate() {
        if b % 2 == 1 {
            rows[f][n / 64] |= 1 << (n % 64);
        }
    }
    let bit = |row: &[u64], c: usize| (row[c / 64] >> (c % 64)) & 1 == 1;

    let mut rank = 0;
    for col in 0..n {
        let Some(pivot) = (rank..rows.len()).find(|&i| bit(&rows[i], col)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != rank && bit(row, col) {
                row.iter_mut().zip(&pivot_row).for_each(|(w, p)| *w ^= p);
            }
        }
        rank += 1;
    }
    // a zero row with an odd right-hand side means 0 = 1
    let consistent = rows[rank..].iter().all(|row| !bit(row, n));
    (rank, consistent)
}

/// Upper bound `2^(|R| − rank₂ A)` on the number of feasible assignments.
///
/// Returns 0 when the system is inconsistent mod 2. Saturates at `u128::MAX`.
pub fn gf2_solution_bound(inst: &SetPartitioningInstance) -> u128 {
    let (rank, consistent) = gf2_rank(inst);
    if !consistent {
        return 0;
    }
    let free = inst.n_routes() - rank;
    if free >= 128 {
        u128::MAX
    } else {
        1u128 << free
    }
}
