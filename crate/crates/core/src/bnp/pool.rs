//! Column pool of the restricted master problem.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::lp::{self, LpColumn};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnOrigin {
    /// Big-cost single-flight slack column.
    Initial,
    Priced,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    /// Flights in visiting order.
    pub path: Vec<usize>,
    /// Sorted flight set.
    pub flights: Vec<usize>,
    pub cost: f64,
    pub origin: ColumnOrigin,
}

impl Column {
    pub fn is_slack(&self) -> bool {
        self.origin == ColumnOrigin::Initial
    }

    pub fn overlaps(&self, mask: &[bool]) -> bool {
        self.flights.iter().any(|&f| mask[f])
    }
}

/// Columns indexed by id; priced columns are unique by flight set.
#[derive(Clone, Debug)]
pub struct ColumnPool {
    n_flights: usize,
    big_m: f64,
    columns: Vec<Column>,
    index: HashMap<Vec<usize>, usize>,
}

impl ColumnPool {
    /// A pool holding one slack column of cost `big_m` per flight; slack `f` has id `f`.
    pub fn with_slacks(n_flights: usize, big_m: f64) -> Self {
        let columns = (0..n_flights)
            .map(|f| Column {
                path: vec![f],
                flights: vec![f],
                cost: big_m,
                origin: ColumnOrigin::Initial,
            })
            .collect();
        ColumnPool {
            n_flights,
            big_m,
            columns,
            index: HashMap::new(),
        }
    }

    pub fn n_flights(&self) -> usize {
        self.n_flights
    }

    pub fn big_m(&self) -> f64 {
        self.big_m
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, id: usize) -> &Column {
        &self.columns[id]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn slack(&self, flight: usize) -> usize {
        flight
    }

    /// Adds a priced route. Returns its id and whether it was new.
    pub fn add(&mut self, path: &[usize], cost: f64) -> (usize, bool) {
        let mut flights = path.to_vec();
        flights.sort_unstable();
        if let Some(&id) = self.index.get(&flights) {
            return (id, false);
        }
        let id = self.columns.len();
        self.index.insert(flights.clone(), id);
        self.columns.push(Column {
            path: path.to_vec(),
            flights,
            cost,
            origin: ColumnOrigin::Priced,
        });
        (id, true)
    }

    pub fn find(&self, flights: &[usize]) -> Option<usize> {
        let mut key = flights.to_vec();
        key.sort_unstable();
        self.index.get(&key).copied()
    }
}

/// LP solution of the restricted master problem over a subset of the pool.
#[derive(Clone, Debug, PartialEq)]
pub struct RmpSolution {
    /// Pool ids of the columns the LP ranged over.
    pub columns: Vec<usize>,
    /// Primal value per entry of `columns`.
    pub x: Vec<f64>,
    /// Dual per flight of the whole network; zero on rows not in the LP.
    pub pi: Vec<f64>,
    pub objective: f64,
    /// Pool ids of the basic columns.
    pub basis: Vec<usize>,
}

impl RmpSolution {
    pub fn value_of(&self, id: usize) -> f64 {
        self.columns.iter().position(|&c| c == id).map_or(0.0, |k| self.x[k])
    }

    pub fn reduced_cost(&self, col: &Column) -> f64 {
        col.cost - col.flights.iter().map(|&f| self.pi[f]).sum::<f64>()
    }
}

/// Solves `min c·x, Σ_{r∋f} x_r = 1 for f ∈ rows, x ≥ 0` over `columns`.
///
/// The slack columns of every row must be among `columns`; they form the
/// starting basis.
pub fn solve_rmp_lp(pool: &ColumnPool, columns: &[usize], rows: &[usize]) -> Result<RmpSolution> {
    let mut row_of = vec![usize::MAX; pool.n_flights()];
    for (k, &f) in rows.iter().enumerate() {
        row_of[f] = k;
    }
    let lp_cols: Vec<LpColumn> = columns
        .iter()
        .map(|&id| {
            let c = pool.column(id);
            LpColumn {
                rows: c.flights.iter().map(|&f| row_of[f]).collect(),
                cost: c.cost,
            }
        })
        .collect();
    if let Some(c) = lp_cols.iter().find(|c| c.rows.contains(&usize::MAX)) {
        return Err(crate::error::Error::input(format!(
            "column covers a flight outside the LP rows: {:?}",
            c.rows
        )));
    }
    let position: HashMap<usize, usize> = columns.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let start: Vec<usize> = rows
        .iter()
        .map(|&f| {
            position
                .get(&pool.slack(f))
                .copied()
                .ok_or_else(|| crate::error::Error::input(format!("slack column of flight {f} missing")))
        })
        .collect::<Result<_>>()?;
    let s = lp::solve(rows.len(), &lp_cols, &vec![1.0; rows.len()], &start)?;
    let mut pi = vec![0.0; pool.n_flights()];
    for (k, &f) in rows.iter().enumerate() {
        pi[f] = s.pi[k];
    }
    Ok(RmpSolution {
        columns: columns.to_vec(),
        x: s.x,
        pi,
        objective: s.objective,
        basis: s.basis.iter().map(|&k| columns[k]).collect(),
    })
}
