//! Branch-and-Price for the path-based tail assignment model.
//!
//! The restricted master problem is a set-partitioning LP over a column pool
//! that starts with big-cost slack columns. Pricing is a label-setting
//! resource-constrained shortest path on the connection network. An optional
//! [`IntegerHeuristic`] runs on the pool during column generation and supplies
//! incumbents and upper bounds.

pub mod colgen;
pub mod heuristic;
pub mod lp;
pub mod network;
pub mod oracle;
pub mod pool;
pub mod tree;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use colgen::{
    column_generation, is_promising, CgConfig, CgIteration, CgOutcome, CgStatus, HeuristicCall, HeuristicPolicy,
    Incumbent, IncumbentOrigin, NodeView, PromisingConfig, SearchState,
};
pub use heuristic::{HeuristicOutcome, IntegerHeuristic, MockExact, QaoaHeuristic, QaoaHeuristicConfig};
pub use network::{ArcSpec, ConnectionNetwork, FlightSpec, NetworkFile, PricedRoute, PricingResult};
pub use pool::{solve_rmp_lp, Column, ColumnOrigin, ColumnPool, RmpSolution};
pub use tree::{branch_and_price, dive_choice, most_fractional, BnpConfig, BnpResult, BnpStats, BnpStatus, SearchMode};

/// JSON schema of [`RunReport`].
pub const REPORT_SCHEMA: &str = include_str!("../../data/report.schema.json");

/// Output of one `bnp` run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub network: String,
    pub flights: Vec<String>,
    pub mode: SearchMode,
    pub heuristic: String,
    pub seed: u64,
    pub status: BnpStatus,
    pub cost: Option<i64>,
    /// Routes of the incumbent as flight ids.
    pub routes: Vec<Vec<String>>,
    pub incumbent_origin: Option<IncumbentOrigin>,
    pub root_lp: Option<f64>,
    pub stats: BnpStats,
    pub cg_iterations: usize,
    pub heuristic_log: Vec<HeuristicCall>,
    pub wallclock_s: f64,
}

impl RunReport {
    pub fn new(net: &ConnectionNetwork, cfg: &BnpConfig, heuristic: &str, seed: u64, result: &BnpResult, wallclock_s: f64) -> Self {
        let ids = |path: &Vec<usize>| path.iter().map(|&f| net.flights()[f].id.clone()).collect();
        RunReport {
            network: net.name().to_string(),
            flights: net.flights().iter().map(|f| f.id.clone()).collect(),
            mode: cfg.mode,
            heuristic: heuristic.to_string(),
            seed,
            status: result.status,
            cost: result.incumbent.as_ref().map(|i| i.cost),
            routes: result.incumbent.as_ref().map(|i| i.routes.iter().map(ids).collect()).unwrap_or_default(),
            incumbent_origin: result.incumbent.as_ref().map(|i| i.origin),
            root_lp: result.root_lp.is_finite().then_some(result.root_lp),
            stats: result.stats.clone(),
            cg_iterations: result.stats.cg_iterations,
            heuristic_log: result.heuristic_log.clone(),
            wallclock_s,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string()? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests;
