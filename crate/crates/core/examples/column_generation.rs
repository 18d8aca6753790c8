//! Root column generation trace next to the LP over all routes.
//!
//! `cargo run --release --example column_generation -- [network.json]`

use std::collections::BTreeSet;

use qbranch::bnp::{column_generation, oracle, CgConfig, ConnectionNetwork, NodeView, SearchState};

fn main() -> qbranch::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/networks/tail8.json").into());
    let net = ConnectionNetwork::load(path)?;
    let mut state = SearchState::new(&net, None);
    let view = NodeView::new(&state.pool, &[], &BTreeSet::new())?;
    let cg = column_generation(&mut state, &view, f64::NEG_INFINITY, &CgConfig::default())?;
    println!("{:>4} {:>12} {:>8} {:>6} {:>12}", "it", "objective", "columns", "added", "lower bound");
    for it in &cg.trace {
        println!(
            "{:>4} {:>12.3} {:>8} {:>6} {:>12.3}",
            it.iteration, it.objective, it.columns, it.columns_added, it.lower_bound
        );
    }
    let (_, full) = oracle::enumerated_lp(&net)?;
    println!("status {:?}, enumerated LP {:.3}", cg.status, full.objective);
    println!("integer optimum {:?}", oracle::integer_optimum(&net)?);
    Ok(())
}
