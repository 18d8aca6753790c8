//! Branch-and-Price on a bundled network with each heuristic and search mode.
//!
//! `cargo run --release --example branch_and_price -- [network.json] [--qaoa]`

use qbranch::bnp::{
    branch_and_price, BnpConfig, ConnectionNetwork, HeuristicPolicy, IntegerHeuristic, MockExact, QaoaHeuristic,
    QaoaHeuristicConfig, SearchMode,
};

fn main() -> qbranch::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let with_qaoa = args.iter().any(|a| a == "--qaoa");
    let path = args
        .iter()
        .find(|a| !a.starts_with("--"))
        .cloned()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/networks/tail9.json").into());
    let net = ConnectionNetwork::load(path)?;
    println!("{:>11} {:>8} {:>10} {:>6} {:>6} {:>6} {:>6}", "mode", "heur", "status", "cost", "nodes", "calls", "cg");
    for mode in [SearchMode::FullBranch, SearchMode::Dive] {
        for name in ["none", "mock", "qaoa"] {
            if name == "qaoa" && !with_qaoa {
                continue;
            }
            let mut cfg = BnpConfig { mode, ..Default::default() };
            cfg.cg.policy = HeuristicPolicy::Always;
            let mut mock = MockExact::default();
            let mut qaoa = QaoaHeuristic::new(QaoaHeuristicConfig { p_max: 10, ..Default::default() });
            let h: Option<&mut dyn IntegerHeuristic> = match name {
                "mock" => Some(&mut mock),
                "qaoa" => Some(&mut qaoa),
                _ => None,
            };
            let r = branch_and_price(&net, &cfg, h)?;
            println!(
                "{:>11} {:>8} {:>10} {:>6} {:>6} {:>6} {:>6}",
                format!("{mode:?}"),
                name,
                format!("{:?}", r.status),
                r.incumbent.as_ref().map_or("-".into(), |i| i.cost.to_string()),
                r.stats.nodes_created,
                r.stats.heuristic_calls,
                r.stats.cg_iterations
            );
        }
    }
    Ok(())
}
