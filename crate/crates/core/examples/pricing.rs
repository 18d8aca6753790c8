//! Label-setting pricing on a bundled network at a few dual vectors.
//!
//! `cargo run --release --example pricing -- [network.json]`

use qbranch::bnp::ConnectionNetwork;

fn main() -> qbranch::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/networks/toy6.json").into());
    let net = ConnectionNetwork::load(path)?;
    let n = net.n_flights();
    println!("{}: {} flights, {} routes", net.name(), n, net.enumerate_routes(1_000_000)?.len());
    for scale in [0.0, 200.0, 400.0] {
        let duals = vec![scale; n];
        let r = net.price(&duals, &vec![false; n], &vec![Vec::new(); n], 5)?;
        println!(
            "duals {scale}: {} labels, min reduced cost {:?}, bound {:.1}",
            r.labels_created,
            r.min_reduced_cost,
            r.reduced_cost_bound()
        );
        for route in &r.routes {
            let ids: Vec<&str> = route.flights.iter().map(|&f| net.flights()[f].id.as_str()).collect();
            println!("  {:?} cost {} reduced {:.1}", ids, route.cost, route.reduced_cost);
        }
    }
    Ok(())
}
