//! Generates instances with a prescribed number of exact covers.
//!
//! `cargo run --release --example generate_instances -- [routes] [seed]`

use qbranch::instance_gen::{generate, graph_stats, simplify_costs, GenerateConfig};

fn main() -> qbranch::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let routes = args.first().copied().unwrap_or(8) as usize;
    let seed = args.get(1).copied().unwrap_or(0);
    println!("{:>3} {:>4} {:>10} {:>8}  costs", "|S|", "got", "avg deg", "density");
    for k in 1..=routes / 2 {
        let raw = generate(&GenerateConfig {
            n_routes: routes,
            target_solutions: k,
            n_flights: routes,
            seed,
        })?;
        let inst = simplify_costs(&raw, seed)?;
        let got = inst.brute_force_solve()?.len();
        let g = graph_stats(&inst);
        println!("{k:>3} {got:>4} {:>10.3} {:>8.3}  {:?}", g.avg_degree, g.density, inst.costs());
    }
    Ok(())
}
