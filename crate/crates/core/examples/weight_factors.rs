//! Which weight factors keep the optimum as the ground state, and their gap ratios.
//!
//! `cargo run --release --example weight_factors -- [routes] [solutions] [seed]`

use qbranch::instance_gen::{generate, simplify_costs, GenerateConfig};
use qbranch::ising::{map_to_ising, min_gap_ratio, resolve_weights, WeightFactor};

fn main() -> qbranch::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().unwrap()).collect();
    let arg = |i: usize, d: u64| args.get(i).copied().unwrap_or(d);
    let (routes, solutions, seed) = (arg(0, 6) as usize, arg(1, 3) as usize, arg(2, 0));
    let raw = generate(&GenerateConfig {
        n_routes: routes,
        target_solutions: solutions,
        n_flights: routes,
        seed,
    })?;
    let inst = simplify_costs(&raw, seed)?;
    let feas = inst.brute_force_solve()?;
    let optimum = feas.optimum().map(|x| x.to_index());
    println!("costs {:?}, |S| = {}", inst.costs(), feas.len());
    println!("{:>6} {:>5} {:>5} {:>8} {:>10}", "f", "mu1", "mu2", "ground", "gap ratio");
    for f in ["0.5", "1", "2", "5", "10", "20", "50", "100", "inf"] {
        let f: WeightFactor = f.parse()?;
        let w = resolve_weights(&inst, f)?;
        let model = map_to_ising(&inst, w)?;
        let e = model.energies();
        let ground = (0..e.len()).min_by(|&a, &b| e[a].total_cmp(&e[b])).map(|i| i as u64);
        let tag = if ground == optimum { "optimum" } else { "other" };
        println!("{:>6} {:>5} {:>5} {:>8} {:>10.5}", f.to_string(), w.mu1, w.mu2, tag, min_gap_ratio(&model)?);
    }
    Ok(())
}
