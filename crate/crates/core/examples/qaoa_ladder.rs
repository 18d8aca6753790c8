//! Interpolation ladder on a generated instance.
//!
//! `cargo run --release --example qaoa_ladder -- [routes] [solutions] [f] [pmax] [seed]`

use qbranch::angles::{run_ladder, LadderConfig};
use qbranch::instance_gen::{generate, simplify_costs, GenerateConfig};
use qbranch::ising::{map_to_ising, resolve_weights, WeightFactor};

fn main() -> qbranch::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: &str| args.get(i).cloned().unwrap_or_else(|| d.to_string());
    let routes: usize = arg(0, "6").parse().unwrap();
    let solutions: usize = arg(1, "1").parse().unwrap();
    let f: WeightFactor = arg(2, "inf").parse()?;
    let pmax: usize = arg(3, "10").parse().unwrap();
    let seed: u64 = arg(4, "0").parse().unwrap();

    let raw = generate(&GenerateConfig {
        n_routes: routes,
        target_solutions: solutions,
        n_flights: routes,
        seed,
    })?;
    let inst = simplify_costs(&raw, seed)?;
    let weights = resolve_weights(&inst, f)?;
    let model = map_to_ising(&inst, weights)?;
    let feas = inst.brute_force_solve()?;
    let e = model.energies();
    let spread = e.iter().cloned().fold(f64::MIN, f64::max) - e.iter().cloned().fold(f64::MAX, f64::min);
    println!("costs {:?}, weights {weights:?}, |S| = {}, spread {spread}", inst.costs(), feas.len());

    let ladder = run_ladder(&model, pmax, &feas, &LadderConfig { seed, ..Default::default() })?;
    println!("p=1 angles {:?}", ladder.records[0].angles);
    println!("{:>3} {:>12} {:>12} {:>8} {:>8} {:>6} {:>5}", "p", "start", "E", "P_EC", "P_SP", "iters", "cap");
    for r in &ladder.records {
        println!(
            "{:>3} {:>12.5} {:>12.5} {:>8.4} {:>8.4} {:>6} {:>5}",
            r.depth,
            r.start_expectation,
            r.expectation,
            r.p_ec,
            r.p_sp.unwrap_or(f64::NAN),
            r.iterations,
            r.cap_hit
        );
    }
    Ok(())
}
