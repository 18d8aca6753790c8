//! Maps an instance to an Ising model and lists the lowest energies.
//!
//! `cargo run --release --example ising_mapping -- [f]`

use qbranch::ising::{map_to_ising, resolve_weights};
use qbranch::{Assignment, SetPartitioningInstance, WeightFactor};

fn main() -> qbranch::Result<()> {
    let f: WeightFactor = std::env::args().nth(1).unwrap_or_else(|| "inf".into()).parse()?;
    let inst = SetPartitioningInstance::from_columns(3, &[(&[0, 1], 2), (&[2], 1), (&[0], 1), (&[1, 2], 3), (&[1], 1)])?;
    let w = resolve_weights(&inst, f)?;
    let model = map_to_ising(&inst, w)?;
    println!("mu1 = {}, mu2 = {}", w.mu1, w.mu2);
    println!("h = {:?}", model.h());
    for (i, j, v) in model.edges() {
        println!("J[{i},{j}] = {v}");
    }
    println!("offset = {}", model.offset());
    let e = model.energies();
    let mut order: Vec<usize> = (0..e.len()).collect();
    order.sort_by(|&a, &b| e[a].total_cmp(&e[b]));
    println!("{:>6} {:>8} {:>5} {:>8}", "x", "energy", "cost", "penalty");
    for &i in order.iter().take(8) {
        let x = Assignment::from_index(i as u64, inst.n_routes());
        println!("{:>6} {:>8} {:>5} {:>8}", x.bitstring(), e[i], inst.cost(&x)?, inst.penalty(&x)?);
    }
    Ok(())
}
