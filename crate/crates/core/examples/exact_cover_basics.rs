//! Feasible set, GF(2) rank bound and a consistency check on a small instance.

use qbranch::ilp::{gf2_rank, gf2_solution_bound};
use qbranch::SetPartitioningInstance;

fn main() -> qbranch::Result<()> {
    let inst = SetPartitioningInstance::from_columns(
        4,
        &[(&[0, 1], 3), (&[2, 3], 4), (&[0], 2), (&[1], 2), (&[1, 2], 1), (&[3], 1), (&[0, 3], 5)],
    )?;
    for row in inst.dense_matrix() {
        println!("{}", row.iter().map(|v| v.to_string()).collect::<String>());
    }
    let feas = inst.brute_force_solve()?;
    println!("{} exact covers", feas.len());
    for (x, c) in feas.solutions.iter().zip(&feas.costs) {
        println!("  {}  cost {c}", x.bitstring());
    }
    if let Some(opt) = feas.optimum() {
        println!("optimum {} at cost {}", opt.bitstring(), inst.cost(opt)?);
    }
    let (rank, consistent) = gf2_rank(&inst);
    println!("GF(2) rank {rank}, consistent {consistent}, bound {}", gf2_solution_bound(&inst));
    Ok(())
}
