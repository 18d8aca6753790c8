//! Solves a small partitioning LP with the revised simplex and prints duals.

use qbranch::bnp::lp::{solve, LpColumn};

fn main() -> qbranch::Result<()> {
    let m = 3;
    let mut cols: Vec<LpColumn> = (0..m).map(|r| LpColumn { rows: vec![r], cost: 100.0 }).collect();
    for (rows, cost) in [(vec![0, 1], 3.0), (vec![1, 2], 3.0), (vec![0, 2], 3.0), (vec![0], 2.5)] {
        cols.push(LpColumn { rows, cost });
    }
    let slack_basis: Vec<usize> = (0..m).collect();
    let s = solve(m, &cols, &[1.0; 3], &slack_basis)?;
    println!("objective {:.4} after {} pivots", s.objective, s.pivots);
    for (j, c) in cols.iter().enumerate() {
        println!("x[{j}] rows {:?} = {:.3}, reduced cost {:.3}", c.rows, s.x[j], s.reduced_cost(c));
    }
    println!("duals {:?}, sum {:.4}", s.pi, s.pi.iter().sum::<f64>());
    Ok(())
}
