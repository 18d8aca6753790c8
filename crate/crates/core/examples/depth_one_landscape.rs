//! Depth-one expectation: closed form against the simulator on a coarse grid.

use std::f64::consts::PI;

use qbranch::ising::map_to_ising;
use qbranch::qaoa::{evolve, expectation, expectation_p1_analytic};
use qbranch::{AngleSchedule, SetPartitioningInstance, Weights};

fn main() -> qbranch::Result<()> {
    let inst = SetPartitioningInstance::from_columns(3, &[(&[0, 1], 2), (&[2], 1), (&[0], 1), (&[1, 2], 3), (&[1], 1)])?;
    let model = map_to_ising(&inst, Weights::EXACT_COVER)?;
    let mut worst = 0.0f64;
    print!("{:>6}", "g\\b");
    let betas: Vec<f64> = (0..6).map(|k| k as f64 * PI / 6.0).collect();
    betas.iter().for_each(|b| print!("{b:>9.3}"));
    println!();
    for k in 0..8 {
        let g = k as f64 * PI / 8.0;
        print!("{g:>6.3}");
        for &b in &betas {
            let closed = expectation_p1_analytic(&model, g, b);
            let sim = expectation(&evolve(&model, &AngleSchedule::new(vec![g], vec![b])?)?, &model)?;
            worst = worst.max((closed - sim).abs());
            print!("{closed:>9.4}");
        }
        println!();
    }
    println!("max |closed form - simulation| = {worst:.2e}");
    Ok(())
}
