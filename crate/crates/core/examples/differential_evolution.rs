//! Differential evolution on the Rastrigin function and on a depth-one QAOA landscape.

use std::f64::consts::PI;

use qbranch::angles::differential_evolution;
use qbranch::angles::optimize_p1_global;
use qbranch::ising::map_to_ising;
use qbranch::{SetPartitioningInstance, Weights};

fn main() -> qbranch::Result<()> {
    let rastrigin = |x: &[f64]| 10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>();
    let r = differential_evolution(rastrigin, &[(-5.12, 5.12); 3], 6000, 15, 7);
    println!(
        "rastrigin: {:.2e} at {:?} ({} evaluations, {} generations)",
        r.value, r.point, r.evaluations, r.generations
    );
    let inst = SetPartitioningInstance::from_columns(3, &[(&[0, 1], 2), (&[2], 1), (&[0], 1), (&[1, 2], 3), (&[1], 1)])?;
    let model = map_to_ising(&inst, Weights::EXACT_COVER)?;
    let p1 = optimize_p1_global(&model, 2000, 0)?;
    println!("depth one: gamma {:.4}, beta {:.4}, expectation {:.4}", p1.gamma, p1.beta, p1.value);
    Ok(())
}
