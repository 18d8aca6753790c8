//! Small sweep through the command-line layer: two instances, three factors.
//!
//! Writes under the system temp directory and prints the wide table.

use qbranch::cli::{cmd_generate, cmd_sweep, GenerateArgs, SweepArgs};

fn main() -> qbranch::Result<()> {
    let dir = std::env::temp_dir().join("qbranch-sweep-example");
    let mut instances = Vec::new();
    for (seed, solutions) in [(0, 1), (1, 3)] {
        let out = dir.join(format!("r6s{solutions}.json"));
        cmd_generate(&GenerateArgs {
            routes: 6,
            solutions,
            flights: None,
            seed,
            raw_costs: false,
            out: out.clone(),
        })?;
        instances.push(out);
    }
    let cells = dir.join("cells.csv");
    let _ = std::fs::remove_file(&cells);
    let args = SweepArgs {
        instance: instances,
        f: vec!["1".parse()?, "10".parse()?, "inf".parse()?],
        pmax: 6,
        seed: 0,
        budget: 2000,
        out: cells.clone(),
        table: None,
    };
    let rows = cmd_sweep(&args)?;
    println!("{} cells", rows.len());
    print!("{}", std::fs::read_to_string(dir.join("cells.table.csv"))?);
    Ok(())
}
