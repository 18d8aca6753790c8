//! The `qbranch` command line: instance generation, QAOA ladders, factor
//! sweeps and hybrid Branch-and-Price runs.
//!
//! Exit codes: 0 on success (an infeasible network is a result, not a
//! failure), 2 for usage errors, 3 when a resource guard trips, 1 otherwise.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angles::{run_ladder, LadderConfig, LadderResult};
use crate::bnp::{
    branch_and_price, BnpConfig, ConnectionNetwork, HeuristicPolicy, IntegerHeuristic, MockExact, QaoaHeuristic,
    QaoaHeuristicConfig, RunReport, SearchMode,
};
use crate::error::{Error, Result};
use crate::ilp::SetPartitioningInstance;
use crate::instance_gen::{generate, instance_stats, simplify_costs, GenerateConfig};
use crate::ising::{map_to_ising, resolve_weights, WeightFactor};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "QBRANCH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "qbranch", version, about = "QAOA heuristics for Branch-and-Price on Set Partitioning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate an instance with an exact number of feasible covers.
    Generate(GenerateArgs),
    /// Run the interpolation ladder on one instance and write the per-depth CSV.
    Qaoa(QaoaArgs),
    /// Run the ladder for several weight factors and tabulate the success probabilities.
    Sweep(SweepArgs),
    /// Branch-and-Price on a connection network.
    Bnp(BnpArgs),
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub routes: usize,
    #[arg(long)]
    pub solutions: usize,
    /// Defaults to the number of routes.
    #[arg(long)]
    pub flights: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Keep the raw random costs instead of simplifying them.
    #[arg(long)]
    pub raw_costs: bool,
    /// Instance JSON path; statistics go next to it as `<stem>.stats.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct QaoaArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Weight factor, a positive number or `inf`.
    #[arg(long, value_parser = parse_factor)]
    pub f: WeightFactor,
    #[arg(long, default_value_t = 10)]
    pub pmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Evaluation budget of the depth-one global search.
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,
    /// CSV path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    /// Instance files, one table row each.
    #[arg(long, required = true, num_args = 1..)]
    pub instance: Vec<PathBuf>,
    /// Comma-separated weight factors, e.g. `0.5,1,2,inf`.
    #[arg(long, value_delimiter = ',', value_parser = parse_factor, required = true)]
    pub f: Vec<WeightFactor>,
    #[arg(long, default_value_t = 10)]
    pub pmax: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,
    /// Per-cell CSV; existing rows are kept and their cells skipped.
    #[arg(long)]
    pub out: PathBuf,
    /// Wide table with one column per factor; defaults to `<out stem>.table.csv`.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeuristicChoice {
    None,
    MockExact,
    Qaoa,
}

impl HeuristicChoice {
    pub fn name(self) -> &'static str {
        match self {
            HeuristicChoice::None => "none",
            HeuristicChoice::MockExact => "mock-exact",
            HeuristicChoice::Qaoa => "qaoa",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeChoice {
    FullBranch,
    Dive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyChoice {
    Never,
    Always,
    Promising,
}

#[derive(Debug, Clone, Args)]
pub struct BnpArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long, value_enum, default_value_t = HeuristicChoice::None)]
    pub heuristic: HeuristicChoice,
    #[arg(long, value_enum, default_value_t = ModeChoice::FullBranch)]
    pub mode: ModeChoice,
    /// When the heuristic runs during column generation.
    #[arg(long, value_enum, default_value_t = PolicyChoice::Promising)]
    pub policy: PolicyChoice,
    /// Stop at the first incumbent costing at most this much.
    #[arg(long)]
    pub threshold: Option<i64>,
    #[arg(long, value_parser = parse_factor, default_value = "1")]
    pub f: WeightFactor,
    #[arg(long, default_value_t = 10)]
    pub pmax: usize,
    #[arg(long, default_value_t = 256)]
    pub shots: u64,
    /// Qubit cap of the QAOA heuristic; larger pools are truncated.
    #[arg(long, default_value_t = 8)]
    pub max_qubits: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report JSON path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_factor(s: &str) -> std::result::Result<WeightFactor, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        e if e.is_resource_guard() => EXIT_RESOURCE,
        Error::Input(_) | Error::Dimension { .. } => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` and runs the command, returning the exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match run(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::input(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // a pool set up earlier in the process stays in place
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Generate(a) => cmd_generate(a).map(|_| ()),
        Command::Qaoa(a) => cmd_qaoa(a).map(|_| ()),
        Command::Sweep(a) => cmd_sweep(a).map(|_| ()),
        Command::Bnp(a) => cmd_bnp(a).map(|_| ()),
    }
}

/// `<dir>/<stem>.<suffix>` next to `path`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// Writes the instance and its statistics; returns both paths.
pub fn cmd_generate(a: &GenerateArgs) -> Result<(PathBuf, PathBuf)> {
    let cfg = GenerateConfig {
        n_routes: a.routes,
        target_solutions: a.solutions,
        n_flights: a.flights.unwrap_or(a.routes),
        seed: a.seed,
    };
    let mut inst = generate(&cfg)?;
    if !a.raw_costs {
        inst = simplify_costs(&inst, a.seed)?;
    }
    let stats = instance_stats(&inst)?;
    create_parent(&a.out)?;
    inst.save(&a.out)?;
    let stats_path = sibling(&a.out, "stats.json");
    std::fs::write(&stats_path, serde_json::to_string_pretty(&stats)? + "\n")?;
    println!(
        "{}: |R| = {}, |F| = {}, |S| = {}, avg degree {:.3}",
        a.out.display(),
        stats.n_routes,
        stats.n_flights,
        stats.n_feasible,
        stats.avg_degree
    );
    Ok((a.out.clone(), stats_path))
}

/// Ladder on one instance at factor `f`.
pub fn ladder_for(inst: &SetPartitioningInstance, f: WeightFactor, pmax: usize, seed: u64, budget: usize) -> Result<LadderResult> {
    let weights = resolve_weights(inst, f)?;
    let model = map_to_ising(inst, weights)?;
    let feas = inst.brute_force_solve()?;
    let cfg = LadderConfig {
        seed,
        global_budget: budget,
        ..Default::default()
    };
    run_ladder(&model, pmax, &feas, &cfg)
}

pub fn cmd_qaoa(a: &QaoaArgs) -> Result<LadderResult> {
    let inst = SetPartitioningInstance::load(&a.instance)?;
    let ladder = ladder_for(&inst, a.f, a.pmax, a.seed, a.budget)?;
    match &a.out {
        Some(path) => {
            create_parent(path)?;
            ladder.write_csv(File::create(path)?)?;
        }
        None => ladder.write_csv(std::io::stdout().lock())?,
    }
    Ok(ladder)
}

/// One (instance, factor) cell of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub instance: String,
    pub n_routes: usize,
    pub n_feasible: usize,
    pub p: usize,
    pub f: String,
    pub seed: u64,
    #[serde(rename = "P_EC")]
    pub p_ec: f64,
    #[serde(rename = "P_SP")]
    pub p_sp: Option<f64>,
    pub expectation: f64,
}

fn read_rows(path: &Path) -> Result<Vec<SweepRow>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Runs the missing cells in parallel, appending each to the per-cell CSV as
/// it finishes, then writes the wide table. Returns all rows in table order.
pub fn cmd_sweep(a: &SweepArgs) -> Result<Vec<SweepRow>> {
    let existing = read_rows(&a.out)?;
    let key = |inst: &str, f: &str, p: usize, seed: u64| (inst.to_string(), f.to_string(), p, seed);
    let done: BTreeSet<_> = existing.iter().map(|r| key(&r.instance, &r.f, r.p, r.seed)).collect();
    let factors: Vec<String> = a.f.iter().map(|f| f.to_string()).collect();

    let mut instances = Vec::new();
    for path in &a.instance {
        let inst = SetPartitioningInstance::load(path)?;
        let feas = inst.brute_force_solve()?;
        instances.push((path.display().to_string(), inst, feas.len()));
    }
    let mut todo = Vec::new();
    for (i, (name, _, _)) in instances.iter().enumerate() {
        for (j, f) in factors.iter().enumerate() {
            if !done.contains(&key(name, f, a.pmax, a.seed)) {
                todo.push((i, j));
            }
        }
    }

    create_parent(&a.out)?;
    let fresh = !a.out.exists() || std::fs::metadata(&a.out)?.len() == 0;
    let file = OpenOptions::new().create(true).append(true).open(&a.out)?;
    let mut writer = csv::WriterBuilder::new().has_headers(fresh).from_writer(file);
    let (tx, rx) = mpsc::channel::<SweepRow>();
    let computed: Result<()> = std::thread::scope(|s| {
        let handle = s.spawn(move || -> Result<()> {
            for row in rx {
                writer.serialize(&row)?;
                writer.flush()?;
            }
            Ok(())
        });
        let result = todo.par_iter().try_for_each_with(tx, |tx, &(i, j)| -> Result<()> {
            let (name, inst, n_feasible) = &instances[i];
            let ladder = ladder_for(inst, a.f[j], a.pmax, a.seed, a.budget)?;
            let last = ladder.last();
            let _ = tx.send(SweepRow {
                instance: name.clone(),
                n_routes: inst.n_routes(),
                n_feasible: *n_feasible,
                p: a.pmax,
                f: factors[j].clone(),
                seed: a.seed,
                p_ec: last.p_ec,
                p_sp: last.p_sp,
                expectation: last.expectation,
            });
            Ok(())
        });
        let written = handle.join().expect("sweep writer panicked");
        result.and(written)
    });
    computed?;

    let all = read_rows(&a.out)?;
    let mut rows = Vec::new();
    for (name, _, _) in &instances {
        for f in &factors {
            let row = all
                .iter()
                .rev()
                .find(|r| key(&r.instance, &r.f, r.p, r.seed) == key(name, f, a.pmax, a.seed))
                .ok_or_else(|| Error::Numerical(format!("sweep cell {name} f={f} missing")))?;
            rows.push(row.clone());
        }
    }
    let table = a.table.clone().unwrap_or_else(|| sibling(&a.out, "table.csv"));
    write_table(&table, &factors, &rows)?;
    Ok(rows)
}

/// One row per instance with `P_EC` and `P_SP` columns per factor.
fn write_table(path: &Path, factors: &[String], rows: &[SweepRow]) -> Result<()> {
    create_parent(path)?;
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["instance".to_string(), "R".into(), "p".into(), "S".into()];
    header.extend(factors.iter().map(|f| format!("P_EC[f={f}]")));
    header.extend(factors.iter().map(|f| format!("P_SP[f={f}]")));
    w.write_record(&header)?;
    for chunk in rows.chunks(factors.len()) {
        let first = &chunk[0];
        let mut rec = vec![
            first.instance.clone(),
            first.n_routes.to_string(),
            first.p.to_string(),
            first.n_feasible.to_string(),
        ];
        rec.extend(chunk.iter().map(|r| format!("{:.6}", r.p_ec)));
        rec.extend(chunk.iter().map(|r| r.p_sp.map(|p| format!("{p:.6}")).unwrap_or_default()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn bnp_config(a: &BnpArgs) -> BnpConfig {
    let mut cfg = BnpConfig {
        mode: match a.mode {
            ModeChoice::FullBranch => SearchMode::FullBranch,
            ModeChoice::Dive => SearchMode::Dive,
        },
        threshold: a.threshold,
        ..Default::default()
    };
    cfg.cg.policy = match a.policy {
        PolicyChoice::Never => HeuristicPolicy::Never,
        PolicyChoice::Always => HeuristicPolicy::Always,
        PolicyChoice::Promising => HeuristicPolicy::Promising,
    };
    cfg
}

pub fn cmd_bnp(a: &BnpArgs) -> Result<RunReport> {
    let net = ConnectionNetwork::load(&a.network)?;
    let cfg = bnp_config(a);
    let mut mock = MockExact::default();
    let mut qaoa = QaoaHeuristic::new(QaoaHeuristicConfig {
        f: a.f,
        p_max: a.pmax,
        shots: a.shots,
        seed: a.seed,
        max_qubits: a.max_qubits,
        ..Default::default()
    });
    let heuristic: Option<&mut dyn IntegerHeuristic> = match a.heuristic {
        HeuristicChoice::None => None,
        HeuristicChoice::MockExact => Some(&mut mock),
        HeuristicChoice::Qaoa => Some(&mut qaoa),
    };
    let clock = Instant::now();
    let result = branch_and_price(&net, &cfg, heuristic)?;
    let report = RunReport::new(&net, &cfg, a.heuristic.name(), a.seed, &result, clock.elapsed().as_secs_f64());
    match &a.out {
        Some(path) => {
            create_parent(path)?;
            report.save(path)?;
            eprintln!(
                "{}: {:?}, cost {:?}, {} nodes",
                report.network, report.status, report.cost, report.stats.nodes_created
            );
        }
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{}", report.to_json_string()?)?;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_parsing() {
        assert_eq!(parse_factor("inf"), Ok(WeightFactor::Infinite));
        assert_eq!(parse_factor("0.5"), Ok(WeightFactor::Finite(0.5)));
        assert!(parse_factor("0").is_err());
        assert!(parse_factor("-1").is_err());
    }

    #[test]
    fn usage_errors_exit_with_two() {
        assert_eq!(main_from(["qbranch", "frobnicate"]), EXIT_USAGE);
        assert_eq!(main_from(["qbranch", "qaoa", "--instance", "x.json", "--f", "0"]), EXIT_USAGE);
        assert_eq!(
            main_from(["qbranch", "generate", "--routes", "6", "--solutions", "9", "--out", "/nonexistent/x.json"]),
            EXIT_USAGE
        );
    }

    #[test]
    fn exit_codes_by_error_kind() {
        let guard = Error::Size {
            what: "qubits",
            size: 30,
            limit: 24,
        };
        assert_eq!(exit_code(&guard), EXIT_RESOURCE);
        assert_eq!(exit_code(&Error::input("bad")), EXIT_USAGE);
        assert_eq!(exit_code(&Error::Numerical("x".into())), EXIT_FAILURE);
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/a.json"), "stats.json"), PathBuf::from("out/a.stats.json"));
        assert_eq!(sibling(Path::new("cells.csv"), "table.csv"), PathBuf::from("cells.table.csv"));
    }

    #[test]
    fn flags_parse() {
        let cli = Cli::try_parse_from([
            "qbranch", "bnp", "--network", "n.json", "--heuristic", "mock-exact", "--mode", "dive", "--f", "inf",
        ])
        .unwrap();
        let Command::Bnp(a) = cli.command else { panic!() };
        assert_eq!(a.heuristic, HeuristicChoice::MockExact);
        assert_eq!(bnp_config(&a).mode, SearchMode::Dive);
        assert_eq!(a.f, WeightFactor::Infinite);
        let cli = Cli::try_parse_from(["qbranch", "sweep", "--instance", "a.json", "--f", "0.5,1,inf", "--out", "c.csv"]).unwrap();
        let Command::Sweep(a) = cli.command else { panic!() };
        assert_eq!(a.f.len(), 3);
    }
}
