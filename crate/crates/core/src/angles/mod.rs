//! Variational angle search: a global stage at depth one and the interpolation
//! ladder with bounded local refinement at every higher depth.

mod de;
mod local;

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ilp::FeasibleSet;
use crate::ising::IsingModel;
use crate::qaoa::{expectation_p1_analytic, success_probability, AngleSchedule, Simulator, SuccessMode};

pub use de::{differential_evolution, DeResult};
pub use local::{fd_gradient, minimize_box, LocalSearchConfig, LocalSearchResult};

/// Default population size per search dimension for the global stage.
pub const POP_PER_DIM: usize = 15;

#[derive(Clone, Debug, PartialEq)]
pub struct P1Result {
    pub gamma: f64,
    pub beta: f64,
    pub value: f64,
    pub evaluations: usize,
}

impl P1Result {
    pub fn schedule(&self) -> AngleSchedule {
        AngleSchedule::from_flat(&[self.gamma, self.beta]).expect("two angles")
    }
}

/// Global minimization of the analytic depth-one landscape followed by one
/// local refinement of the best population member.
pub fn optimize_p1_global(model: &IsingModel, budget: usize, seed: u64) -> Result<P1Result> {
    optimize_p1_within(model, std::f64::consts::TAU, budget, seed)
}

/// [`optimize_p1_global`] with `γ` restricted to `[0, gamma_max]`.
pub fn optimize_p1_within(model: &IsingModel, gamma_max: f64, budget: usize, seed: u64) -> Result<P1Result> {
    if !(gamma_max > 0.0 && gamma_max <= std::f64::consts::TAU) {
        return Err(Error::input(format!("gamma window must lie in (0, 2π], got {gamma_max}")));
    }
    if budget < 50 {
        return Err(Error::input(format!("global budget must be at least 50, got {budget}")));
    }
    let f = |x: &[f64]| expectation_p1_analytic(model, x[0], x[1]);
    let mut bounds = AngleSchedule::bounds(1);
    bounds[0].1 = gamma_max;
    let de = differential_evolution(f, &bounds, budget, POP_PER_DIM, seed);
    let cfg = LocalSearchConfig {
        tol: 1e-9,
        ..Default::default()
    };
    let local = minimize_box(f, &de.point, &bounds, &cfg);
    Ok(P1Result {
        gamma: local.point[0],
        beta: local.point[1],
        value: local.value,
        evaluations: de.evaluations + local.evaluations,
    })
}

/// `min(2π, k·2π/ΔE)` where `ΔE` is the spread of the diagonal energies.
///
/// Below this bound the phase separator rotates the extreme energies against
/// each other by at most `k` full turns, which keeps the depth-one optimum on
/// the branch that the interpolation ladder continues smoothly.
pub fn spectral_gamma_max(sim: &Simulator, periods: f64) -> f64 {
    let e = sim.energies();
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = hi - lo;
    if spread <= 0.0 || periods <= 0.0 {
        return std::f64::consts::TAU;
    }
    (periods * std::f64::consts::TAU / spread).min(std::f64::consts::TAU)
}

/// Depth-`k+1` starting point from depth-`k` angles, applied to `γ` and `β`
/// independently.
pub fn interpolate(angles: &AngleSchedule) -> AngleSchedule {
    let lift = |eta: &[f64]| -> Vec<f64> {
        let k = eta.len();
        let kf = k as f64;
        let mut out = Vec::with_capacity(k + 1);
        out.push(eta[0]);
        for i in 2..=k {
            let w = (i - 1) as f64 / kf;
            out.push(w * eta[i - 2] + (1.0 - w) * eta[i - 1]);
        }
        out.push(eta[k - 1]);
        out
    };
    let mut flat = lift(angles.gamma());
    flat.extend(lift(angles.beta()));
    AngleSchedule::from_flat(&flat).expect("interpolation keeps even length")
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalOutcome {
    pub angles: AngleSchedule,
    pub expectation: f64,
    pub start_expectation: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub cap_hit: bool,
}

/// Bounded descent on the simulated expectation from `start`.
pub fn local_search(model: &IsingModel, start: &AngleSchedule, cfg: &LocalSearchConfig) -> Result<LocalOutcome> {
    let sim = Simulator::new(model)?;
    Ok(local_search_with(&sim, start, cfg))
}

pub fn local_search_with(sim: &Simulator, start: &AngleSchedule, cfg: &LocalSearchConfig) -> LocalOutcome {
    let f = |x: &[f64]| sim.energy_at(&AngleSchedule::from_flat(x).expect("even length"));
    let x0 = start.to_flat();
    let start_expectation = f(&x0);
    let r = minimize_box(f, &x0, &AngleSchedule::bounds(start.depth()), cfg);
    // minimize_box only accepts strict decreases, so this never exceeds the start
    let (angles, expectation) = if r.value <= start_expectation {
        (AngleSchedule::from_flat(&r.point).expect("even length"), r.value)
    } else {
        (start.clone(), start_expectation)
    };
    LocalOutcome {
        angles,
        expectation,
        start_expectation,
        iterations: r.iterations,
        evaluations: r.evaluations + 1,
        converged: r.converged,
        cap_hit: r.cap_hit,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderConfig {
    pub seed: u64,
    /// Evaluation budget of the depth-one global stage.
    pub global_budget: usize,
    /// Restricts the depth-one `γ` to this many phase periods of the energy
    /// spread (see [`spectral_gamma_max`]); `None` searches all of `[0, 2π]`.
    pub gamma_periods: Option<f64>,
    pub local: LocalSearchConfig,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            seed: 0,
            global_budget: 2000,
            gamma_periods: Some(2.0),
            local: LocalSearchConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthRecord {
    pub depth: usize,
    pub angles: AngleSchedule,
    pub expectation: f64,
    /// Expectation at the interpolated start, before refinement.
    pub start_expectation: f64,
    pub p_ec: f64,
    /// Probability of the optimum; absent when nothing is feasible.
    pub p_sp: Option<f64>,
    pub evaluations: usize,
    pub iterations: usize,
    pub cap_hit: bool,
    pub wallclock_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderResult {
    pub records: Vec<DepthRecord>,
}

impl LadderResult {
    pub fn last(&self) -> &DepthRecord {
        self.records.last().expect("ladder has at least one depth")
    }

    pub fn depth(&self, k: usize) -> Option<&DepthRecord> {
        self.records.get(k.checked_sub(1)?)
    }

    /// `wallclock` and `evals` columns are per depth.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["depth", "expectation", "P_EC", "P_SP", "wallclock", "evals"])?;
        for r in &self.records {
            w.write_record([
                r.depth.to_string(),
                format!("{:.12}", r.expectation),
                format!("{:.12}", r.p_ec),
                r.p_sp.map(|p| format!("{p:.12}")).unwrap_or_default(),
                format!("{:.6}", r.wallclock_s),
                r.evaluations.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn record(sim: &Simulator, feas: &FeasibleSet, depth: usize, angles: AngleSchedule) -> DepthRecord {
    let state = sim.evolve(&angles);
    let p_ec = success_probability(&state, feas, SuccessMode::ExactCover).unwrap_or(0.0);
    let p_sp = success_probability(&state, feas, SuccessMode::SetPartitioning).ok();
    DepthRecord {
        depth,
        expectation: sim.expectation(&state),
        start_expectation: f64::NAN,
        angles,
        p_ec,
        p_sp,
        evaluations: 0,
        iterations: 0,
        cap_hit: false,
        wallclock_s: 0.0,
    }
}

/// Global search at depth one, then interpolate and refine up to `p_max`.
pub fn run_ladder(model: &IsingModel, p_max: usize, feas: &FeasibleSet, cfg: &LadderConfig) -> Result<LadderResult> {
    if p_max == 0 {
        return Err(Error::input("p_max must be at least 1"));
    }
    let sim = Simulator::new(model)?;
    let mut records = Vec::with_capacity(p_max);

    let clock = Instant::now();
    let gamma_max = cfg
        .gamma_periods
        .map_or(std::f64::consts::TAU, |k| spectral_gamma_max(&sim, k));
    let p1 = optimize_p1_within(model, gamma_max, cfg.global_budget, cfg.seed)?;
    let mut rec = record(&sim, feas, 1, p1.schedule());
    rec.start_expectation = rec.expectation;
    rec.evaluations = p1.evaluations;
    rec.wallclock_s = clock.elapsed().as_secs_f64();
    records.push(rec);

    for k in 2..=p_max {
        let clock = Instant::now();
        let start = interpolate(&records[k - 2].angles);
        let out = local_search_with(&sim, &start, &cfg.local);
        let mut rec = record(&sim, feas, k, out.angles);
        rec.start_expectation = out.start_expectation;
        rec.evaluations = out.evaluations;
        rec.iterations = out.iterations;
        rec.cap_hit = out.cap_hit;
        rec.wallclock_s = clock.elapsed().as_secs_f64();
        records.push(rec);
    }
    Ok(LadderResult { records })
}

#[cfg(test)]
mod tests;
