use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::instance_gen::{generate, GenerateConfig};
use crate::ising::{map_to_ising, Weights};
use crate::qaoa::tests::random_model;

fn grid_min(model: &IsingModel, ng: usize, nb: usize) -> f64 {
    let mut best = f64::INFINITY;
    for a in 0..=ng {
        let g = TAU * a as f64 / ng as f64;
        for b in 0..=nb {
            let be = PI * b as f64 / nb as f64;
            best = best.min(expectation_p1_analytic(model, g, be));
        }
    }
    best
}

fn ec_model(n_routes: usize, seed: u64) -> (IsingModel, FeasibleSet) {
    let inst = generate(&GenerateConfig {
        n_routes,
        target_solutions: 1,
        n_flights: n_routes,
        seed,
    })
    .unwrap();
    let feas = inst.brute_force_solve().unwrap();
    (map_to_ising(&inst, Weights::EXACT_COVER).unwrap(), feas)
}

#[test]
fn one_qubit_global_minimum() {
    let model = IsingModel::new(vec![-0.5], [], 0.5).unwrap();
    let r = optimize_p1_global(&model, 200, 1).unwrap();
    let oracle = grid_min(&model, 1000, 500);
    assert!(oracle < 1e-4);
    assert!(r.value <= 1e-6, "{r:?}");
    let state = Simulator::new(&model).unwrap().evolve(&r.schedule());
    assert!((state.probability(1) - 1.0).abs() < 1e-6);
}

#[test]
fn budget_below_minimum_rejected() {
    let model = IsingModel::new(vec![1.0], [], 0.0).unwrap();
    assert!(optimize_p1_global(&model, 49, 0).is_err());
}

#[test]
fn global_dominates_random_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..5 {
        let model = random_model(&mut rng, 5, 0.5);
        let budget = 300;
        let r = optimize_p1_global(&model, budget, seed).unwrap();
        let mut sampler = ChaCha8Rng::seed_from_u64(seed);
        let best_random = (0..budget)
            .map(|_| expectation_p1_analytic(&model, sampler.gen_range(0.0..TAU), sampler.gen_range(0.0..PI)))
            .fold(f64::INFINITY, f64::min);
        assert!(r.value <= best_random + 1e-12);
    }
}

#[test]
fn global_matches_grid_on_six_routes() {
    for seed in 0..3 {
        let (model, _) = ec_model(6, seed);
        let r = optimize_p1_global(&model, 2000, seed).unwrap();
        let grid = grid_min(&model, 720, 360);
        assert!(r.value <= grid + 1e-3, "seed {seed}: {} vs grid {grid}", r.value);
        assert!(r.value >= grid - 0.05, "grid should bracket the optimum closely");
    }
}

#[test]
fn flat_landscape() {
    let model = IsingModel::new(vec![0.0; 3], [], 2.5).unwrap();
    let r = optimize_p1_global(&model, 100, 0).unwrap();
    assert!((r.value - 2.5).abs() < 1e-12);
}

#[test]
fn interpolation_cases() {
    let s = AngleSchedule::new(vec![0.7], vec![0.2]).unwrap();
    let t = interpolate(&s);
    assert_eq!(t.gamma(), &[0.7, 0.7]);
    assert_eq!(t.beta(), &[0.2, 0.2]);

    let s = AngleSchedule::new(vec![1.0, 2.0], vec![0.5, 1.5]).unwrap();
    let t = interpolate(&s);
    assert_eq!(t.gamma(), &[1.0, 1.5, 2.0]);
    assert_eq!(t.beta(), &[0.5, 1.0, 1.5]);

    let s = AngleSchedule::new(vec![1.0, 2.0, 3.0], vec![0.1, 0.2, 0.3]).unwrap();
    let t = interpolate(&s);
    let expect = [1.0, 5.0 / 3.0, 7.0 / 3.0, 3.0];
    for (a, b) in t.gamma().iter().zip(expect) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn interpolation_matches_formula_not_swapped_reading() {
    // the swapped weights ((k-i+1)/k on η_{i-1}) would give 4/3 at i=2
    let s = AngleSchedule::new(vec![1.0, 2.0, 3.0], vec![0.0; 3]).unwrap();
    let t = interpolate(&s);
    let swapped = (2.0 / 3.0) * 1.0 + (1.0 / 3.0) * 2.0;
    assert!((t.gamma()[1] - swapped).abs() > 0.1);
    assert!((t.gamma()[1] - ((1.0 / 3.0) * 1.0 + (2.0 / 3.0) * 2.0)).abs() < 1e-12);
}

proptest! {
    #[test]
    fn interpolation_stays_in_box(
        g in prop::collection::vec(0.0..=TAU, 1..12),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<f64> = g.iter().map(|_| rng.gen_range(0.0..=PI)).collect();
        let s = AngleSchedule::new(g.clone(), b).unwrap();
        let t = interpolate(&s);
        prop_assert_eq!(t.depth(), s.depth() + 1);
        prop_assert!(AngleSchedule::new(t.gamma().to_vec(), t.beta().to_vec()).is_ok());
        prop_assert_eq!(t.gamma()[0], g[0]);
        prop_assert_eq!(t.gamma()[g.len()], g[g.len() - 1]);
    }

    #[test]
    fn local_search_never_increases(seed in 0u64..1000, p in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = random_model(&mut rng, 4, 0.5);
        let flat: Vec<f64> = AngleSchedule::bounds(p).iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
        let start = AngleSchedule::from_flat(&flat).unwrap();
        let cfg = LocalSearchConfig { max_iter: 30, ..Default::default() };
        let out = local_search(&model, &start, &cfg).unwrap();
        let sim = Simulator::new(&model).unwrap();
        prop_assert!(out.expectation <= sim.energy_at(&start) + 1e-12);
        prop_assert!((sim.energy_at(&out.angles) - out.expectation).abs() < 1e-12);
    }
}

#[test]
fn local_search_fixed_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let model = random_model(&mut rng, 5, 0.6);
    let start = AngleSchedule::from_flat(&[0.4, 1.1, 0.3, 0.6]).unwrap();
    let tight = LocalSearchConfig {
        tol: 1e-7,
        ..Default::default()
    };
    let first = local_search(&model, &start, &tight).unwrap();
    assert!(first.converged, "{first:?}");
    let again = local_search(&model, &first.angles, &LocalSearchConfig::default()).unwrap();
    assert_eq!(again.iterations, 0);
    assert_eq!(again.angles, first.angles);
}

#[test]
fn descent_from_zero_angles() {
    let (model, _) = ec_model(6, 2);
    let start = AngleSchedule::zeros(3);
    let out = local_search(&model, &start, &LocalSearchConfig::default()).unwrap();
    let sim = Simulator::new(&model).unwrap();
    assert!(out.expectation <= sim.energy_at(&start));
}

#[test]
fn multistart_agrees_with_global() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..3 {
        let model = random_model(&mut rng, 6, 0.5);
        let global = optimize_p1_global(&model, 2000, 4).unwrap();
        let cfg = LocalSearchConfig {
            tol: 1e-9,
            ..Default::default()
        };
        let best = (0..20)
            .map(|_| {
                let x0 = [rng.gen_range(0.0..TAU), rng.gen_range(0.0..PI)];
                let f = |x: &[f64]| expectation_p1_analytic(&model, x[0], x[1]);
                minimize_box(f, &x0, &AngleSchedule::bounds(1), &cfg).value
            })
            .fold(f64::INFINITY, f64::min);
        assert!(global.value <= best + 1e-6, "global {} multistart {best}", global.value);
    }
}

#[test]
fn simulated_gradient_agrees_with_richardson() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let model = random_model(&mut rng, 5, 0.5);
    let sim = Simulator::new(&model).unwrap();
    let f = |x: &[f64]| sim.energy_at(&AngleSchedule::from_flat(x).unwrap());
    let bounds = AngleSchedule::bounds(2);
    for _ in 0..5 {
        let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| rng.gen_range(lo + 0.1..hi - 0.1)).collect();
        let g = fd_gradient(&f, &x, &bounds, 1e-6);
        for i in 0..x.len() {
            let d = |h: f64| {
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += h;
                b[i] -= h;
                (f(&a) - f(&b)) / (2.0 * h)
            };
            let richardson = (4.0 * d(5e-4) - d(1e-3)) / 3.0;
            assert!((g[i] - richardson).abs() < 1e-4, "{} vs {richardson}", g[i]);
        }
    }
}

#[test]
fn ladder_depth_one_is_global_stage() {
    let (model, feas) = ec_model(6, 0);
    let mut cfg = LadderConfig {
        seed: 3,
        ..Default::default()
    };
    let sim = Simulator::new(&model).unwrap();
    let window = spectral_gamma_max(&sim, 2.0);
    let ladder = run_ladder(&model, 1, &feas, &cfg).unwrap();
    let p1 = optimize_p1_within(&model, window, cfg.global_budget, cfg.seed).unwrap();
    assert_eq!(ladder.records.len(), 1);
    assert!((ladder.records[0].expectation - p1.value).abs() < 1e-9);
    assert_eq!(ladder.records[0].angles, p1.schedule());
    assert!(ladder.records[0].angles.gamma()[0] <= window);

    cfg.gamma_periods = None;
    let ladder = run_ladder(&model, 1, &feas, &cfg).unwrap();
    let p1 = optimize_p1_global(&model, cfg.global_budget, cfg.seed).unwrap();
    assert_eq!(ladder.records[0].angles, p1.schedule());
}

#[test]
fn spectral_window_scales_with_spread() {
    let (model, _) = ec_model(6, 0);
    let sim = Simulator::new(&model).unwrap();
    let e = sim.energies();
    let spread = e.iter().copied().fold(f64::MIN, f64::max) - e.iter().copied().fold(f64::MAX, f64::min);
    assert!((spectral_gamma_max(&sim, 1.0) - (std::f64::consts::TAU / spread).min(std::f64::consts::TAU)).abs() < 1e-15);
    let doubled = Simulator::new(&model.scaled(2.0)).unwrap();
    assert!((spectral_gamma_max(&doubled, 2.0) * 2.0 - spectral_gamma_max(&sim, 2.0)).abs() < 1e-12);
    let flat = IsingModel::new(vec![0.0; 2], [], 3.0).unwrap();
    assert_eq!(spectral_gamma_max(&Simulator::new(&flat).unwrap(), 2.0), std::f64::consts::TAU);
}

#[test]
fn ladder_records_and_refinement() {
    let (model, feas) = ec_model(6, 1);
    let cfg = LadderConfig::default();
    let ladder = run_ladder(&model, 6, &feas, &cfg).unwrap();
    for (k, r) in ladder.records.iter().enumerate() {
        assert_eq!(r.depth, k + 1);
        assert_eq!(r.angles.depth(), k + 1);
        assert!(r.expectation <= r.start_expectation + 1e-12);
        assert!((0.0..=1.0 + 1e-12).contains(&r.p_ec));
        assert!(r.p_sp.unwrap() <= r.p_ec + 1e-12);
    }
    // interpolation reproduces a depth-k point well enough to keep improving here
    assert!(ladder.last().expectation < ladder.records[0].expectation);
    let again = run_ladder(&model, 6, &feas, &cfg).unwrap();
    for (a, b) in ladder.records.iter().zip(&again.records) {
        assert_eq!(a.angles, b.angles);
        assert_eq!(a.expectation, b.expectation);
        assert_eq!(a.evaluations, b.evaluations);
    }
}

#[test]
fn ladder_csv_has_one_row_per_depth() {
    let (model, feas) = ec_model(6, 1);
    let ladder = run_ladder(&model, 3, &feas, &LadderConfig::default()).unwrap();
    let mut buf = Vec::new();
    ladder.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "depth,expectation,P_EC,P_SP,wallclock,evals");
    assert_eq!(lines.len(), 4);
}

#[test]
fn ladder_rejects_zero_depth_and_large_models() {
    let (model, feas) = ec_model(6, 1);
    assert!(run_ladder(&model, 0, &feas, &LadderConfig::default()).is_err());
    let big = IsingModel::new(vec![1.0; 25], [], 0.0).unwrap();
    let err = run_ladder(&big, 1, &FeasibleSet::default(), &LadderConfig::default()).unwrap_err();
    assert!(err.is_resource_guard());
}
