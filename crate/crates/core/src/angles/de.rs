//! Differential evolution over a box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Clone, Debug, PartialEq)]
pub struct DeResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub generations: usize,
}

/// `rand/1/bin` with dithered mutation factor in `[0.5, 1)` and crossover 0.7.
///
/// Trial vectors of one generation are drawn sequentially and evaluated in
/// parallel, so the result depends only on `seed`. The population is
/// `pop_per_dim × dim` and no more than `budget` evaluations are spent. A
/// population that has collapsed onto one value is reseeded, keeping the best
/// point found so far.
pub fn differential_evolution<F>(f: F, bounds: &[(f64, f64)], budget: usize, pop_per_dim: usize, seed: u64) -> DeResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = bounds.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pop_size = (pop_per_dim * dim).max(4).min(budget.max(1));
    let sample = |rng: &mut ChaCha8Rng| -> Vec<f64> { bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect() };

    let mut pop: Vec<Vec<f64>> = (0..pop_size).map(|_| sample(&mut rng)).collect();
    let mut vals: Vec<f64> = pop.par_iter().map(|x| f(x)).collect();
    let mut evaluations = pop_size;
    let mut generations = 0;
    let cr = 0.7;

    let mut best_point = pop[argmin(&vals)].clone();
    let mut best_value = vals.iter().copied().fold(f64::INFINITY, f64::min);

    while evaluations + pop_size <= budget && pop_size >= 4 {
        let (lo, hi) = vals.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
            pop = (0..pop_size).map(|_| sample(&mut rng)).collect();
            vals = pop.par_iter().map(|x| f(x)).collect();
            evaluations += pop_size;
            continue;
        }
        let trials: Vec<Vec<f64>> = (0..pop_size)
            .map(|i| {
                let (r0, r1, r2) = loop {
                    let a = rng.gen_range(0..pop_size);
                    let b = rng.gen_range(0..pop_size);
                    let c = rng.gen_range(0..pop_size);
                    if a != b && a != c && b != c && a != i && b != i && c != i {
                        break (a, b, c);
                    }
                };
                let fm = rng.gen_range(0.5..1.0);
                let forced = rng.gen_range(0..dim);
                (0..dim)
                    .map(|d| {
                        if d == forced || rng.gen::<f64>() < cr {
                            let v = pop[r0][d] + fm * (pop[r1][d] - pop[r2][d]);
                            let (lo, hi) = bounds[d];
                            // out-of-box coordinates are resampled
                            if (lo..=hi).contains(&v) {
                                v
                            } else {
                                rng.gen_range(lo..=hi)
                            }
                        } else {
                            pop[i][d]
                        }
                    })
                    .collect()
            })
            .collect();
        let trial_vals: Vec<f64> = trials.par_iter().map(|x| f(x)).collect();
        evaluations += pop_size;
        generations += 1;
        for (i, (t, v)) in trials.into_iter().zip(trial_vals).enumerate() {
            if v <= vals[i] {
                if v < best_value {
                    best_value = v;
                    best_point.clone_from(&t);
                }
                pop[i] = t;
                vals[i] = v;
            }
        }
    }
    for (x, &v) in pop.iter().zip(&vals) {
        if v < best_value {
            best_value = v;
            best_point.clone_from(x);
        }
    }

    DeResult {
        point: best_point,
        value: best_value,
        evaluations,
        generations,
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}
