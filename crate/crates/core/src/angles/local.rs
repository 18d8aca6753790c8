//! Bounded quasi-Newton descent with finite-difference gradients.
//!
//! Projected L-BFGS: the search direction comes from the two-loop recursion on
//! the projected gradient, steps are projected back onto the box, and an Armijo
//! backtracking line search accepts only strict decreases.

use std::collections::VecDeque;

#[derive(Clone, Debug, PartialEq)]
pub struct LocalSearchConfig {
    /// Stop when the projected gradient's infinity norm drops below this.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative central-difference step.
    pub fd_step: f64,
    /// L-BFGS history length.
    pub memory: usize,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        LocalSearchConfig {
            tol: 1e-6,
            max_iter: 500,
            fd_step: 1e-6,
            memory: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LocalSearchResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// The iteration cap was reached before convergence.
    pub cap_hit: bool,
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: Fn(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        (self.f)(x)
    }
}

/// Central differences with relative step, shrunk to stay inside the box.
pub fn fd_gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], bounds: &[(f64, f64)], rel_step: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = rel_step * x[i].abs().max(1.0);
            let (lo, hi) = bounds[i];
            let up = (x[i] + h).min(hi);
            let down = (x[i] - h).max(lo);
            xp[i] = up;
            let fu = f(&xp);
            xp[i] = down;
            let fd = f(&xp);
            xp[i] = x[i];
            if up > down {
                (fu - fd) / (up - down)
            } else {
                0.0
            }
        })
        .collect()
}

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Zeroes gradient components that push against an active bound.
fn projected_gradient(x: &[f64], g: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    x.iter()
        .zip(g)
        .zip(bounds)
        .map(|((&xi, &gi), &(lo, hi))| {
            if (xi <= lo && gi > 0.0) || (xi >= hi && gi < 0.0) {
                0.0
            } else {
                gi
            }
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimizes `f` over the box starting at `x0`.
pub fn minimize_box<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    bounds: &[(f64, f64)],
    cfg: &LocalSearchConfig,
) -> LocalSearchResult {
    let n = x0.len();
    let mut obj = Counted { f, evals: 0 };
    let mut x = x0.to_vec();
    project(&mut x, bounds);
    let mut fx = obj.eval(&x);
    let grad = |obj: &mut Counted<F>, x: &[f64]| {
        obj.evals += 2 * n;
        fd_gradient(&obj.f, x, bounds, cfg.fd_step)
    };
    let mut g = grad(&mut obj, &x);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let pg = projected_gradient(&x, &g, bounds);
        if inf_norm(&pg) < cfg.tol {
            converged = true;
            break;
        }
        iterations += 1;

        let mut accepted = None;
        for attempt in 0..2 {
            let use_memory = attempt == 0 && !history.is_empty();
            let mut d = if use_memory {
                two_loop(&pg, &history)
            } else {
                pg.iter().map(|v| -v).collect()
            };
            // keep bound-active coordinates fixed
            for i in 0..n {
                if pg[i] == 0.0 {
                    d[i] = 0.0;
                }
            }
            if dot(&d, &pg) >= 0.0 {
                if use_memory {
                    continue;
                }
                break;
            }
            let mut alpha = if use_memory { 1.0 } else { (1.0 / inf_norm(&pg)).min(1.0) };
            for _ in 0..40 {
                let mut trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + alpha * di).collect();
                project(&mut trial, bounds);
                let step: Vec<f64> = trial.iter().zip(&x).map(|(a, b)| a - b).collect();
                if inf_norm(&step) == 0.0 {
                    break;
                }
                let ft = obj.eval(&trial);
                if ft < fx && ft <= fx + 1e-4 * dot(&pg, &step) {
                    accepted = Some((trial, ft));
                    break;
                }
                alpha *= 0.5;
            }
            if accepted.is_some() {
                break;
            }
        }

        let Some((x_new, f_new)) = accepted else {
            // no further decrease is resolvable at this precision
            converged = inf_norm(&projected_gradient(&x, &g, bounds)) < cfg.tol.sqrt();
            break;
        };
        let g_new = grad(&mut obj, &x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() && sy > 0.0 {
            history.push_back((s, y, 1.0 / sy));
            if history.len() > cfg.memory {
                history.pop_front();
            }
        }
        x = x_new;
        fx = f_new;
        g = g_new;
    }

    LocalSearchResult {
        point: x,
        value: fx,
        iterations,
        evaluations: obj.evals,
        converged,
        cap_hit: !converged && iterations >= cfg.max_iter,
    }
}

fn two_loop(g: &[f64], history: &VecDeque<(Vec<f64>, Vec<f64>, f64)>) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(history.len());
    for (s, y, rho) in history.iter().rev() {
        let a = rho * dot(s, &q);
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
        alphas.push(a);
    }
    let (s, y, _) = history.back().expect("history is nonempty");
    let gamma = dot(s, y) / dot(y, y);
    q.iter_mut().for_each(|v| *v *= gamma);
    for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
        let b = rho * dot(y, &q);
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}
