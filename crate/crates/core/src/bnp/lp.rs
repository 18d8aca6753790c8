//! Revised primal simplex for `min c·x, Ax = b, x ≥ 0` with 0/1 sparse columns.
//!
//! The caller supplies a feasible starting basis (the slack columns of the
//! restricted master problem). Pricing is Dantzig's rule, switching to Bland's
//! rule after a run of degenerate pivots. The basis inverse is kept dense and
//! refactorized periodically.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const REDUCED_COST_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_SWITCH: usize = 30;

/// A column: its nonzero rows (coefficient one) and its cost.
#[derive(Clone, Debug, PartialEq)]
pub struct LpColumn {
    pub rows: Vec<usize>,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// Row duals `π = c_B B⁻¹`.
    pub pi: Vec<f64>,
    pub objective: f64,
    /// Basic column per row position.
    pub basis: Vec<usize>,
    pub pivots: usize,
}

impl LpSolution {
    /// `c_j − Σ_{i∈rows_j} π_i`.
    pub fn reduced_cost(&self, col: &LpColumn) -> f64 {
        col.cost - col.rows.iter().map(|&r| self.pi[r]).sum::<f64>()
    }
}

fn invert(m: usize, basis: &[usize], cols: &[LpColumn]) -> Result<Vec<f64>> {
    // Gauss-Jordan with partial pivoting on [B | I]
    let mut a = vec![0.0f64; m * m];
    for (k, &j) in basis.iter().enumerate() {
        for &r in &cols[j].rows {
            a[r * m + k] = 1.0;
        }
    }
    let mut inv = vec![0.0; m * m];
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for c in 0..m {
        let p = (c..m)
            .max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs()))
            .expect("nonempty range");
        if a[p * m + c].abs() < 1e-12 {
            return Err(Error::Numerical("singular basis matrix".into()));
        }
        if p != c {
            for k in 0..m {
                a.swap(p * m + k, c * m + k);
                inv.swap(p * m + k, c * m + k);
            }
        }
        let d = a[c * m + c];
        for k in 0..m {
            a[c * m + k] /= d;
            inv[c * m + k] /= d;
        }
        for r in 0..m {
            if r != c {
                let f = a[r * m + c];
                if f != 0.0 {
                    for k in 0..m {
                        a[r * m + k] -= f * a[c * m + k];
                        inv[r * m + k] -= f * inv[c * m + k];
                    }
                }
            }
        }
    }
    Ok(inv)
}

/// Solves the LP from `initial_basis`, which must be primal feasible.
pub fn solve(m: usize, cols: &[LpColumn], b: &[f64], initial_basis: &[usize]) -> Result<LpSolution> {
    if b.len() != m || initial_basis.len() != m {
        return Err(Error::Dimension {
            expected: m,
            actual: if b.len() != m { b.len() } else { initial_basis.len() },
        });
    }
    if let Some(c) = cols.iter().find(|c| c.rows.iter().any(|&r| r >= m)) {
        return Err(Error::input(format!("column row index out of range: {:?}", c.rows)));
    }
    let n = cols.len();
    let mut basis = initial_basis.to_vec();
    let mut in_basis = vec![false; n];
    for &j in &basis {
        in_basis[j] = true;
    }
    let mut binv = invert(m, &basis, cols)?;
    let mut xb = mat_vec(m, &binv, b);
    if xb.iter().any(|&v| v < -1e-9) {
        return Err(Error::input("initial basis is not primal feasible"));
    }

    let mut pivots = 0;
    let mut since_refactor = 0;
    let mut degenerate_run = 0;
    let max_pivots = 50 * (n + m) + 1000;
    loop {
        let pi = duals(m, &binv, &basis, cols);
        let bland = degenerate_run >= DEGENERATE_SWITCH;
        let mut entering = None;
        let mut best = -REDUCED_COST_TOL;
        for (j, col) in cols.iter().enumerate() {
            if in_basis[j] {
                continue;
            }
            let d = col.cost - col.rows.iter().map(|&r| pi[r]).sum::<f64>();
            if d < best {
                entering = Some(j);
                if bland {
                    break;
                }
                best = d;
            }
        }
        let Some(q) = entering else {
            let mut x = vec![0.0; n];
            for (k, &j) in basis.iter().enumerate() {
                x[j] = xb[k].max(0.0);
            }
            let objective = x.iter().zip(cols).map(|(v, c)| v * c.cost).sum();
            return Ok(LpSolution {
                x,
                pi,
                objective,
                basis,
                pivots,
            });
        };

        // u = B⁻¹ a_q
        let mut u = vec![0.0; m];
        for (i, ui) in u.iter_mut().enumerate() {
            *ui = cols[q].rows.iter().map(|&r| binv[i * m + r]).sum();
        }
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if u[i] > PIVOT_TOL {
                let ratio = xb[i].max(0.0) / u[i];
                let better = match leave {
                    None => true,
                    Some((l, r)) => {
                        if ratio < r - 1e-12 {
                            true
                        } else if ratio <= r + 1e-12 {
                            if bland {
                                basis[i] < basis[l]
                            } else {
                                u[i] > u[l]
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, theta)) = leave else {
            return Err(Error::Numerical("LP is unbounded".into()));
        };
        degenerate_run = if theta <= 1e-12 { degenerate_run + 1 } else { 0 };

        for i in 0..m {
            if i != r {
                xb[i] -= theta * u[i];
            }
        }
        xb[r] = theta;
        let pr = u[r];
        for k in 0..m {
            binv[r * m + k] /= pr;
        }
        for i in 0..m {
            if i != r && u[i] != 0.0 {
                let f = u[i];
                for k in 0..m {
                    binv[i * m + k] -= f * binv[r * m + k];
                }
            }
        }
        in_basis[basis[r]] = false;
        in_basis[q] = true;
        basis[r] = q;
        pivots += 1;
        since_refactor += 1;
        if since_refactor >= REFACTOR_EVERY {
            binv = invert(m, &basis, cols)?;
            xb = mat_vec(m, &binv, b);
            since_refactor = 0;
        }
        for v in xb.iter_mut() {
            if *v < 0.0 && *v > -1e-9 {
                *v = 0.0;
            }
        }
        if pivots > max_pivots {
            return Err(Error::Numerical(format!("simplex exceeded {max_pivots} pivots")));
        }
    }
}

fn mat_vec(m: usize, a: &[f64], v: &[f64]) -> Vec<f64> {
    (0..m).map(|i| (0..m).map(|k| a[i * m + k] * v[k]).sum()).collect()
}

fn duals(m: usize, binv: &[f64], basis: &[usize], cols: &[LpColumn]) -> Vec<f64> {
    let mut pi = vec![0.0; m];
    for (i, &j) in basis.iter().enumerate() {
        let c = cols[j].cost;
        if c != 0.0 {
            for k in 0..m {
                pi[k] += c * binv[i * m + k];
            }
        }
    }
    pi
}
