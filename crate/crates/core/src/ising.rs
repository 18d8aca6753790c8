//! Quadratic-penalty mapping of Set Partitioning to a weighted Ising spin glass.
//!
//! With `x_r = (1 + s_r)/2` the penalty objective
//! `μ1·c·x + μ2·Σ_f (Σ_r a_fr x_r − b_f)²` becomes
//! `Σ_r h_r s_r + Σ_{r<r'} J_rr' s_r s_r' + offset`. The constant offset is kept,
//! so the diagonal energy of a bitstring equals the penalty objective exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ilp::{SetPartitioningInstance, ENUMERATION_LIMIT};

/// Diagonal 2-local Hamiltonian `Σ h_i s_i + Σ_{i<j} J_ij s_i s_j + offset`, `s_i = 2x_i − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel {
    h: Vec<f64>,
    couplings: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

#[derive(Serialize, Deserialize)]
struct IsingFile {
    n: usize,
    h: Vec<f64>,
    #[serde(rename = "J")]
    j: Vec<(usize, usize, f64)>,
    offset: f64,
}

impl IsingModel {
    /// Builds a model. Couplings on the same unordered pair are summed; zero couplings
    /// are dropped.
    pub fn new(h: Vec<f64>, couplings: impl IntoIterator<Item = (usize, usize, f64)>, offset: f64) -> Result<Self> {
        let n = h.len();
        let mut map = BTreeMap::new();
        for (i, j, v) in couplings {
            if i == j {
                return Err(Error::input(format!("self-coupling on spin {i}")));
            }
            if i >= n || j >= n {
                return Err(Error::input(format!("coupling ({i},{j}) out of range for n = {n}")));
            }
            *map.entry((i.min(j), i.max(j))).or_insert(0.0) += v;
        }
        map.retain(|_, v| *v != 0.0);
        Ok(IsingModel {
            h,
            couplings: map,
            offset,
        })
    }

    pub fn n(&self) -> usize {
        self.h.len()
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Coupling on the unordered pair, zero if absent.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Edges `(i, j, J_ij)` with `i < j`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.couplings.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn n_edges(&self) -> usize {
        self.couplings.len()
    }

    /// Neighbour lists with coupling values.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n()];
        for (i, j, v) in self.edges() {
            adj[i].push((j, v));
            adj[j].push((i, v));
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency().iter().map(Vec::len).collect()
    }

    /// Energy of the basis state `index` (bit r = x_r), offset included.
    pub fn energy(&self, index: u64) -> f64 {
        let spin = |i: usize| if (index >> i) & 1 == 1 { 1.0 } else { -1.0 };
        let linear: f64 = self.h.iter().enumerate().map(|(i, &h)| h * spin(i)).sum();
        let quadratic: f64 = self.edges().map(|(i, j, v)| v * spin(i) * spin(j)).sum();
        linear + quadratic + self.offset
    }

    /// Energies of all `2^n` basis states.
    pub fn energies(&self) -> Vec<f64> {
        (0..1u64 << self.n())
            .into_par_iter()
            .map(|i| self.energy(i))
            .collect()
    }

    /// Multiplies every coefficient (offset included) by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        IsingModel {
            h: self.h.iter().map(|v| v * k).collect(),
            couplings: self
                .couplings
                .iter()
                .map(|(&e, &v)| (e, v * k))
                .filter(|(_, v)| *v != 0.0)
                .collect(),
            offset: self.offset * k,
        }
    }

    pub fn to_json_string(&self) -> Result<String> {
        let file = IsingFile {
            n: self.n(),
            h: self.h.clone(),
            j: self.edges().collect(),
            offset: self.offset,
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: IsingFile = serde_json::from_str(s)?;
        if file.h.len() != file.n {
            return Err(Error::Dimension {
                expected: file.n,
                actual: file.h.len(),
            });
        }
        Self::new(file.h, file.j, file.offset)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut s = self.to_json_string()?;
        s.push('\n');
        std::fs::write(path, s)?;
        Ok(())
    }
}

/// Balance factor between the objective and the constraint penalty.
///
/// Serialized as its display string, `"inf"` for the infinite factor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum WeightFactor {
    Finite(f64),
    /// Constraints only: the Exact Cover Hamiltonian.
    Infinite,
}

impl fmt::Display for WeightFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFactor::Finite(v) => write!(f, "{v}"),
            WeightFactor::Infinite => write!(f, "inf"),
        }
    }
}

impl From<WeightFactor> for String {
    fn from(f: WeightFactor) -> String {
        f.to_string()
    }
}

impl TryFrom<String> for WeightFactor {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for WeightFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "∞") {
            return Ok(WeightFactor::Infinite);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::input(format!("cannot parse weight factor {s:?}")))?;
        if !(v.is_finite() && v > 0.0) {
            if v == f64::INFINITY {
                return Ok(WeightFactor::Infinite);
            }
            return Err(Error::input(format!("weight factor must be > 0, got {s}")));
        }
        Ok(WeightFactor::Finite(v))
    }
}

/// Integer weights `(μ1, μ2)` on the objective and the penalty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Weights {
    pub mu1: i64,
    pub mu2: i64,
}

impl Weights {
    pub const EXACT_COVER: Weights = Weights { mu1: 0, mu2: 1 };
}

/// Maps an instance to its Ising model with weights `(μ1, μ2)`.
pub fn map_to_ising(inst: &SetPartitioningInstance, w: Weights) -> Result<IsingModel> {
    if w.mu1 < 0 || w.mu2 < 1 {
        return Err(Error::input(format!(
            "weights must satisfy mu1 >= 0, mu2 >= 1; got ({}, {})",
            w.mu1, w.mu2
        )));
    }
    let n = inst.n_routes();
    let (mu1, mu2) = (w.mu1 as f64, w.mu2 as f64);

    let mut routes_of_flight: Vec<Vec<usize>> = vec![Vec::new(); inst.n_flights()];
    for (r, route) in inst.routes().iter().enumerate() {
        for &f in &route.flights {
            routes_of_flight[f].push(r);
        }
    }

    // per flight f with k_f covering routes and d_f = k_f/2 − b_f:
    // (Σ s/2 + d_f)² = k_f/4 + ½Σ_{r<r'} s_r s_r' + d_f Σ s_r + d_f²
    let mut h: Vec<f64> = inst.routes().iter().map(|r| mu1 * r.cost as f64 / 2.0).collect();
    let mut offset = mu1 * inst.costs().iter().map(|&c| c as f64).sum::<f64>() / 2.0;
    let mut couplings = Vec::new();
    for (f, routes) in routes_of_flight.iter().enumerate() {
        let k = routes.len() as f64;
        let d = k / 2.0 - inst.rhs()[f] as f64;
        offset += mu2 * (k / 4.0 + d * d);
        for (a, &r) in routes.iter().enumerate() {
            h[r] += mu2 * d;
            for &r2 in &routes[a + 1..] {
                couplings.push((r, r2, mu2 * 0.5));
            }
        }
    }
    debug_assert_eq!(h.len(), n);
    IsingModel::new(h, couplings, offset)
}

/// Largest eigenvalue of the objective part, `Σ_r |c_r| / 2`.
pub fn objective_lambda_max(inst: &SetPartitioningInstance) -> f64 {
    inst.costs().iter().map(|c| c.unsigned_abs() as f64).sum::<f64>() / 2.0
}

/// Largest penalty `Σ_f (Σ_r a_fr x_r − b_f)²` over all bitstrings.
pub fn exact_cover_lambda_max(inst: &SetPartitioningInstance) -> Result<f64> {
    let n = inst.n_routes();
    if n > ENUMERATION_LIMIT {
        return Err(Error::Size {
            what: "enumeration",
            size: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let model = map_to_ising(inst, Weights::EXACT_COVER)?;
    Ok((0..1u64 << n)
        .into_par_iter()
        .map(|i| model.energy(i))
        .reduce(|| f64::NEG_INFINITY, f64::max))
}

/// Resolves a factor `f` to integer weights.
///
/// `f = ∞` gives `(0, 1)`; otherwise `μ1 = 1` and
/// `μ2 = round_half_even(f · λ_obj / λ_ec)` clamped to at least 1.
pub fn resolve_weights(inst: &SetPartitioningInstance, f: WeightFactor) -> Result<Weights> {
    let f = match f {
        WeightFactor::Infinite => return Ok(Weights::EXACT_COVER),
        WeightFactor::Finite(v) if v.is_finite() && v > 0.0 => v,
        WeightFactor::Finite(v) => {
            return Err(Error::input(format!("weight factor must be > 0, got {v}")))
        }
    };
    let lambda_ec = exact_cover_lambda_max(inst)?;
    if lambda_ec <= 0.0 {
        return Err(Error::Degenerate(
            "maximum Exact Cover penalty is zero".into(),
        ));
    }
    let ratio = f * objective_lambda_max(inst) / lambda_ec;
    let mu2 = (ratio.round_ties_even() as i64).max(1);
    Ok(Weights { mu1: 1, mu2 })
}

/// Smallest nonzero gap above the ground energy, divided by the largest energy.
pub fn min_gap_ratio(model: &IsingModel) -> Result<f64> {
    if model.n() > ENUMERATION_LIMIT {
        return Err(Error::Size {
            what: "enumeration",
            size: model.n(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let energies = model.energies();
    let ground = energies.iter().copied().fold(f64::INFINITY, f64::min);
    let top = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let eps = 1e-9 * top.abs().max(ground.abs()).max(1.0);
    let next = energies
        .iter()
        .copied()
        .filter(|&e| e > ground + eps)
        .fold(f64::INFINITY, f64::min);
    if !next.is_finite() {
        return Err(Error::Degenerate("all energies are equal".into()));
    }
    Ok((next - ground) / top)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::{Assignment, Route};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64, n_routes: usize, n_flights: usize) -> SetPartitioningInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let routes = (0..n_routes)
            .map(|_| {
                let k = rng.gen_range(1..=3);
                Route::new((0..k).map(|_| rng.gen_range(0..n_flights)).collect(), rng.gen_range(1..30))
            })
            .collect();
        SetPartitioningInstance::new(n_flights, routes, None).unwrap()
    }

    /// μ1·c·x + μ2·penalty(x) straight from the ILP.
    fn penalty_objective(inst: &SetPartitioningInstance, w: Weights, index: u64) -> f64 {
        let x = Assignment::from_index(index, inst.n_routes());
        (w.mu1 * inst.cost(&x).unwrap() + w.mu2 * inst.penalty(&x).unwrap()) as f64
    }

    #[test]
    fn single_variable() {
        let inst = SetPartitioningInstance::from_columns(1, &[(&[0], 3)]).unwrap();
        let m = map_to_ising(&inst, Weights::EXACT_COVER).unwrap();
        assert_eq!(m.h(), &[-0.5]);
        assert_eq!(m.n_edges(), 0);
        assert_eq!(m.offset(), 0.5);
        assert_eq!(m.energy(1), 0.0);
        assert_eq!(m.energy(0), 1.0);
    }

    #[test]
    fn duplicate_columns() {
        let inst = SetPartitioningInstance::from_columns(1, &[(&[0], 1), (&[0], 1)]).unwrap();
        let m = map_to_ising(&inst, Weights::EXACT_COVER).unwrap();
        assert_eq!(m.h(), &[0.0, 0.0]);
        assert_eq!(m.coupling(0, 1), 0.5);
        assert_eq!(m.offset(), 0.5);
        assert_eq!(m.energies(), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn energy_identity_random() {
        let inst = random_instance(4, 8, 5);
        let w = Weights { mu1: 1, mu2: 7 };
        let m = map_to_ising(&inst, w).unwrap();
        for i in 0..256 {
            assert_eq!(m.energy(i), penalty_objective(&inst, w, i));
        }
    }

    #[test]
    fn energy_identity_general_rhs() {
        let routes = vec![Route::new(vec![0, 1], 2), Route::new(vec![1], 1), Route::new(vec![0], 4)];
        let inst = SetPartitioningInstance::new(2, routes, Some(vec![1, 2])).unwrap();
        let w = Weights { mu1: 2, mu2: 3 };
        let m = map_to_ising(&inst, w).unwrap();
        for i in 0..8 {
            assert_eq!(m.energy(i), penalty_objective(&inst, w, i));
        }
    }

    #[test]
    fn graph_is_overlap_graph() {
        let inst = random_instance(8, 10, 6);
        let m = map_to_ising(&inst, Weights { mu1: 1, mu2: 2 }).unwrap();
        let degrees = m.degrees();
        for r in 0..inst.n_routes() {
            let overlaps = (0..inst.n_routes())
                .filter(|&q| q != r && inst.route(q).overlaps(inst.route(r)))
                .count();
            assert_eq!(degrees[r], overlaps);
        }
        for (i, j, v) in m.edges() {
            assert_eq!(v, 2.0 * 0.5 * inst.route(i).shared(inst.route(j)) as f64);
        }
    }

    #[test]
    fn infinite_factor_is_exact_cover() {
        let inst = random_instance(1, 6, 4);
        let w = resolve_weights(&inst, WeightFactor::Infinite).unwrap();
        assert_eq!(w, Weights { mu1: 0, mu2: 1 });
        let m = map_to_ising(&inst, w).unwrap();
        let ec = map_to_ising(&inst, Weights::EXACT_COVER).unwrap();
        assert_eq!(m, ec);
    }

    #[test]
    fn objective_lambda() {
        let inst = SetPartitioningInstance::from_columns(1, &[(&[0], 2), (&[0], 4)]).unwrap();
        assert_eq!(objective_lambda_max(&inst), 3.0);
    }

    #[test]
    fn resolve_matches_independent_spectra() {
        let inst = crate::instance_gen::generate(&crate::instance_gen::GenerateConfig {
            n_routes: 6,
            target_solutions: 2,
            n_flights: 6,
            seed: 3,
        })
        .unwrap();
        // independent spectra: objective Σ c_r s_r / 2 and raw penalty, enumerated
        let n = inst.n_routes();
        let mut obj_max = f64::NEG_INFINITY;
        let mut pen_max = 0i64;
        for i in 0..1u64 << n {
            let x = Assignment::from_index(i, n);
            let obj: f64 = inst
                .costs()
                .iter()
                .enumerate()
                .map(|(r, &c)| c as f64 / 2.0 * if x.0[r] { 1.0 } else { -1.0 })
                .sum();
            obj_max = obj_max.max(obj);
            pen_max = pen_max.max(inst.penalty(&x).unwrap());
        }
        let expected = ((10.0 * obj_max / pen_max as f64).round_ties_even() as i64).max(1);
        let w = resolve_weights(&inst, WeightFactor::Finite(10.0)).unwrap();
        assert_eq!(w, Weights { mu1: 1, mu2: expected });
    }

    #[test]
    fn resolve_rejects_bad_factor() {
        let inst = random_instance(1, 4, 3);
        assert!(resolve_weights(&inst, WeightFactor::Finite(0.0)).is_err());
        assert!(resolve_weights(&inst, WeightFactor::Finite(-1.0)).is_err());
        assert!("0".parse::<WeightFactor>().is_err());
        assert_eq!("inf".parse::<WeightFactor>().unwrap(), WeightFactor::Infinite);
        assert_eq!("2.5".parse::<WeightFactor>().unwrap(), WeightFactor::Finite(2.5));
    }

    #[test]
    fn resolve_rejects_degenerate() {
        // no routes and b = 0: the only bitstring has zero penalty
        let inst = SetPartitioningInstance::new(1, vec![], Some(vec![0])).unwrap();
        assert!(matches!(
            resolve_weights(&inst, WeightFactor::Finite(1.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn gap_ratio_small_models() {
        let one = IsingModel::new(vec![-0.5], [], 0.5).unwrap();
        assert_eq!(min_gap_ratio(&one).unwrap(), 1.0);
        let two = IsingModel::new(vec![0.0, 0.0], [(0, 1, 0.5)], 0.5).unwrap();
        assert_eq!(min_gap_ratio(&two).unwrap(), 1.0);
        let flat = IsingModel::new(vec![0.0], [], 2.0).unwrap();
        assert!(min_gap_ratio(&flat).is_err());
    }

    #[test]
    fn json_round_trip() {
        let inst = random_instance(2, 5, 4);
        let m = map_to_ising(&inst, Weights { mu1: 1, mu2: 3 }).unwrap();
        let back = IsingModel::from_json_str(&m.to_json_string().unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
