//! Ideal QAOA statevector simulation for diagonal Ising cost Hamiltonians.
//!
//! The state for angles `(γ, β)` of depth `p` is
//! `e^{-iβ_p H_M} e^{-iγ_p H_f} ⋯ e^{-iβ_1 H_M} e^{-iγ_1 H_f} |+⟩` with
//! `H_M = Σ_i σ^x_i`. Basis index `i` encodes the bitstring with bit `r` equal to
//! `x_r` (route 0 least significant), the same convention as [`IsingModel::energy`].

mod analytic;

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ilp::FeasibleSet;
use crate::ising::IsingModel;

pub use analytic::expectation_p1_analytic;

/// Largest qubit count the simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Variational angles `γ_k ∈ [0, 2π]`, `β_k ∈ [0, π]`, `k = 1..p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleSchedule {
    gamma: Vec<f64>,
    beta: Vec<f64>,
}

impl AngleSchedule {
    pub fn new(gamma: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() || gamma.len() != beta.len() {
            return Err(Error::input(format!(
                "angle schedule needs equal nonzero lengths, got {} and {}",
                gamma.len(),
                beta.len()
            )));
        }
        if let Some(g) = gamma.iter().find(|g| !(0.0..=TAU).contains(*g)) {
            return Err(Error::input(format!("gamma {g} outside [0, 2π]")));
        }
        if let Some(b) = beta.iter().find(|b| !(0.0..=PI).contains(*b)) {
            return Err(Error::input(format!("beta {b} outside [0, π]")));
        }
        Ok(AngleSchedule { gamma, beta })
    }

    /// All-zero angles of depth `p`.
    pub fn zeros(p: usize) -> Self {
        AngleSchedule {
            gamma: vec![0.0; p.max(1)],
            beta: vec![0.0; p.max(1)],
        }
    }

    /// Builds from the flat layout `[γ_1..γ_p, β_1..β_p]`, clamping into the box.
    pub fn from_flat(params: &[f64]) -> Result<Self> {
        if params.is_empty() || params.len() % 2 != 0 {
            return Err(Error::input("flat angle vector must have even nonzero length"));
        }
        let p = params.len() / 2;
        let gamma = params[..p].iter().map(|g| g.clamp(0.0, TAU)).collect();
        let beta = params[p..].iter().map(|b| b.clamp(0.0, PI)).collect();
        Ok(AngleSchedule { gamma, beta })
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.gamma.iter().chain(&self.beta).copied().collect()
    }

    /// Box bounds matching [`to_flat`](Self::to_flat).
    pub fn bounds(p: usize) -> Vec<(f64, f64)> {
        let mut b = vec![(0.0, TAU); p];
        b.extend(std::iter::repeat_n((0.0, PI), p));
        b
    }

    pub fn depth(&self) -> usize {
        self.gamma.len()
    }

    pub fn gamma(&self) -> &[f64] {
        &self.gamma
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }
}

/// `2^n` complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The uniform superposition `|+⟩^{⊗n}`.
    pub fn uniform(n: usize) -> Self {
        let a = Complex64::new((1u64 << n) as f64, 0.0).sqrt().inv();
        StateVector {
            n,
            amplitudes: vec![a; 1 << n],
        }
    }

    /// The computational basis state `|index⟩`.
    pub fn basis(n: usize, index: u64) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[index as usize] = Complex64::new(1.0, 0.0);
        StateVector { n, amplitudes }
    }

    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::input(format!("amplitude count {len} is not a power of two")));
        }
        Ok(StateVector {
            n: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn probability(&self, index: u64) -> f64 {
        self.amplitudes[index as usize].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn apply_phase(&mut self, energies: &[f64], gamma: f64) {
        for (a, &e) in self.amplitudes.iter_mut().zip(energies) {
            *a *= Complex64::from_polar(1.0, -gamma * e);
        }
    }

    /// `e^{-iβσ^x}` on every qubit.
    fn apply_mixer(&mut self, beta: f64) {
        let (c, s) = (beta.cos(), beta.sin());
        let ms = Complex64::new(0.0, -s);
        for q in 0..self.n {
            let stride = 1usize << q;
            for block in self.amplitudes.chunks_exact_mut(stride << 1) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c + x1 * ms;
                    *a1 = x0 * ms + x1 * c;
                }
            }
        }
    }
}

/// Simulator with the diagonal energy table of one model precomputed.
#[derive(Clone, Debug)]
pub struct Simulator {
    n: usize,
    energies: Vec<f64>,
}

impl Simulator {
    pub fn new(model: &IsingModel) -> Result<Self> {
        if model.n() > MAX_QUBITS {
            return Err(Error::Size {
                what: "qubit count",
                size: model.n(),
                limit: MAX_QUBITS,
            });
        }
        Ok(Simulator {
            n: model.n(),
            energies: model.energies(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn evolve(&self, angles: &AngleSchedule) -> StateVector {
        let mut state = StateVector::uniform(self.n);
        for (&g, &b) in angles.gamma().iter().zip(angles.beta()) {
            state.apply_phase(&self.energies, g);
            state.apply_mixer(b);
        }
        state
    }

    pub fn expectation(&self, state: &StateVector) -> f64 {
        state
            .amplitudes
            .iter()
            .zip(&self.energies)
            .map(|(a, e)| a.norm_sqr() * e)
            .sum()
    }

    /// `⟨γ,β|H|γ,β⟩` for the given angles.
    pub fn energy_at(&self, angles: &AngleSchedule) -> f64 {
        self.expectation(&self.evolve(angles))
    }
}

/// Evolves `|+⟩` under the QAOA circuit of `angles`.
pub fn evolve(model: &IsingModel, angles: &AngleSchedule) -> Result<StateVector> {
    Ok(Simulator::new(model)?.evolve(angles))
}

/// `Σ_x |amp(x)|² E(x)` with the offset included.
pub fn expectation(state: &StateVector, model: &IsingModel) -> Result<f64> {
    if state.n() != model.n() {
        return Err(Error::Dimension {
            expected: model.n(),
            actual: state.n(),
        });
    }
    Ok(state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(i, a)| a.norm_sqr() * model.energy(i as u64))
        .sum())
}

/// Which solutions count as a success.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuccessMode {
    /// Any feasible solution.
    ExactCover,
    /// The unique optimum only.
    SetPartitioning,
}

pub fn success_probability(state: &StateVector, feas: &FeasibleSet, mode: SuccessMode) -> Result<f64> {
    if let Some(x) = feas.solutions.first() {
        if x.len() != state.n() {
            return Err(Error::Dimension {
                expected: state.n(),
                actual: x.len(),
            });
        }
    }
    match mode {
        SuccessMode::ExactCover => Ok(feas
            .solutions
            .iter()
            .map(|x| state.probability(x.to_index()))
            .sum()),
        SuccessMode::SetPartitioning => {
            let opt = feas
                .optimum()
                .ok_or_else(|| Error::input("no feasible solution: optimum undefined"))?;
            Ok(state.probability(opt.to_index()))
        }
    }
}

/// Draws `shots` computational-basis measurements. Keys are basis indices.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<BTreeMap<u64, u64>> {
    if shots == 0 {
        return Err(Error::input("shots must be at least 1"));
    }
    let mut cdf = Vec::with_capacity(state.amplitudes.len());
    let mut acc = 0.0;
    for a in &state.amplitudes {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hist = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.gen::<f64>() * acc;
        // first index with cdf > u; its probability is necessarily positive
        let i = cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
        *hist.entry(i as u64).or_insert(0) += 1;
    }
    Ok(hist)
}
