//! Hybrid QAOA / Branch-and-Price toolkit for Set Partitioning and Exact Cover.
//!
//! The crate maps Set Partitioning instances to Ising Hamiltonians, simulates and
//! optimizes ideal QAOA circuits on them, and plugs the resulting integer solutions
//! into a Branch-and-Price solver as a primal heuristic.
//!
//! Module map:
//!
//! - [`ilp`]: instances, feasibility, brute-force oracles and the GF(2) count bound.
//! - [`ising`]: penalty mapping to Ising models and weight selection.
//! - [`qaoa`]: statevector simulation, the closed-form `p = 1` expectation, metrics, sampling.
//! - [`angles`]: global search at depth one and the interpolation ladder.
//! - [`bnp`]: simplex master, label-setting pricing, column generation, branch-and-price.
//! - [`instance_gen`]: synthetic instances with a controlled number of feasible covers.
//! - [`cli`]: the commands behind the `qbranch` binary.

pub mod angles;
pub mod bnp;
pub mod cli;
pub mod error;
pub mod ilp;
pub mod instance_gen;
pub mod ising;
pub mod qaoa;

pub use error::{Error, Result};
pub use ilp::{Assignment, FeasibleSet, Route, SetPartitioningInstance};
pub use ising::{IsingModel, WeightFactor, Weights};
pub use qaoa::{AngleSchedule, StateVector};
