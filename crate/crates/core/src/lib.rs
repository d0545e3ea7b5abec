//! Group distributionally robust optimization (GDRO) as a two-player game
//! between a projected-gradient min player and a sleeping-bandit max player.
//!
//! The max player only samples groups from a *dominant set*: the groups whose
//! empirical risk at the current hypothesis clears the remaining groups by a
//! margin. When only a few groups can attain the maximum risk, the game spends
//! almost all of its samples on those groups.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, CSV datasets and
//! the command line live in the companion `gdro` crate.
//!
//! Group indices are zero-based everywhere in this crate.

#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod constants;
pub mod domain;
pub mod dominant_set;
mod error;
mod math;
pub mod mirror_descent;
pub mod oracle;
pub mod sleeping_bandit;
pub mod solvers;

pub use error::{Error, Result};

pub use domain::{DomainSpec, HingeLoss, Hypothesis, LossModel, LowerBoundLoss, LowerBoundParams};
pub use dominant_set::{dominant_set, sample_size_m, CostFunction, DominantSetResult, SolveOptResult, ValidationSet};
pub use mirror_descent::{MinPlayerState, RateMode};
pub use oracle::{EmpiricalGroups, GroupDistributions, GroupOracle, LowerBoundEnv, Sample};
pub use sleeping_bandit::{ActionDistribution, MaxPlayerState};
pub use solvers::{
    ideal_game, optimality_gap, solve, ExactRisk, GapProbe, Horizon, MetricsRow, RunResult, SolverConfig, SolverKind,
};
