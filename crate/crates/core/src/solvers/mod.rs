//! Full solvers: the game between the min player and the sleeping-bandit max
//! player, with different ways of choosing each round's active groups.
//!
//! * `SbGdro`: known margin `lambda`; one validation set drawn up front.
//! * `SemiAdaptive`: starts at `lambda = 1` and halves it whenever the
//!   dominant set is larger than `ln K`, redrawing the validation set.
//! * `DimensionFree`: fixed step size, episodes of `sigma` rounds, fresh
//!   validation set and dominant set at the start of every episode.
//! * `Adaptive`: picks `lambda` by searching the cost `C/lambda^2 + g/eps^2`
//!   with grid-cover estimates of `g`; low dimension only.
//! * `SmdBaseline`: every group is active every round.

mod game;
mod ideal;
mod risk;

use alloc::vec::Vec;

use crate::constants::{DEFAULT_METRICS_STRIDE, DEFAULT_STOPPING_CONSTANT, DEFAULT_VALIDATION_SCALE};
use crate::domain::{DomainSpec, Hypothesis, LossModel};
use crate::dominant_set::{SolveOptResult, ValidationSet};
use crate::error::invalid;
use crate::oracle::{GroupDistributions, GroupOracle};
use crate::Result;

pub use game::episode_length;
pub use ideal::{ideal_game, optimality_gap};
pub use risk::{DistributionRisk, ExactRisk, LowerBoundRisk};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Exactly this many rounds.
    Fixed(u64),
    /// Stop at the first `t >= constant * (D^2 G^2 + mean active size) * ln(K/delta) / eps^2`,
    /// or after `max_rounds`.
    SelfBounding { constant: f64, max_rounds: u64 },
}

impl Horizon {
    pub fn max_rounds(&self) -> u64 {
        match *self {
            Horizon::Fixed(t) => t,
            Horizon::SelfBounding { max_rounds, .. } => max_rounds,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverKind {
    SbGdro { lambda: f64 },
    SemiAdaptive,
    DimensionFree { lambda: f64, beta: usize },
    Adaptive,
    SmdBaseline,
}

impl SolverKind {
    /// Short name used in file names and summaries.
    pub fn name(&self) -> &'static str {
        match self {
            SolverKind::SbGdro { .. } => "sb-gdro",
            SolverKind::SemiAdaptive => "sb-gdro-sa",
            SolverKind::DimensionFree { .. } => "sb-gdro-df",
            SolverKind::Adaptive => "sb-gdro-a",
            SolverKind::SmdBaseline => "smd-gdro",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub kind: SolverKind,
    /// Target optimality gap.
    pub epsilon: f64,
    /// Failure probability.
    pub delta: f64,
    /// Diameter bound `D` of the hypothesis space.
    pub diameter: f64,
    /// Lipschitz bound `G` of the loss.
    pub lipschitz: f64,
    pub horizon: Horizon,
    /// Seed of the solver's own randomness (group sampling).
    pub seed: u64,
    /// Multiplier on every validation sample size.
    pub validation_scale: f64,
    /// Rounds between metrics rows.
    pub metrics_stride: u64,
    /// Multiplier on the min player's time-varying step size.
    pub eta0: f64,
    /// Keep every round's hypothesis, active set and step size.
    pub record_trajectory: bool,
}

impl SolverConfig {
    pub fn new(kind: SolverKind, diameter: f64, lipschitz: f64) -> Self {
        Self {
            kind,
            epsilon: 0.005,
            delta: 0.01,
            diameter,
            lipschitz,
            horizon: Horizon::SelfBounding { constant: DEFAULT_STOPPING_CONSTANT, max_rounds: 1_000_000 },
            seed: 0,
            validation_scale: DEFAULT_VALIDATION_SCALE,
            metrics_stride: DEFAULT_METRICS_STRIDE,
            eta0: 1.0,
            record_trajectory: false,
        }
    }

    pub fn validate(&self, groups: usize) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !positive(self.diameter) || !positive(self.lipschitz) {
            return Err(invalid!("D and G must be positive (D={}, G={})", self.diameter, self.lipschitz));
        }
        if !positive(self.validation_scale) || !positive(self.eta0) {
            return Err(invalid!("validation scale and eta0 must be positive"));
        }
        if self.metrics_stride == 0 {
            return Err(invalid!("metrics stride must be at least 1"));
        }
        match self.horizon {
            Horizon::Fixed(0) | Horizon::SelfBounding { max_rounds: 0, .. } => {
                return Err(invalid!("the horizon must allow at least one round"))
            }
            Horizon::SelfBounding { constant, .. } if !positive(constant) => {
                return Err(invalid!("stopping constant must be positive, got {constant}"))
            }
            _ => {}
        }
        match self.kind {
            SolverKind::SbGdro { lambda } | SolverKind::DimensionFree { lambda, .. }
                if !(lambda > 0.0 && lambda <= 1.0) =>
            {
                Err(invalid!("lambda must lie in (0, 1], got {lambda}"))
            }
            SolverKind::DimensionFree { beta, .. } if !(1..=groups).contains(&beta) => {
                Err(invalid!("beta must lie in [1, K={groups}], got {beta}"))
            }
            _ => Ok(()),
        }
    }
}

/// Exact-risk instrumentation for optimality gaps; consumes no samples.
#[derive(Clone, Copy)]
pub struct GapProbe<'a> {
    pub risk: &'a dyn ExactRisk,
    /// Reference optimum, e.g. from `ideal_game`.
    pub l_star: f64,
    /// Rounds between gap evaluations.
    pub stride: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub round: u64,
    /// Oracle draws so far, validation draws included.
    pub total_samples: u64,
    pub lambda: Option<f64>,
    pub active_set_size: usize,
    pub chosen_group: usize,
    /// Optimality gap of the running average, when evaluated this round.
    pub gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub theta: Vec<f64>,
    pub active: Vec<usize>,
    /// Step size applied after this round, `None` on the last round.
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub solver: &'static str,
    /// Mean of the hypotheses played.
    pub theta_bar: Hypothesis,
    pub rounds: u64,
    pub total_samples: u64,
    pub per_group_samples: Vec<u64>,
    /// How often each group was picked by the max player.
    pub per_group_selected: Vec<u64>,
    pub validation_samples: u64,
    /// Number of validation sets drawn.
    pub validation_draws: u64,
    pub timeline: Vec<MetricsRow>,
    pub final_lambda: Option<f64>,
    /// Rounds from which a new `lambda` was in force.
    pub lambda_changes: Vec<u64>,
    pub avg_active_size: f64,
    pub final_gap: Option<f64>,
    /// Episode length `sigma` of the dimension-free solver.
    pub episode_length: Option<u64>,
    pub solve_opt: Option<SolveOptResult>,
    pub trajectory: Vec<RoundRecord>,
}

/// Runs the solver selected by `config.kind`.
pub fn solve<D, L>(
    config: &SolverConfig,
    domain: &DomainSpec,
    oracle: &mut GroupOracle<D>,
    loss: &L,
    probe: Option<&GapProbe<'_>>,
) -> Result<RunResult>
where
    D: GroupDistributions,
    L: LossModel + ?Sized,
{
    game::run(config, domain, oracle, loss, probe, None)
}

/// Known-`lambda` solver with a caller-supplied validation set instead of a
/// freshly drawn one.
pub fn sb_gdro_with_validation<D, L>(
    config: &SolverConfig,
    validation: ValidationSet,
    domain: &DomainSpec,
    oracle: &mut GroupOracle<D>,
    loss: &L,
    probe: Option<&GapProbe<'_>>,
) -> Result<RunResult>
where
    D: GroupDistributions,
    L: LossModel + ?Sized,
{
    if !matches!(config.kind, SolverKind::SbGdro { .. }) {
        return Err(invalid!("an injected validation set needs the known-lambda solver"));
    }
    if validation.num_groups() != oracle.num_groups() {
        return Err(invalid!(
            "validation set covers {} groups, the oracle has {}",
            validation.num_groups(),
            oracle.num_groups()
        ));
    }
    game::run(config, domain, oracle, loss, probe, Some(validation))
}

/// Runs only the adaptive solver's search for a margin `lambda`: SolveOpt over
/// grid-cover estimates of the dominant-set size. Draws are charged to `oracle`.
pub fn select_margin<D, L>(
    config: &SolverConfig,
    domain: &DomainSpec,
    oracle: &mut GroupOracle<D>,
    loss: &L,
) -> Result<SolveOptResult>
where
    D: GroupDistributions,
    L: LossModel + ?Sized,
{
    game::margin_search(config, domain, oracle, loss)
}
