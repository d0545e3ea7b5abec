//! Environments an experiment can run on, with their ideal-player reference.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use gdro_core::constants::DEFAULT_IDEAL_HORIZON;
use gdro_core::solvers::{select_margin, DistributionRisk, LowerBoundRisk};
use gdro_core::{
    ideal_game, solve, DomainSpec, ExactRisk, GapProbe, GroupDistributions, GroupOracle, HingeLoss, LossModel,
    LowerBoundEnv, LowerBoundParams, RunResult, SolveOptResult, SolverConfig,
};

use crate::config::{CsvSpec, EnvironmentSpec, LowerBoundSpec};
use crate::dataset::{load_csv_dataset, Dataset};
use crate::error::{HarnessError, Result};

/// Default ideal-game length on CSV data, where every round costs a pass
/// over the whole dataset.
pub const DEFAULT_CSV_IDEAL_ROUNDS: u64 = 20_000;

pub enum Environment {
    LowerBound { spec: LowerBoundSpec, env: LowerBoundEnv },
    Csv { spec: CsvSpec, data: Dataset, loss: HingeLoss },
}

/// Reference optimum from the ideal-player game.
#[derive(Debug, Clone, PartialEq)]
pub struct Ideal {
    pub theta: Vec<f64>,
    pub l_star: f64,
    pub rounds: u64,
}

impl Environment {
    pub fn build(spec: &EnvironmentSpec) -> Result<Self> {
        Ok(match spec {
            EnvironmentSpec::Lowerbound(lb) => {
                let params = LowerBoundParams::new(lb.groups, lb.beta, lb.lambda, lb.delta_gap)?;
                Environment::LowerBound { spec: *lb, env: LowerBoundEnv::new(params)? }
            }
            EnvironmentSpec::Csv(csv) => Environment::Csv {
                spec: csv.clone(),
                data: load_csv_dataset(&csv.dataset())?,
                loss: HingeLoss::default(),
            },
        })
    }

    pub fn num_groups(&self) -> usize {
        match self {
            Environment::LowerBound { env, .. } => env.num_groups(),
            Environment::Csv { data, .. } => data.groups.num_groups(),
        }
    }

    /// `[0, 1]` for the lower-bound env; the ball of the configured radius for
    /// linear classifiers.
    pub fn domain(&self) -> Result<DomainSpec> {
        Ok(match self {
            Environment::LowerBound { .. } => DomainSpec::unit_interval(),
            Environment::Csv { spec, data, .. } => DomainSpec::ball(data.groups.feature_dim(), spec.radius)?,
        })
    }

    pub fn diameter(&self) -> f64 {
        match self {
            Environment::LowerBound { .. } => 1.0,
            Environment::Csv { spec, .. } => 2.0 * spec.radius,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            Environment::LowerBound { env, .. } => env.loss().lipschitz(),
            Environment::Csv { loss, .. } => loss.lipschitz(),
        }
    }

    /// One line identifying the environment, used to validate cached results.
    pub fn describe(&self) -> String {
        match self {
            Environment::LowerBound { spec, .. } => format!(
                "lowerbound groups={} beta={} lambda={} delta_gap={}",
                spec.groups, spec.beta, spec.lambda, spec.delta_gap
            ),
            Environment::Csv { spec, data, .. } => format!(
                "csv path={} groups={} features={} label={} radius={} rows={}",
                spec.path.display(),
                spec.group_columns.join("+"),
                spec.feature_columns.join("+"),
                spec.label_column,
                spec.radius,
                (0..data.groups.num_groups()).map(|g| data.groups.num_atoms(g)).sum::<usize>()
            ),
        }
    }

    /// `(key, rows)` per group. Lower-bound groups report their support size.
    pub fn group_manifest(&self) -> Vec<(String, usize)> {
        match self {
            Environment::LowerBound { env, .. } => {
                let beta = env.params().beta;
                (0..env.num_groups())
                    .map(|g| {
                        let block = if g + 1 < beta {
                            "top"
                        } else if g + 1 == beta {
                            "odd"
                        } else {
                            "constant"
                        };
                        (format!("{block}-{g}"), env.num_atoms(g))
                    })
                    .collect()
            }
            Environment::Csv { data, .. } => {
                data.keys().iter().enumerate().map(|(g, k)| (k.clone(), data.groups.num_atoms(g))).collect()
            }
        }
    }

    pub fn default_ideal_rounds(&self) -> u64 {
        match self {
            Environment::LowerBound { .. } => DEFAULT_IDEAL_HORIZON,
            Environment::Csv { .. } => DEFAULT_CSV_IDEAL_ROUNDS,
        }
    }

    pub fn ideal(&self, rounds: u64) -> Result<Ideal> {
        let domain = self.domain()?;
        let (theta, l_star) =
            self.with_risk(|risk| ideal_game(risk, &domain, self.diameter(), self.lipschitz(), rounds))?;
        Ok(Ideal { theta: theta.into_coords(), l_star, rounds })
    }

    /// Reads the ideal optimum from `cache` if it was computed for this
    /// environment and horizon, otherwise computes it and writes the cache.
    pub fn ideal_cached(&self, rounds: u64, cache: &Path) -> Result<Ideal> {
        if let Some(hit) = self.read_ideal_cache(rounds, cache) {
            return Ok(hit);
        }
        let ideal = self.ideal(rounds)?;
        let theta: Vec<String> = ideal.theta.iter().map(f64::to_string).collect();
        let text = format!(
            "environment={}\nrounds={}\ntheta={}\nl_star={}\n",
            self.describe(),
            rounds,
            theta.join(" "),
            ideal.l_star
        );
        fs::write(cache, text).map_err(|e| HarnessError::io(cache, e))?;
        Ok(ideal)
    }

    fn read_ideal_cache(&self, rounds: u64, cache: &Path) -> Option<Ideal> {
        let text = fs::read_to_string(cache).ok()?;
        let kv: BTreeMap<&str, &str> = text.lines().filter_map(|l| l.split_once('=')).collect();
        if kv.get("environment") != Some(&self.describe().as_str()) || kv.get("rounds")?.parse::<u64>().ok()? != rounds
        {
            return None;
        }
        let theta = kv.get("theta")?.split(' ').map(str::parse).collect::<Result<Vec<f64>, _>>().ok()?;
        let l_star = kv.get("l_star")?.parse().ok()?;
        Some(Ideal { theta, l_star, rounds })
    }

    /// Runs one solver on a fresh oracle seeded with `config.seed`. When
    /// `l_star` is given, gaps are evaluated every `gap_stride` rounds.
    pub fn run(&self, config: &SolverConfig, l_star: Option<f64>, gap_stride: u64) -> Result<RunResult> {
        let domain = self.domain()?;
        self.with_risk(|risk| {
            let probe = l_star.map(|l_star| GapProbe { risk, l_star, stride: gap_stride });
            match self {
                Environment::LowerBound { env, .. } => {
                    let mut oracle = GroupOracle::new(env.clone(), config.seed)?;
                    solve(config, &domain, &mut oracle, &env.loss(), probe.as_ref())
                }
                Environment::Csv { data, loss, .. } => {
                    let mut oracle = GroupOracle::new(data.groups.clone(), config.seed)?;
                    solve(config, &domain, &mut oracle, loss, probe.as_ref())
                }
            }
        })
        .map_err(Into::into)
    }

    /// The adaptive solver's margin search alone.
    pub fn select_margin(&self, config: &SolverConfig) -> Result<SolveOptResult> {
        let domain = self.domain()?;
        Ok(match self {
            Environment::LowerBound { env, .. } => {
                let mut oracle = GroupOracle::new(env.clone(), config.seed)?;
                select_margin(config, &domain, &mut oracle, &env.loss())?
            }
            Environment::Csv { data, loss, .. } => {
                let mut oracle = GroupOracle::new(data.groups.clone(), config.seed)?;
                select_margin(config, &domain, &mut oracle, loss)?
            }
        })
    }

    fn with_risk<T>(&self, f: impl FnOnce(&dyn ExactRisk) -> gdro_core::Result<T>) -> gdro_core::Result<T> {
        match self {
            Environment::LowerBound { env, .. } => f(&LowerBoundRisk { params: *env.params() }),
            Environment::Csv { data, loss, .. } => f(&DistributionRisk::new(&data.groups, loss)),
        }
    }
}
