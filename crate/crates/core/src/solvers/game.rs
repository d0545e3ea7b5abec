use alloc::vec;
use alloc::vec::Vec;

use super::{GapProbe, Horizon, MetricsRow, RoundRecord, RunResult, SolverConfig, SolverKind};
use crate::constants::{DOMINANT_THRESHOLD_FACTOR, EPISODE_FACTOR};
use crate::domain::{DomainSpec, LossModel};
use crate::dominant_set::{
    dominant_set, est_g, sample_size_m, solve_opt, CostFunction, EstGParams, EstGResult, GridCover, SolveOptResult,
    ValidationSet,
};
use crate::error::invalid;
use crate::math;
use crate::mirror_descent::{MinPlayerState, RateMode};
use crate::oracle::{run_rng, GroupDistributions, GroupOracle};
use crate::sleeping_bandit::MaxPlayerState;
use crate::{Error, Result};

/// `floor(0.1 lambda / (eta G^2))`, the number of fixed-rate steps over which
/// the iterate moves at most `0.1 lambda / G`.
pub fn episode_length(lambda: f64, eta: f64, lipschitz: f64) -> u64 {
    let ratio = EPISODE_FACTOR * lambda / (eta * lipschitz * lipschitz);
    // Guard against ratios like 9.999999999999998 that are integers in exact arithmetic.
    math::floor(ratio * (1.0 + 1e-12)) as u64
}

/// Constants shared by the policies' validation draws.
struct Budget {
    n: usize,
    groups: usize,
    diameter: f64,
    lipschitz: f64,
    delta: f64,
    scale: f64,
}

impl Budget {
    fn new(config: &SolverConfig, dimension: usize, groups: usize) -> Self {
        Self {
            n: dimension,
            groups,
            diameter: config.diameter,
            lipschitz: config.lipschitz,
            delta: config.delta,
            scale: config.validation_scale,
        }
    }

    fn m(&self, delta: f64, lambda: f64) -> Result<u64> {
        sample_size_m(self.n, self.lipschitz, self.diameter, self.groups, delta, lambda, self.scale)
    }
}

/// How a solver chooses each round's active groups.
enum Policy {
    All,
    Known { lambda: f64, validation: ValidationSet },
    SemiAdaptive { lambda: f64, lower: f64, log_k: f64, changes: u32, validation: ValidationSet },
    Episodic { lambda: f64, sigma: u64, m: u64 },
    Cover { lambda: f64, cover: GridCover, sets: Vec<Vec<usize>> },
}

struct Accounting {
    validation_samples: u64,
    validation_draws: u64,
    lambda_changes: Vec<u64>,
}

impl Accounting {
    fn draw<D: GroupDistributions>(&mut self, oracle: &mut GroupOracle<D>, m: u64) -> Result<ValidationSet> {
        let v = ValidationSet::draw(oracle, m)?;
        self.validation_samples += v.total_samples();
        self.validation_draws += 1;
        Ok(v)
    }
}

pub(super) fn run<D, L>(
    config: &SolverConfig,
    domain: &DomainSpec,
    oracle: &mut GroupOracle<D>,
    loss: &L,
    probe: Option<&GapProbe<'_>>,
    injected: Option<ValidationSet>,
) -> Result<RunResult>
where
    D: GroupDistributions,
    L: LossModel + ?Sized,
{
    let k = oracle.num_groups();
    config.validate(k)?;
    if let Some(p) = probe {
        if p.stride == 0 {
            return Err(invalid!("gap evaluation stride must be at least 1"));
        }
    }
    let budget = Budget::new(config, domain.dimension(), k);
    let start_counts = oracle.draw_counts().to_vec();
    let start_total = oracle.total_draws();
    let mut acct = Accounting { validation_samples: 0, validation_draws: 0, lambda_changes: Vec::new() };
    let mut solve_opt_result = None;
    let mut episode = None;

    let (d, g) = (config.diameter, config.lipschitz);
    let log_k_delta = math::ln(k as f64 / config.delta);
    let mut rate = RateMode::TimeVarying { diameter: d, lipschitz: g, eta0: config.eta0 };
    let mut horizon = config.horizon;

    let mut policy = match config.kind {
        SolverKind::SmdBaseline => Policy::All,
        SolverKind::SbGdro { lambda } => {
            let validation = match injected {
                Some(v) => v,
                None => acct.draw(oracle, budget.m(config.delta, lambda)?)?,
            };
            Policy::Known { lambda, validation }
        }
        SolverKind::SemiAdaptive => {
            let c = k as f64 * budget.n as f64 * math::ln(g * d * k as f64 / config.delta) / log_k_delta;
            let log_k = math::ln(k as f64);
            let lower = if k > 1 { config.epsilon * math::sqrt(c / log_k) } else { f64::INFINITY };
            let validation = acct.draw(oracle, budget.m(semi_adaptive_delta(config.delta, 1), 1.0)?)?;
            Policy::SemiAdaptive { lambda: 1.0, lower, log_k, changes: 1, validation }
        }
        SolverKind::DimensionFree { lambda, beta } => {
            let rounds = match config.horizon {
                Horizon::Fixed(t) => t,
                Horizon::SelfBounding { constant, max_rounds } => {
                    let t = constant * (d * d * g * g + beta as f64) * log_k_delta / (config.epsilon * config.epsilon);
                    (math::ceil(t) as u64).clamp(1, max_rounds)
                }
            };
            horizon = Horizon::Fixed(rounds);
            rate = RateMode::fixed_for_horizon(d, g, rounds);
            let RateMode::Fixed { eta } = rate else { unreachable!() };
            let sigma = episode_length(lambda, eta, g);
            if sigma == 0 {
                return Err(Error::Config(alloc::format!(
                    "episode length is zero: 0.1 * lambda = {} is smaller than one step's movement \
                     eta * G^2 = {}; increase lambda or the horizon",
                    EPISODE_FACTOR * lambda,
                    eta * g * g
                )));
            }
            let m = math::ceil(
                config.validation_scale
                    * 24.0
                    * math::ln(4.0 * k as f64 * rounds as f64 / (sigma as f64 * config.delta))
                    / (lambda * lambda),
            )
            .max(1.0) as u64;
            episode = Some(sigma);
            Policy::Episodic { lambda, sigma, m }
        }
        SolverKind::Adaptive => {
            let (policy, result) = adaptive_setup(config, domain, oracle, loss, &budget, &mut acct)?;
            solve_opt_result = Some(result);
            policy
        }
    };

    let mut min = MinPlayerState::init(domain.clone(), rate, g)?;
    let mut max = MaxPlayerState::new(k, config.delta)?;
    let mut rng = run_rng(config.seed);
    let mut grad = vec![0.0; domain.dimension()];
    let mut active: Vec<usize> = (0..k).collect();
    let mut selected = vec![0u64; k];
    let mut active_sum = 0u64;
    let mut timeline = Vec::new();
    let mut trajectory = Vec::new();
    let mut final_gap = None;
    let max_rounds = horizon.max_rounds();

    let mut t = 1u64;
    loop {
        let lambda_t = policy.lambda();
        policy.prepare(t, min.theta(), oracle, loss, &budget, &mut acct, &mut active)?;

        let q = max.begin_round(&active)?;
        let chosen = q.sample(&mut rng);
        let z = oracle.draw(chosen)?;
        let h = 1.0 - loss.reported_loss(min.theta(), z);
        loss.subgradient(min.theta(), z, &mut grad);
        max.update(&active, &q, chosen, h)?;
        selected[chosen] += 1;
        active_sum += active.len() as u64;

        let stop = t >= max_rounds
            || match horizon {
                Horizon::Fixed(_) => false,
                Horizon::SelfBounding { constant, .. } => {
                    let mean_active = active_sum as f64 / t as f64;
                    t as f64
                        >= constant * (d * d * g * g + mean_active) * log_k_delta / (config.epsilon * config.epsilon)
                }
            };

        let gap_due = probe.is_some_and(|p| t.is_multiple_of(p.stride) || stop);
        if t == 1 || t.is_multiple_of(config.metrics_stride) || gap_due || stop {
            let gap = if gap_due { probe.map(|p| p.risk.max_risk(min.running_average()) - p.l_star) } else { None };
            if stop {
                final_gap = gap;
            }
            timeline.push(MetricsRow {
                round: t,
                total_samples: oracle.total_draws() - start_total,
                lambda: lambda_t,
                active_set_size: active.len(),
                chosen_group: chosen,
                gap,
            });
        }

        if config.record_trajectory {
            trajectory.push(RoundRecord {
                theta: min.theta().to_vec(),
                active: active.clone(),
                eta: (!stop).then(|| min.eta()),
            });
        }
        if stop {
            break;
        }
        min.step(&grad)?;
        t += 1;
    }

    let per_group_samples: Vec<u64> =
        oracle.draw_counts().iter().zip(&start_counts).map(|(now, before)| now - before).collect();
    let total_samples = oracle.total_draws() - start_total;
    if total_samples != t + acct.validation_samples {
        return Err(Error::Logic(alloc::format!(
            "sample accounting mismatch: oracle counted {total_samples}, expected {} rounds + {} validation",
            t,
            acct.validation_samples
        )));
    }
    Ok(RunResult {
        solver: config.kind.name(),
        theta_bar: crate::domain::Hypothesis::new(min.running_average().to_vec()),
        rounds: t,
        total_samples,
        per_group_samples,
        per_group_selected: selected,
        validation_samples: acct.validation_samples,
        validation_draws: acct.validation_draws,
        timeline,
        final_lambda: policy.lambda(),
        lambda_changes: acct.lambda_changes,
        avg_active_size: active_sum as f64 / t as f64,
        final_gap,
        episode_length: episode,
        solve_opt: solve_opt_result,
        trajectory,
    })
}

/// Confidence budget of the `c`-th validation set: `3 delta / (pi^2 c^2)`.
/// These sum to at most `delta / 2` over all `c >= 1`.
pub(crate) fn semi_adaptive_delta(delta: f64, c: u32) -> f64 {
    3.0 * delta / (core::f64::consts::PI * core::f64::consts::PI * (c as f64) * (c as f64))
}

impl Policy {
    fn lambda(&self) -> Option<f64> {
        match *self {
            Policy::All => None,
            Policy::Known { lambda, .. }
            | Policy::SemiAdaptive { lambda, .. }
            | Policy::Episodic { lambda, .. }
            | Policy::Cover { lambda, .. } => Some(lambda),
        }
    }

    /// Writes round `t`'s active set into `active`.
    #[allow(clippy::too_many_arguments)]
    fn prepare<D, L>(
        &mut self,
        t: u64,
        theta: &[f64],
        oracle: &mut GroupOracle<D>,
        loss: &L,
        budget: &Budget,
        acct: &mut Accounting,
        active: &mut Vec<usize>,
    ) -> Result<()>
    where
        D: GroupDistributions,
        L: LossModel + ?Sized,
    {
        match self {
            Policy::All => {}
            Policy::Known { lambda, validation } => {
                let tau = DOMINANT_THRESHOLD_FACTOR * *lambda;
                *active = dominant_set(theta, validation, tau, oracle.distributions(), loss)?.members;
            }
            Policy::SemiAdaptive { lambda, lower, log_k, changes, validation } => {
                let tau = DOMINANT_THRESHOLD_FACTOR * *lambda;
                *active = dominant_set(theta, validation, tau, oracle.distributions(), loss)?.members;
                // This round still plays `active`; the new lambda and its
                // validation set take effect from the next round.
                if active.len() as f64 > *log_k && *lambda >= *lower {
                    *changes += 1;
                    *lambda *= 0.5;
                    let m = budget.m(semi_adaptive_delta(budget.delta, *changes), *lambda)?;
                    *validation = acct.draw(oracle, m)?;
                    acct.lambda_changes.push(t + 1);
                }
            }
            Policy::Episodic { lambda, sigma, m } => {
                if (t - 1).is_multiple_of(*sigma) {
                    let validation = acct.draw(oracle, *m)?;
                    *active = dominant_set(theta, &validation, *lambda, oracle.distributions(), loss)?.members;
                }
            }
            Policy::Cover { cover, sets, .. } => {
                active.clone_from(&sets[cover.nearest(theta)]);
            }
        }
        Ok(())
    }
}

/// The margin search of the adaptive solver on its own, without playing.
pub(super) fn margin_search<D, L>(
    config: &SolverConfig,
    domain: &DomainSpec,
    oracle: &mut GroupOracle<D>,
    loss: &L,
) -> Result<SolveOptResult>
where
    D: GroupDistributions,
    L: LossModel + ?Sized,
{
    config.validate(oracle.num_groups())?;
    let budget = Budget::new(config, domain.dimension(), oracle.num_groups());
    let mut acct = Accounting { validation_samples: 0, validation_draws: 0, lambda_changes: Vec::new() };
    adaptive_setup(config, domain, oracle, loss, &budget, &mut acct).map(|(_, result)| result)
}

/// Chooses `lambda` by minimizing the estimated cost, then precomputes the
/// dominant set at every cover center for that `lambda`.
fn adaptive_setup<D, L>(
    config: &SolverConfig,
    domain: &DomainSpec,
    oracle: &mut GroupOracle<D>,
    loss: &L,
    budget: &Budget,
    acct: &mut Accounting,
) -> Result<(Policy, SolveOptResult)>
where
    D: GroupDistributions,
    L: LossModel + ?Sized,
{
    let k = budget.groups as f64;
    let eps = config.epsilon;
    let c = k * budget.n as f64 * math::ln(budget.lipschitz * budget.diameter * k * math::ln(1.0 / eps) / config.delta)
        / math::ln(k / config.delta);
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::Config(alloc::format!("cost constant C = {c} is not positive; check D, G, K and delta")));
    }
    let params = EstGParams {
        delta: config.delta,
        queries: math::ln(2.0 / eps).max(1.0),
        validation_scale: config.validation_scale,
        diameter: budget.diameter,
        lipschitz: budget.lipschitz,
    };
    let mut estimates: Vec<EstGResult> = Vec::new();
    let mut samples = 0u64;
    let result = {
        let g = |lambda: f64| -> Result<usize> {
            if lambda <= eps / 2.0 {
                return Ok(1);
            }
            let before = oracle.total_draws();
            let est = est_g(lambda, domain, oracle, loss, &params)?;
            samples += oracle.total_draws() - before;
            let value = est.value;
            estimates.push(est);
            Ok(value)
        };
        let mut cost = CostFunction::new(c, eps, budget.groups, g)?;
        solve_opt(&mut cost)?
    };
    acct.validation_samples += samples;
    acct.validation_draws += estimates.len() as u64;

    let lambda = result.lambda_hat;
    let policy = match estimates.into_iter().find(|e| e.lambda == lambda) {
        Some(est) => Policy::Cover { lambda, cover: est.cover, sets: est.sets },
        // Below eps / 2 no margin is worth estimating; every group stays active.
        None => Policy::All,
    };
    Ok((policy, result))
}
