//! The max player: EXP3 over time-varying active sets with implicit-exploration
//! (IX) loss estimates and a self-tuning learning rate.
//!
//! Rewards are `h = 1 - clipped loss`. The state keeps, per group, the adjusted
//! cumulative sum `S_i = sum_s I_{i,s} (h_s - h~_{i,s} - gamma_s sum_{j in A_s} h~_{j,s})`
//! and exponentiates it with the current learning rate on demand.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::constants::PROB_SUM_TOL;
use crate::error::invalid;
use crate::math;
use crate::{Error, Result};

/// Sampling distribution over groups, zero outside the active set.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, group: usize) -> f64 {
        self.probs[group]
    }

    /// Inverse-CDF sample over the groups in index order.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        let mut last = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                cum += p;
                last = i;
                if u < cum {
                    return i;
                }
            }
        }
        last
    }
}

/// `h~ = h / (q + gamma)` for the chosen group, zero otherwise.
pub fn ix_estimate(h_observed: f64, q: f64, gamma: f64, chosen: bool) -> f64 {
    if chosen {
        h_observed / (q + gamma)
    } else {
        0.0
    }
}

/// `eta_q = sqrt(ln(3K/delta) / active_cumsum)` and `gamma = eta_q / 2`.
pub fn schedule_for(groups: usize, delta: f64, active_cumsum: u64) -> (f64, f64) {
    let eta = math::sqrt(math::ln(3.0 * groups as f64 / delta) / active_cumsum as f64);
    (eta, 0.5 * eta)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxPlayerState {
    adjusted_cumsum: Vec<f64>,
    round: u64,
    active_cumsum: u64,
    delta: f64,
    /// Set between `begin_round` and `update`.
    in_round: bool,
}

impl MaxPlayerState {
    pub fn new(groups: usize, delta: f64) -> Result<Self> {
        if groups == 0 {
            return Err(invalid!("the max player needs at least one group"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid!("delta must lie in (0, 1), got {delta}"));
        }
        Ok(Self { adjusted_cumsum: vec![0.0; groups], round: 1, active_cumsum: 0, delta, in_round: false })
    }

    /// State with given cumulative sums, as if `round - 1` rounds had been played
    /// with `active_cumsum` total active-set size (including the current round).
    pub fn from_parts(adjusted_cumsum: Vec<f64>, round: u64, active_cumsum: u64, delta: f64) -> Result<Self> {
        let mut state = Self::new(adjusted_cumsum.len(), delta)?;
        if round == 0 || active_cumsum == 0 {
            return Err(invalid!("round and active_cumsum must be positive"));
        }
        if adjusted_cumsum.iter().any(|s| !s.is_finite()) {
            return Err(invalid!("adjusted cumulative sums must be finite"));
        }
        state.adjusted_cumsum = adjusted_cumsum;
        state.round = round;
        state.active_cumsum = active_cumsum;
        state.in_round = true;
        Ok(state)
    }

    pub fn num_groups(&self) -> usize {
        self.adjusted_cumsum.len()
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn active_cumsum(&self) -> u64 {
        self.active_cumsum
    }

    pub fn adjusted_cumsum(&self) -> &[f64] {
        &self.adjusted_cumsum
    }

    /// Learning rate and exploration for the current round. Only meaningful
    /// once the round's active set has been revealed through `begin_round`.
    pub fn schedule(&self) -> (f64, f64) {
        schedule_for(self.num_groups(), self.delta, self.active_cumsum.max(1))
    }

    /// Reveals this round's active set and returns the distribution to sample from.
    pub fn begin_round(&mut self, active: &[usize]) -> Result<ActionDistribution> {
        if self.in_round {
            return Err(Error::Logic("begin_round called twice without update".into()));
        }
        self.check_active(active)?;
        self.active_cumsum += active.len() as u64;
        self.in_round = true;
        self.action_distribution(active)
    }

    /// `q_i` proportional to `exp(eta_q S_i)` over the active groups.
    pub fn action_distribution(&self, active: &[usize]) -> Result<ActionDistribution> {
        self.check_active(active)?;
        let mut probs = vec![0.0; self.num_groups()];
        if self.round == 1 {
            let p = 1.0 / active.len() as f64;
            active.iter().for_each(|&i| probs[i] = p);
            return Ok(ActionDistribution { probs });
        }
        let (eta, _) = self.schedule();
        let top = active.iter().map(|&i| self.adjusted_cumsum[i]).fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for &i in active {
            let w = math::exp(eta * (self.adjusted_cumsum[i] - top));
            probs[i] = w;
            total += w;
        }
        active.iter().for_each(|&i| probs[i] /= total);
        let sum: f64 = probs.iter().sum();
        if !((sum - 1.0).abs() <= PROB_SUM_TOL * active.len() as f64) {
            return Err(Error::Logic(alloc::format!("action distribution sums to {sum}")));
        }
        Ok(ActionDistribution { probs })
    }

    /// Folds in the reward `h_observed` of the chosen group.
    pub fn update(&mut self, active: &[usize], q: &ActionDistribution, chosen: usize, h_observed: f64) -> Result<()> {
        if !active.contains(&chosen) {
            return Err(Error::Logic(alloc::format!("chosen group {chosen} is not in the active set")));
        }
        if !(0.0..=1.0).contains(&h_observed) {
            return Err(invalid!("observed reward must lie in [0, 1], got {h_observed}"));
        }
        if !self.in_round {
            self.active_cumsum += active.len() as u64;
        }
        let (_, gamma) = self.schedule();
        let h_chosen = ix_estimate(h_observed, q.prob(chosen), gamma, true);
        let shared = h_observed - gamma * h_chosen;
        for &i in active {
            self.adjusted_cumsum[i] += shared;
        }
        self.adjusted_cumsum[chosen] -= h_chosen;
        self.round += 1;
        self.in_round = false;
        Ok(())
    }

    fn check_active(&self, active: &[usize]) -> Result<()> {
        if active.is_empty() {
            return Err(invalid!("active set is empty"));
        }
        let k = self.num_groups();
        if let Some(&bad) = active.iter().find(|&&i| i >= k) {
            return Err(invalid!("active group {bad} is out of range for K={k}"));
        }
        if active.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid!("active set must be strictly increasing"));
        }
        Ok(())
    }
}
