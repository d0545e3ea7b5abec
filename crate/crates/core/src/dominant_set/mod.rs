//! Dominant sets: groups whose empirical risk at a hypothesis clears every
//! other group by a margin, plus the sample-size formula, the grid-cover
//! estimator of the dominant-set size and the search for a good margin.

mod cover;
mod solve_opt;

use alloc::vec::Vec;

use crate::domain::LossModel;
use crate::error::invalid;
use crate::math;
use crate::oracle::{GroupDistributions, GroupOracle};
use crate::Result;

pub use cover::{est_g, EstGParams, EstGResult, GridCover};
pub use solve_opt::{cost, solve_opt, CostFunction, SolveOptResult, SolveOptRow};

/// `ceil(scale * 384 n ln(741 G D K / delta) / (0.01 lambda^2))`, at least 1.
pub fn sample_size_m(
    n: usize,
    lipschitz: f64,
    diameter: f64,
    groups: usize,
    delta: f64,
    lambda: f64,
    scale: f64,
) -> Result<u64> {
    let positive = |x: f64| x > 0.0 && x.is_finite();
    if n == 0 || groups == 0 || !positive(lipschitz) || !positive(diameter) || !positive(scale) {
        return Err(invalid!(
            "sample size needs positive n, G, D, K and scale (n={n}, G={lipschitz}, D={diameter}, K={groups}, scale={scale})"
        ));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid!("delta must lie in (0, 1), got {delta}"));
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(invalid!("lambda must lie in (0, 1], got {lambda}"));
    }
    let log_term = math::ln(741.0 * lipschitz * diameter * groups as f64 / delta).max(0.0);
    let m = scale * 384.0 * n as f64 * log_term / (0.01 * lambda * lambda);
    Ok((math::ceil(m) as u64).max(1))
}

/// `m` draws per group, stored as `(atom, count)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationSet {
    per_group: Vec<Vec<(usize, u64)>>,
    m: u64,
}

impl ValidationSet {
    /// Draws `m` samples from every group; the draws are charged to the oracle.
    pub fn draw<D: GroupDistributions>(oracle: &mut GroupOracle<D>, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(invalid!("validation sets need m >= 1"));
        }
        let per_group = (0..oracle.num_groups()).map(|g| oracle.draw_atoms(g, m)).collect::<Result<_>>()?;
        Ok(Self { per_group, m })
    }

    /// A validation set given directly as atom counts, each group summing to `m`.
    pub fn from_counts(per_group: Vec<Vec<(usize, u64)>>) -> Result<Self> {
        let m = per_group.first().map(|g| g.iter().map(|&(_, c)| c).sum()).unwrap_or(0);
        if m == 0 {
            return Err(invalid!("validation sets need at least one group and m >= 1"));
        }
        for (g, counts) in per_group.iter().enumerate() {
            let total: u64 = counts.iter().map(|&(_, c)| c).sum();
            if total != m {
                return Err(invalid!("group {g} holds {total} samples, expected {m}"));
            }
        }
        Ok(Self { per_group, m })
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn num_groups(&self) -> usize {
        self.per_group.len()
    }

    pub fn group(&self, g: usize) -> &[(usize, u64)] {
        &self.per_group[g]
    }

    /// Total number of draws the set represents.
    pub fn total_samples(&self) -> u64 {
        self.m * self.per_group.len() as u64
    }

    /// Mean clipped loss of each group's samples at `theta`.
    pub fn empirical_risks<D, L>(&self, theta: &[f64], dist: &D, loss: &L) -> Vec<f64>
    where
        D: GroupDistributions + ?Sized,
        L: LossModel + ?Sized,
    {
        let inv_m = 1.0 / self.m as f64;
        self.per_group
            .iter()
            .enumerate()
            .map(|(g, counts)| {
                let total: f64 =
                    counts.iter().map(|&(atom, c)| c as f64 * loss.reported_loss(theta, dist.atom(g, atom))).sum();
                total * inv_m
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominantSetResult {
    /// Member groups in ascending index order.
    pub members: Vec<usize>,
    pub threshold: f64,
    /// `false` means no gap of size `threshold` was found and `members` is `[K]`.
    pub split_found: bool,
}

/// Scans groups by decreasing risk (ties by ascending index) and returns the
/// prefix ending at the first group that beats the next one by `tau`.
pub fn dominant_set_from_risks(risks: &[f64], tau: f64) -> Result<DominantSetResult> {
    if !(tau > 0.0) {
        return Err(invalid!("dominant-set threshold must be positive, got {tau}"));
    }
    if risks.is_empty() {
        return Err(invalid!("dominant sets need at least one group"));
    }
    let mut order: Vec<usize> = (0..risks.len()).collect();
    order.sort_by(|&a, &b| risks[b].total_cmp(&risks[a]));
    let split = order.windows(2).position(|w| risks[w[0]] >= risks[w[1]] + tau);
    let (mut members, split_found) = match split {
        Some(pos) => (order[..=pos].to_vec(), true),
        None => (order, false),
    };
    members.sort_unstable();
    Ok(DominantSetResult { members, threshold: tau, split_found })
}

/// Dominant set at `theta` computed from the validation set's empirical risks.
pub fn dominant_set<D, L>(
    theta: &[f64],
    validation: &ValidationSet,
    tau: f64,
    dist: &D,
    loss: &L,
) -> Result<DominantSetResult>
where
    D: GroupDistributions + ?Sized,
    L: LossModel + ?Sized,
{
    dominant_set_from_risks(&validation.empirical_risks(theta, dist, loss), tau)
}
