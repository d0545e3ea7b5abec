use crate::domain::{LossModel, LowerBoundParams};
use crate::oracle::GroupDistributions;

/// Exact per-group risks `R_i(theta)` and their subgradients.
///
/// Used for instrumentation (optimality gaps) and for the ideal-player game;
/// never charged to a sampling oracle.
pub trait ExactRisk {
    fn num_groups(&self) -> usize;

    fn risk(&self, theta: &[f64], group: usize) -> f64;

    fn gradient(&self, theta: &[f64], group: usize, out: &mut [f64]);

    /// `max_i R_i(theta)`.
    fn max_risk(&self, theta: &[f64]) -> f64 {
        (0..self.num_groups()).map(|g| self.risk(theta, g)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Closed-form risks of the lower-bound environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundRisk {
    pub params: LowerBoundParams,
}

impl ExactRisk for LowerBoundRisk {
    fn num_groups(&self) -> usize {
        self.params.groups
    }

    fn risk(&self, theta: &[f64], group: usize) -> f64 {
        let p = &self.params;
        if group + 1 < p.beta {
            0.5 * (p.delta_gap * (1.0 - theta[0]) + 0.5)
        } else if group + 1 == p.beta {
            0.5 * (p.delta_gap * theta[0] + 0.5)
        } else {
            0.5 * (0.5 - p.lambda)
        }
    }

    fn gradient(&self, _theta: &[f64], group: usize, out: &mut [f64]) {
        let p = &self.params;
        out[0] = if group + 1 < p.beta {
            -0.5 * p.delta_gap
        } else if group + 1 == p.beta {
            0.5 * p.delta_gap
        } else {
            0.0
        };
    }
}

/// Risks obtained by summing the loss over a finite-support distribution.
pub struct DistributionRisk<'a, D: ?Sized, L: ?Sized> {
    pub dist: &'a D,
    pub loss: &'a L,
}

impl<'a, D, L> DistributionRisk<'a, D, L>
where
    D: GroupDistributions + ?Sized,
    L: LossModel + ?Sized,
{
    pub fn new(dist: &'a D, loss: &'a L) -> Self {
        Self { dist, loss }
    }
}

impl<D, L> ExactRisk for DistributionRisk<'_, D, L>
where
    D: GroupDistributions + ?Sized,
    L: LossModel + ?Sized,
{
    fn num_groups(&self) -> usize {
        self.dist.num_groups()
    }

    fn risk(&self, theta: &[f64], group: usize) -> f64 {
        (0..self.dist.num_atoms(group))
            .map(|a| self.dist.atom_probability(group, a) * self.loss.loss(theta, self.dist.atom(group, a)))
            .sum()
    }

    fn gradient(&self, theta: &[f64], group: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        let mut g = alloc::vec![0.0; out.len()];
        for a in 0..self.dist.num_atoms(group) {
            let p = self.dist.atom_probability(group, a);
            self.loss.subgradient(theta, self.dist.atom(group, a), &mut g);
            for (o, gi) in out.iter_mut().zip(&g) {
                *o += p * gi;
            }
        }
    }
}
