//! The min player: projected stochastic (sub)gradient descent, i.e. online
//! mirror descent with the Euclidean mirror map.

use alloc::vec::Vec;

use crate::constants::GRADIENT_NORM_ABORT_FACTOR;
use crate::domain::{DomainSpec, Hypothesis};
use crate::error::invalid;
use crate::math;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateMode {
    /// `eta_t = eta0 * D / (G sqrt(t))`.
    TimeVarying { diameter: f64, lipschitz: f64, eta0: f64 },
    /// A constant step size, `2D / (G sqrt(T))` in the dimension-free solver.
    Fixed { eta: f64 },
}

impl RateMode {
    pub fn time_varying(diameter: f64, lipschitz: f64) -> Self {
        RateMode::TimeVarying { diameter, lipschitz, eta0: 1.0 }
    }

    pub fn fixed_for_horizon(diameter: f64, lipschitz: f64, horizon: u64) -> Self {
        RateMode::Fixed { eta: 2.0 * diameter / (lipschitz * math::sqrt(horizon as f64)) }
    }

    /// Step size used at round `t >= 1`.
    pub fn eta(&self, t: u64) -> f64 {
        match *self {
            RateMode::TimeVarying { diameter, lipschitz, eta0 } => eta0 * diameter / (lipschitz * math::sqrt(t as f64)),
            RateMode::Fixed { eta } => eta,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            RateMode::TimeVarying { diameter, lipschitz, eta0 } => {
                diameter > 0.0 && lipschitz > 0.0 && eta0 > 0.0 && diameter.is_finite()
            }
            RateMode::Fixed { eta } => eta > 0.0 && eta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid!("step-size parameters must be positive and finite: {self:?}"))
        }
    }
}

/// Maximum movement `sigma' * eta * G` of `sigma'` fixed-rate steps.
pub fn stability_bound(eta: f64, lipschitz: f64, steps: u64) -> f64 {
    steps as f64 * eta * lipschitz
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinPlayerState {
    domain: DomainSpec,
    theta: Vec<f64>,
    average: Vec<f64>,
    round: u64,
    rate: RateMode,
    lipschitz: f64,
}

impl MinPlayerState {
    /// Starts at the minimum-norm feasible point.
    pub fn init(domain: DomainSpec, rate: RateMode, lipschitz: f64) -> Result<Self> {
        rate.validate()?;
        if !(lipschitz > 0.0 && lipschitz.is_finite()) {
            return Err(invalid!("Lipschitz constant must be positive, got {lipschitz}"));
        }
        let theta = domain.project(&alloc::vec![0.0; domain.dimension()])?.into_coords();
        Ok(Self { average: theta.clone(), theta, domain, round: 1, rate, lipschitz })
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Mean of `theta_1, ..., theta_round`.
    pub fn running_average(&self) -> &[f64] {
        &self.average
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn rate(&self) -> RateMode {
        self.rate
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    /// Step size of the current round.
    pub fn eta(&self) -> f64 {
        self.rate.eta(self.round)
    }

    pub fn hypothesis(&self) -> Hypothesis {
        Hypothesis::new(self.theta.clone())
    }

    /// `theta <- project(theta - eta_t * gradient)`. Returns the step size used.
    pub fn step(&mut self, gradient: &[f64]) -> Result<f64> {
        if gradient.len() != self.theta.len() {
            return Err(invalid!("gradient has dimension {}, expected {}", gradient.len(), self.theta.len()));
        }
        let gnorm = math::norm(gradient);
        if !(gnorm <= GRADIENT_NORM_ABORT_FACTOR * self.lipschitz) {
            return Err(Error::Logic(alloc::format!(
                "stochastic gradient norm {gnorm} exceeds {GRADIENT_NORM_ABORT_FACTOR} * G = {}; \
                 the loss's Lipschitz constant is misdeclared",
                GRADIENT_NORM_ABORT_FACTOR * self.lipschitz
            )));
        }
        let eta = self.eta();
        for (x, g) in self.theta.iter_mut().zip(gradient) {
            *x -= eta * g;
        }
        self.domain.project_in_place(&mut self.theta);
        self.round += 1;
        let w = 1.0 / self.round as f64;
        for (a, x) in self.average.iter_mut().zip(&self.theta) {
            *a += w * (x - *a);
        }
        Ok(eta)
    }
}
