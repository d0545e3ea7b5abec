use super::ExactRisk;
use crate::domain::{DomainSpec, Hypothesis};
use crate::error::invalid;
use crate::mirror_descent::{MinPlayerState, RateMode};
use crate::Result;

/// Deterministic game against exact risks: each round the max player picks the
/// riskiest group (lowest index on ties) and the min player steps on that
/// group's exact gradient. Returns the averaged hypothesis and its worst risk.
pub fn ideal_game(
    risk: &dyn ExactRisk,
    domain: &DomainSpec,
    diameter: f64,
    lipschitz: f64,
    rounds: u64,
) -> Result<(Hypothesis, f64)> {
    if rounds == 0 {
        return Err(invalid!("the ideal game needs at least one round"));
    }
    if risk.num_groups() == 0 {
        return Err(invalid!("the ideal game needs at least one group"));
    }
    let rate = RateMode::time_varying(diameter, lipschitz);
    let mut min = MinPlayerState::init(domain.clone(), rate, lipschitz)?;
    let mut grad = alloc::vec![0.0; domain.dimension()];
    for t in 1..=rounds {
        let theta = min.theta();
        let mut worst = 0;
        let mut worst_risk = f64::NEG_INFINITY;
        for g in 0..risk.num_groups() {
            let r = risk.risk(theta, g);
            if r > worst_risk {
                worst = g;
                worst_risk = r;
            }
        }
        if t == rounds {
            break;
        }
        risk.gradient(theta, worst, &mut grad);
        min.step(&grad)?;
    }
    let theta_bar = min.running_average().to_vec();
    let l_star = risk.max_risk(&theta_bar);
    Ok((Hypothesis::new(theta_bar), l_star))
}

/// `max_i R_i(theta) - l_star`, unclipped.
pub fn optimality_gap(theta: &[f64], risk: &dyn ExactRisk, l_star: f64) -> f64 {
    risk.max_risk(theta) - l_star
}
