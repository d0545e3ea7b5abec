//! Hypothesis-space geometry and the loss models used by the solvers.
//!
//! The feasible set is an l2 ball, an axis-aligned box, or their intersection.
//! Projection onto the intersection is exact: the minimizer of
//! `||x - v||^2 / 2 + mu * ||x||^2 / 2` over the box is `clip(v / (1 + mu))`,
//! and `mu` is found by bisection so the ball constraint is tight.

use alloc::vec;
use alloc::vec::Vec;

use crate::constants::{FEASIBILITY_TOL, PROJECTION_MAX_ITERS};
use crate::error::invalid;
use crate::math;
use crate::oracle::Sample;
use crate::Result;

/// Convex feasible set: ball of radius `D` around the origin, a box, or both.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    dimension: usize,
    ball_radius: Option<f64>,
    box_bounds: Option<Vec<(f64, f64)>>,
}

impl DomainSpec {
    pub fn new(dimension: usize, ball_radius: Option<f64>, box_bounds: Option<Vec<(f64, f64)>>) -> Result<Self> {
        if dimension == 0 {
            return Err(invalid!("domain dimension must be positive"));
        }
        if ball_radius.is_none() && box_bounds.is_none() {
            return Err(invalid!("domain needs a ball radius, box bounds, or both"));
        }
        if let Some(r) = ball_radius {
            if !(r.is_finite() && r > 0.0) {
                return Err(invalid!("ball radius must be positive and finite, got {r}"));
            }
        }
        if let Some(bounds) = &box_bounds {
            if bounds.len() != dimension {
                return Err(invalid!("box has {} intervals but the dimension is {dimension}", bounds.len()));
            }
            for (i, &(lo, hi)) in bounds.iter().enumerate() {
                if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                    return Err(invalid!("box interval {i} is not a finite [lo, hi]: [{lo}, {hi}]"));
                }
            }
        }
        let domain = Self { dimension, ball_radius, box_bounds };
        if let Some(r) = ball_radius {
            // Ball and box intersect iff the box point nearest the origin is in the ball.
            let mut nearest = vec![0.0; dimension];
            domain.clip_to_box(&mut nearest);
            if math::norm(&nearest) > r * (1.0 + FEASIBILITY_TOL) {
                return Err(invalid!("ball of radius {r} does not meet the box: feasible set is empty"));
            }
        }
        Ok(domain)
    }

    pub fn ball(dimension: usize, radius: f64) -> Result<Self> {
        Self::new(dimension, Some(radius), None)
    }

    pub fn boxed(bounds: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(bounds.len(), None, Some(bounds))
    }

    pub fn ball_and_box(radius: f64, bounds: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(bounds.len(), Some(radius), Some(bounds))
    }

    /// The interval `[0, 1]`.
    pub fn unit_interval() -> Self {
        Self { dimension: 1, ball_radius: None, box_bounds: Some(vec![(0.0, 1.0)]) }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn ball_radius(&self) -> Option<f64> {
        self.ball_radius
    }

    pub fn box_bounds(&self) -> Option<&[(f64, f64)]> {
        self.box_bounds.as_deref()
    }

    /// Smallest axis-aligned box containing the feasible set.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        let r = self.ball_radius.unwrap_or(f64::INFINITY);
        match &self.box_bounds {
            Some(bounds) => bounds.iter().map(|&(lo, hi)| (lo.max(-r), hi.min(r))).collect(),
            None => vec![(-r, r); self.dimension],
        }
    }

    /// Upper bound on the l2 diameter of the feasible set.
    pub fn diameter(&self) -> f64 {
        let ball = self.ball_radius.map_or(f64::INFINITY, |r| 2.0 * r);
        let boxed = self
            .box_bounds
            .as_ref()
            .map_or(f64::INFINITY, |bounds| math::sqrt(bounds.iter().map(|&(lo, hi)| (hi - lo) * (hi - lo)).sum()));
        ball.min(boxed)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dimension {
            return false;
        }
        if let Some(bounds) = &self.box_bounds {
            let inside = x.iter().zip(bounds).all(|(&v, &(lo, hi))| v >= lo - tol && v <= hi + tol);
            if !inside {
                return false;
            }
        }
        match self.ball_radius {
            Some(r) => math::norm(x) <= r + tol,
            None => true,
        }
    }

    /// Euclidean projection of `v` onto the feasible set.
    pub fn project(&self, v: &[f64]) -> Result<Hypothesis> {
        if v.len() != self.dimension {
            return Err(invalid!("cannot project a {}-vector onto a {}-dimensional domain", v.len(), self.dimension));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(invalid!("cannot project a non-finite vector"));
        }
        let mut coords = v.to_vec();
        self.project_in_place(&mut coords);
        Ok(Hypothesis { coords })
    }

    /// Projects a finite vector of the right length in place.
    pub(crate) fn project_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dimension);
        let Some(r) = self.ball_radius else {
            self.clip_to_box(x);
            return;
        };
        if self.box_bounds.is_none() {
            let nrm = math::norm(x);
            if nrm > r {
                let scale = r / nrm;
                x.iter_mut().for_each(|c| *c *= scale);
            }
            return;
        }

        let v = x.to_vec();
        self.clip_to_box(x);
        if math::norm(x) <= r {
            return;
        }
        // ||clip(s * v)|| is non-decreasing in s; find the largest s in [0, 1]
        // with the clipped point inside the ball.
        let norm_at = |s: f64, out: &mut [f64]| {
            for (o, &c) in out.iter_mut().zip(&v) {
                *o = s * c;
            }
            self.clip_to_box(out);
            math::norm(out)
        };
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut probe = vec![0.0; v.len()];
        for _ in 0..PROJECTION_MAX_ITERS {
            if hi - lo <= f64::EPSILON {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if norm_at(mid, &mut probe) <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        norm_at(lo, x);
    }

    fn clip_to_box(&self, x: &mut [f64]) {
        if let Some(bounds) = &self.box_bounds {
            for (c, &(lo, hi)) in x.iter_mut().zip(bounds) {
                *c = c.clamp(lo, hi);
            }
        }
    }
}

/// A point of the hypothesis space.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    coords: Vec<f64>,
}

impl Hypothesis {
    pub fn new(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn zeros(dimension: usize) -> Self {
        Self { coords: vec![0.0; dimension] }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dimension(&self) -> usize {
        self.coords.len()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

impl From<Vec<f64>> for Hypothesis {
    fn from(coords: Vec<f64>) -> Self {
        Self { coords }
    }
}

/// A convex, `G`-Lipschitz loss `l(theta, z)`.
///
/// Implementations may assume `theta` and `z` have the dimensions the
/// oracle was validated against.
pub trait LossModel {
    fn loss(&self, theta: &[f64], z: &Sample) -> f64;

    /// Writes a subgradient of `loss(., z)` at `theta` into `out`.
    fn subgradient(&self, theta: &[f64], z: &Sample, out: &mut [f64]);

    /// Declared Lipschitz constant `G`.
    fn lipschitz(&self) -> f64;

    /// Loss reported to the max player, clipped to `[0, 1]`.
    fn reported_loss(&self, theta: &[f64], z: &Sample) -> f64 {
        self.loss(theta, z).clamp(0.0, 1.0)
    }
}

impl<L: LossModel + ?Sized> LossModel for &L {
    fn loss(&self, theta: &[f64], z: &Sample) -> f64 {
        (**self).loss(theta, z)
    }
    fn subgradient(&self, theta: &[f64], z: &Sample, out: &mut [f64]) {
        (**self).subgradient(theta, z, out)
    }
    fn lipschitz(&self) -> f64 {
        (**self).lipschitz()
    }
    fn reported_loss(&self, theta: &[f64], z: &Sample) -> f64 {
        (**self).reported_loss(theta, z)
    }
}

/// `max(0, 1 - y <theta, z>)`.
pub fn hinge_loss(theta: &[f64], z: &[f64], y: f64) -> Result<f64> {
    check_hinge_args(theta, z, y)?;
    Ok((1.0 - y * math::dot(theta, z)).max(0.0))
}

/// Subgradient of the hinge loss; the kink at margin exactly 1 maps to zero.
pub fn hinge_subgradient(theta: &[f64], z: &[f64], y: f64) -> Result<Vec<f64>> {
    check_hinge_args(theta, z, y)?;
    let mut out = vec![0.0; z.len()];
    hinge_subgradient_into(theta, z, y, &mut out);
    Ok(out)
}

fn check_hinge_args(theta: &[f64], z: &[f64], y: f64) -> Result<()> {
    if theta.len() != z.len() {
        return Err(invalid!("hypothesis has dimension {} but the features have {}", theta.len(), z.len()));
    }
    if y != 1.0 && y != -1.0 {
        return Err(invalid!("hinge labels must be -1 or +1, got {y}"));
    }
    Ok(())
}

fn hinge_subgradient_into(theta: &[f64], z: &[f64], y: f64, out: &mut [f64]) {
    if 1.0 - y * math::dot(theta, z) > 0.0 {
        for (o, &zi) in out.iter_mut().zip(z) {
            *o = -y * zi;
        }
    } else {
        out.iter_mut().for_each(|o| *o = 0.0);
    }
}

/// Hinge loss of a linear classifier. Samples without a label score as `y = 0`
/// (loss 1, zero gradient).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HingeLoss {
    lipschitz: f64,
}

impl HingeLoss {
    /// `lipschitz` is the largest feature norm; 1 after max-norm normalization.
    pub fn new(lipschitz: f64) -> Self {
        Self { lipschitz }
    }
}

impl Default for HingeLoss {
    fn default() -> Self {
        Self::new(1.0)
    }
}

impl LossModel for HingeLoss {
    fn loss(&self, theta: &[f64], z: &Sample) -> f64 {
        let y = z.label.unwrap_or(0.0);
        (1.0 - y * math::dot(theta, &z.features)).max(0.0)
    }

    fn subgradient(&self, theta: &[f64], z: &Sample, out: &mut [f64]) {
        let y = z.label.unwrap_or(0.0);
        hinge_subgradient_into(theta, &z.features, y, out);
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Parameters of the three-block lower-bound environment on `Theta = [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundParams {
    /// Number of groups `K`.
    pub groups: usize,
    /// Size `beta` of the dominant block.
    pub beta: usize,
    /// Risk gap `lambda` of the constant groups, in unscaled loss units.
    pub lambda: f64,
    /// Slope `Delta` of the dominant groups' risks.
    pub delta_gap: f64,
}

impl LowerBoundParams {
    pub fn new(groups: usize, beta: usize, lambda: f64, delta_gap: f64) -> Result<Self> {
        let params = Self { groups, beta, lambda, delta_gap };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2 <= self.beta && self.beta <= self.groups) {
            return Err(invalid!("need 2 <= beta <= K, got beta={} K={}", self.beta, self.groups));
        }
        if !(self.lambda > 0.0 && self.lambda <= 0.5) {
            return Err(invalid!("lambda must lie in (0, 1/2], got {}", self.lambda));
        }
        if !(self.delta_gap > 0.0 && self.delta_gap < 1.0) {
            return Err(invalid!("Delta must lie in (0, 1), got {}", self.delta_gap));
        }
        Ok(())
    }

    /// Worst-group risk `(1/2) max(Delta theta + 1/2, Delta (1 - theta) + 1/2)`.
    pub fn max_risk(&self, theta: f64) -> f64 {
        0.5 * (self.delta_gap * theta.max(1.0 - theta) + 0.5)
    }
}

/// `(1/2) (Delta (z1 theta + z2 (1 - theta)) + z3)`.
pub fn lb_env_loss(theta: f64, z: [f64; 3], delta_gap: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(invalid!("theta must lie in [0, 1], got {theta}"));
    }
    if z.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(invalid!("sample components must lie in [0, 1], got {z:?}"));
    }
    Ok(lb_loss_unchecked(theta, &z, delta_gap))
}

#[inline]
fn lb_loss_unchecked(theta: f64, z: &[f64], delta_gap: f64) -> f64 {
    0.5 * (delta_gap * (z[0] * theta + z[1] * (1.0 - theta)) + z[2])
}

/// Closed-form risk of group `group` (zero-based) in the lower-bound environment.
pub fn exact_risk_lb_env(theta: f64, group: usize, params: &LowerBoundParams) -> Result<f64> {
    params.validate()?;
    if group >= params.groups {
        return Err(invalid!("group {group} is out of range for K={}", params.groups));
    }
    let dominant_tail = params.beta - 1;
    let risk = if group < dominant_tail {
        0.5 * (params.delta_gap * (1.0 - theta) + 0.5)
    } else if group == dominant_tail {
        0.5 * (params.delta_gap * theta + 0.5)
    } else {
        0.5 * (0.5 - params.lambda)
    };
    Ok(risk)
}

/// Loss of the lower-bound environment, halved so it stays in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundLoss {
    delta_gap: f64,
    lipschitz: f64,
}

impl LowerBoundLoss {
    /// Declares `G = 1`, the convention used for this environment's experiments.
    pub fn new(delta_gap: f64) -> Self {
        Self { delta_gap, lipschitz: 1.0 }
    }

    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    pub fn delta_gap(&self) -> f64 {
        self.delta_gap
    }
}

impl LossModel for LowerBoundLoss {
    fn loss(&self, theta: &[f64], z: &Sample) -> f64 {
        lb_loss_unchecked(theta[0], &z.features, self.delta_gap)
    }

    fn subgradient(&self, _theta: &[f64], z: &Sample, out: &mut [f64]) {
        out[0] = 0.5 * self.delta_gap * (z.features[0] - z.features[1]);
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}
