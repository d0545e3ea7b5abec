use alloc::vec;
use alloc::vec::Vec;

use super::{dominant_set, sample_size_m, ValidationSet};
use crate::constants::{COVER_RADIUS_FACTOR, DOMINANT_THRESHOLD_FACTOR, MAX_COVER_CENTERS, MAX_COVER_DIMENSION};
use crate::domain::{DomainSpec, LossModel};
use crate::error::invalid;
use crate::math;
use crate::oracle::{GroupDistributions, GroupOracle};
use crate::{Error, Result};

/// A finite set of feasible points such that every feasible point lies
/// within `radius` of one of them.
///
/// Built from an axis-aligned lattice over the domain's bounding box whose
/// cells have circumradius `radius`; cell centers are projected onto the
/// domain, and cells that cannot contain a feasible point are dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct GridCover {
    centers: Vec<Vec<f64>>,
    radius: f64,
    spacing: f64,
}

impl GridCover {
    pub fn build(domain: &DomainSpec, radius: f64) -> Result<Self> {
        let n = domain.dimension();
        if n > MAX_COVER_DIMENSION {
            return Err(Error::UnsupportedDimension { dimension: n, max: MAX_COVER_DIMENSION });
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid!("cover radius must be positive, got {radius}"));
        }
        let spacing = 2.0 * radius / math::sqrt(n as f64);
        let bounds = domain.bounding_box();
        let cells: Vec<usize> =
            bounds.iter().map(|&(lo, hi)| (math::ceil((hi - lo) / spacing) as usize).max(1)).collect();
        let total = cells.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c));
        match total {
            Some(t) if t <= MAX_COVER_CENTERS => {}
            _ => {
                return Err(Error::Config(alloc::format!(
                    "a cover of radius {radius} needs more than {MAX_COVER_CENTERS} centers"
                )))
            }
        }

        let mut centers = Vec::new();
        let mut index = vec![0usize; n];
        let mut point = vec![0.0; n];
        'lattice: loop {
            for d in 0..n {
                point[d] = bounds[d].0 + (index[d] as f64 + 0.5) * spacing;
            }
            let mut projected = point.clone();
            domain.project_in_place(&mut projected);
            if math::distance(&point, &projected) <= radius {
                centers.push(projected);
            }
            for d in 0..n {
                index[d] += 1;
                if index[d] < cells[d] {
                    continue 'lattice;
                }
                index[d] = 0;
            }
            break;
        }
        centers.sort_by(|a, b| {
            a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(core::cmp::Ordering::Equal)
        });
        centers.dedup();
        Ok(Self { centers, radius, spacing })
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Index of the center closest to `theta`.
    pub fn nearest(&self, theta: &[f64]) -> usize {
        if theta.len() == 1 {
            // Centers are sorted, so a one-dimensional lookup is a binary search.
            let x = theta[0];
            let upper = self.centers.partition_point(|c| c[0] < x);
            return match upper {
                0 => 0,
                u if u == self.centers.len() => u - 1,
                u if x - self.centers[u - 1][0] <= self.centers[u][0] - x => u - 1,
                u => u,
            };
        }
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, c) in self.centers.iter().enumerate() {
            let d = math::distance(c, theta);
            if d < best_dist {
                best = i;
                best_dist = d;
            }
        }
        best
    }
}

/// Budget and constants for one dominant-set size estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstGParams {
    /// Overall confidence, split evenly over `queries` estimates.
    pub delta: f64,
    pub queries: f64,
    pub validation_scale: f64,
    pub diameter: f64,
    pub lipschitz: f64,
}

/// Output of `est_g`, including the cover and the dominant set at every
/// center so a solver can reuse them.
#[derive(Debug, Clone, PartialEq)]
pub struct EstGResult {
    pub lambda: f64,
    /// Largest dominant set over the cover, in `[1, K]`.
    pub value: usize,
    pub cover: GridCover,
    pub sets: Vec<Vec<usize>>,
    pub m: u64,
}

/// Estimates the size of the largest `lambda`-dominant set over the domain.
pub fn est_g<D, L>(
    lambda: f64,
    domain: &DomainSpec,
    oracle: &mut GroupOracle<D>,
    loss: &L,
    params: &EstGParams,
) -> Result<EstGResult>
where
    D: GroupDistributions,
    L: LossModel + ?Sized,
{
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(invalid!("lambda must lie in (0, 1], got {lambda}"));
    }
    if !(params.queries >= 1.0) {
        return Err(invalid!("the number of estimates must be at least 1"));
    }
    let cover = GridCover::build(domain, COVER_RADIUS_FACTOR * lambda / params.lipschitz)?;
    let m = sample_size_m(
        domain.dimension(),
        params.lipschitz,
        params.diameter,
        oracle.num_groups(),
        params.delta / params.queries,
        lambda,
        params.validation_scale,
    )?;
    let validation = ValidationSet::draw(oracle, m)?;
    let tau = DOMINANT_THRESHOLD_FACTOR * lambda;
    let sets = cover
        .centers()
        .iter()
        .map(|c| dominant_set(c, &validation, tau, oracle.distributions(), loss).map(|r| r.members))
        .collect::<Result<Vec<_>>>()?;
    let value = sets.iter().map(Vec::len).max().unwrap_or(oracle.num_groups());
    Ok(EstGResult { lambda, value, cover, sets, m })
}
