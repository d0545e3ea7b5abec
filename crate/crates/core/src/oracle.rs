//! Sampling oracles over `K` group distributions with exact draw accounting.
//!
//! Every distribution here has finitely many atoms, which lets validation
//! sets be stored as atom counts and lets exact risks be computed by summation.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{exact_risk_lb_env, LowerBoundLoss, LowerBoundParams};
use crate::error::invalid;
use crate::Result;

/// One draw from a group distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Feature vector, or the triple `(z1, z2, z3)` of the lower-bound environment.
    pub features: Vec<f64>,
    /// `-1` or `+1` for labelled datasets.
    pub label: Option<f64>,
    /// Zero-based group index.
    pub group: usize,
}

/// A family of `K` finite-support distributions.
pub trait GroupDistributions {
    fn num_groups(&self) -> usize;

    /// Length of every sample's feature vector.
    fn feature_dim(&self) -> usize;

    fn num_atoms(&self, group: usize) -> usize;

    fn atom(&self, group: usize, index: usize) -> &Sample;

    fn atom_probability(&self, group: usize, index: usize) -> f64;

    /// Index of a random atom of `group`, drawn with the group's own stream.
    fn draw_atom(&self, group: usize, rng: &mut ChaCha8Rng) -> usize;
}

impl<T: GroupDistributions + ?Sized> GroupDistributions for Box<T> {
    fn num_groups(&self) -> usize {
        (**self).num_groups()
    }
    fn feature_dim(&self) -> usize {
        (**self).feature_dim()
    }
    fn num_atoms(&self, group: usize) -> usize {
        (**self).num_atoms(group)
    }
    fn atom(&self, group: usize, index: usize) -> &Sample {
        (**self).atom(group, index)
    }
    fn atom_probability(&self, group: usize, index: usize) -> f64 {
        (**self).atom_probability(group, index)
    }
    fn draw_atom(&self, group: usize, rng: &mut ChaCha8Rng) -> usize {
        (**self).draw_atom(group, rng)
    }
}

/// Stream id of the solver's own RNG; group streams use their index.
const RUN_STREAM: u64 = u64::MAX;

/// RNG a solver uses for its own randomness (sampling groups), disjoint from
/// every group stream of an oracle built with the same seed.
pub fn run_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(RUN_STREAM);
    rng
}

/// Sampling access to `K` distributions. Each group has its own RNG stream
/// derived from `(seed, group)`, so the order in which groups are queried
/// does not change what any one group returns.
#[derive(Debug, Clone)]
pub struct GroupOracle<D> {
    dist: D,
    rngs: Vec<ChaCha8Rng>,
    draw_counts: Vec<u64>,
    seed: u64,
}

impl<D: GroupDistributions> GroupOracle<D> {
    pub fn new(dist: D, seed: u64) -> Result<Self> {
        let k = dist.num_groups();
        if k == 0 {
            return Err(invalid!("an oracle needs at least one group"));
        }
        let rngs = (0..k)
            .map(|g| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(g as u64);
                rng
            })
            .collect();
        Ok(Self { dist, rngs, draw_counts: vec![0; k], seed })
    }

    pub fn num_groups(&self) -> usize {
        self.draw_counts.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn distributions(&self) -> &D {
        &self.dist
    }

    pub fn draw_counts(&self) -> &[u64] {
        &self.draw_counts
    }

    pub fn total_draws(&self) -> u64 {
        self.draw_counts.iter().sum()
    }

    /// Draws one sample from `group`.
    pub fn draw(&mut self, group: usize) -> Result<&Sample> {
        let atom = self.draw_index(group)?;
        Ok(self.dist.atom(group, atom))
    }

    /// Draws one sample from `group` and returns its atom index.
    pub fn draw_index(&mut self, group: usize) -> Result<usize> {
        self.check_group(group)?;
        self.draw_counts[group] += 1;
        Ok(self.dist.draw_atom(group, &mut self.rngs[group]))
    }

    /// Draws `m` samples from `group`, returned as `(atom, count)` pairs in
    /// atom order. Consumes the stream exactly like `m` calls to `draw`.
    pub fn draw_atoms(&mut self, group: usize, m: u64) -> Result<Vec<(usize, u64)>> {
        self.check_group(group)?;
        let mut counts = vec![0u64; self.dist.num_atoms(group)];
        let rng = &mut self.rngs[group];
        for _ in 0..m {
            counts[self.dist.draw_atom(group, rng)] += 1;
        }
        self.draw_counts[group] += m;
        Ok(counts.into_iter().enumerate().filter(|&(_, c)| c > 0).collect())
    }

    fn check_group(&self, group: usize) -> Result<()> {
        if group >= self.draw_counts.len() {
            return Err(invalid!("group {group} is out of range for K={}", self.draw_counts.len()));
        }
        Ok(())
    }
}

/// The three-block construction on `Theta = [0, 1]`: groups `0..beta-1` see
/// `(0, 1, Bern(1/2))`, group `beta-1` sees `(1, 0, Bern(1/2))`, and the
/// remaining groups see the constant `(0, 0, 1/2 - lambda)`.
#[derive(Debug, Clone)]
pub struct LowerBoundEnv {
    params: LowerBoundParams,
    atoms: Vec<Vec<Sample>>,
}

impl LowerBoundEnv {
    pub fn new(params: LowerBoundParams) -> Result<Self> {
        params.validate()?;
        let atoms = (0..params.groups)
            .map(|g| {
                let sample = |z: [f64; 3]| Sample { features: z.to_vec(), label: None, group: g };
                if g + 1 < params.beta {
                    vec![sample([0.0, 1.0, 0.0]), sample([0.0, 1.0, 1.0])]
                } else if g + 1 == params.beta {
                    vec![sample([1.0, 0.0, 0.0]), sample([1.0, 0.0, 1.0])]
                } else {
                    vec![sample([0.0, 0.0, 0.5 - params.lambda])]
                }
            })
            .collect();
        Ok(Self { params, atoms })
    }

    pub fn params(&self) -> &LowerBoundParams {
        &self.params
    }

    /// The matching loss, declared `G = 1`.
    pub fn loss(&self) -> LowerBoundLoss {
        LowerBoundLoss::new(self.params.delta_gap)
    }

    pub fn exact_risk(&self, theta: f64, group: usize) -> Result<f64> {
        exact_risk_lb_env(theta, group, &self.params)
    }
}

impl GroupDistributions for LowerBoundEnv {
    fn num_groups(&self) -> usize {
        self.params.groups
    }

    fn feature_dim(&self) -> usize {
        3
    }

    fn num_atoms(&self, group: usize) -> usize {
        self.atoms[group].len()
    }

    fn atom(&self, group: usize, index: usize) -> &Sample {
        &self.atoms[group][index]
    }

    fn atom_probability(&self, group: usize, _index: usize) -> f64 {
        1.0 / self.atoms[group].len() as f64
    }

    fn draw_atom(&self, group: usize, rng: &mut ChaCha8Rng) -> usize {
        if self.atoms[group].len() == 1 {
            0
        } else {
            usize::from(rng.random_bool(0.5))
        }
    }
}

/// Builds a seeded oracle over the lower-bound environment.
pub fn build_lowerbound_env(
    groups: usize,
    beta: usize,
    lambda: f64,
    delta_gap: f64,
    seed: u64,
) -> Result<GroupOracle<LowerBoundEnv>> {
    let params = LowerBoundParams::new(groups, beta, lambda, delta_gap)?;
    GroupOracle::new(LowerBoundEnv::new(params)?, seed)
}

/// Empirical distributions: each group is uniform over its rows.
#[derive(Debug, Clone)]
pub struct EmpiricalGroups {
    keys: Vec<String>,
    rows: Vec<Vec<Sample>>,
    feature_dim: usize,
}

impl EmpiricalGroups {
    /// `rows[i]` holds group `i`'s samples; their `group` fields are overwritten.
    pub fn new(keys: Vec<String>, mut rows: Vec<Vec<Sample>>) -> Result<Self> {
        if keys.len() != rows.len() {
            return Err(invalid!("{} group keys for {} groups", keys.len(), rows.len()));
        }
        if rows.is_empty() {
            return Err(invalid!("an empirical oracle needs at least one group"));
        }
        let feature_dim = rows.iter().flatten().next().map(|s| s.features.len()).unwrap_or(0);
        for (g, group_rows) in rows.iter_mut().enumerate() {
            if group_rows.is_empty() {
                return Err(invalid!("group {:?} has no rows", keys[g]));
            }
            for row in group_rows.iter_mut() {
                if row.features.len() != feature_dim {
                    return Err(invalid!(
                        "group {:?} has a row with {} features, expected {feature_dim}",
                        keys[g],
                        row.features.len()
                    ));
                }
                row.group = g;
            }
        }
        Ok(Self { keys, rows, feature_dim })
    }

    pub fn keys(&self) -> &[String] {
        &self.keys
    }

    pub fn rows(&self, group: usize) -> &[Sample] {
        &self.rows[group]
    }
}

impl GroupDistributions for EmpiricalGroups {
    fn num_groups(&self) -> usize {
        self.rows.len()
    }

    fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    fn num_atoms(&self, group: usize) -> usize {
        self.rows[group].len()
    }

    fn atom(&self, group: usize, index: usize) -> &Sample {
        &self.rows[group][index]
    }

    fn atom_probability(&self, group: usize, _index: usize) -> f64 {
        1.0 / self.rows[group].len() as f64
    }

    fn draw_atom(&self, group: usize, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(0..self.rows[group].len())
    }
}
