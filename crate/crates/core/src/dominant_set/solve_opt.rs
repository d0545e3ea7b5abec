use alloc::vec::Vec;

use crate::constants::SOLVE_OPT_RATIO;
use crate::error::invalid;
use crate::math;
use crate::{Error, Result};

/// `f(lambda) = C / lambda^2 + g(lambda) / eps^2` with a memoized `g`.
pub struct CostFunction<G> {
    c: f64,
    epsilon: f64,
    max_g: usize,
    g: G,
    evaluations: Vec<(f64, usize)>,
}

impl<G> CostFunction<G>
where
    G: FnMut(f64) -> Result<usize>,
{
    /// `g` must return values in `[1, max_g]`.
    pub fn new(c: f64, epsilon: f64, max_g: usize, g: G) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(invalid!("cost constant C must be positive, got {c}"));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid!("epsilon must lie in (0, 1), got {epsilon}"));
        }
        if max_g == 0 {
            return Err(invalid!("g must be allowed at least the value 1"));
        }
        Ok(Self { c, epsilon, max_g, g, evaluations: Vec::new() })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Distinct evaluations of `g` so far, in query order.
    pub fn evaluations(&self) -> &[(f64, usize)] {
        &self.evaluations
    }

    pub fn g(&mut self, lambda: f64) -> Result<usize> {
        if let Some(&(_, v)) = self.evaluations.iter().find(|&&(l, _)| l == lambda) {
            return Ok(v);
        }
        let v = (self.g)(lambda)?;
        if !(1..=self.max_g).contains(&v) {
            return Err(Error::Contract(alloc::format!("g({lambda}) = {v} lies outside [1, {}]", self.max_g)));
        }
        self.evaluations.push((lambda, v));
        Ok(v)
    }

    pub fn f(&mut self, lambda: f64) -> Result<f64> {
        let g = self.g(lambda)?;
        Ok(cost(self.c, self.epsilon, lambda, g))
    }
}

/// `C / lambda^2 + g / eps^2`.
pub fn cost(c: f64, epsilon: f64, lambda: f64, g: usize) -> f64 {
    c / (lambda * lambda) + g as f64 / (epsilon * epsilon)
}

/// One iteration of the search, after the comparison at `lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptRow {
    pub lambda: f64,
    pub g: usize,
    pub f: f64,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptResult {
    pub lambda_hat: f64,
    pub trace: Vec<SolveOptRow>,
    /// Distinct `(lambda, g(lambda))` evaluations.
    pub queries: Vec<(f64, usize)>,
    /// Whether `g` was non-increasing along the descending query sequence.
    pub monotone: bool,
}

/// Walks `lambda = 5^-k` downward, keeping the best value `U` seen and a lower
/// bound `L` on the optimum; stops once `lambda < L` and returns `U`.
pub fn solve_opt<G>(cost_fn: &mut CostFunction<G>) -> Result<SolveOptResult>
where
    G: FnMut(f64) -> Result<usize>,
{
    let c = cost_fn.c;
    let inv_eps2 = 1.0 / (cost_fn.epsilon * cost_fn.epsilon);
    let g1 = cost_fn.g(1.0)?;
    let mut upper = 1.0;
    let mut f_upper = cost_fn.f(1.0)?;
    let mut lower = math::sqrt(c / (c + (g1 as f64 - 1.0) * inv_eps2));
    let mut trace = Vec::new();
    let mut k = 0i32;
    loop {
        let lambda = 1.0 / libm::pow(1.0 / SOLVE_OPT_RATIO, k as f64);
        if lambda < lower {
            break;
        }
        let g = cost_fn.g(lambda)?;
        let f = cost_fn.f(lambda)?;
        if f < f_upper {
            upper = lambda;
            f_upper = f;
            lower = math::sqrt(c / (c / (lambda * lambda) + (g as f64 - 1.0) * inv_eps2));
        }
        trace.push(SolveOptRow { lambda, g, f, upper, lower });
        k += 1;
    }
    let queries = cost_fn.evaluations.clone();
    let monotone = queries.windows(2).all(|w| w[1].1 <= w[0].1);
    Ok(SolveOptResult { lambda_hat: upper, trace, queries, monotone })
}
