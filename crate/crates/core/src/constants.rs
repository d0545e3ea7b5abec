//! Numeric constants shared by every module.

/// Feasibility tolerance for produced hypotheses.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Convergence tolerance of the ball-and-box projection.
pub const PROJECTION_TOL: f64 = 1e-10;
/// Iteration cap of the ball-and-box projection.
pub const PROJECTION_MAX_ITERS: usize = 100;
/// Agreement required between analytic and finite-difference subgradients.
pub const GRADIENT_CHECK_TOL: f64 = 1e-4;
/// Central finite-difference step for gradient checks.
pub const FINITE_DIFF_STEP: f64 = 1e-6;
/// Tolerance on the total mass of a sampling distribution.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// A stochastic gradient longer than this multiple of `G` aborts the run.
pub const GRADIENT_NORM_ABORT_FACTOR: f64 = 2.0;
/// Slack allowed on `||g|| <= G` before a step is flagged.
pub const GRADIENT_NORM_SLACK: f64 = 1e-9;

/// Dominant sets are computed with threshold `0.7 * lambda`.
pub const DOMINANT_THRESHOLD_FACTOR: f64 = 0.7;
/// Cover radius is `0.1 * lambda / G`.
pub const COVER_RADIUS_FACTOR: f64 = 0.1;
/// Episode length factor for the dimension-free solver: `0.1 * lambda / (eta * G^2)`.
pub const EPISODE_FACTOR: f64 = 0.1;
/// Common ratio of the lambda sequence queried by SolveOpt.
pub const SOLVE_OPT_RATIO: f64 = 0.2;
/// Largest dimension for which grid covers are built.
pub const MAX_COVER_DIMENSION: usize = 3;
/// Largest number of centers a grid cover may hold.
pub const MAX_COVER_CENTERS: usize = 4_000_000;

/// Multiplier applied to the uniform-convergence sample size in experiments.
pub const DEFAULT_VALIDATION_SCALE: f64 = 1e-4;
/// Constant of the self-bounding stopping rule.
pub const DEFAULT_STOPPING_CONSTANT: f64 = 4.0;
/// Rounds between metrics rows.
pub const DEFAULT_METRICS_STRIDE: u64 = 100;
/// Horizon of the ideal-player game used to estimate the optimal risk.
pub const DEFAULT_IDEAL_HORIZON: u64 = 10_000_000;
