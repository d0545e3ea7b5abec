//! Runs every (solver, seed) pair of a config and writes the result files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gdro_core::RunResult;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::env::{Environment, Ideal};
use crate::error::{HarnessError, Result};
use crate::metrics::{metrics_csv, solve_opt_csv, summary_text};

pub const IDEAL_CACHE: &str = "ideal.txt";
pub const GROUPS_FILE: &str = "groups.csv";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

pub struct RunOutcome {
    pub label: String,
    pub seed: u64,
    pub result: RunResult,
    pub seconds: f64,
}

pub struct ExperimentReport {
    pub ideal: Ideal,
    pub runs: Vec<RunOutcome>,
    pub files: Vec<PathBuf>,
}

pub fn metrics_file_name(label: &str, seed: u64) -> String {
    format!("{label}_{seed}_metrics.csv")
}

pub fn summary_file_name(label: &str, seed: u64) -> String {
    format!("{label}_{seed}_summary.txt")
}

/// Creates `dir` and checks a file can be written there.
pub fn ensure_writable(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let probe = dir.join(".gdro-write-check");
    fs::write(&probe, b"").map_err(|e| HarnessError::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| HarnessError::io(&probe, e))
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let out = cfg.experiment.output_dir.as_path();
    ensure_writable(out)?;
    let env = Environment::build(&cfg.environment)?;

    let rounds = cfg.ideal.rounds.unwrap_or_else(|| env.default_ideal_rounds());
    let ideal = env.ideal_cached(rounds, &out.join(IDEAL_CACHE))?;
    let mut files = vec![out.join(IDEAL_CACHE)];

    files.push(write(out, GROUPS_FILE, &groups_csv(&env.group_manifest()))?);

    let mut jobs = Vec::new();
    for spec in &cfg.solvers {
        for &seed in &cfg.experiment.seeds {
            let config = spec.solver_config(env.diameter(), env.lipschitz(), seed)?;
            config.validate(env.num_groups())?;
            jobs.push((spec.label(), seed, config));
        }
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.experiment.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| HarnessError::Config(format!("worker pool: {e}")))?;
    let stride = cfg.experiment.gap_eval_stride;
    let runs = pool.install(|| {
        jobs.into_par_iter()
            .map(|(label, seed, config)| {
                let start = Instant::now();
                let result = env.run(&config, Some(ideal.l_star), stride)?;
                Ok(RunOutcome { label, seed, result, seconds: start.elapsed().as_secs_f64() })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    for (spec, chunk) in cfg.solvers.iter().zip(runs.chunks(cfg.experiment.seeds.len())) {
        for run in chunk {
            let r = &run.result;
            files.push(write(out, &metrics_file_name(&run.label, run.seed), &metrics_csv(&r.timeline))?);
            let summary = summary_text(&run.label, run.seed, r, Some(&ideal), spec.validation_scale);
            files.push(write(out, &summary_file_name(&run.label, run.seed), &summary)?);
            if let Some(so) = &r.solve_opt {
                files.push(write(out, &format!("{}_{}_solveopt.csv", run.label, run.seed), &solve_opt_csv(so))?);
            }
        }
    }
    files.push(write(out, AGGREGATE_FILE, &aggregate_csv(&runs))?);
    Ok(ExperimentReport { ideal, runs, files })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

/// `group,key,rows`, quoting keys that need it.
fn groups_csv(manifest: &[(String, usize)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut rows = vec![["group".to_string(), "key".to_string(), "rows".to_string()]];
    rows.extend(manifest.iter().enumerate().map(|(g, (key, n))| [g.to_string(), key.clone(), n.to_string()]));
    for row in rows {
        // writing into a Vec cannot fail
        w.write_record(&row).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv of utf-8 fields")
}

/// Mean, min and max gap across seeds at every round where all seeds of a
/// solver evaluated the gap, with the mean sample count at that round.
pub fn aggregate_csv(runs: &[RunOutcome]) -> String {
    let mut by_label: BTreeMap<&str, Vec<&RunResult>> = BTreeMap::new();
    let mut order = Vec::new();
    for run in runs {
        if !by_label.contains_key(run.label.as_str()) {
            order.push(run.label.as_str());
        }
        by_label.entry(&run.label).or_default().push(&run.result);
    }
    let mut out = String::from("solver,round,samples_mean,gap_mean,gap_min,gap_max,seeds\n");
    for label in order {
        let results = &by_label[label];
        let series: Vec<BTreeMap<u64, (u64, f64)>> = results
            .iter()
            .map(|r| r.timeline.iter().filter_map(|row| row.gap.map(|g| (row.round, (row.total_samples, g)))).collect())
            .collect();
        for &round in series[0].keys() {
            let points: Option<Vec<(u64, f64)>> = series.iter().map(|s| s.get(&round).copied()).collect();
            let Some(points) = points else { continue };
            let n = points.len() as f64;
            let samples = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
            let mean = points.iter().map(|p| p.1).sum::<f64>() / n;
            let min = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
            let max = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(out, "{label},{round},{samples},{mean},{min},{max},{}", points.len());
        }
    }
    out
}
