//! Metrics CSV and `key=value` summary files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use gdro_core::{MetricsRow, RunResult};

use crate::env::Ideal;
use crate::error::{HarnessError, Result};

pub const METRICS_HEADER: &str = "round,total_samples,lambda,active_set_size,chosen_group,gap";

pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.round,
            r.total_samples,
            opt(r.lambda),
            r.active_set_size,
            r.chosen_group,
            opt(r.gap)
        );
    }
    out
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

/// Everything about a run that is not per-round, one `key=value` per line.
pub fn summary_text(label: &str, seed: u64, r: &RunResult, ideal: Option<&Ideal>, scale: f64) -> String {
    let mut kv: Vec<(&str, String)> = vec![
        ("solver", label.to_string()),
        ("kind", r.solver.to_string()),
        ("seed", seed.to_string()),
        ("rounds", r.rounds.to_string()),
        ("total_samples", r.total_samples.to_string()),
        ("validation_samples", r.validation_samples.to_string()),
        ("validation_draws", r.validation_draws.to_string()),
        ("validation_scale", scale.to_string()),
        ("theta_bar", join(r.theta_bar.coords())),
        ("avg_active_size", r.avg_active_size.to_string()),
        ("final_lambda", opt(r.final_lambda)),
        ("lambda_changes", join(&r.lambda_changes)),
        ("episode_length", r.episode_length.map(|s| s.to_string()).unwrap_or_default()),
        ("final_gap", opt(r.final_gap)),
        ("l_star", opt(ideal.map(|i| i.l_star))),
        ("per_group_samples", join(&r.per_group_samples)),
        ("per_group_selected", join(&r.per_group_selected)),
    ];
    if let Some(so) = &r.solve_opt {
        kv.push(("lambda_hat", so.lambda_hat.to_string()));
        kv.push(("solve_opt_queries", so.queries.len().to_string()));
        kv.push(("solve_opt_monotone", so.monotone.to_string()));
    }
    kv.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
}

pub fn solve_opt_csv(result: &gdro_core::SolveOptResult) -> String {
    let mut out = String::from("lambda,g,f,U,L\n");
    for row in &result.trace {
        let _ = writeln!(out, "{},{},{},{},{}", row.lambda, row.g, row.f, row.upper, row.lower);
    }
    out
}

/// Reads a metrics file, checking the header and that rounds increase and
/// sample counts never decrease.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    let parse_err =
        |line: usize, message: String| HarnessError::Parse { path: path.to_path_buf(), line: line as u64, message };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == METRICS_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header {METRICS_HEADER:?}"))),
    }
    let mut rows: Vec<MetricsRow> = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 6 {
            return Err(parse_err(n, format!("expected 6 fields, found {}", f.len())));
        }
        let int = |s: &str, name: &str| {
            s.parse::<u64>().map_err(|_| parse_err(n, format!("{name}: {s:?} is not an integer")))
        };
        let real = |s: &str, name: &str| -> Result<Option<f64>> {
            if s.is_empty() {
                return Ok(None);
            }
            s.parse::<f64>().map(Some).map_err(|_| parse_err(n, format!("{name}: {s:?} is not a number")))
        };
        let row = MetricsRow {
            round: int(f[0], "round")?,
            total_samples: int(f[1], "total_samples")?,
            lambda: real(f[2], "lambda")?,
            active_set_size: int(f[3], "active_set_size")? as usize,
            chosen_group: int(f[4], "chosen_group")? as usize,
            gap: real(f[5], "gap")?,
        };
        if row.active_set_size == 0 {
            return Err(parse_err(n, "active_set_size must be at least 1".into()));
        }
        if let Some(prev) = rows.last() {
            if row.round <= prev.round || row.total_samples < prev.total_samples {
                return Err(parse_err(n, "rounds must increase and total_samples must not decrease".into()));
            }
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn read_summary(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split_once('=').map(|(k, v)| (k.to_string(), v.to_string())).ok_or_else(|| HarnessError::Parse {
                path: path.to_path_buf(),
                line: i as u64 + 1,
                message: "expected key=value".into(),
            })
        })
        .collect()
}
