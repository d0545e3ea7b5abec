//! Static plots from a directory written by `run_experiment`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use gdro_core::MetricsRow;

use crate::error::{HarnessError, Result};
use crate::experiment::{summary_file_name, GROUPS_FILE};
use crate::metrics::{read_metrics, read_summary};
use crate::svg::{bar_chart, Band, Chart, Line, PALETTE};

pub const ACTIVE_SET_PLOT: &str = "active_set_size.svg";
pub const GAP_PLOT: &str = "optimality_gap.svg";
pub const SELECTION_PLOT: &str = "group_selection.svg";

/// Solver labels in first-seen file order, each with its seeds.
fn discover(dir: &Path) -> Result<Vec<(String, BTreeSet<u64>)>> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .map_err(|e| HarnessError::io(dir, e))?
        .filter_map(|entry| entry.ok()?.file_name().into_string().ok())
        .filter(|n| n.ends_with("_metrics.csv"))
        .collect();
    names.sort();
    let mut found: Vec<(String, BTreeSet<u64>)> = Vec::new();
    for name in names {
        let stem = &name[..name.len() - "_metrics.csv".len()];
        let Some((label, seed)) = stem.rsplit_once('_') else { continue };
        let Ok(seed) = seed.parse::<u64>() else { continue };
        match found.iter_mut().find(|(l, _)| l == label) {
            Some((_, seeds)) => {
                seeds.insert(seed);
            }
            None => found.push((label.to_string(), BTreeSet::from([seed]))),
        }
    }
    Ok(found)
}

struct SolverData {
    label: String,
    runs: Vec<Vec<MetricsRow>>,
    selected: Vec<Vec<f64>>,
}

/// Reads every metrics file in `dir` and writes the three plots into `out`.
/// Only seeds present for every solver are used; nothing is written if any
/// input fails to parse or no seed is shared.
pub fn emit_plots(dir: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let found = discover(dir)?;
    if found.is_empty() {
        return Err(HarnessError::Plot(format!("no *_metrics.csv files in {}", dir.display())));
    }
    let seeds: BTreeSet<u64> = found.iter().skip(1).fold(found[0].1.clone(), |acc, (_, s)| &acc & s);
    if seeds.is_empty() {
        return Err(HarnessError::Plot("the solvers share no seed; nothing to aggregate".into()));
    }
    let mut data = Vec::new();
    for (label, _) in &found {
        let mut runs = Vec::new();
        let mut selected = Vec::new();
        for &seed in &seeds {
            runs.push(read_metrics(&dir.join(crate::experiment::metrics_file_name(label, seed)))?);
            let summary_path = dir.join(summary_file_name(label, seed));
            let summary = read_summary(&summary_path)?;
            let counts = summary
                .get("per_group_selected")
                .ok_or_else(|| HarnessError::Plot(format!("{}: no per_group_selected", summary_path.display())))?
                .split_whitespace()
                .map(|c| c.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| HarnessError::Plot(format!("{}: {e}", summary_path.display())))?;
            selected.push(counts);
        }
        data.push(SolverData { label: label.clone(), runs, selected });
    }
    let group_names = read_group_names(dir)?;

    let plots = [
        (ACTIVE_SET_PLOT, active_set_chart(&data).render()),
        (GAP_PLOT, gap_chart(&data).render()),
        (SELECTION_PLOT, selection_chart(&data, group_names)?),
    ];
    fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    plots
        .into_iter()
        .map(|(name, svg)| {
            let path = out.join(name);
            fs::write(&path, svg).map_err(|e| HarnessError::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Rows of `runs` at rounds every run logged, as `(round, rows per run)`.
fn common_rounds(runs: &[Vec<MetricsRow>], keep: impl Fn(&MetricsRow) -> bool) -> Vec<(u64, Vec<&MetricsRow>)> {
    let maps: Vec<BTreeMap<u64, &MetricsRow>> =
        runs.iter().map(|r| r.iter().filter(|row| keep(row)).map(|row| (row.round, row)).collect()).collect();
    maps[0]
        .keys()
        .filter_map(|round| {
            let rows: Option<Vec<&MetricsRow>> = maps.iter().map(|m| m.get(round).copied()).collect();
            rows.map(|rows| (*round, rows))
        })
        .collect()
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n.max(1) as f64
}

/// Active-set size against rounds: the seed mean at each logged round and its
/// running average over the logged rounds.
fn active_set_chart(data: &[SolverData]) -> Chart {
    let mut lines = Vec::new();
    for (i, s) in data.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let rows = common_rounds(&s.runs, |_| true);
        let instant: Vec<(f64, f64)> =
            rows.iter().map(|(t, r)| (*t as f64, mean(r.iter().map(|row| row.active_set_size as f64)))).collect();
        let mut total = 0.0;
        let running: Vec<(f64, f64)> = instant
            .iter()
            .enumerate()
            .map(|(k, &(t, v))| {
                total += v;
                (t, total / (k + 1) as f64)
            })
            .collect();
        lines.push(Line { name: format!("{} (instant)", s.label), color, points: instant, width: 1.0, dashed: true });
        lines.push(Line {
            name: format!("{} (running avg)", s.label),
            color,
            points: running,
            width: 2.0,
            dashed: false,
        });
    }
    Chart {
        title: "Size of the active (dominant) set".into(),
        x_label: "round".into(),
        y_label: "active set size".into(),
        lines,
        bands: Vec::new(),
    }
}

/// Seed-mean optimality gap against seed-mean total samples, with the
/// min-max band across seeds.
fn gap_chart(data: &[SolverData]) -> Chart {
    let mut lines = Vec::new();
    let mut bands = Vec::new();
    for (i, s) in data.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let rows = common_rounds(&s.runs, |row| row.gap.is_some());
        let mut points = Vec::new();
        let mut band = Vec::new();
        for (_, r) in &rows {
            let x = mean(r.iter().map(|row| row.total_samples as f64));
            let gaps: Vec<f64> = r.iter().filter_map(|row| row.gap).collect();
            points.push((x, mean(gaps.iter().copied())));
            let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = gaps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            band.push((x, lo, hi));
        }
        lines.push(Line { name: s.label.clone(), color, points, width: 2.0, dashed: false });
        bands.push(Band { color, points: band });
    }
    Chart {
        title: "Optimality gap of the averaged hypothesis".into(),
        x_label: "total samples".into(),
        y_label: "gap".into(),
        lines,
        bands,
    }
}

fn selection_chart(data: &[SolverData], group_names: Option<Vec<String>>) -> Result<String> {
    let k = data[0].selected[0].len();
    let mut series = Vec::new();
    for s in data {
        if s.selected.iter().any(|c| c.len() != k) {
            return Err(HarnessError::Plot(format!("{}: per-group counts disagree on the number of groups", s.label)));
        }
        let means: Vec<f64> = (0..k).map(|g| mean(s.selected.iter().map(|c| c[g])).ln_1p()).collect();
        series.push((s.label.clone(), means));
    }
    let names = group_names.filter(|n| n.len() == k).unwrap_or_else(|| (0..k).map(|g| g.to_string()).collect());
    Ok(bar_chart("Times each group was selected (natural log)", "group", "ln(1 + times selected)", &names, &series))
}

fn read_group_names(dir: &Path) -> Result<Option<Vec<String>>> {
    let path = dir.join(GROUPS_FILE);
    let Ok(mut reader) = csv::Reader::from_path(&path) else { return Ok(None) };
    reader
        .records()
        .map(|rec| {
            let rec = rec.map_err(|e| HarnessError::Parse {
                path: path.clone(),
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            rec.get(1).map(str::to_string).ok_or_else(|| HarnessError::Parse {
                path: path.clone(),
                line: rec.position().map_or(0, |p| p.line()),
                message: "expected group,key,rows".into(),
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}
