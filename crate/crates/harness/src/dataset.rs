//! CSV datasets as empirical group distributions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use gdro_core::{EmpiricalGroups, Sample};
use serde::Deserialize;

use crate::error::{HarnessError, Result};

/// Which columns of a CSV file form the groups, the features and the label.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub path: PathBuf,
    pub group_columns: Vec<String>,
    pub feature_columns: Vec<String>,
    pub label_column: String,
}

/// A loaded dataset: one empirical distribution per observed group key.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub groups: EmpiricalGroups,
    /// Global maximum feature norm the features were divided by.
    pub max_norm: f64,
}

impl Dataset {
    pub fn keys(&self) -> &[String] {
        self.groups.keys()
    }
}

/// Reads the CSV, maps labels to +-1, divides every feature vector by the
/// largest feature norm and groups rows by their trimmed group-column values.
/// Groups are ordered lexicographically by their key tuple.
pub fn load_csv_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    if spec.group_columns.is_empty() || spec.feature_columns.is_empty() {
        return Err(HarnessError::Config("a dataset needs at least one group column and one feature column".into()));
    }
    let path = spec.path.as_path();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| HarnessError::Schema { path: path.to_path_buf(), column: name.to_string() })
    };
    let group_idx = spec.group_columns.iter().map(|c| column(c)).collect::<Result<Vec<_>>>()?;
    let feature_idx = spec.feature_columns.iter().map(|c| column(c)).collect::<Result<Vec<_>>>()?;
    let label_idx = column(&spec.label_column)?;

    let mut rows: Vec<(Vec<String>, Vec<f64>, f64, u64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let key: Vec<String> = group_idx.iter().map(|&i| record[i].trim().to_string()).collect();
        if key.iter().any(String::is_empty) {
            return Err(HarnessError::Dataset {
                path: path.to_path_buf(),
                message: format!("line {line}: empty group value"),
            });
        }
        let features = feature_idx
            .iter()
            .zip(&spec.feature_columns)
            .map(|(&i, name)| parse_number(path, line, name, &record[i]))
            .collect::<Result<Vec<_>>>()?;
        let label = parse_number(path, line, &spec.label_column, &record[label_idx])?;
        rows.push((key, features, label, line));
    }
    if rows.is_empty() {
        return Err(HarnessError::Dataset { path: path.to_path_buf(), message: "no data rows".into() });
    }

    let zero_one = rows.iter().all(|r| r.2 == 0.0 || r.2 == 1.0);
    let plus_minus = rows.iter().all(|r| r.2 == -1.0 || r.2 == 1.0);
    if !zero_one && !plus_minus {
        let bad = rows.iter().find(|r| ![-1.0, 0.0, 1.0].contains(&r.2)).unwrap_or(&rows[0]);
        return Err(HarnessError::Dataset {
            path: path.to_path_buf(),
            message: format!("labels must be {{0, 1}} or {{-1, 1}}; line {} has {}", bad.3, bad.2),
        });
    }

    let max_norm = rows.iter().map(|r| r.1.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let scale = if max_norm > 0.0 { 1.0 / max_norm } else { 1.0 };

    let mut grouped: BTreeMap<Vec<String>, Vec<Sample>> = BTreeMap::new();
    for (key, features, label, _) in rows {
        let label = if label == 0.0 { -1.0 } else { label };
        grouped.entry(key).or_default().push(Sample {
            features: features.iter().map(|x| x * scale).collect(),
            label: Some(label),
            group: 0,
        });
    }
    let keys = grouped.keys().map(|k| k.join("/")).collect();
    let groups = EmpiricalGroups::new(keys, grouped.into_values().collect())?;
    Ok(Dataset { groups, max_norm })
}

fn parse_number(path: &Path, line: u64, column: &str, field: &str) -> Result<f64> {
    field.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        message: format!("column {column:?}: {field:?} is not a number"),
    })
}

fn csv_error(path: &Path, e: csv::Error) -> HarnessError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => HarnessError::io(path, source),
        kind => HarnessError::Parse { path: path.to_path_buf(), line, message: format!("{kind:?}") },
    }
}
