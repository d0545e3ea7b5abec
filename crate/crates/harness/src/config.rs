//! Experiment configuration files (TOML).

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use gdro_core::constants::{DEFAULT_METRICS_STRIDE, DEFAULT_STOPPING_CONSTANT, DEFAULT_VALIDATION_SCALE};
use gdro_core::{Horizon, SolverConfig, SolverKind};
use serde::Deserialize;

use crate::dataset::DatasetSpec;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub environment: EnvironmentSpec,
    #[serde(rename = "solver")]
    pub solvers: Vec<SolverSpec>,
    #[serde(default)]
    pub ideal: IdealSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Rounds between evaluations of the running average's optimality gap.
    #[serde(default = "default_gap_stride")]
    pub gap_eval_stride: u64,
    /// Width of the worker pool; defaults to the number of CPUs.
    pub workers: Option<usize>,
}

fn default_gap_stride() -> u64 {
    1000
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnvironmentSpec {
    Lowerbound(LowerBoundSpec),
    Csv(CsvSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LowerBoundSpec {
    #[serde(default = "default_groups")]
    pub groups: usize,
    #[serde(default = "default_beta")]
    pub beta: usize,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_delta_gap")]
    pub delta_gap: f64,
}

fn default_groups() -> usize {
    10
}
fn default_beta() -> usize {
    2
}
fn default_lambda() -> f64 {
    0.2
}
fn default_delta_gap() -> f64 {
    0.1
}

impl Default for LowerBoundSpec {
    fn default() -> Self {
        Self { groups: 10, beta: 2, lambda: 0.2, delta_gap: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSpec {
    pub path: PathBuf,
    pub group_columns: Vec<String>,
    pub feature_columns: Vec<String>,
    pub label_column: String,
    /// Radius of the Euclidean ball of linear classifiers.
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_radius() -> f64 {
    1.0
}

impl CsvSpec {
    pub fn dataset(&self) -> DatasetSpec {
        DatasetSpec {
            path: self.path.clone(),
            group_columns: self.group_columns.clone(),
            feature_columns: self.feature_columns.clone(),
            label_column: self.label_column.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum SolverName {
    #[serde(rename = "sb-gdro")]
    SbGdro,
    #[serde(rename = "sb-gdro-sa")]
    SemiAdaptive,
    #[serde(rename = "sb-gdro-df")]
    DimensionFree,
    #[serde(rename = "sb-gdro-a")]
    Adaptive,
    #[serde(rename = "smd-gdro")]
    Smd,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    pub kind: SolverName,
    /// Name used in output files; defaults to the kind.
    pub label: Option<String>,
    pub lambda: Option<f64>,
    pub beta: Option<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Fixed horizon. Without it the run stops by the self-bounding rule.
    pub rounds: Option<u64>,
    #[serde(default = "default_stopping_constant")]
    pub stopping_constant: f64,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u64,
    #[serde(default = "default_validation_scale")]
    pub validation_scale: f64,
    #[serde(default = "default_metrics_stride")]
    pub metrics_stride: u64,
    #[serde(default = "default_eta0")]
    pub eta0: f64,
}

fn default_epsilon() -> f64 {
    0.005
}
fn default_delta() -> f64 {
    0.01
}
fn default_stopping_constant() -> f64 {
    DEFAULT_STOPPING_CONSTANT
}
fn default_max_rounds() -> u64 {
    1_000_000
}
fn default_validation_scale() -> f64 {
    DEFAULT_VALIDATION_SCALE
}
fn default_metrics_stride() -> u64 {
    DEFAULT_METRICS_STRIDE
}
fn default_eta0() -> f64 {
    1.0
}

impl SolverSpec {
    pub fn label(&self) -> String {
        self.label.clone().unwrap_or_else(|| self.kind().map(|k| k.name()).unwrap_or("solver").to_string())
    }

    pub fn kind(&self) -> Result<SolverKind> {
        let missing = |what: &str| HarnessError::Config(format!("solver {:?} needs `{what}`", self.kind));
        let lambda = || self.lambda.ok_or_else(|| missing("lambda"));
        Ok(match self.kind {
            SolverName::SbGdro => SolverKind::SbGdro { lambda: lambda()? },
            SolverName::SemiAdaptive => SolverKind::SemiAdaptive,
            SolverName::DimensionFree => {
                SolverKind::DimensionFree { lambda: lambda()?, beta: self.beta.ok_or_else(|| missing("beta"))? }
            }
            SolverName::Adaptive => SolverKind::Adaptive,
            SolverName::Smd => SolverKind::SmdBaseline,
        })
    }

    /// Solver settings for one seed, given the environment's `D` and `G`.
    pub fn solver_config(&self, diameter: f64, lipschitz: f64, seed: u64) -> Result<SolverConfig> {
        let mut c = SolverConfig::new(self.kind()?, diameter, lipschitz);
        c.epsilon = self.epsilon;
        c.delta = self.delta;
        c.horizon = match self.rounds {
            Some(t) => Horizon::Fixed(t),
            None => Horizon::SelfBounding { constant: self.stopping_constant, max_rounds: self.max_rounds },
        };
        c.seed = seed;
        c.validation_scale = self.validation_scale;
        c.metrics_stride = self.metrics_stride;
        c.eta0 = self.eta0;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealSection {
    /// Rounds of the ideal-player game; defaults depend on the environment.
    pub rounds: Option<u64>,
}

impl ExperimentConfig {
    /// Reads and validates a config file. Relative paths inside it are taken
    /// relative to the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.experiment.output_dir = base.join(&cfg.experiment.output_dir);
        if let EnvironmentSpec::Csv(csv) = &mut cfg.environment {
            csv.path = base.join(&csv.path);
        }
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.experiment.seeds.is_empty() {
            return bad("`seeds` must list at least one seed".into());
        }
        if self.experiment.seeds.iter().collect::<BTreeSet<_>>().len() != self.experiment.seeds.len() {
            return bad("`seeds` contains duplicates".into());
        }
        if self.experiment.gap_eval_stride == 0 {
            return bad("`gap_eval_stride` must be at least 1".into());
        }
        if self.experiment.workers == Some(0) {
            return bad("`workers` must be at least 1".into());
        }
        if self.solvers.is_empty() {
            return bad("at least one [[solver]] section is required".into());
        }
        let mut labels = BTreeSet::new();
        for s in &self.solvers {
            s.kind()?;
            let label = s.label();
            if label.is_empty() || label.contains(['/', '\\', '_']) {
                return bad(format!("solver label {label:?} must be nonempty and free of '/', '\\' and '_'"));
            }
            if !labels.insert(label.clone()) {
                return bad(format!("two solvers share the label {label:?}; set `label` to tell them apart"));
            }
        }
        if let EnvironmentSpec::Csv(csv) = &self.environment {
            if !(csv.radius > 0.0 && csv.radius.is_finite()) {
                return bad(format!("`radius` must be positive, got {}", csv.radius));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
[experiment]
seeds = [0, 1]
output_dir = "out"

[environment]
kind = "lowerbound"

[[solver]]
kind = "sb-gdro-sa"
rounds = 1000

[[solver]]
kind = "sb-gdro-df"
lambda = 0.2
beta = 2
"#;

    #[test]
    fn parses_defaults() {
        let cfg = ExperimentConfig::from_toml(BASIC).unwrap();
        assert_eq!(cfg.environment, EnvironmentSpec::Lowerbound(LowerBoundSpec::default()));
        assert_eq!(cfg.experiment.gap_eval_stride, 1000);
        let sa = cfg.solvers[0].solver_config(1.0, 1.0, 7).unwrap();
        assert_eq!(sa.horizon, Horizon::Fixed(1000));
        assert_eq!(sa.seed, 7);
        assert_eq!(cfg.solvers[1].label(), "sb-gdro-df");
        assert!(matches!(cfg.solvers[1].solver_config(1.0, 1.0, 0).unwrap().horizon, Horizon::SelfBounding { .. }));
    }

    #[test]
    fn rejects_bad_configs() {
        let missing_lambda = BASIC.replace("lambda = 0.2\n", "");
        assert!(matches!(ExperimentConfig::from_toml(&missing_lambda), Err(HarnessError::Config(_))));
        let typo = BASIC.replace("rounds = 1000", "round = 1000");
        assert!(ExperimentConfig::from_toml(&typo).is_err());
        let no_seeds = BASIC.replace("seeds = [0, 1]", "seeds = []");
        assert!(ExperimentConfig::from_toml(&no_seeds).is_err());
        let dup = BASIC.replace("kind = \"sb-gdro-df\"\nlambda = 0.2\nbeta = 2", "kind = \"sb-gdro-sa\"");
        assert!(ExperimentConfig::from_toml(&dup).is_err());
    }

    #[test]
    fn csv_environment() {
        let text = BASIC.replace(
            "kind = \"lowerbound\"",
            "kind = \"csv\"\npath = \"adult.csv\"\ngroup_columns = [\"race\", \"sex\"]\n\
             feature_columns = [\"age\"]\nlabel_column = \"income\"",
        );
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let EnvironmentSpec::Csv(csv) = cfg.environment else { panic!() };
        assert_eq!(csv.radius, 1.0);
        assert_eq!(csv.dataset().group_columns, ["race", "sex"]);
    }
}
