//! Experiment description: a TOML file plus command-line overrides, resolved
//! against a loaded dataset into one [`SolverConfig`] per (algorithm, seed).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sfw_core::estimators::MomentumRule;
use sfw_core::prelude::*;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    #[serde(default = "default_constraint_kind")]
    pub kind: String,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

impl Default for ConstraintSpec {
    fn default() -> Self {
        ConstraintSpec {
            kind: default_constraint_kind(),
            radius: default_radius(),
        }
    }
}

/// Everything needed to reproduce a grid of runs.
///
/// Only `dataset` is required. Exactly one of `K` and `epochs` may be set;
/// with neither, every algorithm gets 100 epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub dataset: PathBuf,
    /// Label used in trace metadata; defaults to the dataset file name.
    #[serde(default)]
    pub name: Option<String>,
    /// Pads the feature dimension for files whose largest index is missing.
    #[serde(default)]
    pub min_dim: Option<usize>,
    #[serde(default = "default_loss")]
    pub loss: String,
    #[serde(default)]
    pub constraint: ConstraintSpec,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<String>,
    #[serde(default, rename = "K")]
    pub iterations: Option<u64>,
    #[serde(default)]
    pub epochs: Option<f64>,
    #[serde(default)]
    pub batch: Option<usize>,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    /// `theorem`, `theorem1`, `theorem3`, `classic` or `sqrt_k`.
    #[serde(default = "default_schedule")]
    pub schedule: String,
    /// `with_replacement` or `without_replacement`.
    #[serde(default = "default_sampling")]
    pub sampling: String,
    /// `full` or `cold`.
    #[serde(default = "default_saga_init")]
    pub saga_init: String,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub gap_every: Option<u64>,
    #[serde(default = "default_record_every")]
    pub record_every: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Run the best method for ten times the budget to estimate `f_min`.
    #[serde(default)]
    pub reference: bool,
    /// Relative suboptimality target reported in the summary.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub wall_time: bool,
}

fn default_constraint_kind() -> String {
    "l1_ball".into()
}
fn default_radius() -> f64 {
    2000.0
}
fn default_loss() -> String {
    "logistic".into()
}
fn default_algorithms() -> Vec<String> {
    vec!["fw".into(), "sarah_fw".into(), "saga_sarah_fw".into()]
}
fn default_schedule() -> String {
    "theorem".into()
}
fn default_sampling() -> String {
    "with_replacement".into()
}
fn default_saga_init() -> String {
    "full".into()
}
fn default_seeds() -> Vec<u64> {
    vec![0]
}
fn default_record_every() -> u64 {
    1
}
fn default_out() -> PathBuf {
    PathBuf::from("runs")
}
fn default_threshold() -> f64 {
    1e-3
}

const DEFAULT_EPOCHS: f64 = 100.0;

impl ExperimentSpec {
    pub fn new(dataset: impl Into<PathBuf>) -> Self {
        ExperimentSpec {
            dataset: dataset.into(),
            name: None,
            min_dim: None,
            loss: default_loss(),
            constraint: ConstraintSpec::default(),
            algorithms: default_algorithms(),
            iterations: None,
            epochs: None,
            batch: None,
            p: None,
            lambda: None,
            schedule: default_schedule(),
            sampling: default_sampling(),
            saga_init: default_saga_init(),
            seeds: default_seeds(),
            gap_every: None,
            record_every: default_record_every(),
            out: default_out(),
            reference: false,
            threshold: default_threshold(),
            wall_time: false,
        }
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    /// Reads a config file. Relative `dataset` and `out` paths are taken
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let err = |msg: String| CliError::Config {
            path: path.to_path_buf(),
            msg,
        };
        let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut spec = Self::from_toml_str(&text).map_err(|e| err(e.to_string()))?;
        if let Some(dir) = path.parent() {
            if spec.dataset.is_relative() {
                spec.dataset = dir.join(&spec.dataset);
            }
            if spec.out.is_relative() {
                spec.out = dir.join(&spec.out);
            }
        }
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment spec serializes")
    }

    pub fn display_name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            self.dataset
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.dataset.display().to_string())
        })
    }

    pub fn loss_kind(&self) -> Result<LossKind> {
        self.loss.parse().map_err(spec_err)
    }

    pub fn constraint_set(&self) -> Result<ConstraintSet> {
        let kind: ConstraintKind = self.constraint.kind.parse().map_err(spec_err)?;
        ConstraintSet::new(kind, self.constraint.radius).map_err(spec_err)
    }

    pub fn algorithm_list(&self) -> Result<Vec<Algorithm>> {
        if self.algorithms.is_empty() {
            return Err(CliError::Spec("no algorithms listed".into()));
        }
        self.algorithms.iter().map(|a| a.parse().map_err(spec_err)).collect()
    }

    fn sampling_mode(&self) -> Result<Sampling> {
        match self.sampling.as_str() {
            "with_replacement" => Ok(Sampling::WithReplacement),
            "without_replacement" => Ok(Sampling::WithoutReplacement),
            other => Err(CliError::Spec(format!("unknown sampling `{other}`"))),
        }
    }

    fn saga_init_mode(&self) -> Result<SagaInit> {
        match self.saga_init.as_str() {
            "full" => Ok(SagaInit::Full),
            "cold" => Ok(SagaInit::Cold),
            other => Err(CliError::Spec(format!("unknown saga_init `{other}`"))),
        }
    }

    /// One solver configuration per (algorithm, seed), algorithms outermost.
    pub fn resolve(&self, n: usize) -> Result<Vec<SolverConfig>> {
        if self.seeds.is_empty() {
            return Err(CliError::Spec("no seeds listed".into()));
        }
        if self.iterations.is_some() && self.epochs.is_some() {
            return Err(CliError::Spec("set either K or epochs, not both".into()));
        }
        if self.record_every == 0 {
            return Err(CliError::Spec("record_every must be positive".into()));
        }
        if !(self.threshold > 0.0 && self.threshold.is_finite()) {
            return Err(CliError::Spec("threshold must be positive".into()));
        }
        let b = self.batch.unwrap_or_else(|| default_batch(n, BatchRegime::ConvexSmall));
        let sampling = self.sampling_mode()?;
        let init = self.saga_init_mode()?;

        let mut out = Vec::new();
        for alg in self.algorithm_list()? {
            let defaults = default_params(alg, n, b).map_err(spec_err)?;
            let p = self.p.or(defaults.p).unwrap_or(2.0 * b as f64 / (n + 2 * b) as f64);
            let lambda = self.lambda.or(defaults.lambda).unwrap_or(b as f64 / (2 * n) as f64);
            let horizon = match (self.iterations, self.epochs) {
                (Some(k), _) => k,
                (None, e) => iterations_for_epochs(alg, e.unwrap_or(DEFAULT_EPOCHS), n, b, p)?,
            };
            let kind = match self.schedule.as_str() {
                "theorem" => match alg {
                    Algorithm::SarahFw => ScheduleKind::Theorem1 { p },
                    Algorithm::SagaSarahFw => ScheduleKind::Theorem3 { n, b },
                    Algorithm::Fw | Algorithm::MomentumFw => ScheduleKind::ClassicFw,
                },
                "theorem1" => ScheduleKind::Theorem1 { p },
                "theorem3" => ScheduleKind::Theorem3 { n, b },
                "classic" => ScheduleKind::ClassicFw,
                "sqrt_k" => ScheduleKind::SqrtK,
                other => return Err(CliError::Spec(format!("unknown schedule `{other}`"))),
            };
            let schedule = Schedule::new(kind, horizon).map_err(spec_err)?;
            let estimator = match alg {
                Algorithm::Fw => EstimatorConfig::Full,
                Algorithm::SarahFw => EstimatorConfig::Sarah { p, batch: b, sampling },
                Algorithm::SagaSarahFw => EstimatorConfig::SagaSarah {
                    lambda,
                    batch: b,
                    sampling,
                    init,
                },
                Algorithm::MomentumFw => EstimatorConfig::Momentum {
                    rule: MomentumRule::default(),
                    batch: b,
                    sampling,
                },
            };
            let gap_every = self.gap_every.unwrap_or(horizon.div_ceil(50).max(1));
            for &seed in &self.seeds {
                let mut cfg = SolverConfig::new(alg, schedule, estimator, seed)
                    .with_gap_every(gap_every)
                    .with_record_every(self.record_every);
                cfg.record_wall_time = self.wall_time;
                cfg.validate(n).map_err(spec_err)?;
                out.push(cfg);
            }
        }
        Ok(out)
    }
}

/// Iterations that spend `epochs · n` stochastic gradients on average.
///
/// Per-iteration cost is `n` for full gradients, `pn + (1 − p)·2b` for the
/// SARAH estimator, `2b` for SAGA-SARAH and `b` for momentum.
pub fn iterations_for_epochs(alg: Algorithm, epochs: f64, n: usize, b: usize, p: f64) -> Result<u64> {
    if !(epochs > 0.0 && epochs.is_finite()) {
        return Err(CliError::Spec(format!("epochs must be positive, got {epochs}")));
    }
    let (n, b) = (n as f64, b as f64);
    let cost = match alg {
        Algorithm::Fw => n,
        Algorithm::SarahFw => p * n + (1.0 - p) * 2.0 * b,
        Algorithm::SagaSarahFw => 2.0 * b,
        Algorithm::MomentumFw => b,
    };
    Ok((epochs * n / cost).ceil() as u64)
}

/// Command-line values that replace the file's.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub dataset: Option<PathBuf>,
    pub loss: Option<String>,
    pub algorithms: Option<Vec<String>>,
    pub radius: Option<f64>,
    pub batch: Option<usize>,
    pub iterations: Option<u64>,
    pub epochs: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub gap_every: Option<u64>,
    pub out: Option<PathBuf>,
    pub reference: bool,
    pub wall_time: bool,
}

impl Overrides {
    pub fn apply(self, spec: &mut ExperimentSpec) {
        if let Some(v) = self.dataset {
            spec.dataset = v;
        }
        if let Some(v) = self.loss {
            spec.loss = v;
        }
        if let Some(v) = self.algorithms {
            spec.algorithms = v;
        }
        if let Some(v) = self.radius {
            spec.constraint.radius = v;
        }
        if let Some(v) = self.batch {
            spec.batch = Some(v);
        }
        if let Some(v) = self.iterations {
            spec.iterations = Some(v);
            spec.epochs = None;
        }
        if let Some(v) = self.epochs {
            spec.epochs = Some(v);
            spec.iterations = None;
        }
        if let Some(v) = self.seeds {
            spec.seeds = v;
        }
        if let Some(v) = self.gap_every {
            spec.gap_every = Some(v);
        }
        if let Some(v) = self.out {
            spec.out = v;
        }
        spec.reference |= self.reference;
        spec.wall_time |= self.wall_time;
    }
}

fn spec_err(e: sfw_core::Error) -> CliError {
    CliError::Spec(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let spec = ExperimentSpec::from_toml_str("dataset = \"bc\"").unwrap();
        assert_eq!(spec, ExperimentSpec::new("bc"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentSpec::from_toml_str("dataset = \"bc\"\nradius = 3").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let mut spec = ExperimentSpec::new("bc");
        spec.iterations = Some(40);
        spec.p = Some(0.25);
        spec.seeds = vec![3, 4];
        let back = ExperimentSpec::from_toml_str(&spec.to_toml_string()).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn flags_win() {
        let mut spec = ExperimentSpec::from_toml_str(
            "dataset = \"a\"\nK = 10\nseeds = [1]\n[constraint]\nradius = 5.0",
        )
        .unwrap();
        Overrides {
            dataset: Some("b".into()),
            epochs: Some(3.0),
            seeds: Some(vec![7, 8]),
            radius: Some(9.0),
            ..Default::default()
        }
        .apply(&mut spec);
        assert_eq!(spec.dataset, PathBuf::from("b"));
        assert_eq!(spec.iterations, None);
        assert_eq!(spec.epochs, Some(3.0));
        assert_eq!(spec.seeds, vec![7, 8]);
        assert_eq!(spec.constraint.radius, 9.0);
        assert_eq!(spec.constraint.kind, "l1_ball");
    }

    #[test]
    fn epochs_for_sarah() {
        // 50 · 683 · 697 / (14 · 1366) = 1244.63...
        let p = 14.0 / 697.0;
        assert_eq!(iterations_for_epochs(Algorithm::SarahFw, 50.0, 683, 7, p).unwrap(), 1245);
        assert_eq!(iterations_for_epochs(Algorithm::Fw, 50.0, 683, 7, p).unwrap(), 50);
        // 50 · 683 / 14 = 2439.28...
        assert_eq!(iterations_for_epochs(Algorithm::SagaSarahFw, 50.0, 683, 7, p).unwrap(), 2440);
        assert_eq!(iterations_for_epochs(Algorithm::MomentumFw, 50.0, 683, 7, p).unwrap(), 4879);
        assert!(iterations_for_epochs(Algorithm::Fw, 0.0, 683, 7, p).is_err());
    }

    #[test]
    fn resolve_defaults() {
        let spec = ExperimentSpec::new("bc");
        let cfgs = spec.resolve(683).unwrap();
        assert_eq!(cfgs.len(), 3);
        assert_eq!(cfgs[0].algorithm, Algorithm::Fw);
        assert_eq!(cfgs[0].horizon, 100);
        assert_eq!(cfgs[0].gap_every, 2);
        match cfgs[1].estimator {
            EstimatorConfig::Sarah { p, batch, .. } => {
                assert_eq!(batch, 7);
                assert_eq!(p, 14.0 / 697.0);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(cfgs[1].schedule.kind(), ScheduleKind::Theorem1 { p: 14.0 / 697.0 });
        assert_eq!(cfgs[2].schedule.kind(), ScheduleKind::Theorem3 { n: 683, b: 7 });
        match cfgs[2].estimator {
            EstimatorConfig::SagaSarah { lambda, .. } => assert_eq!(lambda, 7.0 / 1366.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolve_rejects_bad_specs() {
        let mut spec = ExperimentSpec::new("bc");
        spec.iterations = Some(10);
        spec.epochs = Some(1.0);
        assert!(matches!(spec.resolve(10), Err(CliError::Spec(_))));

        let mut spec = ExperimentSpec::new("bc");
        spec.algorithms = vec!["adam".into()];
        assert!(matches!(spec.resolve(10), Err(CliError::Spec(_))));

        let mut spec = ExperimentSpec::new("bc");
        spec.batch = Some(11);
        assert!(matches!(spec.resolve(10), Err(CliError::Spec(_))));

        let mut spec = ExperimentSpec::new("bc");
        spec.schedule = "cosine".into();
        assert!(matches!(spec.resolve(10), Err(CliError::Spec(_))));

        let mut spec = ExperimentSpec::new("bc");
        spec.constraint.radius = -1.0;
        assert!(matches!(spec.constraint_set(), Err(CliError::Spec(_))));
    }
}
