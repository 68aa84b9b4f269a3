//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{EPOCHS, THETA};
use crate::augment::{AugKind, AugStrategy, Sampling};
use crate::class::{ClassSet, ComplexityClass};
use crate::classifier::Hyperparams;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    SelfTrain,
    CoTrain,
}

/// Which epoch's test metrics a seed reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// The epoch with the best validation accuracy (earliest on ties).
    BestValidation,
    LastEpoch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierBackend {
    Builtin,
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<PathBuf>,
    /// Overrides the class set inferred from the training labels.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classes: Option<Vec<ComplexityClass>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub k_shot: usize,
    pub theta: f64,
    pub epochs: usize,
    pub seeds: Vec<u64>,
    pub use_sym: bool,
    pub selection: Selection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::SelfTrain,
            k_shot: 5,
            theta: THETA,
            epochs: EPOCHS,
            seeds: vec![1, 2, 3],
            use_sym: false,
            selection: Selection::BestValidation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugConfig {
    /// `none`, `bt`, `lc` or `bt+lc`.
    pub strategy: String,
    pub sampling: Sampling,
    /// Augmenter subprocess command line.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub command: Vec<String>,
    /// Precomputed back-translations (JSONL of `{id, code}`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache: Option<PathBuf>,
    /// In-process test double instead of a real augmenter: `rename`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mock: Option<String>,
    pub max_in_flight: usize,
}

impl Default for AugConfig {
    fn default() -> Self {
        AugConfig {
            strategy: "none".into(),
            sampling: Sampling::Natural,
            command: Vec::new(),
            cache: None,
            mock: None,
            max_in_flight: 8,
        }
    }
}

impl AugConfig {
    pub fn strategy(&self) -> Result<Option<AugStrategy>, ConfigError> {
        if self.strategy.eq_ignore_ascii_case("none") {
            return Ok(None);
        }
        let kind: AugKind = self.strategy.parse().map_err(ConfigError)?;
        Ok(Some(AugStrategy {
            kind,
            sampling: self.sampling,
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierConfig {
    pub backend: ClassifierBackend,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub command: Vec<String>,
    pub hyperparams: Hyperparams,
    /// Passed untouched to external backends in the handshake.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<toml::Table>,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            backend: ClassifierBackend::Builtin,
            command: Vec::new(),
            hyperparams: Hyperparams::default(),
            params: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: String,
    pub data: DataConfig,
    #[serde(default)]
    pub experiment: RunConfig,
    #[serde(default)]
    pub augmentation: AugConfig,
    #[serde(default)]
    pub classifier: ClassifierConfig,
    /// Report directory; the CLI can override it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parses a config file and resolves its relative paths against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut cfg =
            Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.data.train);
        fix(&mut self.data.test);
        if let Some(v) = &mut self.data.validation {
            fix(v);
        }
        if let Some(c) = &mut self.augmentation.cache {
            fix(c);
        }
        if let Some(o) = &mut self.output {
            fix(o);
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = &self.experiment;
        if !(r.theta > 0.0 && r.theta <= 1.0) {
            return Err(ConfigError(format!("theta {} is outside (0, 1]", r.theta)));
        }
        if r.epochs == 0 {
            return Err(ConfigError("epochs must be at least 1".into()));
        }
        if r.seeds.is_empty() {
            return Err(ConfigError("at least one seed is required".into()));
        }
        if r.selection == Selection::BestValidation && self.data.validation.is_none() {
            return Err(ConfigError(
                "selection `best-validation` needs data.validation (or use selection = \"last-epoch\")".into(),
            ));
        }
        let strategy = self.augmentation.strategy()?;
        if let Some(s) = strategy {
            if s.sampling == Sampling::Artificial && !s.kind.uses_lc() {
                return Err(ConfigError(
                    "artificial sampling only applies to strategies with lc".into(),
                ));
            }
        }
        if let Some(m) = &self.augmentation.mock {
            if m != "rename" {
                return Err(ConfigError(format!(
                    "unknown augmenter mock `{m}` (expected rename)"
                )));
            }
        }
        if self.classifier.backend == ClassifierBackend::External
            && self.classifier.command.is_empty()
        {
            return Err(ConfigError(
                "classifier.backend = \"external\" needs classifier.command".into(),
            ));
        }
        let h = &self.classifier.hyperparams;
        if h.ngram_max == 0
            || h.batch_size == 0
            || !h.learning_rate.is_finite()
            || h.learning_rate <= 0.0
            || h.l2 < 0.0
        {
            return Err(ConfigError(
                "classifier hyperparameters out of range".into(),
            ));
        }
        if self.data.classes.as_ref().is_some_and(|c| c.is_empty()) {
            return Err(ConfigError("data.classes is empty".into()));
        }
        Ok(())
    }

    pub fn class_set_override(&self) -> Option<ClassSet> {
        self.data.classes.clone().map(ClassSet::new)
    }
}
