//! Multi-seed experiment runs and their reports.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::ConfigError;
use super::{
    co_train_epoch, self_train_epoch, ClassifierBackend, ExperimentConfig, Learner, Mode,
    Selection, Source, SslError, SslState, Symbolic, SymbolicCache,
};
use crate::augment::{
    augment_dataset, has_loop, AugmentError, Backtranslator, CachedBacktranslator,
    ProcessAugmenter, RenameBacktranslator, Sampling,
};
use crate::class::{ClassSet, ComplexityClass};
use crate::classifier::{BuiltinModel, Classifier, ClassifierError, ExternalClassifier};
use crate::dataset::{
    few_shot_split, few_shot_split_where, CodeSnippet, DataError, Dataset, LabeledExample,
};
use crate::metrics::{compute_metrics, format_pm, mean_std, Metrics};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("augmentation: {0}")]
    Augment(#[from] AugmentError),
    #[error("training: {0}")]
    Ssl(#[from] SslError),
    #[error("{0}")]
    Io(String),
}

impl From<ClassifierError> for ExperimentError {
    fn from(e: ClassifierError) -> Self {
        ExperimentError::Ssl(SslError::Classifier(e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub pool_l: usize,
    pub pool_l_aug: usize,
    pub pseudo_model: usize,
    pub pseudo_symbolic: usize,
    /// Share of parse-clean unlabeled snippets pseudo-labeled this epoch.
    pub symbolic_coverage: Option<f64>,
    /// Agreement of this epoch's pseudo-labels with the hidden labels.
    pub pseudo_label_accuracy: Option<f64>,
    pub validation_accuracy: Option<f64>,
    pub test_accuracy: f64,
    pub test_macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedReport {
    pub seed: u64,
    pub labeled: usize,
    pub augmented: usize,
    pub augment_rejected: usize,
    pub unlabeled: usize,
    pub selected_epoch: usize,
    pub test: Metrics,
    pub epochs: Vec<EpochRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub macro_f1_mean: f64,
    pub macro_f1_std: f64,
    /// Percentages as `mean±std`.
    pub accuracy: String,
    pub macro_f1: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub config: ExperimentConfig,
    pub class_set: ClassSet,
    pub seeds: Vec<SeedReport>,
    pub summary: Summary,
}

struct Data {
    train: Dataset,
    validation: Option<Vec<LabeledExample>>,
    test: Vec<LabeledExample>,
    class_set: ClassSet,
    sym: Option<SymbolicCache>,
}

fn load_data(cfg: &ExperimentConfig, jobs: usize) -> Result<Data, ExperimentError> {
    let mut train = Dataset::load_jsonl(&cfg.data.train)?;
    if let Some(cs) = cfg.class_set_override() {
        train = Dataset::new(train.entries().to_vec(), cs)?;
    }
    let class_set = train.class_set().clone();
    let gold = |path: &Path| -> Result<Vec<LabeledExample>, ExperimentError> {
        let ds = Dataset::load_jsonl(path)?;
        if let Some(e) = ds.entries().iter().find(|e| e.label.is_none()) {
            return Err(ConfigError(format!(
                "{}: `{}` has no label",
                path.display(),
                e.snippet.id
            ))
            .into());
        }
        Ok(ds.labeled())
    };
    let test = gold(&cfg.data.test)?;
    let validation = cfg.data.validation.as_deref().map(gold).transpose()?;
    let train_ids: HashSet<&str> = train
        .entries()
        .iter()
        .map(|e| e.snippet.id.as_str())
        .collect();
    for e in test.iter().chain(validation.iter().flatten()) {
        if train_ids.contains(e.id()) {
            return Err(ConfigError(format!(
                "`{}` is in both the training and an evaluation set",
                e.id()
            ))
            .into());
        }
    }
    let sym = cfg.experiment.use_sym.then(|| {
        let snippets: Vec<CodeSnippet> = train.snippets().cloned().collect();
        SymbolicCache::compute(&snippets, &class_set, jobs)
    });
    Ok(Data {
        train,
        validation,
        test,
        class_set,
        sym,
    })
}

fn make_classifier(
    cfg: &ExperimentConfig,
    class_set: &ClassSet,
) -> Result<Box<dyn Classifier>, ExperimentError> {
    Ok(match cfg.classifier.backend {
        ClassifierBackend::Builtin => Box::new(BuiltinModel::new(
            class_set.clone(),
            cfg.classifier.hyperparams,
        )),
        ClassifierBackend::External => {
            let params = match &cfg.classifier.params {
                Some(t) => serde_json::to_value(t).map_err(|e| ConfigError(e.to_string()))?,
                None => serde_json::Value::Null,
            };
            Box::new(ExternalClassifier::spawn(
                &cfg.classifier.command,
                class_set.clone(),
                params,
            )?)
        }
    })
}

fn make_backtranslator(
    cfg: &ExperimentConfig,
) -> Result<Option<Box<dyn Backtranslator>>, ExperimentError> {
    let a = &cfg.augmentation;
    if a.mock.is_some() {
        return Ok(Some(Box::new(RenameBacktranslator)));
    }
    if let Some(path) = &a.cache {
        return Ok(Some(Box::new(CachedBacktranslator::load(path)?)));
    }
    if !a.command.is_empty() {
        return Ok(Some(Box::new(ProcessAugmenter::spawn(
            &a.command,
            a.max_in_flight,
        )?)));
    }
    Ok(None)
}

fn evaluate(
    model: &mut dyn Classifier,
    gold: &[LabeledExample],
    cs: &ClassSet,
) -> Result<Metrics, ExperimentError> {
    let snippets: Vec<CodeSnippet> = gold.iter().map(|e| e.snippet.clone()).collect();
    let preds: BTreeMap<String, ComplexityClass> = snippets
        .iter()
        .zip(model.predict(&snippets)?)
        .map(|(s, d)| (s.id.clone(), d.argmax()))
        .collect();
    Ok(compute_metrics(&preds, gold, cs).expect("every snippet predicted"))
}

fn run_seed(cfg: &ExperimentConfig, data: &Data, seed: u64) -> Result<SeedReport, ExperimentError> {
    let run = &cfg.experiment;
    let strategy = cfg.augmentation.strategy()?;
    let artificial =
        strategy.is_some_and(|s| s.sampling == Sampling::Artificial && s.kind.uses_lc());
    let split = if artificial {
        few_shot_split_where(&data.train, run.k_shot, seed, has_loop)?
    } else {
        few_shot_split(&data.train, run.k_shot, seed)?
    };
    let (l_aug, rejected) = match strategy {
        None => (Vec::new(), 0),
        Some(s) => {
            let mut bt = if s.kind.uses_bt() {
                make_backtranslator(cfg)?
            } else {
                None
            };
            let out = augment_dataset(
                &split.labeled,
                s,
                bt.as_mut().map(|b| b.as_mut() as &mut dyn Backtranslator),
            )?;
            (
                out.examples
                    .iter()
                    .map(|a| a.to_labeled())
                    .collect::<Vec<_>>(),
                out.rejected.len(),
            )
        }
    };
    let hidden: HashMap<String, Option<ComplexityClass>> = split
        .unlabeled
        .iter()
        .map(|u| (u.id().to_string(), u.hidden_label()))
        .collect();
    let u: Vec<CodeSnippet> = split.unlabeled.iter().map(|u| u.snippet.clone()).collect();
    let sym = data.sym.as_ref();
    let parse_clean: HashSet<String> = sym
        .map(|c| {
            u.iter()
                .filter(|s| c.classify(s).is_some())
                .map(|s| s.id.clone())
                .collect()
        })
        .unwrap_or_default();

    let augmented = l_aug.len();
    let mut b = make_classifier(cfg, &data.class_set)?;
    let mut b_aug = None;
    let second_pool = match run.mode {
        Mode::SelfTrain => l_aug,
        Mode::CoTrain => {
            b_aug = Some(make_classifier(cfg, &data.class_set)?);
            // Without augmentations the second learner starts from L itself.
            if l_aug.is_empty() {
                split.labeled.clone()
            } else {
                l_aug
            }
        }
    };
    let mut state = SslState::new(split.labeled.clone(), second_pool, u, run.theta);
    let mut epochs = Vec::with_capacity(run.epochs);
    let mut test_metrics = Vec::with_capacity(run.epochs);
    for _ in 0..run.epochs {
        let sym_dyn = sym.map(|c| c as &dyn Symbolic);
        match run.mode {
            Mode::SelfTrain => self_train_epoch(&mut state, b.as_mut(), sym_dyn, seed)?,
            Mode::CoTrain => co_train_epoch(
                &mut state,
                b.as_mut(),
                b_aug.as_mut().map(|m| m.as_mut() as &mut dyn Classifier),
                sym_dyn,
                seed,
            )?,
        }
        let labels: Vec<_> = state.last_epoch_labels().collect();
        let count = |src| labels.iter().filter(|p| p.source == src).count();
        let base: Vec<_> = labels
            .iter()
            .filter(|p| p.learner == Learner::Base)
            .collect();
        let judged: Vec<bool> = base
            .iter()
            .filter_map(|p| {
                hidden
                    .get(&p.snippet_id)
                    .copied()
                    .flatten()
                    .map(|h| h == p.label)
            })
            .collect();
        let covered: HashSet<&str> = labels
            .iter()
            .map(|p| p.snippet_id.as_str())
            .filter(|id| parse_clean.contains(*id))
            .collect();
        let symbolic_coverage = (sym.is_some() && !parse_clean.is_empty())
            .then(|| covered.len() as f64 / parse_clean.len() as f64);
        let validation_accuracy = match &data.validation {
            Some(v) => Some(evaluate(b.as_mut(), v, &data.class_set)?.accuracy),
            None => None,
        };
        let test = evaluate(b.as_mut(), &data.test, &data.class_set)?;
        epochs.push(EpochRecord {
            epoch: state.epoch,
            pool_l: state.l.len(),
            pool_l_aug: state.l_aug.len(),
            pseudo_model: count(Source::Model),
            pseudo_symbolic: count(Source::Symbolic),
            symbolic_coverage,
            pseudo_label_accuracy: (!judged.is_empty())
                .then(|| judged.iter().filter(|c| **c).count() as f64 / judged.len() as f64),
            validation_accuracy,
            test_accuracy: test.accuracy,
            test_macro_f1: test.macro_f1,
        });
        test_metrics.push(test);
    }
    let selected = match run.selection {
        Selection::LastEpoch => epochs.len() - 1,
        Selection::BestValidation => {
            let mut best = 0;
            for (i, e) in epochs.iter().enumerate() {
                if e.validation_accuracy > epochs[best].validation_accuracy {
                    best = i;
                }
            }
            best
        }
    };
    Ok(SeedReport {
        seed,
        labeled: split.labeled.len(),
        augmented,
        augment_rejected: rejected,
        unlabeled: state.u.len(),
        selected_epoch: epochs[selected].epoch,
        test: test_metrics.swap_remove(selected),
        epochs,
    })
}

/// Runs every seed of the configuration, up to `jobs` seeds at a time. The
/// report does not depend on `jobs`.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<RunReport, ExperimentError> {
    cfg.validate()?;
    let jobs = jobs.max(1);
    let data = load_data(cfg, jobs)?;
    let seeds = &cfg.experiment.seeds;
    let results: Mutex<Vec<Option<Result<SeedReport, ExperimentError>>>> =
        Mutex::new((0..seeds.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(seeds.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= seeds.len() {
                    break;
                }
                let r = run_seed(cfg, &data, seeds[i]);
                results.lock().expect("results lock")[i] = Some(r);
            });
        }
    });
    let reports = results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every seed ran"))
        .collect::<Result<Vec<_>, _>>()?;
    let acc: Vec<f64> = reports.iter().map(|r| r.test.accuracy).collect();
    let f1: Vec<f64> = reports.iter().map(|r| r.test.macro_f1).collect();
    let (am, asd) = mean_std(&acc);
    let (fm, fsd) = mean_std(&f1);
    Ok(RunReport {
        name: cfg.name.clone(),
        config: cfg.clone(),
        class_set: data.class_set,
        seeds: reports,
        summary: Summary {
            accuracy_mean: am,
            accuracy_std: asd,
            macro_f1_mean: fm,
            macro_f1_std: fsd,
            accuracy: format_pm(am, asd),
            macro_f1: format_pm(fm, fsd),
        },
    })
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn epochs_csv(&self) -> String {
        let mut out = String::from(
            "seed,epoch,pool_l,pool_l_aug,pseudo_model,pseudo_symbolic,symbolic_coverage,pseudo_label_accuracy,validation_accuracy,test_accuracy,test_macro_f1\n",
        );
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for s in &self.seeds {
            for e in &s.epochs {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{:.6},{:.6}\n",
                    s.seed,
                    e.epoch,
                    e.pool_l,
                    e.pool_l_aug,
                    e.pseudo_model,
                    e.pseudo_symbolic,
                    opt(e.symbolic_coverage),
                    opt(e.pseudo_label_accuracy),
                    opt(e.validation_accuracy),
                    e.test_accuracy,
                    e.test_macro_f1
                ));
            }
        }
        out
    }

    /// Confusion matrices of the selected epochs, one block per seed.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::new();
        for s in &self.seeds {
            for (i, line) in s.test.confusion_csv().lines().enumerate() {
                let seed = if i == 0 {
                    "seed".to_string()
                } else {
                    s.seed.to_string()
                };
                out.push_str(&format!("{seed},{line}\n"));
            }
        }
        out
    }

    /// The table row: accuracy and macro F1 as `mean±std` percentages.
    pub fn table_row(&self) -> String {
        let name = if self.name.is_empty() {
            "run"
        } else {
            &self.name
        };
        format!(
            "{name}\tacc {}\tF1 {}",
            self.summary.accuracy, self.summary.macro_f1
        )
    }

    /// Writes `report.json`, `epochs.csv` and `confusion.csv`. Existing files
    /// are only replaced with `force`.
    pub fn write(&self, dir: &Path, force: bool) -> Result<Vec<PathBuf>, ExperimentError> {
        let files = [
            ("report.json", self.to_json()),
            ("epochs.csv", self.epochs_csv()),
            ("confusion.csv", self.confusion_csv()),
        ];
        let paths: Vec<PathBuf> = files.iter().map(|(n, _)| dir.join(n)).collect();
        if !force {
            if let Some(p) = paths.iter().find(|p| p.exists()) {
                return Err(ExperimentError::Io(format!(
                    "{} exists (use --force to overwrite)",
                    p.display()
                )));
            }
        }
        std::fs::create_dir_all(dir)
            .map_err(|e| ExperimentError::Io(format!("{}: {e}", dir.display())))?;
        for ((_, text), path) in files.iter().zip(&paths) {
            std::fs::write(path, text)
                .map_err(|e| ExperimentError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(paths)
    }
}
