//! Semi-supervised training: confidence-thresholded pseudo-labels with a
//! symbolic fallback, driven by self-training or co-training.

pub mod config;
pub mod experiment;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

pub use config::{ClassifierBackend, ExperimentConfig, Mode, Selection};
pub use experiment::{run_experiment, EpochRecord, RunReport, SeedReport};

use crate::class::{ClassSet, ComplexityClass};
use crate::classifier::{Classifier, ClassifierError};
use crate::dataset::{CodeSnippet, LabeledExample};
use crate::symbolic::analyze;

/// Default confidence threshold.
pub const THETA: f64 = 0.7;
/// Default number of training epochs.
pub const EPOCHS: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SslError {
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("co-training needs a second model")]
    MissingAugModel,
    #[error("threshold {0} is outside (0, 1]")]
    BadThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Model,
    Symbolic,
}

/// Which learner produced a pseudo-label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Learner {
    Base,
    Aug,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoLabel {
    pub snippet_id: String,
    pub label: ComplexityClass,
    pub source: Source,
    /// Model probability of `label`; absent for symbolic labels.
    pub confidence: Option<f64>,
    pub epoch: usize,
    pub learner: Learner,
}

/// Symbolic labels for unlabeled snippets.
pub trait Symbolic {
    fn classify(&self, snippet: &CodeSnippet) -> Option<ComplexityClass>;
}

impl<F: Fn(&CodeSnippet) -> Option<ComplexityClass>> Symbolic for F {
    fn classify(&self, snippet: &CodeSnippet) -> Option<ComplexityClass> {
        self(snippet)
    }
}

/// The analyzer's verdicts, computed once and clamped onto a class set.
#[derive(Debug, Clone, Default)]
pub struct SymbolicCache {
    labels: HashMap<String, Option<ComplexityClass>>,
}

impl SymbolicCache {
    /// Analyzes every snippet, fanning out over up to `jobs` threads.
    pub fn compute(snippets: &[CodeSnippet], class_set: &ClassSet, jobs: usize) -> Self {
        let chunk = snippets.len().div_ceil(jobs.max(1)).max(1);
        let results: Vec<Vec<(String, Option<ComplexityClass>)>> = std::thread::scope(|scope| {
            let handles: Vec<_> = snippets
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|s| {
                                (
                                    s.id.clone(),
                                    analyze(s).ok().map(|a| class_set.clamp(a.class)),
                                )
                            })
                            .collect()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("analysis thread"))
                .collect()
        });
        SymbolicCache {
            labels: results.into_iter().flatten().collect(),
        }
    }

    /// Snippets the analyzer could handle.
    pub fn parse_clean(&self) -> usize {
        self.labels.values().filter(|l| l.is_some()).count()
    }
}

impl Symbolic for SymbolicCache {
    fn classify(&self, snippet: &CodeSnippet) -> Option<ComplexityClass> {
        self.labels.get(&snippet.id).copied().flatten()
    }
}

/// Pseudo-labels `u`: the model's argmax when its probability reaches
/// `theta`, otherwise the symbolic label when there is one.
pub fn pseudo_label(
    model: &mut dyn Classifier,
    sym: Option<&dyn Symbolic>,
    u: &[CodeSnippet],
    theta: f64,
    epoch: usize,
    learner: Learner,
) -> Result<Vec<PseudoLabel>, SslError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(SslError::BadThreshold(theta));
    }
    let dists = model.predict(u)?;
    let mut out = Vec::new();
    for (s, d) in u.iter().zip(dists) {
        let c = d.argmax();
        let p = d.prob(c);
        let label = if p >= theta {
            Some((c, Source::Model, Some(p)))
        } else {
            sym.and_then(|sym| sym.classify(s))
                .map(|c| (c, Source::Symbolic, None))
        };
        if let Some((label, source, confidence)) = label {
            out.push(PseudoLabel {
                snippet_id: s.id.clone(),
                label,
                source,
                confidence,
                epoch,
                learner,
            });
        }
    }
    Ok(out)
}

/// A labeled pool with stable insertion order. Protected entries (few-shot
/// originals and augmentations) are never relabeled; pseudo-labeled entries
/// are overwritten by newer pseudo-labels.
#[derive(Debug, Clone, Default)]
pub struct Pool {
    examples: Vec<LabeledExample>,
    index: HashMap<String, usize>,
    protected: HashSet<String>,
}

impl Pool {
    pub fn new(originals: impl IntoIterator<Item = LabeledExample>) -> Self {
        let mut p = Pool::default();
        for e in originals {
            p.insert_protected(e);
        }
        p
    }

    /// Adds an example unless its id is already present.
    pub fn insert_protected(&mut self, e: LabeledExample) -> bool {
        if self.index.contains_key(e.id()) {
            return false;
        }
        self.protected.insert(e.id().to_string());
        self.index.insert(e.id().to_string(), self.examples.len());
        self.examples.push(e);
        true
    }

    /// Adds or relabels a pseudo-labeled example. Returns whether the pool
    /// changed.
    pub fn upsert_pseudo(&mut self, snippet: &CodeSnippet, label: ComplexityClass) -> bool {
        if self.protected.contains(&snippet.id) {
            return false;
        }
        match self.index.get(&snippet.id) {
            Some(&i) if self.examples[i].label == label => false,
            Some(&i) => {
                self.examples[i].label = label;
                true
            }
            None => {
                self.index.insert(snippet.id.clone(), self.examples.len());
                self.examples
                    .push(LabeledExample::new(snippet.clone(), label));
                true
            }
        }
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn label_of(&self, id: &str) -> Option<ComplexityClass> {
        self.index.get(id).map(|&i| self.examples[i].label)
    }

    pub fn is_protected(&self, id: &str) -> bool {
        self.protected.contains(id)
    }
}

/// Engine state shared by both training modes.
#[derive(Debug, Clone)]
pub struct SslState {
    pub l: Pool,
    pub l_aug: Pool,
    pub u: Vec<CodeSnippet>,
    pub theta: f64,
    pub epoch: usize,
    pub log: Vec<PseudoLabel>,
}

impl SslState {
    pub fn new(
        l: Vec<LabeledExample>,
        l_aug: Vec<LabeledExample>,
        u: Vec<CodeSnippet>,
        theta: f64,
    ) -> Self {
        SslState {
            l: Pool::new(l),
            l_aug: Pool::new(l_aug),
            u,
            theta,
            epoch: 0,
            log: Vec::new(),
        }
    }

    /// Pseudo-labels logged in the most recent epoch.
    pub fn last_epoch_labels(&self) -> impl Iterator<Item = &PseudoLabel> {
        let e = self.epoch;
        self.log.iter().filter(move |p| p.epoch == e)
    }

    fn merge(&mut self, into_aug: bool, labels: &[PseudoLabel]) {
        let by_id: HashMap<&str, &CodeSnippet> =
            self.u.iter().map(|s| (s.id.as_str(), s)).collect();
        let pool = if into_aug {
            &mut self.l_aug
        } else {
            &mut self.l
        };
        for p in labels {
            if let Some(s) = by_id.get(p.snippet_id.as_str()) {
                pool.upsert_pseudo(s, p.label);
            }
        }
    }
}

/// Mixes a run seed with an epoch and learner into a fit seed.
pub fn fit_seed(seed: u64, epoch: usize, learner: Learner) -> u64 {
    let mut z = seed
        .wrapping_add((epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(match learner {
            Learner::Base => 0,
            Learner::Aug => 0xD1B5_4A32_D192_ED03,
        });
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One self-training epoch: fold the augmentations into L, fit B on L,
/// pseudo-label U and merge the labels into L.
pub fn self_train_epoch(
    state: &mut SslState,
    b: &mut dyn Classifier,
    sym: Option<&dyn Symbolic>,
    seed: u64,
) -> Result<(), SslError> {
    state.epoch += 1;
    for e in state.l_aug.examples().to_vec() {
        state.l.insert_protected(e);
    }
    b.fit(
        state.l.examples(),
        fit_seed(seed, state.epoch, Learner::Base),
    )?;
    let pl = pseudo_label(b, sym, &state.u, state.theta, state.epoch, Learner::Base)?;
    state.merge(false, &pl);
    state.log.extend(pl);
    Ok(())
}

/// One co-training epoch: fit B on L and B_aug on L_aug, pseudo-label U with
/// both, then cross-merge: B_aug's labels extend L and B's extend L_aug.
pub fn co_train_epoch(
    state: &mut SslState,
    b: &mut dyn Classifier,
    b_aug: Option<&mut dyn Classifier>,
    sym: Option<&dyn Symbolic>,
    seed: u64,
) -> Result<(), SslError> {
    let b_aug = b_aug.ok_or(SslError::MissingAugModel)?;
    state.epoch += 1;
    b.fit(
        state.l.examples(),
        fit_seed(seed, state.epoch, Learner::Base),
    )?;
    b_aug.fit(
        state.l_aug.examples(),
        fit_seed(seed, state.epoch, Learner::Aug),
    )?;
    let u_pl = pseudo_label(b, sym, &state.u, state.theta, state.epoch, Learner::Base)?;
    let u_aug_pl = pseudo_label(b_aug, sym, &state.u, state.theta, state.epoch, Learner::Aug)?;
    state.merge(false, &u_aug_pl);
    state.merge(true, &u_pl);
    state.log.extend(u_pl);
    state.log.extend(u_aug_pl);
    Ok(())
}

#[cfg(test)]
mod tests;
