use std::cell::Cell;
use std::collections::HashMap;

use super::*;
use crate::classifier::ClassDistribution;
use crate::dataset::Language;
use ComplexityClass::*;

/// Answers every prediction from a closure over the snippet.
struct Mock {
    cs: ClassSet,
    answer: Box<dyn Fn(&CodeSnippet) -> ClassDistribution>,
    fitted_on: Vec<usize>,
}

impl Mock {
    fn new(answer: impl Fn(&CodeSnippet) -> ClassDistribution + 'static) -> Self {
        Mock {
            cs: ClassSet::all(),
            answer: Box::new(answer),
            fitted_on: Vec::new(),
        }
    }

    fn uniform() -> Self {
        Mock::new(|_| ClassDistribution::uniform(&ClassSet::all()))
    }
}

impl Classifier for Mock {
    fn class_set(&self) -> &ClassSet {
        &self.cs
    }

    fn fit(&mut self, examples: &[LabeledExample], _seed: u64) -> Result<(), ClassifierError> {
        self.fitted_on.push(examples.len());
        Ok(())
    }

    fn predict(
        &mut self,
        snippets: &[CodeSnippet],
    ) -> Result<Vec<ClassDistribution>, ClassifierError> {
        Ok(snippets.iter().map(|s| (self.answer)(s)).collect())
    }
}

/// `p` on `top`, the rest spread evenly over the other six classes.
fn peaked(top: ComplexityClass, p: f64) -> ClassDistribution {
    let rest = (1.0 - p) / 6.0;
    let weights = ComplexityClass::ALL
        .iter()
        .map(|&c| (c, if c == top { p } else { rest }));
    ClassDistribution::from_weights(&ClassSet::all(), weights).unwrap()
}

fn py(id: &str, src: &str) -> CodeSnippet {
    CodeSnippet::new(id, src, Language::Python)
}

fn loop_snippet(id: &str) -> CodeSnippet {
    py(id, "n = int(input())\nfor i in range(n):\n    print(i)\n")
}

fn broken(id: &str) -> CodeSnippet {
    py(id, "def (:\n")
}

fn labeled(prefix: &str, n: usize) -> Vec<LabeledExample> {
    (0..n)
        .map(|i| {
            LabeledExample::new(
                py(&format!("{prefix}{i}"), "x = 1\n"),
                ComplexityClass::ALL[i % 7],
            )
        })
        .collect()
}

fn analyzer(s: &CodeSnippet) -> Option<ComplexityClass> {
    crate::symbolic::analyze(s).ok().map(|a| a.class)
}

#[test]
fn threshold_is_inclusive() {
    let d = peaked(Cubic, 0.7);
    assert_eq!(d.max_prob(), 0.7);
    let mut m = Mock::new(move |_| d.clone());
    let pl = pseudo_label(&mut m, None, &[broken("u")], 0.7, 1, Learner::Base).unwrap();
    assert_eq!(pl.len(), 1);
    assert_eq!(pl[0].source, Source::Model);
    assert_eq!(pl[0].label, Cubic);
    assert_eq!(pl[0].confidence, Some(0.7));
}

#[test]
fn low_confidence_falls_back_to_symbolic() {
    let mut m = Mock::new(|_| peaked(Cubic, 0.5));
    let sym = analyzer;
    let pl = pseudo_label(
        &mut m,
        Some(&sym),
        &[loop_snippet("a"), broken("b")],
        0.7,
        1,
        Learner::Base,
    )
    .unwrap();
    assert_eq!(pl.len(), 1, "the unparseable snippet gets nothing");
    assert_eq!(pl[0].snippet_id, "a");
    assert_eq!(pl[0].source, Source::Symbolic);
    assert_eq!(pl[0].label, Linear);
    assert_eq!(pl[0].confidence, None);
}

#[test]
fn symbolic_is_not_consulted_for_confident_items() {
    let calls = Cell::new(0);
    let sym = |s: &CodeSnippet| {
        calls.set(calls.get() + 1);
        analyzer(s)
    };
    let mut m = Mock::new(|s| {
        if s.id == "sure" {
            peaked(Quadratic, 0.9)
        } else {
            peaked(Quadratic, 0.2)
        }
    });
    let pl = pseudo_label(
        &mut m,
        Some(&sym),
        &[loop_snippet("sure"), loop_snippet("unsure")],
        0.7,
        1,
        Learner::Base,
    )
    .unwrap();
    assert_eq!(calls.get(), 1);
    let by_id: HashMap<_, _> = pl.iter().map(|p| (p.snippet_id.as_str(), p)).collect();
    assert_eq!(by_id["sure"].source, Source::Model);
    assert_eq!(by_id["unsure"].source, Source::Symbolic);
}

#[test]
fn bad_threshold_is_rejected() {
    let mut m = Mock::uniform();
    assert_eq!(
        pseudo_label(&mut m, None, &[], 0.0, 1, Learner::Base).unwrap_err(),
        SslError::BadThreshold(0.0)
    );
}

#[test]
fn self_train_folds_augmentations_into_l() {
    let u: Vec<_> = (0..5).map(|i| broken(&format!("u{i}"))).collect();
    let mut state = SslState::new(labeled("l", 35), labeled("a", 35), u, 0.7);
    let mut b = Mock::uniform();
    self_train_epoch(&mut state, &mut b, Some(&analyzer), 1).unwrap();
    assert_eq!(state.l.len(), 70);
    assert_eq!(b.fitted_on, [70]);
    assert_eq!(state.last_epoch_labels().count(), 0);
}

#[test]
fn uniform_model_yields_only_symbolic_labels() {
    let u: Vec<_> = (0..6).map(|i| loop_snippet(&format!("u{i}"))).collect();
    let mut state = SslState::new(labeled("l", 7), Vec::new(), u, 0.7);
    self_train_epoch(&mut state, &mut Mock::uniform(), Some(&analyzer), 1).unwrap();
    let labels: Vec<_> = state.last_epoch_labels().collect();
    assert_eq!(labels.len(), 6);
    assert!(labels
        .iter()
        .all(|p| p.source == Source::Symbolic && p.label == Linear));
    assert_eq!(state.l.len(), 13);
}

#[test]
fn repeated_epochs_are_idempotent_on_pools() {
    let u: Vec<_> = (0..4).map(|i| loop_snippet(&format!("u{i}"))).collect();
    let mut state = SslState::new(labeled("l", 7), Vec::new(), u, 0.7);
    let mut b = Mock::new(|_| peaked(Quadratic, 0.95));
    self_train_epoch(&mut state, &mut b, None, 1).unwrap();
    let after_one = state.l.examples().to_vec();
    self_train_epoch(&mut state, &mut b, None, 1).unwrap();
    assert_eq!(state.l.examples(), &after_one[..]);
}

#[test]
fn originals_are_never_relabeled_and_pools_only_grow() {
    let originals = labeled("l", 7);
    // An unlabeled twin of an original id, plus a fresh snippet.
    let u = vec![py("l0", "x = 1\n"), loop_snippet("fresh")];
    let mut state = SslState::new(originals.clone(), Vec::new(), u, 0.7);
    let mut flip = 0;
    let mut sizes = Vec::new();
    for _ in 0..3 {
        flip += 1;
        let top = if flip % 2 == 0 { Exponential } else { LogN };
        let mut b = Mock::new(move |_| peaked(top, 0.9));
        self_train_epoch(&mut state, &mut b, None, 1).unwrap();
        sizes.push(state.l.len());
        assert_eq!(state.l.label_of("l0"), Some(originals[0].label));
        assert_eq!(
            state.l.label_of("fresh"),
            Some(top),
            "latest pseudo-label wins"
        );
    }
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn co_training_cross_updates() {
    let u = vec![broken("u1"), broken("u2")];
    let mut state = SslState::new(labeled("l", 7), labeled("a", 7), u, 0.7);
    let mut b = Mock::new(|s| {
        if s.id == "u1" {
            peaked(Cubic, 0.9)
        } else {
            peaked(Cubic, 0.1)
        }
    });
    let mut b_aug = Mock::new(|s| {
        if s.id == "u2" {
            peaked(LogN, 0.9)
        } else {
            peaked(LogN, 0.1)
        }
    });
    co_train_epoch(&mut state, &mut b, Some(&mut b_aug), None, 3).unwrap();
    assert_eq!(state.l.label_of("u2"), Some(LogN));
    assert_eq!(state.l.label_of("u1"), None);
    assert_eq!(state.l_aug.label_of("u1"), Some(Cubic));
    assert_eq!(state.l_aug.label_of("u2"), None);
    assert_eq!(b.fitted_on, [7]);
    assert_eq!(b_aug.fitted_on, [7]);
}

#[test]
fn co_training_fallback_is_model_independent() {
    let u: Vec<_> = (0..3).map(|i| loop_snippet(&format!("u{i}"))).collect();
    let mut state = SslState::new(labeled("l", 7), labeled("a", 7), u, 0.7);
    co_train_epoch(
        &mut state,
        &mut Mock::uniform(),
        Some(&mut Mock::uniform()),
        Some(&analyzer),
        3,
    )
    .unwrap();
    for i in 0..3 {
        let id = format!("u{i}");
        assert_eq!(state.l.label_of(&id), Some(Linear));
        assert_eq!(state.l_aug.label_of(&id), Some(Linear));
    }
}

#[test]
fn co_training_requires_two_models() {
    let mut state = SslState::new(labeled("l", 7), Vec::new(), Vec::new(), 0.7);
    assert_eq!(
        co_train_epoch(&mut state, &mut Mock::uniform(), None, None, 1).unwrap_err(),
        SslError::MissingAugModel
    );
}

#[test]
fn fit_seeds_differ_by_epoch_and_learner() {
    let a = fit_seed(1, 1, Learner::Base);
    assert_ne!(a, fit_seed(1, 2, Learner::Base));
    assert_ne!(a, fit_seed(1, 1, Learner::Aug));
    assert_ne!(a, fit_seed(2, 1, Learner::Base));
    assert_eq!(a, fit_seed(1, 1, Learner::Base));
}
