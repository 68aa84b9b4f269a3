//! Both subprocess protocols exercised against the binary's own test servers.

mod common;

use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};

use serde_json::{json, Value};
use tcpred::augment::bt::{
    external_backtranslate, rename_variables, Backtranslator, ProcessAugmenter,
};
use tcpred::augment::{augment_dataset, AugKind, AugMethod, AugStrategy, AugmentError, Sampling};
use tcpred::classifier::{
    BuiltinModel, Classifier, ClassifierError, ExternalClassifier, Hyperparams,
};
use tcpred::ssl::{pseudo_label, Learner, Source, SslError};
use tcpred::{ClassSet, ComplexityClass, Dataset, LabeledExample};

const EXE: &str = env!("CARGO_BIN_EXE_tcpred");

fn command(args: &[&str]) -> Vec<String> {
    std::iter::once(EXE)
        .chain(args.iter().copied())
        .map(String::from)
        .collect()
}

fn classifier(mode: &str) -> Result<ExternalClassifier, ClassifierError> {
    ExternalClassifier::spawn(
        &command(&["serve-classifier", "--mode", mode]),
        ClassSet::all(),
        Value::Null,
    )
}

fn augmenter(mode: &str, in_flight: usize) -> ProcessAugmenter {
    ProcessAugmenter::spawn(&command(&["mock-augmenter", "--mode", mode]), in_flight).unwrap()
}

fn separable() -> Vec<LabeledExample> {
    Dataset::load_jsonl(&common::fixture_dir().join("classifier/separable.jsonl"))
        .unwrap()
        .labeled()
}

fn oracle_examples() -> Vec<LabeledExample> {
    common::oracle()
        .into_iter()
        .map(|(s, c)| LabeledExample::new(s, c))
        .collect()
}

#[test]
fn uniform_backend_returns_uniform_distributions() {
    let mut m = classifier("uniform").unwrap();
    m.fit(&separable(), 1).unwrap();
    let snippets: Vec<_> = separable().into_iter().map(|e| e.snippet).collect();
    let dists = m.predict(&snippets).unwrap();
    assert_eq!(dists.len(), snippets.len());
    for d in dists {
        for c in ComplexityClass::ALL {
            assert!((d.prob(c) - 1.0 / 7.0).abs() < 1e-12);
        }
    }
}

#[test]
fn unnormalized_reply_is_a_protocol_violation() {
    let mut m = classifier("unnormalized").unwrap();
    let snippets: Vec<_> = separable().into_iter().take(2).map(|e| e.snippet).collect();
    match m.predict(&snippets) {
        Err(ClassifierError::ProtocolViolation(msg)) => assert!(msg.contains("sum"), "{msg}"),
        other => panic!("expected a protocol violation, got {other:?}"),
    }
}

#[test]
fn peaked_backend_at_threshold_yields_model_labels() {
    let mut m = classifier("peaked:0.7").unwrap();
    let snippets: Vec<_> = separable().into_iter().take(3).map(|e| e.snippet).collect();
    let labels = pseudo_label(&mut m, None, &snippets, 0.7, 1, Learner::Base).unwrap();
    assert_eq!(labels.len(), 3);
    for l in labels {
        assert_eq!(l.source, Source::Model);
        assert_eq!(l.label, ComplexityClass::Constant);
    }
}

#[test]
fn external_builtin_matches_in_process_model() {
    let train = separable();
    let snippets: Vec<_> = oracle_examples().into_iter().map(|e| e.snippet).collect();
    let mut local = BuiltinModel::new(ClassSet::all(), Hyperparams::default());
    local.fit(&train, 9).unwrap();
    let mut remote = classifier("builtin").unwrap();
    remote.fit(&train, 9).unwrap();
    let a = local.predict(&snippets).unwrap();
    let b = remote.predict(&snippets).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.argmax(), y.argmax());
        for c in ComplexityClass::ALL {
            assert!((x.prob(c) - y.prob(c)).abs() < 1e-9);
        }
    }
}

#[test]
fn handshake_hyperparameters_reach_the_server() {
    let train = separable();
    let hyper = Hyperparams {
        epochs_per_fit: 3,
        ..Hyperparams::default()
    };
    let snippets: Vec<_> = oracle_examples().into_iter().map(|e| e.snippet).collect();
    let mut local = BuiltinModel::new(ClassSet::all(), hyper);
    local.fit(&train, 2).unwrap();
    let mut remote = ExternalClassifier::spawn(
        &command(&["serve-classifier"]),
        ClassSet::all(),
        serde_json::to_value(hyper).unwrap(),
    )
    .unwrap();
    remote.fit(&train, 2).unwrap();
    let a = local.predict(&snippets).unwrap();
    let b = remote.predict(&snippets).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.max_prob() - y.max_prob()).abs() < 1e-9);
    }
}

#[test]
fn error_replies_surface_as_backend_unavailable() {
    // The augmenter answers the handshake with an error object.
    let wrong =
        ExternalClassifier::spawn(&command(&["mock-augmenter"]), ClassSet::all(), Value::Null);
    match wrong {
        Err(ClassifierError::BackendUnavailable(msg)) => {
            assert!(msg.contains("bad request"), "{msg}")
        }
        other => panic!("expected an unavailable backend, got {:?}", other.err()),
    }
    let missing = ExternalClassifier::spawn(
        &["/no/such/backend".to_string()],
        ClassSet::all(),
        Value::Null,
    );
    assert!(matches!(
        missing,
        Err(ClassifierError::BackendUnavailable(_))
    ));
}

#[test]
fn classifier_errors_propagate_through_pseudo_labelling() {
    let mut m = classifier("unnormalized").unwrap();
    let snippets: Vec<_> = separable().into_iter().take(1).map(|e| e.snippet).collect();
    let err = pseudo_label(&mut m, None, &snippets, 0.7, 1, Learner::Base).unwrap_err();
    assert!(matches!(
        err,
        SslError::Classifier(ClassifierError::ProtocolViolation(_))
    ));
}

#[test]
fn server_survives_malformed_requests() {
    let mut child = Command::new(EXE)
        .args(["serve-classifier", "--mode", "uniform"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let mut stdout = BufReader::new(child.stdout.take().unwrap());
    let mut ask = |line: &str| -> Value {
        writeln!(stdin, "{line}").unwrap();
        stdin.flush().unwrap();
        let mut reply = String::new();
        stdout.read_line(&mut reply).unwrap();
        serde_json::from_str(&reply).unwrap()
    };
    assert!(ask("not json").get("error").is_some());
    assert!(ask(r#"{"op":"dance"}"#).get("error").is_some());
    assert!(
        ask(r#"{"op":"predict","examples":[]}"#)
            .get("error")
            .is_some(),
        "predict before hello"
    );
    let hello = ask(&json!({"op": "hello", "classes": ["constant", "linear"]}).to_string());
    assert_eq!(hello["classes"], json!(["constant", "linear"]));
    let reply =
        ask(r#"{"op":"predict","examples":[{"id":"a","code":"x = 1\n","language":"python"}]}"#);
    assert_eq!(
        reply["predictions"][0]["probs"],
        json!({"constant": 0.5, "linear": 0.5})
    );
    drop(stdin);
    assert!(child.wait().unwrap().success());
}

#[test]
fn mock_augmenter_renames_round_trip() {
    let examples = oracle_examples();
    let mut bt = augmenter("rename", 4);
    let snippets: Vec<_> = examples.iter().map(|e| e.snippet.clone()).collect();
    let codes = bt.backtranslate_many(&snippets);
    assert_eq!(codes.len(), snippets.len());
    for (s, r) in snippets.iter().zip(codes) {
        match rename_variables(s) {
            Some(expected) => assert_eq!(r.unwrap(), expected, "{}", s.id),
            None => assert!(
                matches!(r, Err(AugmentError::AugmenterError(_))),
                "{}",
                s.id
            ),
        }
    }
}

#[test]
fn pipelining_does_not_change_results() {
    let snippets: Vec<_> = oracle_examples().into_iter().map(|e| e.snippet).collect();
    let serial = augmenter("rename", 1).backtranslate_many(&snippets);
    let piped = augmenter("rename", 8).backtranslate_many(&snippets);
    assert_eq!(serial, piped);
}

#[test]
fn identity_and_garbage_responses_are_rejected() {
    let s = oracle_examples().remove(4);
    let identity = external_backtranslate(&s.snippet, &mut augmenter("identity", 1));
    assert!(
        matches!(identity, Err(AugmentError::InvalidAugmentation(_))),
        "{identity:?}"
    );
    let garbage = external_backtranslate(&s.snippet, &mut augmenter("garbage", 1));
    assert!(
        matches!(garbage, Err(AugmentError::InvalidAugmentation(_))),
        "{garbage:?}"
    );
}

#[test]
fn augmenter_errors_drop_only_the_failed_records() {
    let examples = oracle_examples();
    let strategy = AugStrategy {
        kind: AugKind::BtPlusLc,
        sampling: Sampling::Natural,
    };
    let mut bt = augmenter("error", 2);
    let out = augment_dataset(
        &examples,
        strategy,
        Some(&mut bt as &mut dyn Backtranslator),
    )
    .unwrap();
    assert!(out.examples.iter().all(|a| a.method == AugMethod::Lc));
    assert!(!out.examples.is_empty());
    assert_eq!(out.rejected.len(), examples.len());
    assert!(out
        .rejected
        .iter()
        .all(|(_, e)| *e == AugmentError::AugmenterError("mock failure".into())));
}

#[test]
fn unstartable_and_missing_augmenters() {
    assert!(matches!(
        ProcessAugmenter::spawn(&[], 1),
        Err(AugmentError::AugmenterUnavailable)
    ));
    assert!(matches!(
        ProcessAugmenter::spawn(&["/no/such/augmenter".to_string()], 1),
        Err(AugmentError::AugmenterError(_))
    ));
    let strategy = AugStrategy {
        kind: AugKind::Bt,
        sampling: Sampling::Natural,
    };
    let err = augment_dataset(&oracle_examples(), strategy, None).unwrap_err();
    assert_eq!(err, AugmentError::AugmenterUnavailable);
}
