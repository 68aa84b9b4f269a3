//! Runs alone in its own binary because it sets the timeout variable.

use std::time::{Duration, Instant};

use serde_json::Value;
use tcpred::augment::bt::{Backtranslator, ProcessAugmenter};
use tcpred::augment::AugmentError;
use tcpred::classifier::{ClassifierError, ExternalClassifier};
use tcpred::process::TIMEOUT_ENV;
use tcpred::{ClassSet, CodeSnippet, Language};

#[test]
fn silent_subprocesses_time_out() {
    std::env::set_var(TIMEOUT_ENV, "0.5");
    let silent = vec!["sleep".to_string(), "30".to_string()];

    let start = Instant::now();
    let mut bt = ProcessAugmenter::spawn(&silent, 1).unwrap();
    let s = CodeSnippet::new("a", "x = 1\n", Language::Python);
    match bt.backtranslate(&s) {
        Err(AugmentError::AugmenterError(msg)) => assert!(msg.contains("did not answer"), "{msg}"),
        other => panic!("expected a timeout, got {other:?}"),
    }
    drop(bt);

    match ExternalClassifier::spawn(&silent, ClassSet::all(), Value::Null) {
        Err(ClassifierError::BackendUnavailable(msg)) => {
            assert!(msg.contains("did not answer"), "{msg}")
        }
        other => panic!("expected a timeout, got {:?}", other.err()),
    }
    assert!(start.elapsed() < Duration::from_secs(10));
}
