mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tcpred::classifier::{BuiltinModel, Classifier, Hyperparams};
use tcpred::{ClassSet, ComplexityClass, Dataset, LabeledExample};

fn load(name: &str) -> Vec<LabeledExample> {
    Dataset::load_jsonl(&common::fixture_dir().join("classifier").join(name))
        .unwrap()
        .labeled()
}

/// Worst per-coordinate relative error between the analytic gradient and
/// central finite differences, at random parameters.
fn gradient_error(l2: f64) -> f64 {
    let data = load("gradient_five.jsonl");
    let hyper = Hyperparams {
        l2,
        ..Hyperparams::default()
    };
    let mut m = BuiltinModel::new(ClassSet::all(), hyper);
    m.loss(&data).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let theta: Vec<f64> = m
        .parameters()
        .iter()
        .map(|_| rng.gen_range(-0.5..0.5))
        .collect();
    m.set_parameters(&theta);
    let analytic = m.loss_gradient(&data).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..theta.len() {
        let mut p = theta.clone();
        p[i] += h;
        m.set_parameters(&p);
        let up = m.loss(&data).unwrap();
        p[i] -= 2.0 * h;
        m.set_parameters(&p);
        let down = m.loss(&data).unwrap();
        let numeric = (up - down) / (2.0 * h);
        let a = analytic[i];
        let denom = a.abs().max(numeric.abs());
        if denom > 1e-7 {
            worst = worst.max((a - numeric).abs() / denom);
        }
    }
    worst
}

#[test]
fn gradient_matches_finite_differences() {
    for l2 in [0.0, 1e-4, 1e-1] {
        let err = gradient_error(l2);
        assert!(err < 1e-4, "l2 {l2}: relative error {err:e}");
    }
}

#[test]
fn separable_classes_are_learned() {
    let data = load("separable.jsonl");
    let mut m = BuiltinModel::new(ClassSet::all(), Hyperparams::default());
    m.fit(&data, 5).unwrap();
    let snippets: Vec<_> = data.iter().map(|e| e.snippet.clone()).collect();
    let preds = m.predict(&snippets).unwrap();
    for (e, d) in data.iter().zip(&preds) {
        assert_eq!(d.argmax(), e.label, "{}", e.id());
        let total: f64 = d.probs().values().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert_eq!(d.probs().len(), 7);
    }
}

#[test]
fn fixed_seed_gives_identical_weights() {
    let data = load("separable.jsonl");
    let fit = |seed| {
        let mut m = BuiltinModel::new(ClassSet::all(), Hyperparams::default());
        m.fit(&data, seed).unwrap();
        m.parameters()
            .iter()
            .map(|p| p.to_bits())
            .collect::<Vec<_>>()
    };
    assert_eq!(fit(3), fit(3));
    assert_ne!(fit(3), fit(4));
}

#[test]
fn warm_start_continues_from_previous_weights() {
    let data = load("separable.jsonl");
    let hyper = Hyperparams {
        epochs_per_fit: 1,
        ..Hyperparams::default()
    };
    let mut m = BuiltinModel::new(ClassSet::all(), hyper);
    m.fit(&data, 1).unwrap();
    let after_one = m.loss(&data).unwrap();
    m.fit(&data, 2).unwrap();
    assert!(m.loss(&data).unwrap() < after_one);
}

#[test]
fn relabeling_classes_permutes_predictions() {
    use ComplexityClass::*;
    let data = load("gradient_five.jsonl");
    let swap = |c: ComplexityClass| match c {
        Linear => Cubic,
        Cubic => Linear,
        Constant => Exponential,
        Exponential => Constant,
        other => other,
    };
    let permuted: Vec<_> = data
        .iter()
        .map(|e| LabeledExample::new(e.snippet.clone(), swap(e.label)))
        .collect();
    let mut a = BuiltinModel::new(ClassSet::all(), Hyperparams::default());
    let mut b = BuiltinModel::new(ClassSet::all(), Hyperparams::default());
    a.fit(&data, 9).unwrap();
    b.fit(&permuted, 9).unwrap();
    let probe: Vec<_> = load("separable.jsonl")
        .into_iter()
        .map(|e| e.snippet)
        .collect();
    for (pa, pb) in a
        .predict(&probe)
        .unwrap()
        .iter()
        .zip(b.predict(&probe).unwrap())
    {
        for c in ComplexityClass::ALL {
            assert!((pa.prob(c) - pb.prob(swap(c))).abs() < 1e-9, "{c}");
        }
    }
}
