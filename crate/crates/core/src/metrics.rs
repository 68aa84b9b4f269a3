//! Accuracy, per-class and macro F1, confusion matrices and seed aggregation.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::class::{ClassSet, ComplexityClass};
use crate::dataset::LabeledExample;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub macro_f1: f64,
    pub per_class_f1: BTreeMap<ComplexityClass, f64>,
    /// Rows are gold classes, columns predicted classes, both in class-set order.
    pub confusion: Vec<Vec<u64>>,
    pub class_set: ClassSet,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("no prediction for `{0}`")]
    MissingPrediction(String),
}

/// Scores `predictions` against `gold`. Predictions outside `class_set` are
/// clamped onto it. Classes absent from both gold and predictions score F1 = 0.
pub fn compute_metrics(
    predictions: &BTreeMap<String, ComplexityClass>,
    gold: &[LabeledExample],
    class_set: &ClassSet,
) -> Result<Metrics, MetricsError> {
    let n = class_set.len();
    let mut confusion = vec![vec![0u64; n]; n];
    for ex in gold {
        let pred = predictions
            .get(ex.id())
            .ok_or_else(|| MetricsError::MissingPrediction(ex.id().to_string()))?;
        let row = class_set
            .position(class_set.clamp(ex.label))
            .expect("clamped class is a member");
        let col = class_set
            .position(class_set.clamp(*pred))
            .expect("clamped class is a member");
        confusion[row][col] += 1;
    }
    Ok(from_confusion(confusion, class_set.clone()))
}

pub fn from_confusion(confusion: Vec<Vec<u64>>, class_set: ClassSet) -> Metrics {
    let n = class_set.len();
    let total: u64 = confusion.iter().flatten().sum();
    let correct: u64 = (0..n).map(|i| confusion[i][i]).sum();
    let accuracy = if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    };
    let mut per_class_f1 = BTreeMap::new();
    for (i, &class) in class_set.classes().iter().enumerate() {
        let tp = confusion[i][i] as f64;
        let gold_count: u64 = confusion[i].iter().sum();
        let pred_count: u64 = confusion.iter().map(|row| row[i]).sum();
        let denom = gold_count as f64 + pred_count as f64;
        let f1 = if denom == 0.0 { 0.0 } else { 2.0 * tp / denom };
        per_class_f1.insert(class, f1);
    }
    let macro_f1 = if n == 0 {
        0.0
    } else {
        per_class_f1.values().sum::<f64>() / n as f64
    };
    Metrics {
        accuracy,
        macro_f1,
        per_class_f1,
        confusion,
        class_set,
    }
}

impl Metrics {
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("gold\\pred");
        for c in self.class_set.classes() {
            out.push(',');
            out.push_str(c.name());
        }
        out.push('\n');
        for (c, row) in self.class_set.classes().iter().zip(&self.confusion) {
            out.push_str(c.name());
            for v in row {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Mean and sample standard deviation (n - 1 denominator; zero for n < 2).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Formats a fraction pair as percentage `mean±std`, e.g. `54.64±3.77`.
pub fn format_pm(mean: f64, std: f64) -> String {
    format!("{:.2}±{:.2}", mean * 100.0, std * 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::ComplexityClass::*;
    use crate::dataset::{CodeSnippet, Language};

    fn gold(labels: &[ComplexityClass]) -> Vec<LabeledExample> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                LabeledExample::new(CodeSnippet::new(i.to_string(), "x", Language::Python), l)
            })
            .collect()
    }

    fn preds(labels: &[ComplexityClass]) -> BTreeMap<String, ComplexityClass> {
        labels
            .iter()
            .enumerate()
            .map(|(i, &l)| (i.to_string(), l))
            .collect()
    }

    #[test]
    fn all_correct() {
        let g = [Constant, Linear, Quadratic];
        let m = compute_metrics(&preds(&g), &gold(&g), &ClassSet::new(g)).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.macro_f1, 1.0);
    }

    #[test]
    fn hand_computed_two_class_case() {
        // gold {A,A,B,B}, preds {A,B,B,B}: TP_A=1, FN_A=1; TP_B=2, FP_B=1.
        let set = ClassSet::new([Constant, Linear]);
        let m = compute_metrics(
            &preds(&[Constant, Linear, Linear, Linear]),
            &gold(&[Constant, Constant, Linear, Linear]),
            &set,
        )
        .unwrap();
        assert_eq!(m.accuracy, 0.75);
        assert!((m.per_class_f1[&Constant] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.per_class_f1[&Linear] - 0.8).abs() < 1e-12);
        assert!((m.macro_f1 - (2.0 / 3.0 + 0.8) / 2.0).abs() < 1e-12);
        assert!((m.macro_f1 - 0.7333).abs() < 1e-3);
        assert_eq!(m.confusion, vec![vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn constant_predictor_on_uniform_gold() {
        let g: Vec<_> = ComplexityClass::ALL.to_vec();
        let m = compute_metrics(&preds(&[Linear; 7]), &gold(&g), &ClassSet::all()).unwrap();
        assert!((m.accuracy - 1.0 / 7.0).abs() < 1e-12);
        let trace: u64 = (0..7).map(|i| m.confusion[i][i]).sum();
        let sum: u64 = m.confusion.iter().flatten().sum();
        assert_eq!(m.accuracy, trace as f64 / sum as f64);
        for (row, _) in m.confusion.iter().zip(ComplexityClass::ALL) {
            assert_eq!(row.iter().sum::<u64>(), 1);
        }
    }

    #[test]
    fn absent_classes_contribute_zero() {
        let set = ClassSet::new([Constant, Linear, Cubic]);
        let m = compute_metrics(
            &preds(&[Constant, Linear]),
            &gold(&[Constant, Linear]),
            &set,
        )
        .unwrap();
        assert_eq!(m.per_class_f1[&Cubic], 0.0);
        assert!((m.macro_f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn missing_prediction_errors() {
        let err =
            compute_metrics(&BTreeMap::new(), &gold(&[Linear]), &ClassSet::all()).unwrap_err();
        assert_eq!(err, MetricsError::MissingPrediction("0".into()));
    }

    #[test]
    fn mean_std_uses_sample_deviation() {
        let (m, s) = mean_std(&[0.5, 0.6, 0.7]);
        assert!((m - 0.6).abs() < 1e-12);
        assert!((s - 0.1).abs() < 1e-12);
        assert!(mean_std(&[0.4, 0.4, 0.4]).1 < 1e-12);
        assert_eq!(format_pm(0.5464, 0.0377), "54.64±3.77");
    }
}
