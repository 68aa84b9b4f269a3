//! Trainable classifiers: the built-in n-gram logistic regression and a
//! client for external classifier processes.

pub mod builtin;
pub mod external;
pub mod features;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use builtin::{BuiltinModel, Hyperparams};
pub use external::{serve_classifier, ExternalClassifier, ServeMode};
pub use features::tokenize;

use crate::class::{ClassSet, ComplexityClass};
use crate::dataset::{CodeSnippet, LabeledExample};

/// Sum tolerance for distributions received over the wire.
pub const WIRE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifierError {
    #[error("cannot fit on an empty training set")]
    EmptyTrainingSet,
    #[error("model has not been fitted")]
    UnfittedModel,
    #[error("label `{label}` of `{id}` is outside the model's class set")]
    LabelOutsideClassSet { id: String, label: ComplexityClass },
    #[error("classifier backend unavailable: {0}")]
    BackendUnavailable(String),
    #[error("classifier protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("model file: {0}")]
    Persistence(String),
}

/// Class probabilities over a class set. Always normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassDistribution {
    probs: BTreeMap<ComplexityClass, f64>,
}

impl ClassDistribution {
    /// Normalizes non-negative weights over `class_set`. Classes missing from
    /// `weights` get zero. `None` when the total weight is not positive.
    pub fn from_weights(
        class_set: &ClassSet,
        weights: impl IntoIterator<Item = (ComplexityClass, f64)>,
    ) -> Option<Self> {
        let mut probs: BTreeMap<_, _> = class_set.classes().iter().map(|&c| (c, 0.0)).collect();
        for (c, w) in weights {
            *probs.get_mut(&c)? += w;
        }
        let total: f64 = probs.values().sum();
        if !(total > 0.0 && total.is_finite()) || probs.values().any(|p| *p < 0.0) {
            return None;
        }
        // Leave already-normalized input untouched so exact values such as a
        // 0.7 threshold probe survive.
        if (total - 1.0).abs() > 1e-12 {
            probs.values_mut().for_each(|p| *p /= total);
        }
        Some(ClassDistribution { probs })
    }

    pub fn uniform(class_set: &ClassSet) -> Self {
        Self::from_weights(class_set, class_set.classes().iter().map(|&c| (c, 1.0)))
            .expect("non-empty class set")
    }

    /// Validates a distribution received from an external classifier: every
    /// class known, every probability in [0, 1], sum within `WIRE_TOLERANCE`.
    pub fn from_wire(
        class_set: &ClassSet,
        probs: &BTreeMap<String, f64>,
    ) -> Result<Self, ClassifierError> {
        let mut weights = Vec::new();
        for (name, &p) in probs {
            let class: ComplexityClass = name.parse().map_err(|_| {
                ClassifierError::ProtocolViolation(format!("unknown class `{name}`"))
            })?;
            if !class_set.contains(class) {
                return Err(ClassifierError::ProtocolViolation(format!(
                    "class `{name}` is outside the class set"
                )));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(ClassifierError::ProtocolViolation(format!(
                    "probability {p} for `{name}`"
                )));
            }
            weights.push((class, p));
        }
        let total: f64 = weights.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > WIRE_TOLERANCE {
            return Err(ClassifierError::ProtocolViolation(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Self::from_weights(class_set, weights).expect("sum checked"))
    }

    pub fn prob(&self, c: ComplexityClass) -> f64 {
        self.probs.get(&c).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &BTreeMap<ComplexityClass, f64> {
        &self.probs
    }

    /// Most probable class; ties go to the lower class.
    pub fn argmax(&self) -> ComplexityClass {
        let mut best = None::<(ComplexityClass, f64)>;
        for (&c, &p) in &self.probs {
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((c, p));
            }
        }
        best.expect("non-empty distribution").0
    }

    pub fn max_prob(&self) -> f64 {
        self.prob(self.argmax())
    }

    pub fn to_wire(&self) -> BTreeMap<String, f64> {
        self.probs
            .iter()
            .map(|(c, p)| (c.name().to_string(), *p))
            .collect()
    }
}

/// The model abstraction the training engine drives. Built-in and external
/// backends are interchangeable behind it.
pub trait Classifier {
    fn class_set(&self) -> &ClassSet;

    /// Trains from the current parameters (warm start).
    fn fit(&mut self, examples: &[LabeledExample], seed: u64) -> Result<(), ClassifierError>;

    /// One distribution per snippet, in input order.
    fn predict(
        &mut self,
        snippets: &[CodeSnippet],
    ) -> Result<Vec<ClassDistribution>, ClassifierError>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use ComplexityClass::*;

    #[test]
    fn uniform_is_normalized() {
        let d = ClassDistribution::uniform(&ClassSet::all());
        let total: f64 = d.probs().values().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!((d.max_prob() - 1.0 / 7.0).abs() < 1e-12);
        assert_eq!(d.argmax(), Constant);
    }

    #[test]
    fn wire_sum_is_checked() {
        let cs = ClassSet::new([Linear, Quadratic]);
        let ok: BTreeMap<String, f64> = [("linear".into(), 0.3), ("quadratic".into(), 0.7)].into();
        let d = ClassDistribution::from_wire(&cs, &ok).unwrap();
        assert_eq!(d.argmax(), Quadratic);
        let short: BTreeMap<String, f64> =
            [("linear".into(), 0.3), ("quadratic".into(), 0.5)].into();
        assert!(matches!(
            ClassDistribution::from_wire(&cs, &short),
            Err(ClassifierError::ProtocolViolation(_))
        ));
        let outside: BTreeMap<String, f64> = [("cubic".into(), 1.0)].into();
        assert!(ClassDistribution::from_wire(&cs, &outside).is_err());
        let nearly: BTreeMap<String, f64> =
            [("linear".into(), 0.3), ("quadratic".into(), 0.7 + 5e-7)].into();
        let d = ClassDistribution::from_wire(&cs, &nearly).unwrap();
        assert!((d.probs().values().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn missing_classes_get_zero() {
        let cs = ClassSet::new([Linear, Quadratic]);
        let only: BTreeMap<String, f64> = [("linear".into(), 1.0)].into();
        let d = ClassDistribution::from_wire(&cs, &only).unwrap();
        assert_eq!(d.prob(Quadratic), 0.0);
        assert_eq!(d.probs().len(), 2);
    }
}
