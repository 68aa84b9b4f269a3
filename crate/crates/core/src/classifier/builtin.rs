//! Multinomial logistic regression over token n-grams.

use std::collections::HashMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::features::tokenize;
use super::{ClassDistribution, Classifier, ClassifierError};
use crate::class::{ClassSet, ComplexityClass};
use crate::dataset::{CodeSnippet, LabeledExample};

const FORMAT: &str = "tcpred-builtin";
const VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub epochs_per_fit: usize,
    pub l2: f64,
    pub ngram_max: usize,
    pub batch_size: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            learning_rate: 0.1,
            epochs_per_fit: 50,
            l2: 1e-4,
            ngram_max: 2,
            batch_size: 8,
        }
    }
}

/// Sparse feature vector: sorted `(index, value)` pairs.
type Sparse = Vec<(usize, f64)>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuiltinModel {
    format: String,
    version: u32,
    class_set: ClassSet,
    hyper: Hyperparams,
    vocabulary: Vec<String>,
    /// Feature-major: the weight of feature `f` for class slot `c` is at
    /// `f * classes + c`.
    weights: Vec<f64>,
    bias: Vec<f64>,
    /// Classes that have appeared in some training set. The others get
    /// probability zero.
    seen: Vec<bool>,
    #[serde(skip)]
    index: HashMap<String, usize>,
    /// Lazy multiplier on `weights`, so L2 decay is O(1) per step.
    #[serde(skip, default = "one")]
    scale: f64,
}

fn one() -> f64 {
    1.0
}

impl BuiltinModel {
    pub fn new(class_set: ClassSet, hyper: Hyperparams) -> Self {
        let k = class_set.len();
        BuiltinModel {
            format: FORMAT.into(),
            version: VERSION,
            class_set,
            hyper,
            vocabulary: Vec::new(),
            weights: Vec::new(),
            bias: vec![0.0; k],
            seen: vec![false; k],
            index: HashMap::new(),
            scale: 1.0,
        }
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn vocabulary_len(&self) -> usize {
        self.vocabulary.len()
    }

    pub fn is_fitted(&self) -> bool {
        self.seen.iter().any(|s| *s)
    }

    fn k(&self) -> usize {
        self.class_set.len()
    }

    fn slot(&self, c: ComplexityClass, id: &str) -> Result<usize, ClassifierError> {
        self.class_set
            .position(c)
            .ok_or_else(|| ClassifierError::LabelOutsideClassSet {
                id: id.to_string(),
                label: c,
            })
    }

    /// Square-rooted counts scaled to unit length. With `grow`, unknown
    /// n-grams join the vocabulary; otherwise they are dropped.
    fn features(&mut self, snippet: &CodeSnippet, grow: bool) -> Sparse {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for tok in tokenize(snippet, self.hyper.ngram_max) {
            let idx = match self.index.get(&tok) {
                Some(&i) => i,
                None if grow => {
                    let i = self.vocabulary.len();
                    self.index.insert(tok.clone(), i);
                    self.vocabulary.push(tok);
                    self.weights
                        .extend(std::iter::repeat_n(0.0, self.class_set.len()));
                    i
                }
                None => continue,
            };
            *counts.entry(idx).or_insert(0.0) += 1.0;
        }
        normalize(counts)
    }

    fn features_frozen(&self, snippet: &CodeSnippet) -> Sparse {
        let mut counts: HashMap<usize, f64> = HashMap::new();
        for tok in tokenize(snippet, self.hyper.ngram_max) {
            if let Some(&i) = self.index.get(&tok) {
                *counts.entry(i).or_insert(0.0) += 1.0;
            }
        }
        normalize(counts)
    }

    fn scores(&self, x: &Sparse) -> Vec<f64> {
        let k = self.k();
        let mut s = vec![0.0; k];
        for &(f, v) in x {
            let row = &self.weights[f * k..(f + 1) * k];
            for (sc, w) in s.iter_mut().zip(row) {
                *sc += w * v;
            }
        }
        s.iter_mut()
            .zip(&self.bias)
            .for_each(|(sc, b)| *sc = *sc * self.scale + b);
        s
    }

    /// Softmax over the seen classes; unseen classes get zero.
    fn probs(&self, x: &Sparse) -> Vec<f64> {
        let s = self.scores(x);
        let max = s
            .iter()
            .zip(&self.seen)
            .filter(|(_, seen)| **seen)
            .map(|(v, _)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut p: Vec<f64> = s
            .iter()
            .zip(&self.seen)
            .map(|(v, seen)| if *seen { (v - max).exp() } else { 0.0 })
            .collect();
        let z: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= z);
        p
    }

    /// Grows the vocabulary and the seen classes to cover `examples`, and
    /// returns their features and label slots.
    pub(crate) fn prepare(
        &mut self,
        examples: &[LabeledExample],
    ) -> Result<Vec<(Sparse, usize)>, ClassifierError> {
        let mut out = Vec::with_capacity(examples.len());
        for e in examples {
            let y = self.slot(e.label, e.id())?;
            out.push((self.features(&e.snippet, true), y));
        }
        for (_, y) in &out {
            self.seen[*y] = true;
        }
        Ok(out)
    }

    fn fold_scale(&mut self) {
        if self.scale != 1.0 {
            let s = self.scale;
            self.weights.iter_mut().for_each(|w| *w *= s);
            self.scale = 1.0;
        }
    }

    /// Mean cross-entropy plus `l2 / 2` times the squared weight norm (biases
    /// are not penalized).
    pub fn loss(&mut self, examples: &[LabeledExample]) -> Result<f64, ClassifierError> {
        let data = self.prepare(examples)?;
        let ce: f64 = data
            .iter()
            .map(|(x, y)| -self.probs(x)[*y].ln())
            .sum::<f64>()
            / data.len() as f64;
        let norm: f64 = self.weights.iter().map(|w| (w * self.scale).powi(2)).sum();
        Ok(ce + 0.5 * self.hyper.l2 * norm)
    }

    /// Analytic gradient of `loss`, laid out like `parameters`.
    pub fn loss_gradient(
        &mut self,
        examples: &[LabeledExample],
    ) -> Result<Vec<f64>, ClassifierError> {
        let data = self.prepare(examples)?;
        self.fold_scale();
        let k = self.k();
        let n = data.len() as f64;
        let mut grad: Vec<f64> = self.weights.iter().map(|w| self.hyper.l2 * w).collect();
        grad.extend(std::iter::repeat_n(0.0, k));
        let bias_at = self.weights.len();
        for (x, y) in &data {
            let g = self.dlogits(x, *y);
            for &(f, v) in x {
                for c in 0..k {
                    grad[f * k + c] += g[c] * v / n;
                }
            }
            for c in 0..k {
                grad[bias_at + c] += g[c] / n;
            }
        }
        Ok(grad)
    }

    /// All weights (feature-major) followed by the biases.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p: Vec<f64> = self.weights.iter().map(|w| w * self.scale).collect();
        p.extend(&self.bias);
        p
    }

    pub fn set_parameters(&mut self, params: &[f64]) {
        assert_eq!(
            params.len(),
            self.weights.len() + self.bias.len(),
            "parameter count"
        );
        let (w, b) = params.split_at(self.weights.len());
        self.weights.copy_from_slice(w);
        self.bias.copy_from_slice(b);
        self.scale = 1.0;
    }

    fn dlogits(&self, x: &Sparse, y: usize) -> Vec<f64> {
        let mut g = self.probs(x);
        g[y] -= 1.0;
        g
    }

    fn train(&mut self, data: &[(Sparse, usize)], seed: u64) {
        let k = self.k();
        let lr = self.hyper.learning_rate;
        let decay = 1.0 - lr * self.hyper.l2;
        let batch = self.hyper.batch_size.max(1);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut order: Vec<usize> = (0..data.len()).collect();
        for _ in 0..self.hyper.epochs_per_fit {
            order.shuffle(&mut rng);
            for chunk in order.chunks(batch) {
                let grads: Vec<Vec<f64>> = chunk
                    .iter()
                    .map(|&i| self.dlogits(&data[i].0, data[i].1))
                    .collect();
                let step = lr / chunk.len() as f64;
                self.scale *= decay;
                if self.scale < 1e-6 {
                    self.fold_scale();
                }
                let inv = step / self.scale;
                for (&i, g) in chunk.iter().zip(&grads) {
                    for &(f, v) in &data[i].0 {
                        let row = &mut self.weights[f * k..(f + 1) * k];
                        for (w, gc) in row.iter_mut().zip(g) {
                            *w -= inv * gc * v;
                        }
                    }
                    for (b, gc) in self.bias.iter_mut().zip(g) {
                        *b -= step * gc;
                    }
                }
            }
        }
        self.fold_scale();
    }

    /// Distribution for one snippet; read-only, so safe to share.
    pub fn predict_one(&self, snippet: &CodeSnippet) -> Result<ClassDistribution, ClassifierError> {
        if !self.is_fitted() {
            return Err(ClassifierError::UnfittedModel);
        }
        let p = self.probs(&self.features_frozen(snippet));
        let dist = ClassDistribution::from_weights(
            &self.class_set,
            self.class_set.classes().iter().copied().zip(p),
        );
        Ok(dist.expect("softmax is normalized"))
    }

    pub fn save(&self, path: &Path) -> Result<(), ClassifierError> {
        let mut copy = self.clone();
        copy.fold_scale();
        let text = serde_json::to_string(&copy)
            .map_err(|e| ClassifierError::Persistence(e.to_string()))?;
        std::fs::write(path, text)
            .map_err(|e| ClassifierError::Persistence(format!("{}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, ClassifierError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ClassifierError::Persistence(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
            .map_err(|e| ClassifierError::Persistence(format!("{}: {e}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let mut m: BuiltinModel = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if m.format != FORMAT {
            return Err(format!("not a built-in model file (format `{}`)", m.format));
        }
        if m.version != VERSION {
            return Err(format!("unsupported model version {}", m.version));
        }
        let k = m.class_set.len();
        if m.weights.len() != m.vocabulary.len() * k || m.bias.len() != k || m.seen.len() != k {
            return Err("weight shapes do not match the vocabulary and class set".into());
        }
        m.index = m
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i))
            .collect();
        if m.index.len() != m.vocabulary.len() {
            return Err("duplicate vocabulary entries".into());
        }
        m.scale = 1.0;
        Ok(m)
    }
}

fn normalize(counts: HashMap<usize, f64>) -> Sparse {
    let mut x: Sparse = counts.into_iter().map(|(i, c)| (i, c.sqrt())).collect();
    x.sort_unstable_by_key(|(i, _)| *i);
    let norm = x.iter().map(|(_, v)| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|(_, v)| *v /= norm);
    }
    x
}

impl Classifier for BuiltinModel {
    fn class_set(&self) -> &ClassSet {
        &self.class_set
    }

    fn fit(&mut self, examples: &[LabeledExample], seed: u64) -> Result<(), ClassifierError> {
        if examples.is_empty() {
            return Err(ClassifierError::EmptyTrainingSet);
        }
        let data = self.prepare(examples)?;
        self.train(&data, seed);
        Ok(())
    }

    fn predict(
        &mut self,
        snippets: &[CodeSnippet],
    ) -> Result<Vec<ClassDistribution>, ClassifierError> {
        snippets.iter().map(|s| self.predict_one(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Language;
    use ComplexityClass::*;

    fn ex(id: &str, src: &str, label: ComplexityClass) -> LabeledExample {
        LabeledExample::new(CodeSnippet::new(id, src, Language::Python), label)
    }

    #[test]
    fn unfitted_model_refuses_to_predict() {
        let m = BuiltinModel::new(ClassSet::all(), Hyperparams::default());
        let s = CodeSnippet::new("a", "x = 1\n", Language::Python);
        assert_eq!(m.predict_one(&s), Err(ClassifierError::UnfittedModel));
    }

    #[test]
    fn zero_weights_give_uniform() {
        let mut m = BuiltinModel::new(ClassSet::all(), Hyperparams::default());
        let l: Vec<_> = ComplexityClass::ALL
            .iter()
            .enumerate()
            .map(|(i, &c)| ex(&i.to_string(), "x = 1\n", c))
            .collect();
        m.prepare(&l).unwrap();
        let d = m.predict_one(&l[0].snippet).unwrap();
        for c in ComplexityClass::ALL {
            assert!((d.prob(c) - 1.0 / 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_training_set_is_an_error() {
        let mut m = BuiltinModel::new(ClassSet::all(), Hyperparams::default());
        assert_eq!(m.fit(&[], 1), Err(ClassifierError::EmptyTrainingSet));
    }

    #[test]
    fn label_outside_class_set_is_an_error() {
        let mut m = BuiltinModel::new(ClassSet::five(), Hyperparams::default());
        let r = m.fit(&[ex("a", "x = 1\n", Exponential)], 1);
        assert!(matches!(
            r,
            Err(ClassifierError::LabelOutsideClassSet { .. })
        ));
    }

    #[test]
    fn single_class_dominates_everywhere() {
        let mut m = BuiltinModel::new(ClassSet::all(), Hyperparams::default());
        m.fit(&[ex("a", "x = 1\n", Linear), ex("b", "y = 2\n", Linear)], 3)
            .unwrap();
        let other = CodeSnippet::new("z", "for i in range(10):\n    print(i)\n", Language::Python);
        assert!(m.predict_one(&other).unwrap().prob(Linear) >= 0.99);
    }

    #[test]
    fn save_load_round_trip() {
        let mut m = BuiltinModel::new(ClassSet::all(), Hyperparams::default());
        m.fit(
            &[
                ex("a", "x = 1\n", Linear),
                ex("b", "while x:\n    x -= 1\n", Quadratic),
            ],
            3,
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.save(&p).unwrap();
        let back = BuiltinModel::load(&p).unwrap();
        assert_eq!(back.parameters(), m.parameters());
        let s = CodeSnippet::new("q", "x = 3\n", Language::Python);
        assert_eq!(back.predict_one(&s).unwrap(), m.predict_one(&s).unwrap());
        assert!(BuiltinModel::from_json("{\"format\":\"other\"}").is_err());
    }
}
