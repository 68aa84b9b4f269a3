//! The classifier wire protocol: newline-delimited JSON over a child
//! process's standard streams.
//!
//! ```text
//! {"op":"hello","classes":[..],"params":{..}}           -> {"classes":[..]}
//! {"op":"fit","examples":[{id,code,language,label}],"seed":N} -> {"ok":true}
//! {"op":"predict","examples":[{id,code,language}]}      -> {"predictions":[{id,probs}]}
//! ```
//! Any request may instead be answered with `{"error": ".."}`.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BuiltinModel, ClassDistribution, Classifier, ClassifierError, Hyperparams};
use crate::class::{ClassSet, ComplexityClass};
use crate::dataset::{CodeSnippet, LabeledExample, Language};
use crate::process::{timeout_from_env, LineProcess};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireExample {
    pub id: String,
    pub code: String,
    pub language: Language,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ComplexityClass>,
}

impl WireExample {
    fn unlabeled(s: &CodeSnippet) -> Self {
        WireExample {
            id: s.id.clone(),
            code: s.source.clone(),
            language: s.language,
            label: None,
        }
    }

    fn labeled(e: &LabeledExample) -> Self {
        WireExample {
            label: Some(e.label),
            ..Self::unlabeled(&e.snippet)
        }
    }

    fn snippet(&self) -> CodeSnippet {
        CodeSnippet::new(self.id.clone(), self.code.clone(), self.language)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Request {
    Hello {
        #[serde(default)]
        classes: Vec<ComplexityClass>,
        #[serde(default, skip_serializing_if = "Value::is_null")]
        params: Value,
    },
    Fit {
        examples: Vec<WireExample>,
        #[serde(default)]
        seed: u64,
    },
    Predict {
        examples: Vec<WireExample>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WirePrediction {
    pub id: String,
    pub probs: BTreeMap<String, f64>,
}

/// A classifier hosted by another process.
pub struct ExternalClassifier {
    process: LineProcess,
    class_set: ClassSet,
}

impl ExternalClassifier {
    /// Starts the process and performs the handshake. `params` is passed
    /// through untouched for backends that take hyperparameters.
    pub fn spawn(
        command: &[String],
        class_set: ClassSet,
        params: Value,
    ) -> Result<Self, ClassifierError> {
        let process = LineProcess::spawn(command, timeout_from_env())
            .map_err(ClassifierError::BackendUnavailable)?;
        let mut me = ExternalClassifier { process, class_set };
        let reply = me.call(&Request::Hello {
            classes: me.class_set.classes().to_vec(),
            params,
        })?;
        let classes: Vec<String> = field(&reply, "classes")?;
        let mut got: Vec<ComplexityClass> = classes
            .iter()
            .map(|c| {
                ComplexityClass::from_str(c)
                    .map_err(|_| violation(format!("unknown class `{c}` in handshake")))
            })
            .collect::<Result<_, _>>()?;
        got.sort();
        let mut want = me.class_set.classes().to_vec();
        want.sort();
        if got != want {
            return Err(violation(format!(
                "handshake classes {classes:?} differ from the class set"
            )));
        }
        Ok(me)
    }

    fn call(&mut self, req: &Request) -> Result<Value, ClassifierError> {
        let line = serde_json::to_string(req).expect("request serializes");
        self.process
            .send(&line)
            .map_err(ClassifierError::BackendUnavailable)?;
        let reply = self
            .process
            .recv()
            .map_err(ClassifierError::BackendUnavailable)?;
        let v: Value =
            serde_json::from_str(&reply).map_err(|e| violation(format!("malformed reply: {e}")))?;
        if let Some(e) = v.get("error") {
            return Err(ClassifierError::BackendUnavailable(format!(
                "backend reported: {e}"
            )));
        }
        Ok(v)
    }
}

fn violation(msg: String) -> ClassifierError {
    ClassifierError::ProtocolViolation(msg)
}

fn field<T: serde::de::DeserializeOwned>(v: &Value, name: &str) -> Result<T, ClassifierError> {
    let f = v
        .get(name)
        .ok_or_else(|| violation(format!("reply lacks `{name}`")))?;
    serde_json::from_value(f.clone()).map_err(|e| violation(format!("bad `{name}`: {e}")))
}

impl Classifier for ExternalClassifier {
    fn class_set(&self) -> &ClassSet {
        &self.class_set
    }

    fn fit(&mut self, examples: &[LabeledExample], seed: u64) -> Result<(), ClassifierError> {
        if examples.is_empty() {
            return Err(ClassifierError::EmptyTrainingSet);
        }
        if let Some(e) = examples.iter().find(|e| !self.class_set.contains(e.label)) {
            return Err(ClassifierError::LabelOutsideClassSet {
                id: e.id().to_string(),
                label: e.label,
            });
        }
        let reply = self.call(&Request::Fit {
            examples: examples.iter().map(WireExample::labeled).collect(),
            seed,
        })?;
        match reply.get("ok") {
            Some(Value::Bool(true)) => Ok(()),
            _ => Err(violation(format!(
                "fit reply is not {{\"ok\":true}}: {reply}"
            ))),
        }
    }

    fn predict(
        &mut self,
        snippets: &[CodeSnippet],
    ) -> Result<Vec<ClassDistribution>, ClassifierError> {
        if snippets.is_empty() {
            return Ok(Vec::new());
        }
        let reply = self.call(&Request::Predict {
            examples: snippets.iter().map(WireExample::unlabeled).collect(),
        })?;
        let preds: Vec<WirePrediction> = field(&reply, "predictions")?;
        let mut by_id: HashMap<String, BTreeMap<String, f64>> = HashMap::new();
        for p in preds {
            if by_id.insert(p.id.clone(), p.probs).is_some() {
                return Err(violation(format!("duplicate prediction for `{}`", p.id)));
            }
        }
        if by_id.len() != snippets.len() {
            return Err(violation(format!(
                "{} predictions for {} snippets",
                by_id.len(),
                snippets.len()
            )));
        }
        snippets
            .iter()
            .map(|s| {
                let probs = by_id
                    .get(&s.id)
                    .ok_or_else(|| violation(format!("no prediction for `{}`", s.id)))?;
                ClassDistribution::from_wire(&self.class_set, probs)
            })
            .collect()
    }
}

/// What `serve_classifier` answers predictions with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServeMode {
    /// The built-in model behind the protocol.
    Builtin,
    /// Uniform distributions, whatever was fitted.
    Uniform,
    /// Probability `p` on the first class of the set, the rest spread evenly.
    Peaked(f64),
    /// Uniform distributions scaled to sum to 0.8: a protocol violation.
    Unnormalized,
}

impl FromStr for ServeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "builtin" => Ok(ServeMode::Builtin),
            "uniform" => Ok(ServeMode::Uniform),
            "unnormalized" => Ok(ServeMode::Unnormalized),
            other => match other.strip_prefix("peaked:").map(str::parse::<f64>) {
                Some(Ok(p)) if (0.0..=1.0).contains(&p) => Ok(ServeMode::Peaked(p)),
                _ => Err(format!(
                    "unknown serve mode `{other}` (builtin, uniform, peaked:P, unnormalized)"
                )),
            },
        }
    }
}

struct Session {
    mode: ServeMode,
    hyper: Hyperparams,
    class_set: Option<ClassSet>,
    model: Option<BuiltinModel>,
}

impl Session {
    fn handle(&mut self, req: Request) -> Result<Value, String> {
        match req {
            Request::Hello { classes, params } => {
                if !params.is_null() {
                    if let Ok(h) = serde_json::from_value::<Hyperparams>(params) {
                        self.hyper = h;
                    }
                }
                let cs = if classes.is_empty() {
                    ClassSet::all()
                } else {
                    ClassSet::new(classes)
                };
                let names: Vec<&str> = cs.classes().iter().map(|c| c.name()).collect();
                let reply = serde_json::json!({ "classes": names });
                self.class_set = Some(cs);
                self.model = None;
                Ok(reply)
            }
            Request::Fit { examples, seed } => {
                let cs = self.class_set.clone().ok_or("fit before hello")?;
                let labeled = examples
                    .iter()
                    .map(|e| {
                        let label = e
                            .label
                            .ok_or_else(|| format!("example `{}` has no label", e.id))?;
                        Ok(LabeledExample::new(e.snippet(), label))
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                let model = self
                    .model
                    .get_or_insert_with(|| BuiltinModel::new(cs, self.hyper));
                model.fit(&labeled, seed).map_err(|e| e.to_string())?;
                Ok(serde_json::json!({ "ok": true }))
            }
            Request::Predict { examples } => {
                let cs = self.class_set.clone().ok_or("predict before hello")?;
                let predictions = examples
                    .iter()
                    .map(|e| {
                        let probs = self.distribution(&cs, &e.snippet())?;
                        Ok(WirePrediction {
                            id: e.id.clone(),
                            probs,
                        })
                    })
                    .collect::<Result<Vec<_>, String>>()?;
                Ok(serde_json::json!({ "predictions": predictions }))
            }
        }
    }

    fn distribution(
        &self,
        cs: &ClassSet,
        s: &CodeSnippet,
    ) -> Result<BTreeMap<String, f64>, String> {
        let k = cs.len() as f64;
        let names = cs.classes().iter().map(|c| c.name().to_string());
        Ok(match self.mode {
            ServeMode::Builtin => match &self.model {
                Some(m) => m.predict_one(s).map_err(|e| e.to_string())?.to_wire(),
                None => ClassDistribution::uniform(cs).to_wire(),
            },
            ServeMode::Uniform => ClassDistribution::uniform(cs).to_wire(),
            ServeMode::Unnormalized => names.map(|n| (n, 0.8 / k)).collect(),
            ServeMode::Peaked(p) => names
                .enumerate()
                .map(|(i, n)| {
                    (
                        n,
                        if i == 0 {
                            p
                        } else {
                            (1.0 - p) / (k - 1.0).max(1.0)
                        },
                    )
                })
                .collect(),
        })
    }
}

/// Serves the classifier protocol until end of input. Malformed requests get
/// an error reply and the session continues.
pub fn serve_classifier(
    input: impl BufRead,
    mut output: impl Write,
    mode: ServeMode,
) -> std::io::Result<()> {
    let mut session = Session {
        mode,
        hyper: Hyperparams::default(),
        class_set: None,
        model: None,
    };
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = serde_json::from_str::<Request>(&line)
            .map_err(|e| format!("bad request: {e}"))
            .and_then(|req| session.handle(req))
            .unwrap_or_else(|e| serde_json::json!({ "error": e }));
        writeln!(output, "{reply}")?;
        output.flush()?;
    }
    Ok(())
}
