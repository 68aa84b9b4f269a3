//! Snippets, labeled examples, JSON Lines datasets and few-shot splitting.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::class::{ClassSet, ComplexityClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
    Python,
}

impl Language {
    pub fn name(self) -> &'static str {
        match self {
            Language::Java => "java",
            Language::Python => "python",
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "java" => Ok(Language::Java),
            "python" | "py" => Ok(Language::Python),
            other => Err(format!("unknown language `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSnippet {
    pub id: String,
    pub source: String,
    pub language: Language,
}

impl CodeSnippet {
    pub fn new(id: impl Into<String>, source: impl Into<String>, language: Language) -> Self {
        CodeSnippet {
            id: id.into(),
            source: source.into(),
            language,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub snippet: CodeSnippet,
    pub label: ComplexityClass,
}

impl LabeledExample {
    pub fn new(snippet: CodeSnippet, label: ComplexityClass) -> Self {
        LabeledExample { snippet, label }
    }

    pub fn id(&self) -> &str {
        &self.snippet.id
    }
}

/// An unlabeled pool item. The gold label, when the source dataset had one,
/// is kept out of band for pseudo-label diagnostics and never exposed to a
/// classifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnlabeledExample {
    pub snippet: CodeSnippet,
    hidden_label: Option<ComplexityClass>,
}

impl UnlabeledExample {
    pub fn new(snippet: CodeSnippet) -> Self {
        UnlabeledExample {
            snippet,
            hidden_label: None,
        }
    }

    pub(crate) fn with_hidden_label(snippet: CodeSnippet, label: Option<ComplexityClass>) -> Self {
        UnlabeledExample {
            snippet,
            hidden_label: label,
        }
    }

    pub(crate) fn hidden_label(&self) -> Option<ComplexityClass> {
        self.hidden_label
    }

    pub fn id(&self) -> &str {
        &self.snippet.id
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub snippet: CodeSnippet,
    pub label: Option<ComplexityClass>,
}

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("duplicate snippet id `{0}`")]
    DuplicateId(String),
    #[error("snippet `{0}` has empty source")]
    EmptySource(String),
    #[error("label `{label}` of snippet `{id}` is outside the dataset class set")]
    LabelOutsideClassSet { id: String, label: ComplexityClass },
    #[error("class `{class}` has {have} examples, need {need}")]
    InsufficientClassCount {
        class: ComplexityClass,
        have: usize,
        need: usize,
    },
}

/// A collection of labeled and/or unlabeled snippets over a fixed class set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    entries: Vec<Entry>,
    class_set: ClassSet,
}

impl Dataset {
    /// Validates ids, sources and labels against `class_set`.
    pub fn new(entries: Vec<Entry>, class_set: ClassSet) -> Result<Self, DataError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.snippet.id.as_str()) {
                return Err(DataError::DuplicateId(e.snippet.id.clone()));
            }
            if e.snippet.source.trim().is_empty() {
                return Err(DataError::EmptySource(e.snippet.id.clone()));
            }
            if let Some(label) = e.label {
                if !class_set.contains(label) {
                    return Err(DataError::LabelOutsideClassSet {
                        id: e.snippet.id.clone(),
                        label,
                    });
                }
            }
        }
        Ok(Dataset { entries, class_set })
    }

    /// Uses the classes present in the labels (all seven when unlabeled).
    pub fn with_inferred_classes(entries: Vec<Entry>) -> Result<Self, DataError> {
        let labels: Vec<_> = entries.iter().filter_map(|e| e.label).collect();
        let set = if labels.is_empty() {
            ClassSet::all()
        } else {
            ClassSet::new(labels)
        };
        Dataset::new(entries, set)
    }

    pub fn from_labeled(
        examples: Vec<LabeledExample>,
        class_set: ClassSet,
    ) -> Result<Self, DataError> {
        let entries = examples
            .into_iter()
            .map(|e| Entry {
                snippet: e.snippet,
                label: Some(e.label),
            })
            .collect();
        Dataset::new(entries, class_set)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn class_set(&self) -> &ClassSet {
        &self.class_set
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn labeled(&self) -> Vec<LabeledExample> {
        self.entries
            .iter()
            .filter_map(|e| e.label.map(|l| LabeledExample::new(e.snippet.clone(), l)))
            .collect()
    }

    pub fn snippets(&self) -> impl Iterator<Item = &CodeSnippet> {
        self.entries.iter().map(|e| &e.snippet)
    }

    pub fn class_counts(&self) -> BTreeMap<ComplexityClass, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.entries {
            if let Some(l) = e.label {
                *counts.entry(l).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Reads a JSON Lines file. An optional first line of the form
    /// `{"class_set": [...]}` fixes the class set; otherwise it is inferred
    /// from the labels present.
    pub fn load_jsonl(path: &Path) -> Result<Self, DataError> {
        let file = std::fs::File::open(path).map_err(|source| DataError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Dataset::read_jsonl(BufReader::new(file), path)
    }

    pub fn read_jsonl(reader: impl BufRead, path: &Path) -> Result<Self, DataError> {
        let mut entries = Vec::new();
        let mut header: Option<ClassSet> = None;
        let fmt_err = |line: usize, message: String| DataError::Format {
            path: path.to_path_buf(),
            line,
            message,
        };
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|source| DataError::Io {
                path: path.to_path_buf(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let value: serde_json::Value =
                serde_json::from_str(&line).map_err(|e| fmt_err(lineno, e.to_string()))?;
            if entries.is_empty() && header.is_none() {
                if let Some(classes) = value.get("class_set") {
                    let set: ClassSet = serde_json::from_value(classes.clone())
                        .map_err(|e| fmt_err(lineno, format!("bad class_set header: {e}")))?;
                    header = Some(set);
                    continue;
                }
            }
            let record = Record::from_value(value, lineno).map_err(|m| fmt_err(lineno, m))?;
            entries.push(Entry {
                snippet: CodeSnippet::new(record.id, record.code, record.language),
                label: record.label,
            });
        }
        let result = match header {
            Some(set) => Dataset::new(entries, set),
            None => Dataset::with_inferred_classes(entries),
        };
        result.map_err(|e| match e {
            DataError::Io { .. } | DataError::Format { .. } => e,
            other => fmt_err(0, other.to_string()),
        })
    }

    /// Writes the dataset as JSON Lines, with a class-set header line.
    pub fn write_jsonl(&self, mut w: impl Write) -> std::io::Result<()> {
        let header = serde_json::json!({ "class_set": self.class_set });
        writeln!(w, "{header}")?;
        for e in &self.entries {
            let record = Record {
                id: e.snippet.id.clone(),
                code: e.snippet.source.clone(),
                language: e.snippet.language,
                label: e.label,
            };
            writeln!(
                w,
                "{}",
                serde_json::to_string(&record).expect("record serializes")
            )?;
        }
        Ok(())
    }

    pub fn save_jsonl(&self, path: &Path) -> Result<(), DataError> {
        let io_err = |source| DataError::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = std::fs::File::create(path).map_err(io_err)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_jsonl(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)
    }
}

/// One line of the dataset file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub code: String,
    pub language: Language,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<ComplexityClass>,
}

impl Record {
    /// Accepts both the native field names and the ones used by public
    /// complexity datasets: `src`/`source` for code, `complexity` for the
    /// label, `lang` for the language. A missing id becomes `line<N>`. A
    /// missing language is guessed from the code.
    fn from_value(value: serde_json::Value, lineno: usize) -> Result<Self, String> {
        let obj = value.as_object().ok_or("record is not a JSON object")?;
        let pick = |names: &[&str]| {
            names
                .iter()
                .find_map(|n| obj.get(*n))
                .filter(|v| !v.is_null())
        };
        let id = match pick(&["id"]) {
            Some(serde_json::Value::String(s)) => s.clone(),
            Some(serde_json::Value::Number(n)) => n.to_string(),
            Some(other) => return Err(format!("bad id {other}")),
            None => format!("line{lineno}"),
        };
        let code = pick(&["code", "src", "source"])
            .ok_or("missing field `code`")?
            .as_str()
            .ok_or("`code` is not a string")?
            .to_string();
        let language = match pick(&["language", "lang"]) {
            Some(v) => v.as_str().ok_or("`language` is not a string")?.parse()?,
            None => guess_language(&code),
        };
        let label = match pick(&["label", "complexity"]) {
            Some(v) => Some(parse_label(v.as_str().ok_or("label is not a string")?)?),
            None => None,
        };
        Ok(Record {
            id,
            code,
            language,
            label,
        })
    }
}

fn guess_language(code: &str) -> Language {
    let javaish = [
        "class ",
        "public ",
        "import java",
        "System.out",
        "static void",
    ];
    if javaish.iter().any(|k| code.contains(k)) && code.contains('{') {
        Language::Java
    } else {
        Language::Python
    }
}

/// Class names plus the spellings found in public datasets (`np`, `n^2`,
/// `O(n log n)`, ...).
pub fn parse_label(raw: &str) -> Result<ComplexityClass, String> {
    use ComplexityClass::*;
    if let Ok(c) = raw.parse() {
        return Ok(c);
    }
    let mut s: String = raw
        .to_ascii_lowercase()
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '*')
        .collect();
    if let Some(inner) = s.strip_prefix("o(").and_then(|r| r.strip_suffix(')')) {
        s = inner.to_string();
    }
    Ok(match s.as_str() {
        "1" | "constant" => Constant,
        "logn" | "log(n)" => LogN,
        "n" | "linear" => Linear,
        "nlogn" | "nlog(n)" | "n_logn" | "n-logn" => NLogN,
        "n^2" | "n2" | "quadratic" => Quadratic,
        "n^3" | "n3" | "cubic" => Cubic,
        "np" | "2^n" | "exp" | "exponential" => Exponential,
        _ => return Err(format!("unknown complexity class `{raw}`")),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub labeled: Vec<LabeledExample>,
    pub unlabeled: Vec<UnlabeledExample>,
}

/// Picks exactly `k` examples per class of `train` for the labeled set; all
/// remaining examples go, labels stripped, to the unlabeled pool.
pub fn few_shot_split(train: &Dataset, k: usize, seed: u64) -> Result<Split, DataError> {
    few_shot_split_where(train, k, seed, |_| true)
}

/// Like [`few_shot_split`], but only snippets accepted by `eligible` may be
/// drawn into the labeled set.
pub fn few_shot_split_where(
    train: &Dataset,
    k: usize,
    seed: u64,
    eligible: impl Fn(&CodeSnippet) -> bool,
) -> Result<Split, DataError> {
    let mut by_class: BTreeMap<ComplexityClass, Vec<usize>> = BTreeMap::new();
    for (i, e) in train.entries.iter().enumerate() {
        if let Some(l) = e.label {
            if eligible(&e.snippet) {
                by_class.entry(l).or_default().push(i);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = HashSet::new();
    let mut labeled = Vec::new();
    for &class in train.class_set.classes() {
        let mut pool = by_class.remove(&class).unwrap_or_default();
        if pool.len() < k {
            return Err(DataError::InsufficientClassCount {
                class,
                have: pool.len(),
                need: k,
            });
        }
        pool.shuffle(&mut rng);
        for &i in pool.iter().take(k) {
            chosen.insert(i);
            let e = &train.entries[i];
            labeled.push(LabeledExample::new(e.snippet.clone(), class));
        }
    }
    let unlabeled = train
        .entries
        .iter()
        .enumerate()
        .filter(|(i, _)| !chosen.contains(i))
        .map(|(_, e)| UnlabeledExample::with_hidden_label(e.snippet.clone(), e.label))
        .collect();
    Ok(Split { labeled, unlabeled })
}
