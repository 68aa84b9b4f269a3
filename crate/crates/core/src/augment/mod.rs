//! Label-preserving augmentation: native loop conversion (LC) and
//! back-translation (BT) through an external augmenter.

pub mod bt;
pub mod lc;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use bt::{
    external_backtranslate, validate, Backtranslator, CachedBacktranslator, MockMode,
    ProcessAugmenter, RenameBacktranslator,
};
pub use lc::{for_to_while, while_to_for};

use crate::class::ComplexityClass;
use crate::dataset::{CodeSnippet, LabeledExample};
use crate::frontend::parse;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AugmentError {
    #[error("unsupported loop form: {0}")]
    UnsupportedLoopForm(String),
    #[error("back-translation requested but no augmenter is available")]
    AugmenterUnavailable,
    #[error("augmenter error: {0}")]
    AugmenterError(String),
    #[error("invalid augmentation: {0}")]
    InvalidAugmentation(String),
    #[error("artificial sampling requires loop-containing examples; `{0}` has no loop")]
    NotLoopSampled(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugMethod {
    Bt,
    Lc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentedExample {
    /// Id of the example this one was derived from.
    pub original: String,
    pub snippet: CodeSnippet,
    pub label: ComplexityClass,
    pub method: AugMethod,
}

impl AugmentedExample {
    pub fn to_labeled(&self) -> LabeledExample {
        LabeledExample::new(self.snippet.clone(), self.label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugKind {
    Bt,
    Lc,
    BtPlusLc,
}

impl AugKind {
    pub fn uses_bt(self) -> bool {
        matches!(self, AugKind::Bt | AugKind::BtPlusLc)
    }

    pub fn uses_lc(self) -> bool {
        matches!(self, AugKind::Lc | AugKind::BtPlusLc)
    }
}

impl FromStr for AugKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bt" => Ok(AugKind::Bt),
            "lc" => Ok(AugKind::Lc),
            "bt+lc" | "bt_plus_lc" | "btlc" => Ok(AugKind::BtPlusLc),
            other => Err(format!(
                "unknown augmentation `{other}` (expected bt, lc or bt+lc)"
            )),
        }
    }
}

impl fmt::Display for AugKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AugKind::Bt => "bt",
            AugKind::Lc => "lc",
            AugKind::BtPlusLc => "bt+lc",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// The labeled set as drawn.
    Natural,
    /// The labeled set was drawn from loop-containing snippets only.
    Artificial,
}

impl FromStr for Sampling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "natural" => Ok(Sampling::Natural),
            "artificial" => Ok(Sampling::Artificial),
            other => Err(format!(
                "unknown sampling `{other}` (expected natural or artificial)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AugStrategy {
    pub kind: AugKind,
    pub sampling: Sampling,
}

/// Whether a snippet parses and contains at least one loop.
pub fn has_loop(snippet: &CodeSnippet) -> bool {
    parse(snippet).is_ok_and(|ir| ir.loop_count() > 0)
}

/// Flips every loop of the example. `None` for loop-free snippets and for
/// snippets none of whose loops can be converted safely.
pub fn loop_convert(example: &LabeledExample) -> Option<AugmentedExample> {
    let ir = parse(&example.snippet).ok()?;
    if ir.loop_count() == 0 {
        return None;
    }
    let source = lc::convert_all(&ir)?;
    // Never emit something the front end cannot read back.
    crate::frontend::parse_source(&source, ir.language).ok()?;
    Some(AugmentedExample {
        original: example.id().to_string(),
        snippet: CodeSnippet::new(
            format!("{}#lc", example.id()),
            source,
            example.snippet.language,
        ),
        label: example.label,
        method: AugMethod::Lc,
    })
}

/// The augmented set and the examples the augmenter rejected.
#[derive(Debug, Clone, Default)]
pub struct Augmented {
    pub examples: Vec<AugmentedExample>,
    pub rejected: Vec<(String, AugmentError)>,
}

/// Augments a labeled set. BT outputs are validated and rejected ones are
/// reported rather than failing the whole run.
pub fn augment_dataset(
    labeled: &[LabeledExample],
    strategy: AugStrategy,
    bt: Option<&mut dyn Backtranslator>,
) -> Result<Augmented, AugmentError> {
    if strategy.sampling == Sampling::Artificial && strategy.kind.uses_lc() {
        if let Some(e) = labeled.iter().find(|e| !has_loop(&e.snippet)) {
            return Err(AugmentError::NotLoopSampled(e.id().to_string()));
        }
    }
    let mut taken: BTreeSet<String> = labeled.iter().map(|e| e.id().to_string()).collect();
    let mut out = Augmented::default();
    let mut push = |mut a: AugmentedExample, out: &mut Augmented| {
        let base = a.snippet.id.clone();
        let mut n = 1;
        while taken.contains(&a.snippet.id) {
            n += 1;
            a.snippet.id = format!("{base}{n}");
        }
        taken.insert(a.snippet.id.clone());
        out.examples.push(a);
    };
    if strategy.kind.uses_bt() {
        let bt = bt.ok_or(AugmentError::AugmenterUnavailable)?;
        let snippets: Vec<CodeSnippet> = labeled.iter().map(|e| e.snippet.clone()).collect();
        let results = bt.backtranslate_many(&snippets);
        for (e, r) in labeled.iter().zip(results) {
            match r.and_then(|code| validate(&e.snippet, &code)) {
                Ok(snippet) => push(
                    AugmentedExample {
                        original: e.id().to_string(),
                        snippet,
                        label: e.label,
                        method: AugMethod::Bt,
                    },
                    &mut out,
                ),
                Err(err) => out.rejected.push((e.id().to_string(), err)),
            }
        }
    }
    if strategy.kind.uses_lc() {
        for e in labeled {
            if let Some(a) = loop_convert(e) {
                push(a, &mut out);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
