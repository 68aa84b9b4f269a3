//! Back-translation through an external augmenter process.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::dataset::{CodeSnippet, Language};
use crate::frontend::ir::{stmt_exprs_mut, visit_stmts, visit_stmts_mut};
use crate::frontend::{parse, parse_source, print, tokenize, StmtKind};
use crate::process::{timeout_from_env, LineProcess};
use crate::symbolic::taint::{assignments, lhs_targets};

const BT_PROMPT: &str = include_str!("../../data/prompts/backtranslation.txt");
/// The loop-conversion prompt, shipped for augmenters that prompt a model
/// instead of rewriting natively.
pub const LC_PROMPT: &str = include_str!("../../data/prompts/loop_conversion.txt");

/// The back-translation prompt filled in for one snippet. The template is
/// written for Java; Python snippets swap the two language names.
pub fn bt_prompt(snippet: &CodeSnippet) -> String {
    let template = match snippet.language {
        Language::Java => BT_PROMPT.to_string(),
        Language::Python => BT_PROMPT
            .replace("Java", "\u{0}")
            .replace("Python", "Java")
            .replace('\u{0}', "Python"),
    };
    template
        .replace("[Original Java Code]", &snippet.source)
        .replace("[Original Python Code]", &snippet.source)
}

/// Something that round-trips code through another language.
pub trait Backtranslator {
    fn backtranslate(&mut self, snippet: &CodeSnippet) -> Result<String, AugmentError>;

    /// Translates many snippets; results are positionally aligned with the input.
    fn backtranslate_many(
        &mut self,
        snippets: &[CodeSnippet],
    ) -> Vec<Result<String, AugmentError>> {
        snippets.iter().map(|s| self.backtranslate(s)).collect()
    }
}

/// Checks an augmenter's output: it must parse and differ from the original
/// in at least one token.
pub fn validate(original: &CodeSnippet, code: &str) -> Result<CodeSnippet, AugmentError> {
    parse_source(code, original.language)
        .map_err(|e| AugmentError::InvalidAugmentation(format!("does not parse: {e}")))?;
    let same = match (
        tokenize(code, original.language),
        tokenize(&original.source, original.language),
    ) {
        (Ok(a), Ok(b)) => a == b,
        _ => code == original.source,
    };
    if same {
        return Err(AugmentError::InvalidAugmentation(
            "identical to the original".into(),
        ));
    }
    Ok(CodeSnippet::new(
        format!("{}#bt", original.id),
        code,
        original.language,
    ))
}

/// One validated back-translation.
pub fn external_backtranslate(
    snippet: &CodeSnippet,
    endpoint: &mut dyn Backtranslator,
) -> Result<CodeSnippet, AugmentError> {
    let code = endpoint.backtranslate(snippet)?;
    validate(snippet, &code)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BtRequest {
    pub op: String,
    pub id: String,
    pub language: Language,
    pub code: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub prompt: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BtResponse {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// An augmenter subprocess speaking newline-delimited JSON on its standard
/// streams. Up to `max_in_flight` requests are written before responses are
/// read; responses are matched by id, so their order does not matter.
pub struct ProcessAugmenter {
    process: LineProcess,
    max_in_flight: usize,
}

impl ProcessAugmenter {
    pub fn spawn(command: &[String], max_in_flight: usize) -> Result<Self, AugmentError> {
        if command.is_empty() {
            return Err(AugmentError::AugmenterUnavailable);
        }
        let process = LineProcess::spawn(command, timeout_from_env())
            .map_err(AugmentError::AugmenterError)?;
        Ok(ProcessAugmenter {
            process,
            max_in_flight: max_in_flight.max(1),
        })
    }

    fn send(&mut self, s: &CodeSnippet) -> Result<(), AugmentError> {
        let req = BtRequest {
            op: "backtranslate".into(),
            id: s.id.clone(),
            language: s.language,
            code: s.source.clone(),
            prompt: bt_prompt(s),
        };
        let line = serde_json::to_string(&req).expect("request serializes");
        self.process
            .send(&line)
            .map_err(AugmentError::AugmenterError)
    }

    fn receive(&mut self) -> Result<BtResponse, AugmentError> {
        let line = self.process.recv().map_err(AugmentError::AugmenterError)?;
        serde_json::from_str(&line)
            .map_err(|e| AugmentError::AugmenterError(format!("malformed response: {e}")))
    }
}

impl Backtranslator for ProcessAugmenter {
    fn backtranslate(&mut self, snippet: &CodeSnippet) -> Result<String, AugmentError> {
        self.backtranslate_many(std::slice::from_ref(snippet))
            .pop()
            .expect("one result")
    }

    fn backtranslate_many(
        &mut self,
        snippets: &[CodeSnippet],
    ) -> Vec<Result<String, AugmentError>> {
        let mut results: HashMap<String, Result<String, AugmentError>> = HashMap::new();
        let mut pending: BTreeSet<String> = BTreeSet::new();
        let mut next = 0;
        let mut fatal: Option<AugmentError> = None;
        while fatal.is_none() && (next < snippets.len() || !pending.is_empty()) {
            while next < snippets.len() && pending.len() < self.max_in_flight {
                if let Err(e) = self.send(&snippets[next]) {
                    fatal = Some(e);
                    break;
                }
                pending.insert(snippets[next].id.clone());
                next += 1;
            }
            if fatal.is_some() {
                break;
            }
            match self.receive() {
                Ok(resp) => {
                    if !pending.remove(&resp.id) {
                        fatal = Some(AugmentError::AugmenterError(format!(
                            "response for unknown id `{}`",
                            resp.id
                        )));
                        break;
                    }
                    let r = match (resp.code, resp.error) {
                        (_, Some(e)) => Err(AugmentError::AugmenterError(e)),
                        (Some(c), None) => Ok(c),
                        (None, None) => Err(AugmentError::AugmenterError(
                            "response has neither code nor error".into(),
                        )),
                    };
                    results.insert(resp.id, r);
                }
                Err(e) => fatal = Some(e),
            }
        }
        snippets
            .iter()
            .map(|s| match results.remove(&s.id) {
                Some(r) => r,
                None => Err(fatal.clone().unwrap_or(AugmentError::AugmenterUnavailable)),
            })
            .collect()
    }
}

/// A precomputed back-translation corpus: JSONL lines `{"id", "code"}`.
pub struct CachedBacktranslator {
    codes: BTreeMap<String, String>,
}

impl CachedBacktranslator {
    pub fn load(path: &Path) -> Result<Self, AugmentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AugmentError::AugmenterError(format!("{}: {e}", path.display())))?;
        let mut codes = BTreeMap::new();
        for (i, line) in text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
        {
            let r: BtResponse = serde_json::from_str(line).map_err(|e| {
                AugmentError::AugmenterError(format!("{}:{}: {e}", path.display(), i + 1))
            })?;
            if let Some(c) = r.code {
                codes.insert(r.id, c);
            }
        }
        Ok(CachedBacktranslator { codes })
    }
}

impl Backtranslator for CachedBacktranslator {
    fn backtranslate(&mut self, snippet: &CodeSnippet) -> Result<String, AugmentError> {
        self.codes.get(&snippet.id).cloned().ok_or_else(|| {
            AugmentError::AugmenterError(format!("no cached translation for `{}`", snippet.id))
        })
    }
}

/// Test double: returns the snippet with its local variables renamed.
#[derive(Debug, Default, Clone, Copy)]
pub struct RenameBacktranslator;

impl Backtranslator for RenameBacktranslator {
    fn backtranslate(&mut self, snippet: &CodeSnippet) -> Result<String, AugmentError> {
        rename_variables(snippet)
            .ok_or_else(|| AugmentError::AugmenterError("nothing to rename".into()))
    }
}

/// Renames every assigned local name (not parameters, functions or
/// attributes) by appending `_v`.
pub fn rename_variables(snippet: &CodeSnippet) -> Option<String> {
    let mut ir = parse(snippet).ok()?;
    let lang = ir.language;
    let mut targets = BTreeSet::new();
    let mut excluded: BTreeSet<String> = BTreeSet::new();
    let mut all_idents = BTreeSet::new();
    visit_stmts(&ir.tree, &mut |s| {
        match &s.kind {
            StmtKind::Assign(e) => {
                for a in assignments(e, lang) {
                    targets.extend(a.targets);
                }
            }
            StmtKind::For(f) => {
                if let crate::frontend::ForHeader::Each { target, .. } = &f.header {
                    targets.extend(lhs_targets(&target.tokens));
                }
            }
            StmtKind::Def(d) => {
                excluded.insert(d.name.clone());
                excluded.extend(d.params.iter().cloned());
            }
            StmtKind::Class(c) => {
                excluded.insert(c.name.clone());
            }
            _ => {}
        }
        for e in crate::frontend::ir::stmt_exprs(s) {
            for (i, t) in e.tokens.iter().enumerate() {
                all_idents.insert(t.text.clone());
                if i > 0 && e.tokens[i - 1].is_op(".") {
                    excluded.insert(t.text.clone());
                }
            }
        }
    });
    let mut map = BTreeMap::new();
    for t in targets
        .into_iter()
        .filter(|t| !excluded.contains(t) && t != "self" && t != "this")
    {
        let mut n = format!("{t}_v");
        while all_idents.contains(&n) {
            n.push('v');
        }
        map.insert(t, n);
    }
    if map.is_empty() {
        return None;
    }
    visit_stmts_mut(&mut ir.tree, &mut |s| {
        for e in stmt_exprs_mut(s) {
            let mut depth = 0i32;
            let n = e.tokens.len();
            for i in 0..n {
                let (before, rest) = e.tokens.split_at_mut(i);
                let next_is_eq = rest.get(1).is_some_and(|x| x.is_op("="));
                let t = &mut rest[0];
                if t.is_open() {
                    depth += 1;
                } else if t.is_close() {
                    depth -= 1;
                }
                if !t.is_ident() {
                    continue;
                }
                let prev = before.last();
                if prev.is_some_and(|p| p.is_op(".") || p.is_op("::")) {
                    continue;
                }
                if depth > 0
                    && next_is_eq
                    && prev.is_some_and(|p| p.is_op("(") || p.is_op(","))
                    && lang == Language::Python
                {
                    // keyword argument
                    continue;
                }
                if let Some(new) = map.get(&t.text) {
                    t.text = new.clone();
                }
            }
        }
    });
    Some(print(&ir))
}

/// Behaviour of the mock augmenter served by `tcpred mock-augmenter`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MockMode {
    /// Renamed variables: a valid augmentation.
    Rename,
    /// The code unchanged: rejected as identical.
    Identity,
    /// Unparsable text: rejected as invalid.
    Garbage,
    /// An error response for every request.
    Error,
}

impl std::str::FromStr for MockMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rename" => Ok(MockMode::Rename),
            "identity" => Ok(MockMode::Identity),
            "garbage" => Ok(MockMode::Garbage),
            "error" => Ok(MockMode::Error),
            _ => Err(format!("unknown mock mode `{s}`")),
        }
    }
}

/// Serves the augmenter protocol on a pair of streams until end of input.
pub fn serve_mock(
    input: impl BufRead,
    mut output: impl Write,
    mode: MockMode,
) -> std::io::Result<()> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = match serde_json::from_str::<BtRequest>(&line) {
            Err(e) => BtResponse {
                id: String::new(),
                code: None,
                error: Some(format!("bad request: {e}")),
            },
            Ok(req) => {
                let snippet = CodeSnippet::new(req.id.clone(), req.code.clone(), req.language);
                let (code, error) = match mode {
                    MockMode::Rename => match rename_variables(&snippet) {
                        Some(c) => (Some(c), None),
                        None => (None, Some("nothing to rename".to_string())),
                    },
                    MockMode::Identity => (Some(req.code), None),
                    MockMode::Garbage => (Some("def ((:\n  }}{".to_string()), None),
                    MockMode::Error => (None, Some("mock failure".to_string())),
                };
                BtResponse {
                    id: req.id,
                    code,
                    error,
                }
            }
        };
        writeln!(
            output,
            "{}",
            serde_json::to_string(&resp).expect("response serializes")
        )?;
        output.flush()?;
    }
    Ok(())
}
