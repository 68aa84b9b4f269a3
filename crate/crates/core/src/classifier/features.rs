//! Token n-grams for the built-in classifier.

use crate::dataset::{CodeSnippet, Language};
use crate::frontend::{self, TokKind, Token};

/// Identifiers kept verbatim: conventional loop counters, whose presence
/// hints at nesting depth.
const KEPT_NAMES: &[&str] = &["i", "j", "k"];

/// Lexes a snippet into abstracted unigrams followed by every longer n-gram
/// up to `ngram_max`, n-gram parts joined by a space.
///
/// Identifiers become `ID` unless they name a call or attribute or are a
/// conventional loop counter; literals become `NUM` and `STR`.
pub fn tokenize(snippet: &CodeSnippet, ngram_max: usize) -> Vec<String> {
    let units = unigrams(&snippet.source, snippet.language);
    let mut out = units.clone();
    for n in 2..=ngram_max {
        out.extend(units.windows(n).map(|w| w.join(" ")));
    }
    out
}

fn unigrams(source: &str, language: Language) -> Vec<String> {
    let toks = frontend::tokenize(source, language).unwrap_or_else(|_| fallback_lex(source));
    toks.iter()
        .enumerate()
        .map(|(i, t)| match t.kind {
            TokKind::Number => "NUM".to_string(),
            TokKind::Str => "STR".to_string(),
            TokKind::Ident => {
                let called = toks.get(i + 1).is_some_and(|n| n.is_op("("));
                let member = i > 0 && (toks[i - 1].is_op(".") || toks[i - 1].is_op("::"));
                if called || member || KEPT_NAMES.contains(&t.text.as_str()) {
                    t.text.clone()
                } else {
                    "ID".to_string()
                }
            }
            TokKind::Keyword | TokKind::Op => t.text.clone(),
        })
        .collect()
}

/// Best-effort lexing for sources the real lexers reject: words, numbers
/// and single punctuation characters.
fn fallback_lex(source: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let chars: Vec<char> = source.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            let kind = if c.is_ascii_digit() {
                TokKind::Number
            } else {
                TokKind::Ident
            };
            out.push(Token::new(kind, word));
        } else {
            out.push(Token::op(&c.to_string()));
            i += 1;
        }
    }
    out
}
