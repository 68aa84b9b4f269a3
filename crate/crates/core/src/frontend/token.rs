//! Tokens and token-sequence expressions shared by both front ends.

use crate::dataset::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokKind {
    Ident,
    Keyword,
    Number,
    Str,
    Op,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub kind: TokKind,
    pub text: String,
}

impl Token {
    pub fn new(kind: TokKind, text: impl Into<String>) -> Self {
        Token {
            kind,
            text: text.into(),
        }
    }

    pub fn op(text: &str) -> Self {
        Token::new(TokKind::Op, text)
    }

    pub fn ident(text: &str) -> Self {
        Token::new(TokKind::Ident, text)
    }

    pub fn is(&self, text: &str) -> bool {
        self.text == text
    }

    pub fn is_op(&self, text: &str) -> bool {
        self.kind == TokKind::Op && self.text == text
    }

    pub fn is_kw(&self, text: &str) -> bool {
        self.kind == TokKind::Keyword && self.text == text
    }

    pub fn is_ident(&self) -> bool {
        self.kind == TokKind::Ident
    }

    pub fn is_open(&self) -> bool {
        self.kind == TokKind::Op && matches!(self.text.as_str(), "(" | "[" | "{")
    }

    pub fn is_close(&self) -> bool {
        self.kind == TokKind::Op && matches!(self.text.as_str(), ")" | "]" | "}")
    }
}

/// Assignment operators of either language.
pub const ASSIGN_OPS: &[&str] = &[
    "=", "+=", "-=", "*=", "/=", "//=", "%=", "**=", "&=", "|=", "^=", "<<=", ">>=", ">>>=", "@=",
];

/// An expression kept as its token sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Expr {
    pub tokens: Vec<Token>,
}

/// A syntactic call found inside an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCall {
    pub callee: String,
    /// Receiver text for `a.b.f(...)` style calls, e.g. `a.b`.
    pub qualifier: Option<String>,
    pub args: Vec<Expr>,
}

impl Expr {
    pub fn new(tokens: Vec<Token>) -> Self {
        Expr { tokens }
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn texts(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    /// Splits at every occurrence of `sep` at bracket depth zero.
    pub fn split_top_level(&self, sep: &str) -> Vec<Expr> {
        split_top_level(&self.tokens, sep)
            .into_iter()
            .map(|s| Expr::new(s.to_vec()))
            .collect()
    }

    /// Index of the first token at depth zero satisfying `pred`.
    pub fn find_top_level(&self, pred: impl Fn(&Token) -> bool) -> Option<usize> {
        find_top_level(&self.tokens, pred)
    }

    pub fn has_top_level_assignment(&self) -> bool {
        self.find_top_level(|t| t.kind == TokKind::Op && ASSIGN_OPS.contains(&t.text.as_str()))
            .is_some()
    }

    /// Every call expression, including calls nested in arguments.
    pub fn calls(&self) -> Vec<RawCall> {
        let mut out = Vec::new();
        collect_calls(&self.tokens, &mut out);
        out
    }

    /// The outermost call when the whole expression is one call, e.g.
    /// `a.sort()` or `Arrays.sort(x, 0, n)`.
    pub fn as_single_call(&self) -> Option<RawCall> {
        let toks = &self.tokens;
        if toks.len() < 3 || !toks.last()?.is_op(")") {
            return None;
        }
        let open = matching_open(toks, toks.len() - 1)?;
        if open == 0 || !toks[open - 1].is_ident() {
            return None;
        }
        let (qualifier, start) = qualifier_before(toks, open - 1);
        if start != 0 {
            return None;
        }
        Some(RawCall {
            callee: toks[open - 1].text.clone(),
            qualifier,
            args: split_args(&toks[open + 1..toks.len() - 1]),
        })
    }

    /// Identifiers that denote variables: callee names, attribute names after
    /// `.` and capitalised receivers such as `Math` are excluded.
    pub fn variables(&self) -> Vec<&str> {
        let toks = &self.tokens;
        let mut out = Vec::new();
        for (i, t) in toks.iter().enumerate() {
            if !t.is_ident() {
                continue;
            }
            if i > 0 && (toks[i - 1].is_op(".") || toks[i - 1].is_op("::")) {
                continue;
            }
            let next = toks.get(i + 1);
            if next.is_some_and(|n| n.is_op("(")) {
                continue;
            }
            if next.is_some_and(|n| n.is_op("."))
                && t.text
                    .chars()
                    .next()
                    .is_some_and(|c| c.is_ascii_uppercase())
            {
                continue;
            }
            out.push(t.text.as_str());
        }
        out
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.variables().contains(&name)
    }

    pub fn has_text(&self, text: &str) -> bool {
        self.tokens.iter().any(|t| t.text == text)
    }

    /// Renders the tokens with normalised spacing.
    pub fn render(&self, lang: Language) -> String {
        join_tokens(&self.tokens, lang)
    }
}

pub fn find_top_level(toks: &[Token], pred: impl Fn(&Token) -> bool) -> Option<usize> {
    let mut depth = 0i32;
    for (i, t) in toks.iter().enumerate() {
        if depth == 0 && pred(t) {
            return Some(i);
        }
        if t.is_open() {
            depth += 1;
        } else if t.is_close() {
            depth -= 1;
        }
    }
    None
}

pub fn split_top_level<'a>(toks: &'a [Token], sep: &str) -> Vec<&'a [Token]> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        if t.is_open() {
            depth += 1;
        } else if t.is_close() {
            depth -= 1;
        } else if depth == 0 && t.text == sep && t.kind != TokKind::Str {
            parts.push(&toks[start..i]);
            start = i + 1;
        }
    }
    parts.push(&toks[start..]);
    parts
}

/// Position of the bracket matching the closer at `close`.
pub fn matching_open(toks: &[Token], close: usize) -> Option<usize> {
    let mut depth = 0i32;
    for i in (0..=close).rev() {
        if toks[i].is_close() {
            depth += 1;
        } else if toks[i].is_open() {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

/// Position of the bracket matching the opener at `open`.
pub fn matching_close(toks: &[Token], open: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (i, t) in toks.iter().enumerate().skip(open) {
        if t.is_open() {
            depth += 1;
        } else if t.is_close() {
            depth -= 1;
            if depth == 0 {
                return Some(i);
            }
        }
    }
    None
}

pub(crate) fn split_args(toks: &[Token]) -> Vec<Expr> {
    if toks.is_empty() {
        return Vec::new();
    }
    split_top_level(toks, ",")
        .into_iter()
        .map(|s| Expr::new(s.to_vec()))
        .collect()
}

/// Walks back over a `recv.` chain ending just before the callee at `name`.
/// Returns the qualifier text and the index where the full call starts.
pub(crate) fn qualifier_before(toks: &[Token], name: usize) -> (Option<String>, usize) {
    let mut start = name;
    while start >= 2 && toks[start - 1].is_op(".") {
        let prev = start - 2;
        if toks[prev].is_close() {
            match matching_open(toks, prev) {
                Some(o) => {
                    start = o;
                    if start >= 1 && toks[start - 1].is_ident() {
                        start -= 1;
                        if start >= 1 && toks[start - 1].is_kw("new") {
                            start -= 1;
                        }
                    }
                }
                None => break,
            }
        } else if matches!(
            toks[prev].kind,
            TokKind::Ident | TokKind::Keyword | TokKind::Str
        ) {
            start = prev;
        } else {
            break;
        }
    }
    if start == name {
        (None, start)
    } else {
        let text: Vec<&str> = toks[start..name - 1]
            .iter()
            .map(|t| t.text.as_str())
            .collect();
        (Some(text.join("")), start)
    }
}

const NOT_CALLEES: &[&str] = &[
    "if",
    "while",
    "for",
    "switch",
    "catch",
    "synchronized",
    "return",
    "elif",
    "and",
    "or",
    "not",
    "in",
    "is",
    "lambda",
    "print",
    "assert",
    "del",
    "yield",
    "await",
];

fn collect_calls(toks: &[Token], out: &mut Vec<RawCall>) {
    for i in 1..toks.len() {
        if !toks[i].is_op("(") || !toks[i - 1].is_ident() {
            continue;
        }
        let name = &toks[i - 1].text;
        if NOT_CALLEES.contains(&name.as_str()) {
            continue;
        }
        if i >= 2 && toks[i - 2].is_kw("new") {
            continue;
        }
        if i >= 2 && (toks[i - 2].is_kw("def") || toks[i - 2].is_kw("class")) {
            continue;
        }
        let Some(close) = matching_close(toks, i) else {
            continue;
        };
        let (qualifier, _) = qualifier_before(toks, i - 1);
        out.push(RawCall {
            callee: name.clone(),
            qualifier,
            args: split_args(&toks[i + 1..close]),
        });
    }
}

fn is_wordlike(t: &Token) -> bool {
    matches!(
        t.kind,
        TokKind::Ident | TokKind::Keyword | TokKind::Number | TokKind::Str
    )
}

/// Joins tokens so that re-lexing the result yields the same tokens.
pub fn join_tokens(toks: &[Token], lang: Language) -> String {
    let mut out = String::new();
    for (i, t) in toks.iter().enumerate() {
        if i > 0 && needs_space(&toks[i - 1], t, i.checked_sub(2).map(|j| &toks[j]), lang) {
            out.push(' ');
        }
        out.push_str(&t.text);
    }
    out
}

fn is_unary_context(prev: Option<&Token>) -> bool {
    match prev {
        None => true,
        Some(p) => match p.kind {
            TokKind::Op => !p.is_close(),
            TokKind::Keyword => !matches!(
                p.text.as_str(),
                "this" | "super" | "true" | "false" | "null" | "None" | "True" | "False" | "self"
            ),
            _ => false,
        },
    }
}

fn needs_space(prev: &Token, cur: &Token, before_prev: Option<&Token>, lang: Language) -> bool {
    let p = prev.text.as_str();
    let c = cur.text.as_str();
    if is_wordlike(prev) && is_wordlike(cur) {
        return true;
    }
    if prev.kind == TokKind::Number && c == "." {
        return true;
    }
    match (prev.kind == TokKind::Op, cur.kind == TokKind::Op) {
        (true, true) => {
            if p == "." || c == "." {
                return false;
            }
            if matches!(p, "(" | "[") || matches!(c, ")" | "]" | "," | ";") {
                return false;
            }
            if matches!(c, "(" | "[") && matches!(p, ")" | "]") {
                return false;
            }
            if matches!(c, "++" | "--") && matches!(p, ")" | "]") {
                return false;
            }
            true
        }
        (false, true) => match c {
            "(" | "[" => {
                !(prev.kind == TokKind::Ident
                    || prev.kind == TokKind::Str
                    || matches!(p, "this" | "super" | "self"))
            }
            ")" | "]" | "," | ";" | "." => false,
            "++" | "--" => prev.kind == TokKind::Keyword && !matches!(p, "this" | "super"),
            ":" if lang == Language::Python => false,
            _ => true,
        },
        (true, false) => match p {
            "(" | "[" | "." | "@" | "::" | "!" | "~" => false,
            "-" | "+" | "++" | "--" => !is_unary_context(before_prev),
            "*" | "**" if lang == Language::Python => {
                !matches!(before_prev.map(|t| t.text.as_str()), Some("(" | ",") | None)
            }
            _ => true,
        },
        (false, false) => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(spec: &[(&str, TokKind)]) -> Vec<Token> {
        spec.iter().map(|(t, k)| Token::new(*k, *t)).collect()
    }

    #[test]
    fn single_call_detection() {
        use TokKind::*;
        let e = Expr::new(toks(&[
            ("Arrays", Ident),
            (".", Op),
            ("sort", Ident),
            ("(", Op),
            ("a", Ident),
            (",", Op),
            ("0", Number),
            (")", Op),
        ]));
        let c = e.as_single_call().unwrap();
        assert_eq!(c.callee, "sort");
        assert_eq!(c.qualifier.as_deref(), Some("Arrays"));
        assert_eq!(c.args.len(), 2);

        let not_call = Expr::new(toks(&[
            ("x", Ident),
            ("=", Op),
            ("f", Ident),
            ("(", Op),
            (")", Op),
        ]));
        assert!(not_call.as_single_call().is_none());
        assert_eq!(not_call.calls().len(), 1);
        assert_eq!(not_call.variables(), vec!["x"]);
    }
}
