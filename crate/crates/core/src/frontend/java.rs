//! Java lexer and a statement-level parser.

use super::ir::{
    Block, ClassDef, Clause, ForHeader, ForLoop, FunctionDef, IfStmt, Other, Stmt, StmtKind,
    WhileLoop,
};
use super::token::{find_top_level, split_top_level, Expr, TokKind, Token};
use super::{classify_simple, ParseError};

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "true",
    "false",
    "null",
    "var",
];

const OPS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>", "+", "-", "*", "/", "%", "&", "|",
    "^", "!", "~", "?", ":", "=", "<", ">", "(", ")", "[", "]", "{", "}", ",", ";", ".", "@",
];

const MODIFIERS: &[&str] = &[
    "public",
    "private",
    "protected",
    "static",
    "final",
    "abstract",
    "native",
    "synchronized",
    "transient",
    "volatile",
    "strictfp",
    "default",
];

fn err(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError {
        line,
        reason: reason.into(),
    }
}

/// Tokens with their 1-based source lines.
pub(crate) fn lex(source: &str) -> Result<(Vec<Token>, Vec<usize>), ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut toks = Vec::new();
    let mut lines = Vec::new();
    let mut pos = 0;
    let mut line = 1;
    let peek = |p: usize| chars.get(p).copied();
    while pos < chars.len() {
        let c = chars[pos];
        let start_line = line;
        if c == '\n' {
            line += 1;
            pos += 1;
            continue;
        }
        if c.is_whitespace() {
            pos += 1;
            continue;
        }
        if c == '/' && peek(pos + 1) == Some('/') {
            while peek(pos).is_some_and(|c| c != '\n') {
                pos += 1;
            }
            continue;
        }
        if c == '/' && peek(pos + 1) == Some('*') {
            pos += 2;
            loop {
                match peek(pos) {
                    None => return Err(err(start_line, "unterminated comment")),
                    Some('*') if peek(pos + 1) == Some('/') => {
                        pos += 2;
                        break;
                    }
                    Some('\n') => line += 1,
                    _ => {}
                }
                pos += 1;
            }
            continue;
        }
        let tok = if c == '"' && peek(pos + 1) == Some('"') && peek(pos + 2) == Some('"') {
            let start = pos;
            pos += 3;
            loop {
                match peek(pos) {
                    None => return Err(err(start_line, "unterminated text block")),
                    Some('\\') => pos += 1,
                    Some('"') if peek(pos + 1) == Some('"') && peek(pos + 2) == Some('"') => {
                        pos += 3;
                        break;
                    }
                    Some('\n') => line += 1,
                    _ => {}
                }
                pos += 1;
            }
            Token::new(TokKind::Str, chars[start..pos].iter().collect::<String>())
        } else if c == '"' || c == '\'' {
            let start = pos;
            pos += 1;
            loop {
                match peek(pos) {
                    None | Some('\n') => return Err(err(start_line, "unterminated literal")),
                    Some('\\') => pos += 2,
                    Some(q) if q == c => {
                        pos += 1;
                        break;
                    }
                    _ => pos += 1,
                }
            }
            Token::new(TokKind::Str, chars[start..pos].iter().collect::<String>())
        } else if c.is_ascii_digit()
            || (c == '.' && peek(pos + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = pos;
            let hex = c == '0' && matches!(peek(pos + 1), Some('x' | 'X'));
            let mut prev = '\0';
            while let Some(d) = peek(pos) {
                let ok = d.is_ascii_alphanumeric()
                    || d == '_'
                    || (d == '.'
                        && peek(pos + 1).is_some_and(|e| e.is_ascii_digit() || !e.is_alphabetic())
                        && prev != '.')
                    || ((d == '+' || d == '-') && matches!(prev, 'e' | 'E') && !hex);
                if !ok {
                    break;
                }
                prev = d;
                pos += 1;
            }
            Token::new(
                TokKind::Number,
                chars[start..pos].iter().collect::<String>(),
            )
        } else if c == '_' || c == '$' || c.is_alphabetic() {
            let start = pos;
            while peek(pos).is_some_and(|c| c == '_' || c == '$' || c.is_alphanumeric()) {
                pos += 1;
            }
            let word: String = chars[start..pos].iter().collect();
            let kind = if KEYWORDS.contains(&word.as_str()) {
                TokKind::Keyword
            } else {
                TokKind::Ident
            };
            Token::new(kind, word)
        } else {
            let op = OPS
                .iter()
                .find(|op| {
                    op.chars()
                        .enumerate()
                        .all(|(i, oc)| peek(pos + i) == Some(oc))
                })
                .ok_or_else(|| err(line, format!("unexpected character `{c}`")))?;
            pos += op.len();
            Token::op(op)
        };
        toks.push(tok);
        lines.push(start_line);
    }
    Ok((toks, lines))
}

struct Parser {
    toks: Vec<Token>,
    lines: Vec<usize>,
    pos: usize,
}

pub(crate) fn parse(source: &str) -> Result<Block, ParseError> {
    let (toks, lines) = lex(source)?;
    if toks.is_empty() {
        return Err(err(1, "no code"));
    }
    check_brackets(&toks, &lines)?;
    let mut p = Parser {
        toks,
        lines,
        pos: 0,
    };
    let mut stmts = Vec::new();
    while !p.eof() {
        if let Some(s) = p.top_item()? {
            stmts.push(s);
        }
    }
    Ok(Block::new(stmts))
}

fn check_brackets(toks: &[Token], lines: &[usize]) -> Result<(), ParseError> {
    let mut stack: Vec<(&str, usize)> = Vec::new();
    for (t, &l) in toks.iter().zip(lines) {
        if t.is_open() {
            stack.push((t.text.as_str(), l));
        } else if t.is_close() {
            let want = match t.text.as_str() {
                ")" => "(",
                "]" => "[",
                _ => "{",
            };
            match stack.pop() {
                Some((open, _)) if open == want => {}
                _ => return Err(err(l, format!("unbalanced `{}`", t.text))),
            }
        }
    }
    match stack.last() {
        Some((open, l)) => Err(err(*l, format!("`{open}` is never closed"))),
        None => Ok(()),
    }
}

fn expr(toks: &[Token]) -> Expr {
    Expr::new(toks.to_vec())
}

/// Splits a parameter list at commas outside brackets and generic arguments.
fn split_params(toks: &[Token]) -> Vec<&[Token]> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, t) in toks.iter().enumerate() {
        match t.text.as_str() {
            "(" | "[" | "{" | "<" if t.kind == TokKind::Op => depth += 1,
            ")" | "]" | "}" | ">" if t.kind == TokKind::Op => depth -= 1,
            ">>" if t.kind == TokKind::Op => depth -= 2,
            ">>>" if t.kind == TokKind::Op => depth -= 3,
            "," if depth == 0 => {
                parts.push(&toks[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < toks.len() {
        parts.push(&toks[start..]);
    }
    parts
}

fn java_params(toks: &[Token]) -> Vec<String> {
    split_params(toks)
        .into_iter()
        .filter_map(|p| {
            p.iter()
                .rev()
                .find(|t| t.is_ident())
                .map(|t| t.text.clone())
        })
        .collect()
}

impl Parser {
    fn eof(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn tok(&self, off: usize) -> Option<&Token> {
        self.toks.get(self.pos + off)
    }

    fn line(&self) -> usize {
        self.lines
            .get(self.pos)
            .or(self.lines.last())
            .copied()
            .unwrap_or(1)
    }

    fn at_op(&self, op: &str) -> bool {
        self.tok(0).is_some_and(|t| t.is_op(op))
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.tok(0).is_some_and(|t| t.is_kw(kw))
    }

    fn expect_op(&mut self, op: &str) -> Result<(), ParseError> {
        if self.at_op(op) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self
                .tok(0)
                .map_or("end of input".to_string(), |t| format!("`{}`", t.text));
            Err(err(self.line(), format!("expected `{op}`, found {found}")))
        }
    }

    /// Consumes a bracketed group starting at the current `(`, returning the
    /// inner tokens.
    fn group(&mut self) -> Result<Vec<Token>, ParseError> {
        let open = self.pos;
        self.expect_op("(")?;
        let close = super::token::matching_close(&self.toks, open)
            .ok_or_else(|| err(self.line(), "unclosed `(`"))?;
        self.pos = close + 1;
        Ok(self.toks[open + 1..close].to_vec())
    }

    /// Index of the next token at depth zero matching `pred`, scanning from
    /// the current position; stops at an unmatched closer.
    fn scan(&self, pred: impl Fn(&Token) -> bool) -> Option<usize> {
        self.scan_from(self.pos, pred)
    }

    fn scan_from(&self, start: usize, pred: impl Fn(&Token) -> bool) -> Option<usize> {
        let mut depth = 0i32;
        for i in start..self.toks.len() {
            let t = &self.toks[i];
            if depth == 0 && pred(t) {
                return Some(i);
            }
            if t.is_open() {
                depth += 1;
            } else if t.is_close() {
                depth -= 1;
                if depth < 0 {
                    return None;
                }
            }
        }
        None
    }

    /// Position after annotations and modifiers starting at the cursor.
    fn skip_modifiers(&self, mut i: usize) -> usize {
        loop {
            let Some(t) = self.toks.get(i) else { return i };
            if t.is_op("@") && !self.toks.get(i + 1).is_some_and(|n| n.is_kw("interface")) {
                i += 2;
                while self.toks.get(i).is_some_and(|t| t.is_op("."))
                    && self.toks.get(i + 1).is_some_and(|t| t.is_ident())
                {
                    i += 2;
                }
                if self.toks.get(i).is_some_and(|t| t.is_op("(")) {
                    match super::token::matching_close(&self.toks, i) {
                        Some(c) => i = c + 1,
                        None => return i,
                    }
                }
            } else if t.kind == TokKind::Keyword && MODIFIERS.contains(&t.text.as_str())
                || (t.is_ident() && matches!(t.text.as_str(), "sealed" | "non"))
            {
                i += 1;
                if self.toks.get(i).is_some_and(|t| t.is_op("-")) {
                    i += 1;
                }
            } else {
                return i;
            }
        }
    }

    fn is_type_decl_at(&self, i: usize) -> bool {
        match self.toks.get(i) {
            Some(t) if t.is_kw("class") || t.is_kw("interface") || t.is_kw("enum") => true,
            Some(t) if t.is_op("@") => self.toks.get(i + 1).is_some_and(|n| n.is_kw("interface")),
            Some(t) if t.is_ident() && t.is("record") => {
                self.toks.get(i + 1).is_some_and(|n| n.is_ident())
                    && self
                        .toks
                        .get(i + 2)
                        .is_some_and(|n| n.is_op("(") || n.is_op("<"))
            }
            _ => false,
        }
    }

    fn top_item(&mut self) -> Result<Option<Stmt>, ParseError> {
        let line = self.line();
        if self.at_op(";") {
            self.pos += 1;
            return Ok(None);
        }
        if self.at_kw("package") || self.at_kw("import") {
            return self.simple().map(Some);
        }
        let after = self.skip_modifiers(self.pos);
        if self.is_type_decl_at(after) {
            return self.type_decl(after).map(Some);
        }
        if let Some(def) = self.try_method(after, true)? {
            return Ok(Some(Stmt::new(line, def)));
        }
        self.statement()
    }

    fn type_decl(&mut self, kw: usize) -> Result<Stmt, ParseError> {
        let line = self.line();
        let is_enum = self.toks[kw].is_kw("enum");
        let name_at = if self.toks[kw].is_op("@") {
            kw + 2
        } else {
            kw + 1
        };
        let name = self
            .toks
            .get(name_at)
            .filter(|t| t.is_ident())
            .ok_or_else(|| err(line, "expected type name"))?
            .text
            .clone();
        let brace = self
            .scan(|t| t.is_op("{"))
            .ok_or_else(|| err(line, "expected `{` after type header"))?;
        let header = expr(&self.toks[self.pos..brace]);
        self.pos = brace;
        let body = self.class_body(is_enum)?;
        Ok(Stmt::new(
            line,
            StmtKind::Class(ClassDef { name, header, body }),
        ))
    }

    fn class_body(&mut self, is_enum: bool) -> Result<Block, ParseError> {
        self.expect_op("{")?;
        let mut stmts = Vec::new();
        if is_enum {
            let line = self.line();
            let end = self
                .scan(|t| t.is_op(";") || t.is_op("}"))
                .ok_or_else(|| err(line, "unterminated enum body"))?;
            let terminated = self.toks[end].is_op(";");
            if end > self.pos || terminated {
                stmts.push(Stmt::new(
                    line,
                    StmtKind::Other(Other {
                        tokens: expr(&self.toks[self.pos..end]),
                        terminated,
                    }),
                ));
            }
            self.pos = if terminated { end + 1 } else { end };
        }
        loop {
            if self.eof() {
                return Err(err(self.line(), "expected `}`"));
            }
            if self.at_op("}") {
                self.pos += 1;
                break;
            }
            if let Some(s) = self.member()? {
                stmts.push(s);
            }
        }
        Ok(Block::new(stmts))
    }

    fn member(&mut self) -> Result<Option<Stmt>, ParseError> {
        let line = self.line();
        if self.at_op(";") {
            self.pos += 1;
            return Ok(None);
        }
        let after = self.skip_modifiers(self.pos);
        if self.is_type_decl_at(after) {
            return self.type_decl(after).map(Some);
        }
        if self.toks.get(after).is_some_and(|t| t.is_op("{")) {
            let header = expr(&self.toks[self.pos..after]);
            self.pos = after;
            let body = self.block()?;
            return Ok(Some(Stmt::new(
                line,
                StmtKind::Compound(vec![Clause { header, body }]),
            )));
        }
        if let Some(def) = self.try_method(after, false)? {
            return Ok(Some(Stmt::new(line, def)));
        }
        let stop = self
            .scan(|t| t.is_op(";") || t.is_op("{"))
            .ok_or_else(|| err(line, "expected `;`"))?;
        if self.toks[stop].is_op("{") && !self.toks[self.pos..stop].iter().any(|t| t.is_op("=")) {
            let header = expr(&self.toks[self.pos..stop]);
            self.pos = stop;
            let body = self.block()?;
            return Ok(Some(Stmt::new(
                line,
                StmtKind::Compound(vec![Clause { header, body }]),
            )));
        }
        self.simple().map(Some)
    }

    /// Recognises `mods type name(params) [throws ..] { .. }` (or `;` inside
    /// a type body). `loose` requires a body, so that a top-level call
    /// statement is not mistaken for a declaration.
    fn try_method(&mut self, after: usize, loose: bool) -> Result<Option<StmtKind>, ParseError> {
        if self
            .toks
            .get(after)
            .is_some_and(|t| t.kind == TokKind::Keyword && !is_type_keyword(&t.text))
        {
            return Ok(None);
        }
        let Some(first) = self.scan_from(after, |t| {
            t.is_op("(") || t.is_op("=") || t.is_op(";") || t.is_op("{")
        }) else {
            return Ok(None);
        };
        if !self.toks[first].is_op("(")
            || first == 0
            || !self.toks[first - 1].is_ident()
            || first - 1 < after
        {
            return Ok(None);
        }
        // A declaration needs a type or modifier before the name, except for
        // constructors inside a type body.
        if loose && first - 1 == after {
            return Ok(None);
        }
        let close = super::token::matching_close(&self.toks, first)
            .ok_or_else(|| err(self.line(), "unclosed `(`"))?;
        let mut end = close + 1;
        while self
            .toks
            .get(end)
            .is_some_and(|t| t.is_op("[") || t.is_op("]"))
        {
            end += 1;
        }
        if self
            .toks
            .get(end)
            .is_some_and(|t| t.is_kw("throws") || t.is_kw("default"))
        {
            while self
                .toks
                .get(end)
                .is_some_and(|t| !t.is_op("{") && !t.is_op(";"))
            {
                end += 1;
            }
        }
        let Some(term) = self.toks.get(end) else {
            return Ok(None);
        };
        let has_body = term.is_op("{");
        if !has_body && (loose || !term.is_op(";")) {
            return Ok(None);
        }
        let name = self.toks[first - 1].text.clone();
        let params = java_params(&self.toks[first + 1..close]);
        let body;
        let header;
        if has_body {
            header = expr(&self.toks[self.pos..end]);
            self.pos = end;
            body = self.block()?;
        } else {
            header = expr(&self.toks[self.pos..=end]);
            self.pos = end + 1;
            body = Block::default();
        }
        Ok(Some(StmtKind::Def(FunctionDef {
            name,
            params,
            header,
            body,
        })))
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        self.expect_op("{")?;
        let mut stmts = Vec::new();
        loop {
            if self.eof() {
                return Err(err(self.line(), "expected `}`"));
            }
            if self.at_op("}") {
                self.pos += 1;
                return Ok(Block::new(stmts));
            }
            if let Some(s) = self.statement()? {
                stmts.push(s);
            }
        }
    }

    /// Body of a control statement: a block, an empty `;`, or one statement.
    fn body(&mut self) -> Result<Block, ParseError> {
        if self.at_op("{") {
            return self.block();
        }
        if self.at_op(";") {
            self.pos += 1;
            return Ok(Block::default());
        }
        if self.eof() {
            return Err(err(self.line(), "expected a statement"));
        }
        Ok(Block::new(self.statement()?.into_iter().collect()))
    }

    fn statement(&mut self) -> Result<Option<Stmt>, ParseError> {
        let line = self.line();
        let t = self.toks[self.pos].clone();
        let kind = match t.text.as_str() {
            "{" if t.kind == TokKind::Op => StmtKind::Block(self.block()?),
            ";" if t.kind == TokKind::Op => {
                self.pos += 1;
                return Ok(None);
            }
            "}" | ")" | "]" if t.kind == TokKind::Op => {
                return Err(err(line, format!("unexpected `{}`", t.text)));
            }
            "if" if t.kind == TokKind::Keyword => {
                self.pos += 1;
                let cond = expr(&self.group()?);
                let then = self.body()?;
                let orelse = if self.at_kw("else") {
                    self.pos += 1;
                    Some(self.body()?)
                } else {
                    None
                };
                StmtKind::If(IfStmt { cond, then, orelse })
            }
            "else" if t.kind == TokKind::Keyword => return Err(err(line, "`else` without `if`")),
            "for" if t.kind == TokKind::Keyword => {
                self.pos += 1;
                let head = self.group()?;
                let parts = split_top_level(&head, ";");
                let header = match parts.len() {
                    3 => {
                        let opt = |p: &[Token]| (!p.is_empty()).then(|| expr(p));
                        ForHeader::Counted {
                            init: opt(parts[0]),
                            cond: opt(parts[1]),
                            update: opt(parts[2]),
                        }
                    }
                    1 => {
                        let colon = find_top_level(&head, |t| t.is_op(":"))
                            .ok_or_else(|| err(line, "malformed for header"))?;
                        ForHeader::Each {
                            target: expr(&head[..colon]),
                            iter: expr(&head[colon + 1..]),
                        }
                    }
                    _ => return Err(err(line, "malformed for header")),
                };
                let body = self.body()?;
                StmtKind::For(ForLoop {
                    header,
                    body,
                    orelse: None,
                })
            }
            "while" if t.kind == TokKind::Keyword => {
                self.pos += 1;
                let cond = expr(&self.group()?);
                let body = self.body()?;
                StmtKind::While(WhileLoop {
                    cond,
                    body,
                    orelse: None,
                    do_while: false,
                })
            }
            "do" if t.kind == TokKind::Keyword => {
                self.pos += 1;
                let body = self.body()?;
                if !self.at_kw("while") {
                    return Err(err(self.line(), "expected `while` after do body"));
                }
                self.pos += 1;
                let cond = expr(&self.group()?);
                self.expect_op(";")?;
                StmtKind::While(WhileLoop {
                    cond,
                    body,
                    orelse: None,
                    do_while: true,
                })
            }
            "switch" if t.kind == TokKind::Keyword && self.tok(1).is_some_and(|n| n.is_op("(")) => {
                let start = self.pos;
                self.pos += 1;
                self.group()?;
                if !self.at_op("{") {
                    // A switch expression used as a statement.
                    self.pos = start;
                    return self.simple().map(Some);
                }
                let header = expr(&self.toks[start..self.pos]);
                let body = self.switch_body()?;
                StmtKind::Compound(vec![Clause { header, body }])
            }
            "try" if t.kind == TokKind::Keyword => {
                let start = self.pos;
                self.pos += 1;
                if self.at_op("(") {
                    self.group()?;
                }
                let header = expr(&self.toks[start..self.pos]);
                let mut clauses = vec![Clause {
                    header,
                    body: self.block()?,
                }];
                while self.at_kw("catch") || self.at_kw("finally") {
                    let start = self.pos;
                    self.pos += 1;
                    if self.toks[start].is_kw("catch") {
                        self.group()?;
                    }
                    let header = expr(&self.toks[start..self.pos]);
                    clauses.push(Clause {
                        header,
                        body: self.block()?,
                    });
                }
                StmtKind::Compound(clauses)
            }
            "synchronized"
                if t.kind == TokKind::Keyword && self.tok(1).is_some_and(|n| n.is_op("(")) =>
            {
                let start = self.pos;
                self.pos += 1;
                self.group()?;
                let header = expr(&self.toks[start..self.pos]);
                StmtKind::Compound(vec![Clause {
                    header,
                    body: self.block()?,
                }])
            }
            "return" if t.kind == TokKind::Keyword => {
                let end = self.statement_end(line)?;
                let value = (end > self.pos + 1).then(|| expr(&self.toks[self.pos + 1..end]));
                self.pos = end + 1;
                StmtKind::Return(value)
            }
            "break" | "continue" if t.kind == TokKind::Keyword => {
                let end = self.statement_end(line)?;
                let label = (end > self.pos + 1).then(|| expr(&self.toks[self.pos + 1..end]));
                self.pos = end + 1;
                if t.text == "break" {
                    StmtKind::Break(label)
                } else {
                    StmtKind::Continue(label)
                }
            }
            _ if t.is_ident() && self.tok(1).is_some_and(|n| n.is_op(":")) => {
                self.pos += 2;
                StmtKind::Other(Other {
                    tokens: expr(&self.toks[self.pos - 2..self.pos]),
                    terminated: false,
                })
            }
            _ => {
                let after = self.skip_modifiers(self.pos);
                if self.is_type_decl_at(after) {
                    return self.type_decl(after).map(Some);
                }
                return self.simple().map(Some);
            }
        };
        Ok(Some(Stmt::new(line, kind)))
    }

    fn statement_end(&self, line: usize) -> Result<usize, ParseError> {
        self.scan(|t| t.is_op(";"))
            .ok_or_else(|| err(line, "expected `;`"))
    }

    fn switch_body(&mut self) -> Result<Block, ParseError> {
        self.expect_op("{")?;
        let mut stmts = Vec::new();
        loop {
            if self.eof() {
                return Err(err(self.line(), "expected `}`"));
            }
            if self.at_op("}") {
                self.pos += 1;
                return Ok(Block::new(stmts));
            }
            if self.at_kw("case")
                || (self.at_kw("default")
                    && self.tok(1).is_some_and(|n| n.is_op(":") || n.is_op("->")))
            {
                let line = self.line();
                let end = self
                    .scan(|t| t.is_op(":") || t.is_op("->"))
                    .ok_or_else(|| err(line, "malformed case label"))?;
                stmts.push(Stmt::new(
                    line,
                    StmtKind::Other(Other {
                        tokens: expr(&self.toks[self.pos..=end]),
                        terminated: false,
                    }),
                ));
                self.pos = end + 1;
                continue;
            }
            if let Some(s) = self.statement()? {
                stmts.push(s);
            }
        }
    }

    /// An expression statement or declaration terminated by `;`.
    fn simple(&mut self) -> Result<Stmt, ParseError> {
        let line = self.line();
        let end = self.statement_end(line)?;
        let toks = &self.toks[self.pos..end];
        self.pos = end + 1;
        let keyword_led = toks.first().is_some_and(|t| {
            t.kind == TokKind::Keyword
                && !matches!(t.text.as_str(), "new" | "this" | "super")
                && !is_type_keyword(&t.text)
        });
        Ok(Stmt::new(
            line,
            classify_simple(expr(toks), keyword_led, true),
        ))
    }
}

fn is_type_keyword(s: &str) -> bool {
    matches!(
        s,
        "int"
            | "long"
            | "short"
            | "byte"
            | "char"
            | "boolean"
            | "float"
            | "double"
            | "void"
            | "var"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_literals_and_comments() {
        let (toks, lines) = lex("int x = 0x1F; // c\n/* a\n b */ String s = \"a\\\"b\"; char c = '\\'';\ndouble d = 1.5e-3;").unwrap();
        let t: Vec<_> = toks.iter().map(|t| t.text.as_str()).collect();
        assert_eq!(
            t,
            [
                "int",
                "x",
                "=",
                "0x1F",
                ";",
                "String",
                "s",
                "=",
                "\"a\\\"b\"",
                ";",
                "char",
                "c",
                "=",
                "'\\''",
                ";",
                "double",
                "d",
                "=",
                "1.5e-3",
                ";"
            ]
        );
        assert_eq!(lines[5], 3);
        assert_eq!(lines[15], 4);
    }

    #[test]
    fn generic_shifts_do_not_break_params() {
        let (toks, _) = lex("Map<String, List<Integer>> m, int[] a, int b[], long... xs").unwrap();
        assert_eq!(java_params(&toks), ["m", "a", "b", "xs"]);
    }

    #[test]
    fn unbalanced_braces_are_errors() {
        assert!(parse("class A { void f() { }").is_err());
        assert!(parse("class A { } }").is_err());
        assert!(parse("class A { void f() { if (x) { } else } }").is_err());
    }

    #[test]
    fn switch_and_labels() {
        let b = parse("class A { void f(int x) { outer: for (;;) { switch (x) { case 1: break outer; default: x++; } } } }").unwrap();
        let StmtKind::Class(c) = &b.stmts[0].kind else {
            panic!()
        };
        let StmtKind::Def(f) = &c.body.stmts[0].kind else {
            panic!()
        };
        assert_eq!(f.body.stmts.len(), 2);
        assert!(matches!(f.body.stmts[1].kind, StmtKind::For(_)));
    }
}
