//! Python lexer (logical lines with indentation) and statement parser.

use super::ir::{
    Block, ClassDef, Clause, ForHeader, ForLoop, FunctionDef, IfStmt, Stmt, StmtKind, WhileLoop,
};
use super::token::{find_top_level, matching_close, split_top_level, Expr, TokKind, Token};
use super::{classify_simple, ParseError};

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue",
    "def", "del", "elif", "else", "except", "finally", "for", "from", "global", "if", "import",
    "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return", "try", "while",
    "with", "yield",
];

const OPS: &[&str] = &[
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "==", "!=", "<=", ">=", "<<", ">>",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "@=", "+", "-", "*", "/", "%", "@", "&", "|",
    "^", "~", "<", ">", "(", ")", "[", "]", "{", "}", ",", ":", ".", ";", "=",
];

const STRING_PREFIXES: &[&str] = &["r", "u", "b", "f", "br", "rb", "fr", "rf"];

#[derive(Debug, Clone)]
pub(crate) struct Line {
    pub indent: usize,
    pub line: usize,
    pub toks: Vec<Token>,
}

struct Lexer<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    out: Vec<Line>,
    current: Option<Line>,
    brackets: Vec<(char, usize)>,
    _src: &'a str,
}

fn err(line: usize, reason: impl Into<String>) -> ParseError {
    ParseError {
        line,
        reason: reason.into(),
    }
}

/// Splits source into logical lines. Brackets and backslashes join physical
/// lines; comments and blank lines are dropped.
pub(crate) fn lex(source: &str) -> Result<Vec<Line>, ParseError> {
    let mut lx = Lexer {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        out: Vec::new(),
        current: None,
        brackets: Vec::new(),
        _src: source,
    };
    lx.run()?;
    Ok(lx.out)
}

/// Flat token stream, used by the classifier.
pub(crate) fn tokens(source: &str) -> Result<Vec<Token>, ParseError> {
    Ok(lex(source)?.into_iter().flat_map(|l| l.toks).collect())
}

impl Lexer<'_> {
    fn peek(&self, off: usize) -> Option<char> {
        self.chars.get(self.pos + off).copied()
    }

    fn push(&mut self, tok: Token, indent: usize) {
        let line = self.line;
        self.current
            .get_or_insert_with(|| Line {
                indent,
                line,
                toks: Vec::new(),
            })
            .toks
            .push(tok);
    }

    fn finish_line(&mut self) {
        if let Some(l) = self.current.take() {
            self.out.push(l);
        }
    }

    fn run(&mut self) -> Result<(), ParseError> {
        let mut at_line_start = true;
        let mut indent = 0;
        while self.pos < self.chars.len() {
            if at_line_start && self.brackets.is_empty() && self.current.is_none() {
                indent = 0;
                while let Some(c) = self.peek(0) {
                    match c {
                        ' ' => indent += 1,
                        '\t' => indent = (indent / 8 + 1) * 8,
                        '\x0c' => indent = 0,
                        _ => break,
                    }
                    self.pos += 1;
                }
                at_line_start = false;
                continue;
            }
            let c = self.chars[self.pos];
            match c {
                '\n' => {
                    self.pos += 1;
                    if self.brackets.is_empty() {
                        self.finish_line();
                        at_line_start = true;
                    }
                    self.line += 1;
                }
                '\r' => self.pos += 1,
                '\\' => {
                    let mut p = self.pos + 1;
                    if self.chars.get(p) == Some(&'\r') {
                        p += 1;
                    }
                    if self.chars.get(p) == Some(&'\n') {
                        self.pos = p + 1;
                        self.line += 1;
                    } else {
                        return Err(err(
                            self.line,
                            "unexpected character after line continuation",
                        ));
                    }
                }
                '#' => {
                    while self.peek(0).is_some_and(|c| c != '\n') {
                        self.pos += 1;
                    }
                }
                c if c.is_whitespace() => self.pos += 1,
                '"' | '\'' => {
                    let s = self.string(String::new())?;
                    self.push(Token::new(TokKind::Str, s), indent);
                }
                c if c.is_ascii_digit()
                    || (c == '.' && self.peek(1).is_some_and(|d| d.is_ascii_digit())) =>
                {
                    let n = self.number();
                    self.push(Token::new(TokKind::Number, n), indent);
                }
                c if c == '_' || c.is_alphabetic() => {
                    let start = self.pos;
                    while self
                        .peek(0)
                        .is_some_and(|c| c == '_' || c.is_alphanumeric())
                    {
                        self.pos += 1;
                    }
                    let word: String = self.chars[start..self.pos].iter().collect();
                    if matches!(self.peek(0), Some('"' | '\''))
                        && STRING_PREFIXES.contains(&word.to_ascii_lowercase().as_str())
                    {
                        let s = self.string(word)?;
                        self.push(Token::new(TokKind::Str, s), indent);
                    } else {
                        let kind = if KEYWORDS.contains(&word.as_str()) {
                            TokKind::Keyword
                        } else {
                            TokKind::Ident
                        };
                        self.push(Token::new(kind, word), indent);
                    }
                }
                _ => {
                    let op = OPS
                        .iter()
                        .find(|op| {
                            op.chars()
                                .enumerate()
                                .all(|(i, oc)| self.peek(i) == Some(oc))
                        })
                        .ok_or_else(|| err(self.line, format!("unexpected character `{c}`")))?;
                    self.pos += op.len();
                    match *op {
                        "(" | "[" | "{" => self.brackets.push((c, self.line)),
                        ")" | "]" | "}" => {
                            let want = match c {
                                ')' => '(',
                                ']' => '[',
                                _ => '{',
                            };
                            match self.brackets.pop() {
                                Some((open, _)) if open == want => {}
                                _ => return Err(err(self.line, format!("unbalanced `{c}`"))),
                            }
                        }
                        _ => {}
                    }
                    self.push(Token::op(op), indent);
                }
            }
        }
        if let Some((open, line)) = self.brackets.last() {
            return Err(err(*line, format!("`{open}` is never closed")));
        }
        self.finish_line();
        Ok(())
    }

    fn string(&mut self, prefix: String) -> Result<String, ParseError> {
        let start_line = self.line;
        let q = self.chars[self.pos];
        let triple = self.peek(1) == Some(q) && self.peek(2) == Some(q);
        let mut s = prefix;
        let qlen = if triple { 3 } else { 1 };
        for _ in 0..qlen {
            s.push(q);
        }
        self.pos += qlen;
        loop {
            let Some(c) = self.peek(0) else {
                return Err(err(start_line, "unterminated string literal"));
            };
            if c == '\\' {
                s.push(c);
                self.pos += 1;
                if let Some(n) = self.peek(0) {
                    if n == '\n' {
                        self.line += 1;
                    }
                    s.push(n);
                    self.pos += 1;
                }
                continue;
            }
            if c == '\n' {
                if !triple {
                    return Err(err(start_line, "unterminated string literal"));
                }
                self.line += 1;
            }
            if c == q && (!triple || (self.peek(1) == Some(q) && self.peek(2) == Some(q))) {
                for _ in 0..qlen {
                    s.push(q);
                }
                self.pos += qlen;
                return Ok(s);
            }
            s.push(c);
            self.pos += 1;
        }
    }

    fn number(&mut self) -> String {
        let start = self.pos;
        let mut prev = '\0';
        while let Some(c) = self.peek(0) {
            let ok = c.is_ascii_alphanumeric()
                || c == '_'
                || (c == '.' && self.peek(1).is_none_or(|d| d != '.'))
                || ((c == '+' || c == '-') && matches!(prev, 'e' | 'E') && !self.is_hex(start));
            if !ok {
                break;
            }
            prev = c;
            self.pos += 1;
        }
        self.chars[start..self.pos].iter().collect()
    }

    fn is_hex(&self, start: usize) -> bool {
        self.chars.get(start) == Some(&'0') && matches!(self.chars.get(start + 1), Some('x' | 'X'))
    }
}

struct Parser {
    lines: Vec<Line>,
    pos: usize,
}

pub(crate) fn parse(source: &str) -> Result<Block, ParseError> {
    let mut lines = lex(source)?;
    if lines.is_empty() {
        return Err(err(1, "no code"));
    }
    let base = lines.iter().map(|l| l.indent).min().unwrap_or(0);
    for l in &mut lines {
        l.indent -= base;
    }
    if lines[0].indent != 0 {
        return Err(err(lines[0].line, "unexpected indent"));
    }
    let mut p = Parser { lines, pos: 0 };
    let block = p.block(0)?;
    if let Some(l) = p.lines.get(p.pos) {
        return Err(err(
            l.line,
            "unindent does not match any outer indentation level",
        ));
    }
    Ok(block)
}

/// First `:` at depth zero that does not belong to a `lambda`.
fn header_colon(toks: &[Token]) -> Option<usize> {
    let mut depth = 0i32;
    let mut lambdas = 0;
    for (i, t) in toks.iter().enumerate() {
        if t.is_open() {
            depth += 1;
        } else if t.is_close() {
            depth -= 1;
        } else if depth == 0 {
            if t.is_kw("lambda") {
                lambdas += 1;
            } else if t.is_op(":") {
                if lambdas == 0 {
                    return Some(i);
                }
                lambdas -= 1;
            }
        }
    }
    None
}

fn expr(toks: &[Token]) -> Expr {
    Expr::new(toks.to_vec())
}

fn is_soft_compound(toks: &[Token]) -> bool {
    let first = &toks[0];
    if !(first.is_ident() && (first.is("match") || first.is("case"))) || toks.len() < 3 {
        return false;
    }
    let second = &toks[1];
    if second.kind == TokKind::Op && !matches!(second.text.as_str(), "(" | "[" | "{" | "-" | "*") {
        return false;
    }
    header_colon(toks).is_some_and(|c| c == toks.len() - 1)
}

fn simple_statements(toks: &[Token], line: usize) -> Vec<Stmt> {
    split_top_level(toks, ";")
        .into_iter()
        .filter(|s| !s.is_empty())
        .map(|s| Stmt::new(line, simple(s)))
        .collect()
}

fn simple(toks: &[Token]) -> StmtKind {
    let first = &toks[0];
    let rest = || (toks.len() > 1).then(|| expr(&toks[1..]));
    if first.is_kw("return") {
        return StmtKind::Return(rest());
    }
    if first.is_kw("break") {
        return StmtKind::Break(None);
    }
    if first.is_kw("continue") {
        return StmtKind::Continue(None);
    }
    classify_simple(expr(toks), first.kind == TokKind::Keyword, false)
}

impl Parser {
    fn peek(&self) -> Option<&Line> {
        self.lines.get(self.pos)
    }

    fn block(&mut self, indent: usize) -> Result<Block, ParseError> {
        let mut stmts = Vec::new();
        while let Some(l) = self.peek() {
            if l.indent < indent {
                break;
            }
            if l.indent > indent {
                return Err(err(l.line, "unexpected indent"));
            }
            stmts.extend(self.statement()?);
        }
        Ok(Block::new(stmts))
    }

    /// Parses the body following a header colon at `colon` of `line`.
    fn body(&mut self, line: &Line, colon: usize) -> Result<Block, ParseError> {
        if colon + 1 < line.toks.len() {
            return Ok(Block::new(simple_statements(
                &line.toks[colon + 1..],
                line.line,
            )));
        }
        match self.peek() {
            Some(next) if next.indent > line.indent => {
                let indent = next.indent;
                self.block(indent)
            }
            _ => Err(err(line.line, "expected an indented block")),
        }
    }

    /// Consumes a continuation clause (`else`, `elif`, ...) at the same indent.
    fn continuation(&mut self, indent: usize, keywords: &[&str]) -> Option<Line> {
        let l = self.peek()?;
        if l.indent == indent && keywords.iter().any(|k| l.toks[0].is_kw(k)) {
            self.pos += 1;
            return Some(self.lines[self.pos - 1].clone());
        }
        None
    }

    fn header(&self, line: &Line) -> Result<usize, ParseError> {
        header_colon(&line.toks).ok_or_else(|| err(line.line, "expected `:`"))
    }

    fn else_block(&mut self, indent: usize) -> Result<Option<Block>, ParseError> {
        match self.continuation(indent, &["else"]) {
            Some(l) => {
                let c = self.header(&l)?;
                Ok(Some(self.body(&l, c)?))
            }
            None => Ok(None),
        }
    }

    fn statement(&mut self) -> Result<Vec<Stmt>, ParseError> {
        let mut line = self.lines[self.pos].clone();
        self.pos += 1;
        let n = line.line;
        if line.toks[0].is_kw("async") && line.toks.len() > 1 {
            line.toks.remove(0);
        }
        let first = line.toks[0].clone();
        let kind = match first.text.as_str() {
            "if" if first.kind == TokKind::Keyword => StmtKind::If(self.if_stmt(&line)?),
            "while" if first.kind == TokKind::Keyword => {
                let c = self.header(&line)?;
                let body = self.body(&line, c)?;
                StmtKind::While(WhileLoop {
                    cond: expr(&line.toks[1..c]),
                    body,
                    orelse: self.else_block(line.indent)?,
                    do_while: false,
                })
            }
            "for" if first.kind == TokKind::Keyword => {
                let c = self.header(&line)?;
                let head = &line.toks[..c];
                let in_pos = find_top_level(head, |t| t.is_kw("in"))
                    .filter(|&i| i > 1)
                    .ok_or_else(|| err(n, "expected `in` in for header"))?;
                let body = self.body(&line, c)?;
                StmtKind::For(ForLoop {
                    header: ForHeader::Each {
                        target: expr(&head[1..in_pos]),
                        iter: expr(&head[in_pos + 1..]),
                    },
                    body,
                    orelse: self.else_block(line.indent)?,
                })
            }
            "def" if first.kind == TokKind::Keyword => {
                let c = self.header(&line)?;
                let head = &line.toks[..c];
                let name = head
                    .get(1)
                    .filter(|t| t.is_ident())
                    .ok_or_else(|| err(n, "expected function name"))?
                    .text
                    .clone();
                let params = python_params(head);
                let body = self.body(&line, c)?;
                StmtKind::Def(FunctionDef {
                    name,
                    params,
                    header: expr(head),
                    body,
                })
            }
            "class" if first.kind == TokKind::Keyword => {
                let c = self.header(&line)?;
                let name = line
                    .toks
                    .get(1)
                    .filter(|t| t.is_ident())
                    .ok_or_else(|| err(n, "expected class name"))?
                    .text
                    .clone();
                let body = self.body(&line, c)?;
                StmtKind::Class(ClassDef {
                    name,
                    header: expr(&line.toks[..c]),
                    body,
                })
            }
            "try" if first.kind == TokKind::Keyword => {
                let c = self.header(&line)?;
                let mut clauses = vec![Clause {
                    header: expr(&line.toks[..c]),
                    body: self.body(&line, c)?,
                }];
                while let Some(l) = self.continuation(line.indent, &["except", "else", "finally"]) {
                    let c = self.header(&l)?;
                    clauses.push(Clause {
                        header: expr(&l.toks[..c]),
                        body: self.body(&l, c)?,
                    });
                }
                StmtKind::Compound(clauses)
            }
            "with" if first.kind == TokKind::Keyword => self.single_clause(&line)?,
            "elif" | "else" | "except" | "finally" if first.kind == TokKind::Keyword => {
                return Err(err(n, format!("unexpected `{}`", first.text)));
            }
            _ if is_soft_compound(&line.toks) => self.single_clause(&line)?,
            _ => return Ok(simple_statements(&line.toks, n)),
        };
        Ok(vec![Stmt::new(n, kind)])
    }

    fn single_clause(&mut self, line: &Line) -> Result<StmtKind, ParseError> {
        let c = self.header(line)?;
        Ok(StmtKind::Compound(vec![Clause {
            header: expr(&line.toks[..c]),
            body: self.body(line, c)?,
        }]))
    }

    fn if_stmt(&mut self, line: &Line) -> Result<IfStmt, ParseError> {
        let c = self.header(line)?;
        let then = self.body(line, c)?;
        let orelse = match self.continuation(line.indent, &["elif", "else"]) {
            Some(l) if l.toks[0].is_kw("elif") => {
                let n = l.line;
                Some(Block::new(vec![Stmt::new(
                    n,
                    StmtKind::If(self.if_stmt(&l)?),
                )]))
            }
            Some(l) => {
                let c = self.header(&l)?;
                Some(self.body(&l, c)?)
            }
            None => None,
        };
        Ok(IfStmt {
            cond: expr(&line.toks[1..c]),
            then,
            orelse,
        })
    }
}

fn python_params(head: &[Token]) -> Vec<String> {
    let Some(open) = head.iter().position(|t| t.is_op("(")) else {
        return Vec::new();
    };
    let Some(close) = matching_close(head, open) else {
        return Vec::new();
    };
    split_top_level(&head[open + 1..close], ",")
        .into_iter()
        .filter_map(|p| p.iter().find(|t| t.is_ident()).map(|t| t.text.clone()))
        .collect()
}
