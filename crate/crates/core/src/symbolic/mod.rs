//! The symbolic complexity analyzer.
//!
//! Works in five passes over the structural IR: function extraction, loop and
//! recursion detection, special-operation detection, cost aggregation and
//! classification. Loop bounds are judged through a flow-insensitive taint
//! analysis ([`InputVars`]) that tracks which values are sized by the input.

pub mod taint;
pub mod term;

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

pub use taint::{InputVars, Taint};
pub use term::{combine_nested, combine_sequence, sum_line, ComplexityTerm, TermKind};

use crate::class::ComplexityClass;
use crate::dataset::{CodeSnippet, Language};
use crate::frontend::ir::{child_blocks, stmt_exprs, visit_stmts};
use crate::frontend::token::{
    matching_close, qualifier_before, split_args, split_top_level, Expr, RawCall, Token,
};
use crate::frontend::{parse, Block, ForHeader, FunctionUnit, Stmt, StmtKind, StructuralIr};
use taint::{
    assignments, embedded_targets, incdec_targets, lhs_targets, resolves_to_user, vars_of,
    READER_NAMES,
};

/// One maximal loop nest, following its deepest path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopInfo {
    pub depth: usize,
    pub cost_per_level: Vec<TermKind>,
    /// First and last source line of the outermost loop.
    pub location: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shrink {
    Decrement,
    Halving,
    Unknown,
}

impl Shrink {
    fn name(self) -> &'static str {
        match self {
            Shrink::Decrement => "decrement",
            Shrink::Halving => "halving",
            Shrink::Unknown => "unknown shrink",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionInfo {
    pub function: String,
    /// Self-calls along the most expensive path through one invocation.
    pub self_call_count: usize,
    pub argument_shrink: Shrink,
}

/// Result of analysing one snippet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub class: ComplexityClass,
    pub trace: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("analysis unavailable: {reason}")]
pub struct AnalysisUnavailable {
    pub reason: String,
}

/// Full pipeline: parse, then derive a class with its derivation trace.
pub fn analyze(snippet: &CodeSnippet) -> Result<Analysis, AnalysisUnavailable> {
    let ir = parse(snippet).map_err(|e| AnalysisUnavailable {
        reason: e.to_string(),
    })?;
    Ok(analyze_ir(&ir))
}

pub fn analyze_ir(ir: &StructuralIr) -> Analysis {
    let a = Analyzer::new(ir);
    let parts = a.entry_parts();
    let total = combine_sequence(&parts);
    let mut trace = total.trace.clone();
    let kinds: Vec<TermKind> = parts.iter().map(|p| p.kind).collect();
    trace.push(format!("total: {}", sum_line(&kinds)));
    trace.push(format!("classification: {}", total.kind.class()));
    Analysis {
        class: total.kind.class(),
        trace,
    }
}

/// Variables whose values derive from the input.
pub fn input_vars(ir: &StructuralIr) -> BTreeSet<String> {
    InputVars::compute(ir).input_vars()
}

/// Loop nests of a block, with per-level costs judged against `taints`.
pub fn detect_loops(block: &Block, taints: &InputVars) -> Vec<LoopInfo> {
    let mut out = Vec::new();
    nests(block, taints, &mut out);
    out
}

fn nests(block: &Block, taints: &InputVars, out: &mut Vec<LoopInfo>) {
    for (i, s) in block.stmts.iter().enumerate() {
        if s.is_loop() {
            let levels = deepest_path(s, &block.stmts[..i], taints);
            out.push(LoopInfo {
                depth: levels.len(),
                cost_per_level: levels,
                location: (s.line, last_line(s)),
            });
        } else if !matches!(s.kind, StmtKind::Def(_) | StmtKind::Class(_)) {
            for child in child_blocks(s) {
                nests(child, taints, out);
            }
        }
    }
}

fn deepest_path(s: &Stmt, prev: &[Stmt], taints: &InputVars) -> Vec<TermKind> {
    let level = loop_level(s, prev, taints).0;
    let mut best: Vec<TermKind> = Vec::new();
    for child in child_blocks(s) {
        let mut inner = Vec::new();
        nests(child, taints, &mut inner);
        for info in inner {
            if info.depth > best.len() {
                best = info.cost_per_level;
            }
        }
    }
    let mut levels = vec![level];
    levels.extend(best);
    levels
}

fn last_line(s: &Stmt) -> usize {
    let mut last = s.line;
    for child in child_blocks(s) {
        visit_stmts(child, &mut |t| last = last.max(t.line));
    }
    last
}

/// Direct recursion in every function.
pub fn detect_recursion(ir: &StructuralIr) -> Vec<RecursionInfo> {
    ir.functions
        .iter()
        .filter_map(|f| recursion_of(f, ir.language))
        .collect()
}

fn recursion_of(f: &FunctionUnit, lang: Language) -> Option<RecursionInfo> {
    let shrink = shrink_of(f, lang);
    let raw = paths(&f.body, &f.name, shrink).worst();
    if raw == 0 {
        return None;
    }
    let memoized = f
        .decorators
        .iter()
        .any(|d| d.contains("lru_cache") || d.contains("cache"));
    Some(RecursionInfo {
        function: f.name.clone(),
        self_call_count: if memoized { 1 } else { raw },
        argument_shrink: shrink,
    })
}

fn self_calls(e: &Expr, name: &str) -> usize {
    e.calls()
        .iter()
        .filter(|c| {
            c.callee == name && matches!(c.qualifier.as_deref(), None | Some("self") | Some("this"))
        })
        .count()
}

/// Self-call counts along the paths of a block: `fall` for paths that reach
/// the end, `ret` for the worst path that returns early.
#[derive(Debug, Clone, Copy)]
struct Paths {
    fall: Option<usize>,
    ret: usize,
}

impl Paths {
    fn worst(self) -> usize {
        self.fall.unwrap_or(0).max(self.ret)
    }

    fn alt(a: Paths, b: Paths) -> Paths {
        let fall = match (a.fall, b.fall) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        Paths {
            fall,
            ret: a.ret.max(b.ret),
        }
    }

    fn shift(self, k: usize) -> Paths {
        Paths {
            fall: self.fall.map(|f| f + k),
            ret: self.ret + k,
        }
    }
}

fn paths(block: &Block, name: &str, shrink: Shrink) -> Paths {
    paths_of(&block.stmts, name, shrink)
}

fn paths_of(stmts: &[Stmt], name: &str, shrink: Shrink) -> Paths {
    let mut fall = 0;
    let mut ret = 0;
    for s in stmts {
        let p = stmt_paths(s, name, shrink);
        ret = ret.max(fall + p.ret);
        match p.fall {
            Some(f) => fall += f,
            None => {
                ret = ret.max(fall);
                return Paths { fall: None, ret };
            }
        }
    }
    Paths {
        fall: Some(fall),
        ret,
    }
}

fn stmt_paths(s: &Stmt, name: &str, shrink: Shrink) -> Paths {
    let own: usize = stmt_exprs(s).iter().map(|e| self_calls(e, name)).sum();
    match &s.kind {
        StmtKind::Def(_) | StmtKind::Class(_) => Paths {
            fall: Some(0),
            ret: 0,
        },
        StmtKind::Return(_) => Paths {
            fall: None,
            ret: own,
        },
        StmtKind::If(i) => {
            let then = paths(&i.then, name, shrink);
            let other = i
                .orelse
                .as_ref()
                .map(|b| paths(b, name, shrink))
                .unwrap_or(Paths {
                    fall: Some(0),
                    ret: 0,
                });
            Paths::alt(then, other).shift(own)
        }
        StmtKind::For(_) | StmtKind::While(_) => {
            let k = own
                + child_blocks(s)
                    .iter()
                    .map(|b| paths(b, name, shrink).worst())
                    .sum::<usize>();
            let m = if k == 0 {
                0
            } else if shrink == Shrink::Unknown {
                k
            } else {
                k.max(2)
            };
            Paths {
                fall: Some(m),
                ret: 0,
            }
        }
        StmtKind::Compound(clauses) if is_branching(clauses) => {
            let mut acc: Option<Paths> = None;
            for seg in clauses.iter().flat_map(|c| case_segments(&c.body)) {
                let p = paths_of(seg, name, shrink);
                acc = Some(acc.map_or(p, |a| Paths::alt(a, p)));
            }
            acc.unwrap_or(Paths {
                fall: Some(0),
                ret: 0,
            })
            .shift(own)
        }
        _ => {
            let mut p = Paths {
                fall: Some(own),
                ret: 0,
            };
            for b in child_blocks(s) {
                let q = paths(b, name, shrink);
                p = Paths {
                    fall: p.fall.map(|f| f + q.fall.unwrap_or(0)),
                    ret: p.ret.max(q.ret + p.fall.unwrap_or(0)),
                };
            }
            p
        }
    }
}

fn is_branching(clauses: &[crate::frontend::Clause]) -> bool {
    clauses
        .first()
        .and_then(|c| c.header.tokens.first())
        .is_some_and(|t| t.is("switch") || t.is("match"))
}

/// Splits a switch body at its case labels; a Python `match` body is a list
/// of `case` compounds, each its own segment.
fn case_segments(block: &Block) -> Vec<&[Stmt]> {
    let is_label = |s: &Stmt| matches!(&s.kind, StmtKind::Other(o) if o.tokens.tokens.first().is_some_and(|t| t.is("case") || t.is("default")));
    let is_case = |s: &Stmt| matches!(&s.kind, StmtKind::Compound(c) if c[0].header.tokens.first().is_some_and(|t| t.is("case")));
    let mut out = Vec::new();
    let mut start = 0;
    for (i, s) in block.stmts.iter().enumerate() {
        if is_label(s) || is_case(s) {
            if i > start {
                out.push(&block.stmts[start..i]);
            }
            if is_case(s) {
                out.push(&block.stmts[i..=i]);
            }
            start = i + 1;
        }
    }
    if start < block.stmts.len() {
        out.push(&block.stmts[start..]);
    }
    out
}

fn is_halving(toks: &[Token]) -> bool {
    toks.windows(2).any(|w| {
        ((w[0].is_op("/") || w[0].is_op("//")) && w[1].is("2"))
            || (w[0].is_op(">>") && w[1].is("1"))
    })
}

/// How the arguments of self-calls shrink.
fn shrink_of(f: &FunctionUnit, lang: Language) -> Shrink {
    let mut halving_vars: BTreeSet<String> = BTreeSet::new();
    let mut assigns: Vec<(Vec<String>, Expr)> = Vec::new();
    visit_stmts(&f.body, &mut |s| {
        if let StmtKind::Assign(e) = &s.kind {
            for a in assignments(e, lang) {
                assigns.push((a.targets, a.rhs));
            }
        }
    });
    loop {
        let mut changed = false;
        for (targets, rhs) in &assigns {
            if is_halving(&rhs.tokens) || rhs.variables().iter().any(|v| halving_vars.contains(*v))
            {
                for t in targets {
                    changed |= halving_vars.insert(t.clone());
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut args: Vec<Expr> = Vec::new();
    visit_stmts(&f.body, &mut |s| {
        for e in stmt_exprs(s) {
            for c in e.calls() {
                if c.callee == f.name
                    && matches!(c.qualifier.as_deref(), None | Some("self") | Some("this"))
                {
                    args.extend(c.args);
                }
            }
        }
    });
    if args
        .iter()
        .any(|a| is_halving(&a.tokens) || a.variables().iter().any(|v| halving_vars.contains(*v)))
    {
        return Shrink::Halving;
    }
    if args.iter().any(|a| is_decrement(&a.tokens)) {
        return Shrink::Decrement;
    }
    Shrink::Unknown
}

fn is_number(t: &Token) -> bool {
    t.kind == crate::frontend::TokKind::Number
}

fn is_decrement(t: &[Token]) -> bool {
    match t.len() {
        3 => {
            (t[0].is_ident() && (t[1].is_op("-") || t[1].is_op("+")) && is_number(&t[2]))
                || (is_number(&t[0]) && t[1].is_op("+") && t[2].is_ident())
        }
        // `a[1:]`
        5 => {
            t[0].is_ident()
                && t[1].is_op("[")
                && is_number(&t[2])
                && t[3].is_op(":")
                && t[4].is_op("]")
        }
        _ => false,
    }
}

/// Recurrence solving for direct recursion.
pub fn recursion_cost(info: &RecursionInfo, body: &ComplexityTerm) -> ComplexityTerm {
    use TermKind::*;
    let kind = match (info.self_call_count, info.argument_shrink) {
        (0, _) => body.kind,
        (1, Shrink::Halving) => {
            if body.kind >= N {
                NLog
            } else {
                Log.times(body.kind)
            }
        }
        (1, _) => N.times(body.kind),
        // Divide and conquer: T(n) = aT(n/2) + f(n).
        (_, Shrink::Halving) => match body.kind {
            One | Log => N,
            N => NLog,
            k => k,
        },
        _ => Exp,
    };
    let mut trace = body.trace.clone();
    let calls = if info.self_call_count == 1 {
        "self-call"
    } else {
        "self-calls"
    };
    trace.push(format!(
        "function `{}`: {} {calls} per invocation, {}, body {}: {}",
        info.function,
        info.self_call_count,
        info.argument_shrink.name(),
        body.kind,
        kind
    ));
    ComplexityTerm { kind, trace }
}

/// Sort and binary-search idioms directly in a block (not inside nested
/// definitions).
pub fn detect_special_tc(block: &Block) -> Vec<ComplexityTerm> {
    let mut out = Vec::new();
    visit_special(block, &mut out);
    out
}

fn visit_special(block: &Block, out: &mut Vec<ComplexityTerm>) {
    for s in &block.stmts {
        if matches!(s.kind, StmtKind::Def(_) | StmtKind::Class(_)) {
            continue;
        }
        for e in stmt_exprs(s) {
            for c in e.calls() {
                if let Some(kind) = special_kind(&c) {
                    out.push(ComplexityTerm::new(
                        kind,
                        special_step(s.line, &c.callee, kind),
                    ));
                }
            }
        }
        for child in child_blocks(s) {
            visit_special(child, out);
        }
    }
}

fn special_step(line: usize, callee: &str, kind: TermKind) -> String {
    format!("line {line}: `{callee}` costs {kind}")
}

fn special_kind(c: &RawCall) -> Option<TermKind> {
    let q = c.qualifier.as_deref();
    match c.callee.as_str() {
        "sorted" if q.is_none() => Some(TermKind::NLog),
        "sort" if q.is_some() => Some(TermKind::NLog),
        "parallelSort" => Some(TermKind::NLog),
        "bisect" | "bisect_left" | "bisect_right" | "binarySearch" => Some(TermKind::Log),
        _ => None,
    }
}

/// The collection a sort idiom sorts.
fn sorted_operand(c: &RawCall) -> Option<Expr> {
    match (c.callee.as_str(), c.qualifier.as_deref()) {
        ("sort", Some(q)) if !matches!(q, "Arrays" | "Collections") => Some(Expr::new(
            q.split('.')
                .flat_map(|p| [Token::op("."), Token::ident(p)])
                .skip(1)
                .collect(),
        )),
        _ => c.args.first().cloned(),
    }
}

struct Analyzer<'a> {
    ir: &'a StructuralIr,
    taint: InputVars,
    recursion: BTreeMap<String, RecursionInfo>,
    readers: BTreeSet<String>,
    memo: RefCell<BTreeMap<String, Vec<ComplexityTerm>>>,
    stack: RefCell<Vec<String>>,
}

impl<'a> Analyzer<'a> {
    fn new(ir: &'a StructuralIr) -> Self {
        let taint = InputVars::compute(ir);
        let recursion: BTreeMap<String, RecursionInfo> = detect_recursion(ir)
            .into_iter()
            .map(|r| (r.function.clone(), r))
            .collect();
        let readers = ir
            .functions
            .iter()
            .filter(|f| {
                READER_NAMES.contains(&f.name.as_str())
                    || (!recursion.contains_key(&f.name)
                        && !has_loop(&f.body)
                        && taint.returns(&f.name) == Taint::Input)
            })
            .map(|f| f.name.clone())
            .collect();
        Analyzer {
            ir,
            taint,
            recursion,
            readers,
            memo: RefCell::new(BTreeMap::new()),
            stack: RefCell::new(Vec::new()),
        }
    }

    fn entry_parts(&self) -> Vec<ComplexityTerm> {
        let top = &self.ir.top_level;
        if has_loop(top) || self.calls_user(top) {
            return self.block_parts(top);
        }
        let mut called = BTreeSet::new();
        for f in &self.ir.functions {
            for c in &f.call_sites {
                if c.callee != f.name {
                    called.insert(c.callee.as_str());
                }
            }
        }
        let mut parts = self.block_parts(top);
        for f in &self.ir.functions {
            if f.parent.is_none() && !called.contains(f.name.as_str()) {
                parts.extend(self.function_parts(&f.name));
            }
        }
        parts
    }

    fn calls_user(&self, block: &Block) -> bool {
        let mut found = false;
        visit_stmts(block, &mut |s| {
            for e in stmt_exprs(s) {
                found |= e.calls().iter().any(|c| self.is_user(c));
            }
        });
        found
    }

    fn is_user(&self, c: &RawCall) -> bool {
        resolves_to_user(c, self.taint.user_fns(), self.taint.classes())
    }

    /// Flattened cost parts of one function (max over same-name overloads).
    fn function_parts(&self, name: &str) -> Vec<ComplexityTerm> {
        if let Some(p) = self.memo.borrow().get(name) {
            return p.clone();
        }
        let mut best: Option<Vec<ComplexityTerm>> = None;
        self.stack.borrow_mut().push(name.to_string());
        for f in self.ir.functions.iter().filter(|f| f.name == name) {
            let mut parts = self.block_parts(&f.body);
            if let Some(info) = self.recursion.get(name) {
                let body = combine_sequence(&parts);
                let t = recursion_cost(info, &body);
                parts = if t.kind == TermKind::One {
                    Vec::new()
                } else {
                    vec![t]
                };
            }
            let kind = parts.iter().map(|p| p.kind).max();
            if best
                .as_ref()
                .is_none_or(|b| b.iter().map(|p| p.kind).max() < kind)
            {
                best = Some(parts);
            }
        }
        self.stack.borrow_mut().pop();
        let parts = best.unwrap_or_default();
        self.memo
            .borrow_mut()
            .insert(name.to_string(), parts.clone());
        parts
    }

    fn current_function(&self) -> Option<String> {
        self.stack.borrow().last().cloned()
    }

    fn block_parts(&self, block: &Block) -> Vec<ComplexityTerm> {
        let mut out = Vec::new();
        for (i, s) in block.stmts.iter().enumerate() {
            out.extend(self.stmt_parts(s, &block.stmts[..i]));
        }
        out
    }

    fn stmt_parts(&self, s: &Stmt, prev: &[Stmt]) -> Vec<ComplexityTerm> {
        match &s.kind {
            StmtKind::Def(_) | StmtKind::Class(_) => Vec::new(),
            StmtKind::For(_) | StmtKind::While(_) => self.loop_parts(s, prev),
            _ => {
                let mut out = Vec::new();
                for e in stmt_exprs(s) {
                    out.extend(self.expr_parts(&e.tokens, s.line));
                }
                for b in child_blocks(s) {
                    out.extend(self.block_parts(b));
                }
                out
            }
        }
    }

    fn loop_parts(&self, s: &Stmt, prev: &[Stmt]) -> Vec<ComplexityTerm> {
        let mut outside = Vec::new();
        let mut inside = Vec::new();
        let (body, orelse) = match &s.kind {
            StmtKind::For(f) => {
                match &f.header {
                    ForHeader::Each { iter, .. } => {
                        outside.extend(self.expr_parts(&iter.tokens, s.line))
                    }
                    ForHeader::Counted { init, cond, update } => {
                        if let Some(e) = init {
                            outside.extend(self.expr_parts(&e.tokens, s.line));
                        }
                        for e in [cond, update].into_iter().flatten() {
                            inside.extend(self.expr_parts(&e.tokens, s.line));
                        }
                    }
                }
                (&f.body, f.orelse.as_ref())
            }
            StmtKind::While(w) => {
                inside.extend(self.expr_parts(&w.cond.tokens, s.line));
                (&w.body, w.orelse.as_ref())
            }
            _ => unreachable!("loop_parts on a non-loop"),
        };
        let recursive = self
            .current_function()
            .filter(|f| {
                self.recursion
                    .get(f)
                    .is_some_and(|r| r.argument_shrink == Shrink::Unknown)
            })
            .filter(|f| block_calls(body, f));
        let (level, header) = if let Some(f) = recursive {
            // Each call visits a distinct part of the structure: the
            // traversal as a whole is charged to the recursion.
            (
                TermKind::One,
                format!(
                    "line {}: loop recursing into `{f}` is amortized into the recursion",
                    s.line
                ),
            )
        } else {
            let (k, text) = loop_level(s, prev, &self.taint);
            (k, format!("line {}: {text} runs {k} times", s.line))
        };
        inside.extend(self.block_parts(body));
        let inner = combine_sequence(&inside);
        let level_term = if level == TermKind::One {
            ComplexityTerm::one()
        } else {
            ComplexityTerm::new(level, header)
        };
        let nested = combine_nested(&level_term, &inner);
        if nested.kind != TermKind::One {
            outside.push(nested);
        }
        if let Some(b) = orelse {
            outside.extend(self.block_parts(b));
        }
        outside
    }

    /// Cost parts of an expression: comprehensions, sort idioms and calls to
    /// user functions.
    fn expr_parts(&self, toks: &[Token], line: usize) -> Vec<ComplexityTerm> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let t = &toks[i];
            if t.is_open() {
                if let Some(close) = matching_close(toks, i) {
                    let inner = &toks[i + 1..close];
                    if is_comprehension(inner) {
                        out.extend(self.comprehension(inner, line));
                        i = close + 1;
                        continue;
                    }
                }
                i += 1;
                continue;
            }
            if t.is_ident()
                && toks.get(i + 1).is_some_and(|n| n.is_op("("))
                && !(i > 0 && toks[i - 1].is_kw("new"))
            {
                let Some(close) = matching_close(toks, i + 1) else {
                    break;
                };
                let (qualifier, _) = qualifier_before(toks, i);
                let call = RawCall {
                    callee: t.text.clone(),
                    qualifier,
                    args: split_args(&toks[i + 2..close]),
                };
                out.extend(self.group_parts(&toks[i + 2..close], line));
                out.extend(self.call_parts(&call, line));
                i = close + 1;
                continue;
            }
            i += 1;
        }
        out
    }

    /// Contents of a bracket group, which may be a bare generator.
    fn group_parts(&self, inner: &[Token], line: usize) -> Vec<ComplexityTerm> {
        if is_comprehension(inner) {
            self.comprehension(inner, line)
        } else {
            self.expr_parts(inner, line)
        }
    }

    fn comprehension(&self, inner: &[Token], line: usize) -> Vec<ComplexityTerm> {
        let mut clauses = Vec::new();
        let mut element = Vec::new();
        let mut depth = 0i32;
        let mut start = 0;
        let mut cuts = Vec::new();
        for (i, t) in inner.iter().enumerate() {
            if t.is_open() {
                depth += 1;
            } else if t.is_close() {
                depth -= 1;
            } else if depth == 0
                && (t.is_kw("for") || t.is_kw("if"))
                && !(t.is_kw("if") && cuts.is_empty())
            {
                cuts.push(i);
            }
        }
        for (n, &c) in cuts.iter().enumerate() {
            if n == 0 {
                element.extend_from_slice(&inner[start..c]);
            }
            let end = cuts.get(n + 1).copied().unwrap_or(inner.len());
            clauses.push(&inner[c..end]);
            start = end;
        }
        let mut level = ComplexityTerm::one();
        let mut body = self.expr_parts(&element, line);
        for clause in clauses {
            if clause[0].is_kw("if") {
                body.extend(self.expr_parts(&clause[1..], line));
                continue;
            }
            let Some(pos) = clause.iter().position(|t| t.is_kw("in")) else {
                continue;
            };
            let iter = Expr::new(clause[pos + 1..].to_vec());
            let k = each_level(&iter, &self.taint);
            body.extend(self.expr_parts(&iter.tokens, line));
            if k != TermKind::One {
                let text = format!(
                    "line {line}: comprehension over `{}` runs {k} times",
                    iter.render(self.ir.language)
                );
                level = combine_nested(&level, &ComplexityTerm::new(k, text));
            }
        }
        let t = combine_nested(&level, &combine_sequence(&body));
        if t.kind == TermKind::One {
            Vec::new()
        } else {
            vec![t]
        }
    }

    fn call_parts(&self, c: &RawCall, line: usize) -> Vec<ComplexityTerm> {
        if self.is_user(c) {
            if self.stack.borrow().contains(&c.callee) || self.readers.contains(&c.callee) {
                return Vec::new();
            }
            let mut parts = self.function_parts(&c.callee);
            if let Some(first) = parts.first_mut() {
                let total = combine_sequence(&self.function_parts(&c.callee)).kind;
                first.trace.insert(
                    0,
                    format!("line {line}: call to `{}` costs {total}", c.callee),
                );
            }
            return parts;
        }
        let Some(kind) = special_kind(c) else {
            return Vec::new();
        };
        if kind == TermKind::NLog {
            if let Some(operand) = sorted_operand(c) {
                if self.taint.size(&operand).is_const() {
                    return Vec::new();
                }
            }
        }
        vec![ComplexityTerm::new(
            kind,
            special_step(line, &c.callee, kind),
        )]
    }
}

fn is_comprehension(inner: &[Token]) -> bool {
    split_top_level(inner, "for").len() > 1
}

fn has_loop(block: &Block) -> bool {
    let mut found = false;
    visit_stmts(block, &mut |s| found |= s.is_loop());
    found
}

fn block_calls(block: &Block, name: &str) -> bool {
    let mut found = false;
    visit_stmts(block, &mut |s| {
        found |= stmt_exprs(s).iter().any(|e| self_calls(e, name) > 0);
    });
    found
}

/// Iteration cost of `for x in iter`.
fn each_level(iter: &Expr, taints: &InputVars) -> TermKind {
    if let Some(c) = iter.as_single_call() {
        if c.qualifier.is_none() && matches!(c.callee.as_str(), "range" | "xrange") {
            if c.args.iter().any(|a| is_exp_bound(&a.tokens, taints)) {
                return TermKind::Exp;
            }
            let all_const = c.args.iter().all(|a| taints.expr(a).is_const());
            return if all_const {
                TermKind::One
            } else {
                TermKind::N
            };
        }
        if matches!(
            c.callee.as_str(),
            "permutations" | "combinations" | "product" | "combinations_with_replacement"
        ) && c.args.iter().any(|a| !taints.size(a).is_const())
        {
            return TermKind::Exp;
        }
    }
    if is_exp_bound(&iter.tokens, taints) {
        return TermKind::Exp;
    }
    if taints.size(iter).is_const() {
        TermKind::One
    } else {
        TermKind::N
    }
}

/// `1 << n`, `2 ** n` or `pow(2, n)` with a non-constant exponent.
fn is_exp_bound(toks: &[Token], taints: &InputVars) -> bool {
    let rest_tainted = |from: usize| {
        let end = toks[from..]
            .iter()
            .position(|t| t.is_close() || t.is_op(",") || t.is_op("+") || t.is_op("-"))
            .map_or(toks.len(), |p| from + p);
        !taints.expr(&Expr::new(toks[from..end].to_vec())).is_const()
    };
    for (i, t) in toks.iter().enumerate() {
        if i == 0 || i + 1 >= toks.len() {
            continue;
        }
        let shifted =
            (t.is_op("<<") && toks[i - 1].is("1")) || (t.is_op("**") && toks[i - 1].is("2"));
        if shifted && rest_tainted(i + 1) {
            return true;
        }
        let pow2 = t.is_op("(")
            && toks[i - 1].is("pow")
            && toks[i + 1].is("2")
            && toks.get(i + 2).is_some_and(|c| c.is_op(","));
        if pow2 && rest_tainted(i + 3) {
            return true;
        }
    }
    false
}

/// Iteration cost of one loop level and a short description of the header.
fn loop_level(s: &Stmt, prev: &[Stmt], taints: &InputVars) -> (TermKind, String) {
    let lang = taints.language();
    match &s.kind {
        StmtKind::For(f) => match &f.header {
            ForHeader::Each { target, iter } => {
                if let Some(cond) = iter_lambda_condition(iter) {
                    let k = conditional_level(&cond, None, None, &f.body, prev, taints);
                    return (k, format!("while loop `{}`", cond.render(lang)));
                }
                let text = format!(
                    "for loop `{} in {}`",
                    target.render(lang),
                    iter.render(lang)
                );
                (each_level(iter, taints), text)
            }
            ForHeader::Counted { init, cond, update } => {
                let text = format!(
                    "for loop `{}`",
                    cond.as_ref().map(|c| c.render(lang)).unwrap_or_default()
                );
                let k = match cond {
                    Some(c) => {
                        conditional_level(c, init.as_ref(), update.as_ref(), &f.body, prev, taints)
                    }
                    None => TermKind::N,
                };
                (k, text)
            }
        },
        StmtKind::While(w) => {
            let k = conditional_level(&w.cond, None, None, &w.body, prev, taints);
            (k, format!("while loop `{}`", w.cond.render(lang)))
        }
        _ => (TermKind::One, String::new()),
    }
}

/// `iter(lambda: bool(C), False)` and friends: a while loop over `C`.
pub(crate) fn iter_lambda_condition(iter: &Expr) -> Option<Expr> {
    let c = iter.as_single_call()?;
    if c.callee != "iter" || c.qualifier.is_some() || c.args.len() != 2 {
        return None;
    }
    let lam = &c.args[0].tokens;
    if !lam.first()?.is_kw("lambda") {
        return None;
    }
    let colon = lam.iter().position(|t| t.is_op(":"))?;
    Some(Expr::new(lam[colon + 1..].to_vec()))
}

/// Per-assignment facts inside a loop body, not descending into nested
/// definitions.
fn body_assignments(block: &Block, lang: Language, out: &mut Vec<taint::Assignment>) {
    for s in &block.stmts {
        match &s.kind {
            StmtKind::Def(_) | StmtKind::Class(_) => continue,
            StmtKind::Assign(e) => out.extend(assignments(e, lang)),
            StmtKind::For(f) => match &f.header {
                ForHeader::Each { target, iter } => out.push(taint::Assignment {
                    targets: lhs_targets(&target.tokens),
                    rhs: iter.clone(),
                    op: "in".into(),
                }),
                ForHeader::Counted { init, update, .. } => {
                    for e in [init, update].into_iter().flatten() {
                        out.extend(assignments(e, lang));
                    }
                }
            },
            _ => {}
        }
        if !matches!(s.kind, StmtKind::Assign(_)) {
            for e in stmt_exprs(s) {
                let targets = embedded_targets(&e.tokens);
                if !targets.is_empty() {
                    out.push(taint::Assignment {
                        targets,
                        rhs: e.clone(),
                        op: "embedded".into(),
                    });
                }
            }
        }
        for child in child_blocks(s) {
            body_assignments(child, lang, out);
        }
    }
}

fn conditional_level(
    cond: &Expr,
    init: Option<&Expr>,
    update: Option<&Expr>,
    body: &Block,
    prev: &[Stmt],
    taints: &InputVars,
) -> TermKind {
    let lang = taints.language();
    let mut vars: Vec<&str> = vars_of(cond);
    vars.sort();
    vars.dedup();
    if vars.is_empty() {
        return TermKind::N;
    }
    let mut assigns = Vec::new();
    body_assignments(body, lang, &mut assigns);
    if let Some(u) = update {
        assigns.extend(assignments(u, lang));
        let extra = incdec_targets(&u.tokens);
        if !extra.is_empty() {
            assigns.push(taint::Assignment {
                targets: extra,
                rhs: Expr::default(),
                op: "++".into(),
            });
        }
    }
    let in_cond = embedded_targets(&cond.tokens);
    let assigned: BTreeSet<&str> = assigns
        .iter()
        .flat_map(|a| a.targets.iter().map(String::as_str))
        .chain(in_cond.iter().map(String::as_str))
        .collect();
    let loop_vars: Vec<&str> = vars
        .iter()
        .copied()
        .filter(|v| assigned.contains(v))
        .collect();
    let bound_vars: Vec<&str> = vars
        .iter()
        .copied()
        .filter(|v| !assigned.contains(v))
        .collect();

    let init_assigns: Vec<taint::Assignment> =
        init.map(|e| assignments(e, lang)).unwrap_or_default();
    let init_taint = |v: &str| -> Taint {
        if let Some(a) = init_assigns
            .iter()
            .find(|a| a.targets.iter().any(|t| t == v))
        {
            return taints.expr(&a.rhs);
        }
        for s in prev.iter().rev() {
            if let StmtKind::Assign(e) = &s.kind {
                for a in assignments(e, lang) {
                    if a.targets.iter().any(|t| t == v) {
                        return if a.op == "=" {
                            taints.expr(&a.rhs)
                        } else {
                            taints.var(v)
                        };
                    }
                }
            }
        }
        taints.var(v)
    };
    let non_const = bound_vars.iter().any(|v| !taints.var(v).is_const())
        || loop_vars.iter().any(|v| !init_taint(v).is_const());
    if !non_const {
        return TermKind::One;
    }
    if is_exp_bound(&cond.tokens, taints) {
        return TermKind::Exp;
    }
    let multiplicative = assigns
        .iter()
        .any(|a| a.targets.iter().any(|t| loop_vars.contains(&t.as_str())) && is_multiplicative(a));
    if multiplicative || is_binary_search(&assigns, &vars) {
        return TermKind::Log;
    }
    TermKind::N
}

fn is_multiplicative(a: &taint::Assignment) -> bool {
    let rhs = &a.rhs.tokens;
    // A factor of 1 only stalls a product, but a shift by 1 doubles.
    let factor_ok = |t: &[Token], shift: bool| {
        let trivial: &[&str] = if shift { &["0"] } else { &["0", "1"] };
        t.len() == 1
            && (t[0].kind == crate::frontend::TokKind::Number
                && !trivial.contains(&t[0].text.as_str())
                || t[0].is_ident())
    };
    match a.op.as_str() {
        "*=" | "/=" | "//=" => factor_ok(rhs, false),
        ">>=" | "<<=" => factor_ok(rhs, true),
        "=" => {
            rhs.len() == 3
                && a.targets.len() == 1
                && rhs[0].is(&a.targets[0])
                && ["*", "/", "//", ">>", "<<"]
                    .iter()
                    .any(|op| rhs[1].is_op(op))
                && factor_ok(&rhs[2..], rhs[1].is_op(">>") || rhs[1].is_op("<<"))
        }
        _ => false,
    }
}

/// `mid = (lo + hi) / 2` followed by `lo = mid + 1` or `hi = mid`.
fn is_binary_search(assigns: &[taint::Assignment], cond_vars: &[&str]) -> bool {
    let mids: Vec<&str> = assigns
        .iter()
        .filter(|a| {
            is_halving(&a.rhs.tokens) && a.rhs.variables().iter().any(|v| cond_vars.contains(v))
        })
        .flat_map(|a| a.targets.iter().map(String::as_str))
        .collect();
    !mids.is_empty()
        && assigns.iter().any(|a| {
            a.targets.iter().any(|t| cond_vars.contains(&t.as_str()))
                && a.rhs.variables().iter().any(|v| mids.contains(v))
        })
}

#[cfg(test)]
mod tests;
