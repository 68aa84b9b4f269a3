//! Loop conversion: every `for` becomes a `while` and every `while` a `for`.

use std::collections::BTreeSet;

use super::AugmentError;
use crate::dataset::Language;
use crate::frontend::ir::{child_blocks, child_blocks_mut, visit_stmts};
use crate::frontend::token::{split_top_level, TokKind};
use crate::frontend::{
    classify_simple, print, Block, Expr, ForHeader, ForLoop, Stmt, StmtKind, StructuralIr, Token,
    WhileLoop,
};
use crate::symbolic::taint::{assignments, lhs_targets};

/// Fresh identifiers that do not clash with any token of the snippet.
struct Fresh {
    taken: BTreeSet<String>,
    next: usize,
}

impl Fresh {
    fn new(ir: &StructuralIr) -> Self {
        let mut taken = BTreeSet::new();
        visit_stmts(&ir.tree, &mut |s| {
            for e in crate::frontend::ir::stmt_exprs(s) {
                taken.extend(e.tokens.iter().map(|t| t.text.clone()));
            }
            match &s.kind {
                StmtKind::Def(d) => taken.extend(d.header.tokens.iter().map(|t| t.text.clone())),
                StmtKind::Class(c) => taken.extend(c.header.tokens.iter().map(|t| t.text.clone())),
                _ => {}
            }
        });
        Fresh { taken, next: 0 }
    }

    fn name(&mut self, stem: &str) -> String {
        loop {
            let n = format!("{stem}{}", self.next);
            self.next += 1;
            if self.taken.insert(n.clone()) {
                return n;
            }
        }
    }
}

fn ident(s: &str) -> Token {
    Token::ident(s)
}

fn op(s: &str) -> Token {
    Token::op(s)
}

fn num(s: &str) -> Token {
    Token::new(TokKind::Number, s)
}

fn kw(s: &str) -> Token {
    Token::new(TokKind::Keyword, s)
}

fn simple(line: usize, tokens: Vec<Token>, java: bool) -> Stmt {
    Stmt::new(line, classify_simple(Expr::new(tokens), false, java))
}

/// Wraps `toks` in parentheses unless it is a single token or a call.
fn grouped(toks: &[Token]) -> Vec<Token> {
    let needs = toks.len() > 1
        && toks
            .iter()
            .any(|t| t.kind == TokKind::Keyword || t.is_op(",") || t.is_op(":="));
    if needs {
        let mut v = vec![op("(")];
        v.extend_from_slice(toks);
        v.push(op(")"));
        v
    } else {
        toks.to_vec()
    }
}

/// A `continue` that would skip a hoisted update: unlabeled ones directly in
/// this loop, and labeled ones anywhere inside it.
fn has_continue(block: &Block) -> bool {
    fn walk(block: &Block, nested: bool) -> bool {
        block.stmts.iter().any(|s| match &s.kind {
            StmtKind::Continue(label) => label.is_some() || !nested,
            StmtKind::Def(_) | StmtKind::Class(_) => false,
            StmtKind::For(_) | StmtKind::While(_) => child_blocks(s).iter().any(|b| walk(b, true)),
            _ => child_blocks(s).iter().any(|b| walk(b, nested)),
        })
    }
    walk(block, false)
}

/// Names a block assigns, including loop targets and receivers of
/// method calls (which may mutate them).
fn assigned_in(block: &Block, lang: Language) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    visit_stmts(block, &mut |s| {
        match &s.kind {
            StmtKind::Assign(e) => {
                for a in assignments(e, lang) {
                    out.extend(a.targets);
                }
            }
            StmtKind::For(f) => {
                if let ForHeader::Each { target, .. } = &f.header {
                    out.extend(lhs_targets(&target.tokens));
                }
            }
            _ => {}
        }
        for e in crate::frontend::ir::stmt_exprs(s) {
            for c in e.calls() {
                if let Some(q) = c.qualifier {
                    out.insert(q);
                }
            }
            out.extend(crate::symbolic::taint::embedded_targets(&e.tokens));
        }
    });
    out
}

/// Java local declaration such as `int i = 0` or `long[] a`.
fn is_declaration(e: &Expr) -> bool {
    let end = e.find_top_level(|t| t.is_op("=")).unwrap_or(e.tokens.len());
    let lhs = &e.tokens[..end];
    lhs.len() >= 2
        && lhs[lhs.len() - 1].is_ident()
        && (lhs[lhs.len() - 2].is_ident()
            || lhs[lhs.len() - 2].kind == TokKind::Keyword
            || lhs[lhs.len() - 2].is_op(">")
            || lhs[lhs.len() - 2].is_op("]"))
}

/// Converts one `for` statement into statements ending in a `while`.
fn for_to_while_stmt(
    s: &Stmt,
    lang: Language,
    fresh: &mut Fresh,
) -> Result<Vec<Stmt>, AugmentError> {
    let StmtKind::For(f) = &s.kind else {
        return Err(AugmentError::UnsupportedLoopForm("not a for loop".into()));
    };
    if f.orelse.is_some() {
        return Err(AugmentError::UnsupportedLoopForm("for-else".into()));
    }
    match (&f.header, lang) {
        (ForHeader::Counted { init, cond, update }, Language::Java) => {
            if update.is_some() && has_continue(&f.body) {
                return Err(AugmentError::UnsupportedLoopForm(
                    "continue skips the hoisted update".into(),
                ));
            }
            let mut body = f.body.clone();
            if let Some(u) = update {
                for part in split_top_level(&u.tokens, ",") {
                    body.stmts.push(simple(s.line, part.to_vec(), true));
                }
            }
            let cond = cond.clone().unwrap_or_else(|| Expr::new(vec![kw("true")]));
            let w = Stmt::new(
                s.line,
                StmtKind::While(WhileLoop {
                    cond,
                    body,
                    orelse: None,
                    do_while: false,
                }),
            );
            Ok(match init {
                Some(i) if is_declaration(i) => {
                    // Keep the declaration scoped to the loop.
                    let decl = simple(s.line, i.tokens.clone(), true);
                    vec![Stmt::new(
                        s.line,
                        StmtKind::Block(Block::new(vec![decl, w])),
                    )]
                }
                Some(i) => vec![simple(s.line, i.tokens.clone(), true), w],
                None => vec![w],
            })
        }
        (ForHeader::Each { .. }, Language::Java) => Err(AugmentError::UnsupportedLoopForm(
            "enhanced for has no index form".into(),
        )),
        (ForHeader::Each { target, iter }, Language::Python) => {
            if let Some(cond) = crate::symbolic::iter_lambda_condition(iter) {
                let cond = strip_bool(&cond);
                return Ok(vec![Stmt::new(
                    s.line,
                    StmtKind::While(WhileLoop {
                        cond,
                        body: f.body.clone(),
                        orelse: None,
                        do_while: false,
                    }),
                )]);
            }
            if has_continue(&f.body) {
                return Err(AugmentError::UnsupportedLoopForm(
                    "continue skips the hoisted update".into(),
                ));
            }
            let assigned = assigned_in(&f.body, lang);
            if let Some(range) = range_parts(iter) {
                let [var] = &lhs_targets(&target.tokens)[..] else {
                    return Err(AugmentError::UnsupportedLoopForm(
                        "range target is not a name".into(),
                    ));
                };
                let var = var.clone();
                if target.tokens.len() != 1 || assigned.contains(&var) {
                    return Err(AugmentError::UnsupportedLoopForm(
                        "body rebinds the counter".into(),
                    ));
                }
                let stop = Expr::new(range.stop.clone());
                if stop.variables().iter().any(|v| assigned.contains(*v)) {
                    return Err(AugmentError::UnsupportedLoopForm(
                        "body changes the bound".into(),
                    ));
                }
                let mut init = vec![ident(&var), op("=")];
                init.extend(range.start);
                let mut cond = vec![ident(&var), op(if range.descending { ">" } else { "<" })];
                cond.extend(grouped(&range.stop));
                let mut body = f.body.clone();
                let mut step = vec![ident(&var), op(if range.descending { "-=" } else { "+=" })];
                step.extend(range.step);
                body.stmts.push(simple(s.line, step, false));
                return Ok(vec![
                    simple(s.line, init, false),
                    Stmt::new(
                        s.line,
                        StmtKind::While(WhileLoop {
                            cond: Expr::new(cond),
                            body,
                            orelse: None,
                            do_while: false,
                        }),
                    ),
                ]);
            }
            // `for x in seq` over a named sequence: index it.
            if iter.tokens.len() == 1
                && iter.tokens[0].is_ident()
                && !assigned.contains(&iter.tokens[0].text)
            {
                let seq = iter.tokens[0].text.clone();
                let k = fresh.name("_k");
                let mut bind = target.tokens.clone();
                bind.extend([op("="), ident(&seq), op("["), ident(&k), op("]")]);
                let mut body = Block::new(vec![simple(s.line, bind, false)]);
                body.stmts.extend(f.body.stmts.iter().cloned());
                body.stmts
                    .push(simple(s.line, vec![ident(&k), op("+="), num("1")], false));
                let cond = vec![
                    ident(&k),
                    op("<"),
                    ident("len"),
                    op("("),
                    ident(&seq),
                    op(")"),
                ];
                return Ok(vec![
                    simple(s.line, vec![ident(&k), op("="), num("0")], false),
                    Stmt::new(
                        s.line,
                        StmtKind::While(WhileLoop {
                            cond: Expr::new(cond),
                            body,
                            orelse: None,
                            do_while: false,
                        }),
                    ),
                ]);
            }
            Err(AugmentError::UnsupportedLoopForm(
                "iterable is not a range or a named sequence".into(),
            ))
        }
        (ForHeader::Counted { .. }, Language::Python) => Err(AugmentError::UnsupportedLoopForm(
            "counted for in Python".into(),
        )),
    }
}

struct RangeParts {
    start: Vec<Token>,
    stop: Vec<Token>,
    step: Vec<Token>,
    descending: bool,
}

/// `range(stop)`, `range(start, stop)` or `range(start, stop, ±literal)`.
fn range_parts(iter: &Expr) -> Option<RangeParts> {
    let c = iter.as_single_call()?;
    if c.callee != "range" || c.qualifier.is_some() {
        return None;
    }
    let args: Vec<Vec<Token>> = c.args.iter().map(|a| a.tokens.clone()).collect();
    let (start, stop, step) = match args.len() {
        1 => (vec![num("0")], args[0].clone(), vec![num("1")]),
        2 => (args[0].clone(), args[1].clone(), vec![num("1")]),
        3 => (args[0].clone(), args[1].clone(), args[2].clone()),
        _ => return None,
    };
    let (descending, magnitude) = match &step[..] {
        [n] if n.kind == TokKind::Number => (false, n.clone()),
        [m, n] if m.is_op("-") && n.kind == TokKind::Number => (true, n.clone()),
        _ => return None,
    };
    if magnitude.text.chars().all(|c| c == '0' || c == '.') {
        return None;
    }
    Some(RangeParts {
        start: grouped(&start),
        stop,
        step: vec![magnitude],
        descending,
    })
}

/// `bool(C)` → `C`.
fn strip_bool(cond: &Expr) -> Expr {
    if let Some(c) = cond.as_single_call() {
        if c.callee == "bool" && c.qualifier.is_none() && c.args.len() == 1 {
            return c.args[0].clone();
        }
    }
    cond.clone()
}

/// Converts one `while` statement into a `for`.
fn while_to_for_stmt(
    s: &Stmt,
    lang: Language,
    fresh: &mut Fresh,
) -> Result<Vec<Stmt>, AugmentError> {
    let StmtKind::While(w) = &s.kind else {
        return Err(AugmentError::UnsupportedLoopForm("not a while loop".into()));
    };
    if w.do_while {
        return Err(AugmentError::UnsupportedLoopForm("do-while".into()));
    }
    if w.orelse.is_some() {
        return Err(AugmentError::UnsupportedLoopForm("while-else".into()));
    }
    match lang {
        Language::Java => {
            let mut body = w.body.clone();
            let hoist = !has_continue(&body)
                && body
                    .stmts
                    .last()
                    .is_some_and(|t| matches!(&t.kind, StmtKind::Assign(e) if !is_declaration(e)));
            let update = if hoist {
                match body.stmts.pop().map(|t| t.kind) {
                    Some(StmtKind::Assign(e)) => Some(e),
                    _ => None,
                }
            } else {
                None
            };
            Ok(vec![Stmt::new(
                s.line,
                StmtKind::For(ForLoop {
                    header: ForHeader::Counted {
                        init: None,
                        cond: Some(w.cond.clone()),
                        update,
                    },
                    body,
                    orelse: None,
                }),
            )])
        }
        Language::Python => {
            let c = &w.cond.tokens;
            let constant = c.len() == 1
                && (c[0].is("True") || c[0].kind == TokKind::Number || c[0].kind == TokKind::Str);
            if constant {
                return Err(AugmentError::UnsupportedLoopForm("infinite while".into()));
            }
            if c.iter().any(|t| t.is_op(":=")) {
                return Err(AugmentError::UnsupportedLoopForm(
                    "assignment expression in condition".into(),
                ));
            }
            let var = fresh.name("_w");
            let mut iter = vec![
                ident("iter"),
                op("("),
                kw("lambda"),
                op(":"),
                ident("bool"),
                op("("),
            ];
            iter.extend(c.iter().cloned());
            iter.extend([op(")"), op(","), kw("False"), op(")")]);
            Ok(vec![Stmt::new(
                s.line,
                StmtKind::For(ForLoop {
                    header: ForHeader::Each {
                        target: Expr::new(vec![ident(&var)]),
                        iter: Expr::new(iter),
                    },
                    body: w.body.clone(),
                    orelse: None,
                }),
            )])
        }
    }
}

/// Flips every loop of the tree it can; returns how many were converted.
fn convert_block(block: &mut Block, lang: Language, fresh: &mut Fresh) -> usize {
    let mut converted = 0;
    let stmts = std::mem::take(&mut block.stmts);
    for mut s in stmts {
        for child in child_blocks_mut(&mut s) {
            converted += convert_block(child, lang, fresh);
        }
        let result = match &s.kind {
            StmtKind::For(_) => for_to_while_stmt(&s, lang, fresh),
            StmtKind::While(_) => while_to_for_stmt(&s, lang, fresh),
            _ => {
                block.stmts.push(s);
                continue;
            }
        };
        match result {
            Ok(new) => {
                converted += 1;
                block.stmts.extend(new);
            }
            Err(_) => block.stmts.push(s),
        }
    }
    converted
}

/// Converts every convertible loop. `None` when no loop could be converted.
pub fn convert_all(ir: &StructuralIr) -> Option<String> {
    let mut fresh = Fresh::new(ir);
    let mut tree = ir.tree.clone();
    let n = convert_block(&mut tree, ir.language, &mut fresh);
    (n > 0).then(|| crate::frontend::print::print_block(&tree, ir.language))
}

/// Applies `f` to the loop with pre-order index `target`.
fn rewrite_at(
    ir: &StructuralIr,
    target: usize,
    f: impl Fn(&Stmt, Language, &mut Fresh) -> Result<Vec<Stmt>, AugmentError>,
) -> Result<String, AugmentError> {
    fn walk(
        block: &mut Block,
        counter: &mut usize,
        target: usize,
        f: &dyn Fn(&Stmt) -> Result<Vec<Stmt>, AugmentError>,
    ) -> Result<bool, AugmentError> {
        let mut i = 0;
        while i < block.stmts.len() {
            if block.stmts[i].is_loop() {
                if *counter == target {
                    let new = f(&block.stmts[i])?;
                    block.stmts.splice(i..=i, new);
                    return Ok(true);
                }
                *counter += 1;
            }
            for child in child_blocks_mut(&mut block.stmts[i]) {
                if walk(child, counter, target, f)? {
                    return Ok(true);
                }
            }
            i += 1;
        }
        Ok(false)
    }
    let fresh = std::cell::RefCell::new(Fresh::new(ir));
    let mut tree = ir.tree.clone();
    let lang = ir.language;
    let g = |s: &Stmt| f(s, lang, &mut fresh.borrow_mut());
    if !walk(&mut tree, &mut 0, target, &g)? {
        return Err(AugmentError::UnsupportedLoopForm(format!(
            "no loop at index {target}"
        )));
    }
    let mut ir2 = ir.clone();
    ir2.tree = tree;
    Ok(print(&ir2))
}

/// Rewrites the `for` loop at `loc` as a `while` loop.
pub fn for_to_while(
    ir: &StructuralIr,
    loc: crate::frontend::LoopLoc,
) -> Result<String, AugmentError> {
    rewrite_at(ir, loc.0, for_to_while_stmt)
}

/// Rewrites the `while` loop at `loc` as a `for` loop.
pub fn while_to_for(
    ir: &StructuralIr,
    loc: crate::frontend::LoopLoc,
) -> Result<String, AugmentError> {
    rewrite_at(ir, loc.0, while_to_for_stmt)
}
