//! Pretty-printer from the IR back to source. Output is normalised (four
//! space indents, braces on every Java body) and re-parses to the same IR.

use std::fmt::Write;

use super::ir::{Block, ForHeader, IfStmt, Stmt, StmtKind};
use super::token::Expr;
use crate::dataset::Language;

pub fn print_block(block: &Block, lang: Language) -> String {
    let mut p = Printer {
        out: String::new(),
        lang,
    };
    p.block(block, 0);
    p.out
}

struct Printer {
    out: String,
    lang: Language,
}

impl Printer {
    fn r(&self, e: &Expr) -> String {
        e.render(self.lang)
    }

    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("    ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn block(&mut self, block: &Block, depth: usize) {
        for s in &block.stmts {
            self.stmt(s, depth);
        }
    }

    fn py_body(&mut self, block: &Block, depth: usize) {
        if block.is_empty() {
            self.line(depth + 1, "pass");
        } else {
            self.block(block, depth + 1);
        }
    }

    /// Java: `head {`, body, then `}` (the caller may append to the closer).
    fn java_body(&mut self, head: &str, block: &Block, depth: usize) {
        self.line(depth, &format!("{head} {{"));
        self.block(block, depth + 1);
        self.line(depth, "}");
    }

    /// Replaces the last emitted `}` line with `} tail`.
    fn extend_closer(&mut self, tail: &str) {
        let trimmed = self.out.trim_end_matches('\n').len();
        self.out.truncate(trimmed);
        write!(self.out, " {tail}").unwrap();
        self.out.push('\n');
    }

    fn stmt(&mut self, s: &Stmt, depth: usize) {
        match self.lang {
            Language::Python => self.py_stmt(s, depth),
            Language::Java => self.java_stmt(s, depth),
        }
    }

    fn py_stmt(&mut self, s: &Stmt, depth: usize) {
        match &s.kind {
            StmtKind::For(f) => {
                let head = match &f.header {
                    ForHeader::Each { target, iter } => {
                        format!("for {} in {}:", self.r(target), self.r(iter))
                    }
                    ForHeader::Counted { .. } => "for _ in ():".to_string(),
                };
                self.line(depth, &head);
                self.py_body(&f.body, depth);
                if let Some(e) = &f.orelse {
                    self.line(depth, "else:");
                    self.py_body(e, depth);
                }
            }
            StmtKind::While(w) => {
                let head = format!("while {}:", self.r(&w.cond));
                self.line(depth, &head);
                self.py_body(&w.body, depth);
                if let Some(e) = &w.orelse {
                    self.line(depth, "else:");
                    self.py_body(e, depth);
                }
            }
            StmtKind::If(i) => self.py_if(i, depth, "if"),
            StmtKind::Def(d) => {
                let head = format!("{}:", self.r(&d.header));
                self.line(depth, &head);
                self.py_body(&d.body, depth);
            }
            StmtKind::Class(c) => {
                let head = format!("{}:", self.r(&c.header));
                self.line(depth, &head);
                self.py_body(&c.body, depth);
            }
            StmtKind::Compound(clauses) => {
                for c in clauses {
                    let head = format!("{}:", self.r(&c.header));
                    self.line(depth, &head);
                    self.py_body(&c.body, depth);
                }
            }
            StmtKind::Block(b) => self.block(b, depth),
            StmtKind::Assign(e) | StmtKind::Call(e) | StmtKind::SortCall(e) => {
                let t = self.r(e);
                self.line(depth, &t);
            }
            StmtKind::Return(e) => {
                let t = match e {
                    Some(e) => format!("return {}", self.r(e)),
                    None => "return".to_string(),
                };
                self.line(depth, &t);
            }
            StmtKind::Break(_) => self.line(depth, "break"),
            StmtKind::Continue(_) => self.line(depth, "continue"),
            StmtKind::Other(o) => {
                let t = self.r(&o.tokens);
                self.line(depth, &t);
            }
        }
    }

    fn py_if(&mut self, i: &IfStmt, depth: usize, kw: &str) {
        let head = format!("{kw} {}:", self.r(&i.cond));
        self.line(depth, &head);
        self.py_body(&i.then, depth);
        match &i.orelse {
            Some(b) if is_lone_if(b) => {
                let StmtKind::If(inner) = &b.stmts[0].kind else {
                    unreachable!()
                };
                self.py_if(inner, depth, "elif");
            }
            Some(b) => {
                self.line(depth, "else:");
                self.py_body(b, depth);
            }
            None => {}
        }
    }

    fn java_stmt(&mut self, s: &Stmt, depth: usize) {
        match &s.kind {
            StmtKind::For(f) => {
                let head = match &f.header {
                    ForHeader::Counted { init, cond, update } => {
                        let o =
                            |e: &Option<Expr>| e.as_ref().map(|e| self.r(e)).unwrap_or_default();
                        let (i, c, u) = (o(init), o(cond), o(update));
                        let c = if c.is_empty() { c } else { format!(" {c}") };
                        let u = if u.is_empty() { u } else { format!(" {u}") };
                        format!("for ({i};{c};{u})")
                    }
                    ForHeader::Each { target, iter } => {
                        format!("for ({} : {})", self.r(target), self.r(iter))
                    }
                };
                self.java_body(&head, &f.body, depth);
            }
            StmtKind::While(w) if w.do_while => {
                self.java_body("do", &w.body, depth);
                let tail = format!("while ({});", self.r(&w.cond));
                self.extend_closer(&tail);
            }
            StmtKind::While(w) => {
                let head = format!("while ({})", self.r(&w.cond));
                self.java_body(&head, &w.body, depth);
            }
            StmtKind::If(i) => self.java_if(i, depth),
            StmtKind::Def(d) => {
                let head = self.r(&d.header);
                if d.header.tokens.last().is_some_and(|t| t.is_op(";")) {
                    self.line(depth, &head);
                } else {
                    self.java_body(&head, &d.body, depth);
                }
            }
            StmtKind::Class(c) => {
                let head = self.r(&c.header);
                self.java_body(&head, &c.body, depth);
            }
            StmtKind::Compound(clauses) => {
                for (n, c) in clauses.iter().enumerate() {
                    let head = self.r(&c.header);
                    if n == 0 {
                        if head.is_empty() {
                            self.line(depth, "{");
                            self.block(&c.body, depth + 1);
                            self.line(depth, "}");
                        } else {
                            self.java_body(&head, &c.body, depth);
                        }
                    } else {
                        self.extend_closer(&format!("{head} {{"));
                        self.block(&c.body, depth + 1);
                        self.line(depth, "}");
                    }
                }
            }
            StmtKind::Block(b) => {
                self.line(depth, "{");
                self.block(b, depth + 1);
                self.line(depth, "}");
            }
            StmtKind::Assign(e) | StmtKind::Call(e) | StmtKind::SortCall(e) => {
                let t = format!("{};", self.r(e));
                self.line(depth, &t);
            }
            StmtKind::Return(e) => {
                let t = match e {
                    Some(e) => format!("return {};", self.r(e)),
                    None => "return;".to_string(),
                };
                self.line(depth, &t);
            }
            StmtKind::Break(l) | StmtKind::Continue(l) => {
                let kw = if matches!(s.kind, StmtKind::Break(_)) {
                    "break"
                } else {
                    "continue"
                };
                let t = match l {
                    Some(l) => format!("{kw} {};", self.r(l)),
                    None => format!("{kw};"),
                };
                self.line(depth, &t);
            }
            StmtKind::Other(o) => {
                let mut t = self.r(&o.tokens);
                if o.terminated {
                    t.push(';');
                }
                self.line(depth, &t);
            }
        }
    }

    fn java_if(&mut self, i: &IfStmt, depth: usize) {
        let head = format!("if ({})", self.r(&i.cond));
        self.java_body(&head, &i.then, depth);
        self.java_else(i.orelse.as_ref(), depth);
    }

    fn java_else(&mut self, orelse: Option<&Block>, depth: usize) {
        match orelse {
            Some(b) if is_lone_if(b) => {
                let StmtKind::If(inner) = &b.stmts[0].kind else {
                    unreachable!()
                };
                let head = format!("else if ({}) {{", self.r(&inner.cond));
                self.extend_closer(&head);
                self.block(&inner.then, depth + 1);
                self.line(depth, "}");
                self.java_else(inner.orelse.as_ref(), depth);
            }
            Some(b) => {
                self.extend_closer("else {");
                self.block(b, depth + 1);
                self.line(depth, "}");
            }
            None => {}
        }
    }
}

fn is_lone_if(b: &Block) -> bool {
    b.stmts.len() == 1 && matches!(b.stmts[0].kind, StmtKind::If(_))
}
