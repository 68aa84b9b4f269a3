//! The structural IR shared by the symbolic analyzer and the loop converter.

use crate::dataset::Language;

use super::token::{Expr, RawCall};

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

impl Block {
    pub fn new(stmts: Vec<Stmt>) -> Self {
        Block { stmts }
    }

    pub fn is_empty(&self) -> bool {
        self.stmts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    /// 1-based source line of the statement's first token.
    pub line: usize,
    pub kind: StmtKind,
}

impl Stmt {
    pub fn new(line: usize, kind: StmtKind) -> Self {
        Stmt { line, kind }
    }

    pub fn is_loop(&self) -> bool {
        matches!(self.kind, StmtKind::For(_) | StmtKind::While(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    For(ForLoop),
    While(WhileLoop),
    If(IfStmt),
    Def(FunctionDef),
    Class(ClassDef),
    /// try/except/finally, with, switch, synchronized, static initialisers.
    Compound(Vec<Clause>),
    /// A braced block standing alone as a statement.
    Block(Block),
    Assign(Expr),
    Call(Expr),
    /// A statement that is exactly one sort invocation, e.g. `a.sort()`.
    SortCall(Expr),
    Return(Option<Expr>),
    Break(Option<Expr>),
    Continue(Option<Expr>),
    Other(Other),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForLoop {
    pub header: ForHeader,
    pub body: Block,
    /// Python `for ... else`.
    pub orelse: Option<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForHeader {
    /// C-style `for (init; cond; update)`.
    Counted {
        init: Option<Expr>,
        cond: Option<Expr>,
        update: Option<Expr>,
    },
    /// `for target in iter` / `for (T target : iter)`.
    Each { target: Expr, iter: Expr },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WhileLoop {
    pub cond: Expr,
    pub body: Block,
    pub orelse: Option<Block>,
    pub do_while: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IfStmt {
    pub cond: Expr,
    pub then: Block,
    /// An else block holding exactly one `If` prints as `elif` / `else if`.
    pub orelse: Option<Block>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<String>,
    /// Every header token, e.g. `def solve ( a , n )` or
    /// `public static int f ( int n ) throws IOException`.
    pub header: Expr,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub name: String,
    pub header: Expr,
    pub body: Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub header: Expr,
    pub body: Block,
}

/// A statement outside the recognised subset, kept verbatim.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Other {
    pub tokens: Expr,
    /// Java: whether the statement ends with `;`.
    pub terminated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    pub callee: String,
    pub qualifier: Option<String>,
    pub args: Vec<Expr>,
    pub line: usize,
}

impl CallSite {
    pub fn arg_count(&self) -> usize {
        self.args.len()
    }

    fn from_raw(raw: RawCall, line: usize) -> Self {
        CallSite {
            callee: raw.callee,
            qualifier: raw.qualifier,
            args: raw.args,
            line,
        }
    }
}

/// A function or method definition lifted out of the tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionUnit {
    pub name: String,
    pub params: Vec<String>,
    pub body: Block,
    pub call_sites: Vec<CallSite>,
    pub line: usize,
    /// Enclosing class, if any.
    pub owner: Option<String>,
    /// Enclosing function for nested definitions.
    pub parent: Option<String>,
    pub decorators: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralIr {
    pub language: Language,
    /// Every function and method, nested ones included, in source order.
    pub functions: Vec<FunctionUnit>,
    /// Python: module-level statements other than definitions. Java: the body
    /// of `main`, or the loose top-level statements when there is none.
    pub top_level: Block,
    /// The full statement tree, used for printing and rewriting.
    pub tree: Block,
}

/// Pre-order index of a loop within [`StructuralIr::tree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LoopLoc(pub usize);

impl StructuralIr {
    pub(crate) fn build(language: Language, tree: Block) -> Self {
        let mut functions = Vec::new();
        collect_functions(&tree, None, None, &mut functions);
        let top_level = match language {
            Language::Python => Block::new(
                tree.stmts
                    .iter()
                    .filter(|s| !matches!(s.kind, StmtKind::Def(_) | StmtKind::Class(_)))
                    .filter(|s| !is_decorator(s))
                    .cloned()
                    .collect(),
            ),
            Language::Java => match functions.iter().find(|f| f.name == "main") {
                Some(f) => f.body.clone(),
                None => Block::new(
                    tree.stmts
                        .iter()
                        .filter(|s| !matches!(s.kind, StmtKind::Def(_) | StmtKind::Class(_)))
                        .filter(|s| !is_java_header(s))
                        .cloned()
                        .collect(),
                ),
            },
        };
        StructuralIr {
            language,
            functions,
            top_level,
            tree,
        }
    }

    pub fn function(&self, name: &str) -> Option<&FunctionUnit> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Every loop statement of the tree in pre-order.
    pub fn loops(&self) -> Vec<(LoopLoc, &Stmt)> {
        let mut out = Vec::new();
        visit_stmts(&self.tree, &mut |s| {
            if s.is_loop() {
                out.push(s);
            }
        });
        out.into_iter()
            .enumerate()
            .map(|(i, s)| (LoopLoc(i), s))
            .collect()
    }

    pub fn loop_count(&self) -> usize {
        self.loops().len()
    }

    /// Copy with every line number zeroed, for structural comparison.
    pub fn without_lines(&self) -> StructuralIr {
        let mut ir = self.clone();
        strip_lines(&mut ir.tree);
        strip_lines(&mut ir.top_level);
        for f in &mut ir.functions {
            f.line = 0;
            strip_lines(&mut f.body);
            for c in &mut f.call_sites {
                c.line = 0;
            }
        }
        ir
    }

    pub fn same_structure(&self, other: &StructuralIr) -> bool {
        self.without_lines() == other.without_lines()
    }
}

fn is_decorator(s: &Stmt) -> bool {
    matches!(&s.kind, StmtKind::Other(Other { tokens: e, .. }) | StmtKind::Call(e)
        if e.tokens.first().is_some_and(|t| t.is_op("@")))
}

fn collect_functions(
    block: &Block,
    owner: Option<&str>,
    parent: Option<&str>,
    out: &mut Vec<FunctionUnit>,
) {
    let mut pending_decorators = Vec::new();
    for s in &block.stmts {
        match &s.kind {
            StmtKind::Def(def) => {
                let mut call_sites = Vec::new();
                collect_call_sites(&def.body, &mut call_sites);
                out.push(FunctionUnit {
                    name: def.name.clone(),
                    params: def.params.clone(),
                    body: def.body.clone(),
                    call_sites,
                    line: s.line,
                    owner: owner.map(str::to_string),
                    parent: parent.map(str::to_string),
                    decorators: std::mem::take(&mut pending_decorators),
                });
                collect_functions(&def.body, owner, Some(&def.name), out);
            }
            StmtKind::Class(class) => {
                pending_decorators.clear();
                collect_functions(&class.body, Some(&class.name), parent, out);
            }
            StmtKind::Other(Other { tokens: e, .. }) | StmtKind::Call(e) if is_decorator(s) => {
                let name = e
                    .tokens
                    .iter()
                    .skip(1)
                    .take_while(|t| !t.is_op("("))
                    .map(|t| t.text.as_str())
                    .collect::<String>();
                pending_decorators.push(name);
            }
            _ => {
                pending_decorators.clear();
                for child in child_blocks(s) {
                    collect_functions(child, owner, parent, out);
                }
            }
        }
    }
}

/// `package` / `import` lines.
fn is_java_header(s: &Stmt) -> bool {
    matches!(&s.kind, StmtKind::Other(o) if o.tokens.tokens.first().is_some_and(|t| t.is("package") || t.is("import")))
}

/// Call sites of a body, not descending into nested definitions.
pub fn collect_call_sites(block: &Block, out: &mut Vec<CallSite>) {
    for s in &block.stmts {
        if matches!(s.kind, StmtKind::Def(_) | StmtKind::Class(_)) {
            continue;
        }
        for e in stmt_exprs(s) {
            out.extend(e.calls().into_iter().map(|c| CallSite::from_raw(c, s.line)));
        }
        for child in child_blocks(s) {
            collect_call_sites(child, out);
        }
    }
}

/// Expressions owned directly by a statement (not by its nested blocks).
pub fn stmt_exprs(s: &Stmt) -> Vec<&Expr> {
    match &s.kind {
        StmtKind::For(f) => match &f.header {
            ForHeader::Counted { init, cond, update } => {
                [init, cond, update].into_iter().flatten().collect()
            }
            ForHeader::Each { target, iter } => vec![target, iter],
        },
        StmtKind::While(w) => vec![&w.cond],
        StmtKind::If(i) => vec![&i.cond],
        StmtKind::Compound(clauses) => clauses.iter().map(|c| &c.header).collect(),
        StmtKind::Assign(e) | StmtKind::Call(e) | StmtKind::SortCall(e) => vec![e],
        StmtKind::Return(e) | StmtKind::Break(e) | StmtKind::Continue(e) => e.iter().collect(),
        StmtKind::Other(o) => vec![&o.tokens],
        StmtKind::Def(_) | StmtKind::Class(_) | StmtKind::Block(_) => Vec::new(),
    }
}

/// Mutable counterpart of [`stmt_exprs`], also covering definition headers.
pub fn stmt_exprs_mut(s: &mut Stmt) -> Vec<&mut Expr> {
    match &mut s.kind {
        StmtKind::For(f) => match &mut f.header {
            ForHeader::Counted { init, cond, update } => {
                [init, cond, update].into_iter().flatten().collect()
            }
            ForHeader::Each { target, iter } => vec![target, iter],
        },
        StmtKind::While(w) => vec![&mut w.cond],
        StmtKind::If(i) => vec![&mut i.cond],
        StmtKind::Compound(clauses) => clauses.iter_mut().map(|c| &mut c.header).collect(),
        StmtKind::Assign(e) | StmtKind::Call(e) | StmtKind::SortCall(e) => vec![e],
        StmtKind::Return(e) | StmtKind::Break(e) | StmtKind::Continue(e) => e.iter_mut().collect(),
        StmtKind::Other(o) => vec![&mut o.tokens],
        StmtKind::Def(d) => vec![&mut d.header],
        StmtKind::Class(c) => vec![&mut c.header],
        StmtKind::Block(_) => Vec::new(),
    }
}

/// Directly nested blocks of a statement, definitions included.
pub fn child_blocks(s: &Stmt) -> Vec<&Block> {
    match &s.kind {
        StmtKind::For(f) => std::iter::once(&f.body).chain(f.orelse.as_ref()).collect(),
        StmtKind::While(w) => std::iter::once(&w.body).chain(w.orelse.as_ref()).collect(),
        StmtKind::If(i) => std::iter::once(&i.then).chain(i.orelse.as_ref()).collect(),
        StmtKind::Def(d) => vec![&d.body],
        StmtKind::Class(c) => vec![&c.body],
        StmtKind::Compound(clauses) => clauses.iter().map(|c| &c.body).collect(),
        StmtKind::Block(b) => vec![b],
        _ => Vec::new(),
    }
}

pub fn child_blocks_mut(s: &mut Stmt) -> Vec<&mut Block> {
    match &mut s.kind {
        StmtKind::For(f) => std::iter::once(&mut f.body)
            .chain(f.orelse.as_mut())
            .collect(),
        StmtKind::While(w) => std::iter::once(&mut w.body)
            .chain(w.orelse.as_mut())
            .collect(),
        StmtKind::If(i) => std::iter::once(&mut i.then)
            .chain(i.orelse.as_mut())
            .collect(),
        StmtKind::Def(d) => vec![&mut d.body],
        StmtKind::Class(c) => vec![&mut c.body],
        StmtKind::Compound(clauses) => clauses.iter_mut().map(|c| &mut c.body).collect(),
        StmtKind::Block(b) => vec![b],
        _ => Vec::new(),
    }
}

/// Mutable pre-order visit of every statement.
pub fn visit_stmts_mut(block: &mut Block, f: &mut impl FnMut(&mut Stmt)) {
    for s in &mut block.stmts {
        f(s);
        for child in child_blocks_mut(s) {
            visit_stmts_mut(child, f);
        }
    }
}

/// Pre-order visit of every statement, descending into every block.
pub fn visit_stmts<'a>(block: &'a Block, f: &mut impl FnMut(&'a Stmt)) {
    for s in &block.stmts {
        f(s);
        for child in child_blocks(s) {
            visit_stmts(child, f);
        }
    }
}

fn strip_lines(block: &mut Block) {
    for s in &mut block.stmts {
        s.line = 0;
        for child in child_blocks_mut(s) {
            strip_lines(child);
        }
    }
}
