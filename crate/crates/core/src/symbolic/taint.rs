//! Flow-insensitive tracking of which variables are sized by the input.

use std::collections::{BTreeMap, BTreeSet};

use crate::dataset::Language;
use crate::frontend::ir::{
    stmt_exprs, visit_stmts, Block, ForHeader, Stmt, StmtKind, StructuralIr,
};
use crate::frontend::token::{
    matching_close, split_top_level, Expr, RawCall, TokKind, Token, ASSIGN_OPS,
};

/// How a value relates to the input size. Ordered so that `max` is the join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Taint {
    /// Fixed at compile time.
    Const,
    /// Not traceable to a definition; treated as input-sized by loop rules.
    Unknown,
    /// Derived from an input-reading call.
    Input,
}

impl Taint {
    pub fn is_const(self) -> bool {
        self == Taint::Const
    }
}

/// Library calls that read program input.
const INPUT_CALLS: &[&str] = &[
    "input",
    "raw_input",
    "readline",
    "readlines",
    "nextInt",
    "nextLong",
    "nextDouble",
    "nextFloat",
    "next",
    "nextLine",
    "nextShort",
    "nextByte",
    "nextBoolean",
    "nextBigInteger",
    "nextBigDecimal",
    "readLine",
    "nextToken",
    "readInt",
    "readLong",
];

/// Names conventionally given to hand-written input readers; calls to a
/// user function with one of these names cost O(1).
pub const READER_NAMES: &[&str] = &[
    "next",
    "nextInt",
    "nextLong",
    "nextDouble",
    "nextFloat",
    "nextLine",
    "nextToken",
    "nextString",
    "nextChar",
    "readInt",
    "readLong",
    "readDouble",
    "readLine",
    "readString",
    "read",
    "ni",
    "nl",
    "nd",
    "ns",
    "scan",
    "scanInt",
];

const MUTATORS: &[&str] = &[
    "append",
    "add",
    "push",
    "offer",
    "put",
    "insert",
    "extend",
    "addAll",
    "addLast",
    "addFirst",
    "appendleft",
    "offerLast",
    "offerFirst",
    "putAll",
    "update",
    "setdefault",
    "heappush",
];

/// Lower-case module names that are receivers, not variables.
pub(crate) const MODULES: &[&str] = &[
    "sys",
    "math",
    "heapq",
    "bisect",
    "collections",
    "itertools",
    "functools",
    "string",
    "os",
    "re",
    "random",
    "operator",
    "copy",
    "self",
    "cls",
];

/// Receivers whose methods are library calls, never user functions.
pub(crate) const LIBRARY_RECEIVERS: &[&str] = &[
    "Math",
    "System.out",
    "System.err",
    "System",
    "Arrays",
    "Collections",
    "Integer",
    "Long",
    "String",
    "Character",
    "Double",
    "Objects",
    "List",
    "Set",
    "Map",
    "Stream",
    "IntStream",
    "BigInteger",
    "sys",
    "math",
    "heapq",
    "bisect",
    "itertools",
    "collections",
    "functools",
    "str",
    "int",
    "list",
    "dict",
    "set",
    "string",
    "os",
    "re",
];

/// One assignment: every target receives the taint of `rhs`.
#[derive(Debug, Clone)]
pub(crate) struct Assignment {
    pub targets: Vec<String>,
    pub rhs: Expr,
    pub op: String,
}

fn is_assign_op(t: &Token) -> bool {
    t.kind == TokKind::Op && ASSIGN_OPS.contains(&t.text.as_str())
}

/// Variable names bound by an assignment target such as `a, (b, c)`,
/// `int[] x`, `self.n` or `*rest`. Subscripts and foreign attributes bind
/// nothing.
pub(crate) fn lhs_targets(toks: &[Token]) -> Vec<String> {
    let mut out = Vec::new();
    for part in split_top_level(toks, ",") {
        let mut part = part;
        while part.first().is_some_and(|t| t.is_op("*") || t.is_op("**")) {
            part = &part[1..];
        }
        if part.is_empty() {
            continue;
        }
        if part[0].is_open() && matching_close(part, 0) == Some(part.len() - 1) {
            out.extend(lhs_targets(&part[1..part.len() - 1]));
            continue;
        }
        if let Some(colon) = part.iter().position(|t| t.is_op(":")) {
            part = &part[..colon];
        }
        if part.len() == 3 && (part[0].is("self") || part[0].is("this")) && part[1].is_op(".") {
            out.push(part[2].text.clone());
            continue;
        }
        if part.iter().any(|t| t.is_op(".")) {
            continue;
        }
        let last = part.len() - 1;
        if part[last].is_op("]") {
            // `a[i]` binds nothing; `int a[]` binds `a`.
            let dims_only = part.iter().rposition(|t| t.is_ident()).is_some_and(|i| {
                part[i + 1..]
                    .chunks(2)
                    .all(|c| c.len() == 2 && c[0].is_op("[") && c[1].is_op("]"))
            });
            if !dims_only {
                continue;
            }
        }
        if let Some(t) = part.iter().rev().find(|t| t.is_ident()) {
            out.push(t.text.clone());
        }
    }
    out
}

/// Targets of `++`/`--` anywhere in `toks`.
pub(crate) fn incdec_targets(toks: &[Token]) -> Vec<String> {
    let mut out = Vec::new();
    for (i, t) in toks.iter().enumerate() {
        if t.is_op("++") || t.is_op("--") {
            if i > 0 && toks[i - 1].is_ident() {
                out.push(toks[i - 1].text.clone());
            } else if toks.get(i + 1).is_some_and(|n| n.is_ident()) {
                out.push(toks[i + 1].text.clone());
            }
        }
    }
    out
}

/// Names assigned inside an expression that is not itself an assignment
/// statement, e.g. `(line = br.readLine()) != null` or `(n := f())`.
pub(crate) fn embedded_targets(toks: &[Token]) -> Vec<String> {
    let mut out = incdec_targets(toks);
    for (i, t) in toks.iter().enumerate() {
        if (is_assign_op(t) || t.is_op(":=")) && i > 0 && toks[i - 1].is_ident() {
            out.push(toks[i - 1].text.clone());
        }
    }
    out
}

/// Decomposes an assignment statement.
pub(crate) fn assignments(e: &Expr, lang: Language) -> Vec<Assignment> {
    let toks = &e.tokens;
    let Some(first) = e.find_top_level(is_assign_op) else {
        let targets = incdec_targets(toks);
        if targets.is_empty() {
            return Vec::new();
        }
        return vec![Assignment {
            targets,
            rhs: Expr::new(Vec::new()),
            op: "++".into(),
        }];
    };
    if lang == Language::Java && toks[first].is_op("=") {
        let parts = split_top_level(toks, ",");
        let declarators = parts.len() > 1
            && parts[1..].iter().all(|p| {
                p.first().is_some_and(|t| t.is_ident())
                    && (p.len() == 1 || p[1].is_op("=") || p[1].is_op("["))
            });
        if declarators {
            return parts.iter().flat_map(|p| single_assignment(p)).collect();
        }
    }
    single_assignment(toks).into_iter().collect()
}

fn single_assignment(toks: &[Token]) -> Option<Assignment> {
    let positions: Vec<usize> = {
        let mut v = Vec::new();
        let mut depth = 0i32;
        for (i, t) in toks.iter().enumerate() {
            if t.is_open() {
                depth += 1;
            } else if t.is_close() {
                depth -= 1;
            } else if depth == 0 && is_assign_op(t) {
                v.push(i);
            }
        }
        v
    };
    let Some(&last) = positions.last() else {
        let targets = lhs_targets(toks);
        return (!targets.is_empty()).then(|| Assignment {
            targets,
            rhs: Expr::new(Vec::new()),
            op: "decl".into(),
        });
    };
    let op = toks[last].text.clone();
    let mut targets = Vec::new();
    let mut start = 0;
    for &p in &positions {
        targets.extend(lhs_targets(&toks[start..p]));
        start = p + 1;
    }
    Some(Assignment {
        targets,
        rhs: Expr::new(toks[last + 1..].to_vec()),
        op,
    })
}

/// Whether a call resolves to a user-defined function.
pub(crate) fn resolves_to_user(
    call: &RawCall,
    user_fns: &BTreeSet<String>,
    classes: &BTreeSet<String>,
) -> bool {
    if !user_fns.contains(&call.callee) {
        return false;
    }
    match call.qualifier.as_deref() {
        None | Some("self") | Some("this") | Some("super") => true,
        Some(q) if classes.contains(q) => true,
        Some(q) => !LIBRARY_RECEIVERS.contains(&q),
    }
}

/// The taint of every program variable and function result.
#[derive(Debug, Clone)]
pub struct InputVars {
    vars: BTreeMap<String, Taint>,
    returns: BTreeMap<String, Taint>,
    user_fns: BTreeSet<String>,
    classes: BTreeSet<String>,
    language: Language,
    /// Variables only ever bound to fixed displays.
    fixed_size: BTreeSet<String>,
}

struct Fact {
    targets: Vec<String>,
    rhs: Vec<Expr>,
    floor: Taint,
    /// A plain assignment of a fixed display such as `[a, b]`.
    display: bool,
}

/// Augmented updates accumulate across iterations, so their targets are at
/// least `Unknown` whatever the operands.
fn assignment_fact(a: Assignment) -> Fact {
    match a.op.as_str() {
        "=" => Fact {
            display: a.targets.len() == 1 && is_display(&a.rhs.tokens),
            rhs: vec![a.rhs],
            targets: a.targets,
            floor: Taint::Const,
        },
        "decl" => Fact {
            targets: a.targets,
            rhs: Vec::new(),
            floor: Taint::Const,
            display: false,
        },
        _ => Fact {
            rhs: vec![
                a.rhs,
                Expr::new(a.targets.iter().map(|t| Token::ident(t)).collect()),
            ],
            targets: a.targets,
            floor: Taint::Unknown,
            display: false,
        },
    }
}

/// A bracket display with no comprehension, a string literal, or a Java
/// array initializer.
fn is_display(toks: &[Token]) -> bool {
    let mut start = 0;
    if toks.first().is_some_and(|t| t.is_kw("new")) {
        start = toks.iter().position(|t| t.is_op("{")).unwrap_or(0);
    }
    let bracketed = toks.len() > start + 1
        && toks[start].is_open()
        && matching_close(toks, start) == Some(toks.len() - 1)
        && !toks.iter().any(|t| t.is_kw("for"));
    bracketed || (toks.len() == 1 && toks[0].kind == TokKind::Str)
}

impl InputVars {
    pub fn compute(ir: &StructuralIr) -> Self {
        let user_fns: BTreeSet<String> = ir.functions.iter().map(|f| f.name.clone()).collect();
        let mut classes = BTreeSet::new();
        visit_stmts(&ir.tree, &mut |s| {
            if let StmtKind::Class(c) = &s.kind {
                classes.insert(c.name.clone());
            }
        });
        let mut iv = InputVars {
            vars: BTreeMap::new(),
            returns: BTreeMap::new(),
            user_fns,
            classes,
            language: ir.language,
            fixed_size: BTreeSet::new(),
        };
        let facts = iv.collect_facts(ir);
        let mut sized: BTreeMap<&str, bool> = BTreeMap::new();
        for fact in &facts {
            for t in &fact.targets {
                *sized.entry(t.as_str()).or_insert(true) &= fact.display;
            }
        }
        iv.fixed_size = sized
            .into_iter()
            .filter(|(_, d)| *d)
            .map(|(n, _)| n.to_string())
            .collect();
        let mut returns: Vec<(String, Vec<Expr>)> = Vec::new();
        for f in &ir.functions {
            let mut exprs = Vec::new();
            collect_returns(&f.body, &mut exprs);
            returns.push((f.name.clone(), exprs));
        }
        for fact in &facts {
            for t in &fact.targets {
                iv.vars.entry(t.clone()).or_insert(fact.floor);
            }
        }
        for (name, _) in &returns {
            let forced = if READER_NAMES.contains(&name.as_str()) {
                Taint::Input
            } else {
                Taint::Const
            };
            iv.returns.insert(name.clone(), forced);
        }
        // Least fixed point; the lattice has height three so this converges fast.
        loop {
            let mut changed = false;
            for fact in &facts {
                let t = fact
                    .rhs
                    .iter()
                    .map(|e| iv.expr(e))
                    .max()
                    .unwrap_or(Taint::Const)
                    .max(fact.floor);
                for name in &fact.targets {
                    let cur = iv.vars.get(name).copied().unwrap_or(Taint::Const);
                    if t > cur {
                        iv.vars.insert(name.clone(), t);
                        changed = true;
                    }
                }
            }
            for (name, exprs) in &returns {
                let t = exprs
                    .iter()
                    .map(|e| iv.expr(e))
                    .max()
                    .unwrap_or(Taint::Const);
                let cur = iv.returns[name];
                if t > cur {
                    iv.returns.insert(name.clone(), t);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        iv
    }

    fn collect_facts(&self, ir: &StructuralIr) -> Vec<Fact> {
        let lang = ir.language;
        let mut facts = Vec::new();
        let mut call_args: Vec<RawCall> = Vec::new();
        visit_stmts(&ir.tree, &mut |s: &Stmt| {
            match &s.kind {
                StmtKind::Assign(e) => {
                    facts.extend(assignments(e, lang).into_iter().map(assignment_fact))
                }
                StmtKind::For(f) => match &f.header {
                    ForHeader::Each { target, iter } => facts.push(Fact {
                        targets: lhs_targets(&target.tokens),
                        rhs: vec![iter.clone()],
                        floor: Taint::Const,
                        display: false,
                    }),
                    ForHeader::Counted { init, update, .. } => {
                        for e in [init, update].into_iter().flatten() {
                            facts.extend(assignments(e, lang).into_iter().map(assignment_fact));
                        }
                    }
                },
                _ => {}
            }
            for e in stmt_exprs(s) {
                if !matches!(s.kind, StmtKind::Assign(_)) {
                    let targets = embedded_targets(&e.tokens);
                    if !targets.is_empty() {
                        facts.push(Fact {
                            targets,
                            rhs: vec![e.clone()],
                            floor: Taint::Const,
                            display: false,
                        });
                    }
                }
                for call in e.calls() {
                    if MUTATORS.contains(&call.callee.as_str()) {
                        let receiver = if call.callee == "heappush" {
                            call.args
                                .first()
                                .and_then(|a| a.tokens.first())
                                .map(|t| t.text.clone())
                        } else {
                            call.qualifier
                                .clone()
                                .filter(|q| q.chars().all(|c| c.is_alphanumeric() || c == '_'))
                        };
                        if let Some(r) = receiver {
                            facts.push(Fact {
                                targets: vec![r],
                                rhs: call.args.clone(),
                                floor: Taint::Unknown,
                                display: false,
                            });
                        }
                    }
                    call_args.push(call);
                }
            }
        });
        // Parameters receive the taint of their arguments at every call
        // site; a function never called is fed by the input.
        for f in &ir.functions {
            let mut params: Vec<&str> = f.params.iter().map(String::as_str).collect();
            if lang == Language::Python
                && f.owner.is_some()
                && params.first().is_some_and(|p| *p == "self" || *p == "cls")
            {
                params.remove(0);
            }
            let sites: Vec<&RawCall> = call_args
                .iter()
                .filter(|c| {
                    c.callee == f.name && resolves_to_user(c, &self.user_fns, &self.classes)
                })
                .collect();
            if sites.is_empty() {
                facts.push(Fact {
                    targets: params.iter().map(|p| p.to_string()).collect(),
                    rhs: Vec::new(),
                    floor: if f.name == "main" {
                        Taint::Unknown
                    } else {
                        Taint::Input
                    },
                    display: false,
                });
                continue;
            }
            for site in sites {
                for (i, arg) in site.args.iter().enumerate() {
                    let (name, value) = match keyword_arg(arg) {
                        Some((k, v)) => (Some(k), v),
                        None => (params.get(i).map(|p| p.to_string()), arg.clone()),
                    };
                    if let Some(name) = name.filter(|n| params.contains(&n.as_str())) {
                        facts.push(Fact {
                            targets: vec![name],
                            rhs: vec![value],
                            floor: Taint::Const,
                            display: false,
                        });
                    }
                }
            }
        }
        facts
    }

    /// Taint of a single variable; names with no definition are `Unknown`.
    pub fn var(&self, name: &str) -> Taint {
        self.vars.get(name).copied().unwrap_or(Taint::Unknown)
    }

    /// Variables carrying input taint, in name order.
    pub fn input_vars(&self) -> BTreeSet<String> {
        self.vars
            .iter()
            .filter(|(_, t)| **t == Taint::Input)
            .map(|(n, _)| n.clone())
            .collect()
    }

    pub fn returns(&self, function: &str) -> Taint {
        self.returns
            .get(function)
            .copied()
            .unwrap_or(Taint::Unknown)
    }

    pub fn language(&self) -> Language {
        self.language
    }

    pub(crate) fn user_fns(&self) -> &BTreeSet<String> {
        &self.user_fns
    }

    pub(crate) fn classes(&self) -> &BTreeSet<String> {
        &self.classes
    }

    /// Data taint of an expression.
    pub fn expr(&self, e: &Expr) -> Taint {
        let toks = &e.tokens;
        let mut t = Taint::Const;
        for (i, tok) in toks.iter().enumerate() {
            if tok.is_ident() && tok.is("stdin") {
                return Taint::Input;
            }
            if tok.is("in") && i >= 2 && toks[i - 1].is_op(".") && toks[i - 2].is("System") {
                return Taint::Input;
            }
        }
        for call in e.calls() {
            let name = call.callee.as_str();
            if resolves_to_user(&call, &self.user_fns, &self.classes) {
                t = t.max(self.returns(name));
                continue;
            }
            let unqualified_only = matches!(name, "input" | "raw_input");
            if INPUT_CALLS.contains(&name) && (!unqualified_only || call.qualifier.is_none()) {
                return Taint::Input;
            }
            if name == "open" && call.args.first().is_some_and(|a| a.texts() == ["0"]) {
                return Taint::Input;
            }
            if call.qualifier.is_none() && self.vars.get(name) == Some(&Taint::Input) {
                return Taint::Input;
            }
        }
        for v in vars_of(e) {
            t = t.max(self.var(v));
        }
        t
    }

    /// Size taint: like [`InputVars::expr`], but fixed displays such as
    /// `[a, b, c]` or `new int[]{1, 2}` are constant-sized whatever their
    /// elements are.
    pub fn size(&self, e: &Expr) -> Taint {
        let toks = &e.tokens;
        if is_display(toks) || (toks.len() == 1 && self.fixed_size.contains(&toks[0].text)) {
            return Taint::Const;
        }
        self.expr(e)
    }
}

/// `k=v` keyword argument.
fn keyword_arg(arg: &Expr) -> Option<(String, Expr)> {
    let t = &arg.tokens;
    (t.len() >= 3 && t[0].is_ident() && t[1].is_op("="))
        .then(|| (t[0].text.clone(), Expr::new(t[2..].to_vec())))
}

/// Variables of an expression, with `self.x` / `this.x` read as `x` and
/// module receivers dropped.
pub fn vars_of(e: &Expr) -> Vec<&str> {
    let toks = &e.tokens;
    let mut out: Vec<&str> = e
        .variables()
        .into_iter()
        .filter(|v| !MODULES.contains(v))
        .collect();
    for i in 2..toks.len() {
        if toks[i].is_ident()
            && toks[i - 1].is_op(".")
            && (toks[i - 2].is("self") || toks[i - 2].is("this"))
            && !toks.get(i + 1).is_some_and(|t| t.is_op("("))
        {
            out.push(toks[i].text.as_str());
        }
    }
    out
}

fn collect_returns(block: &Block, out: &mut Vec<Expr>) {
    for s in &block.stmts {
        match &s.kind {
            StmtKind::Def(_) | StmtKind::Class(_) => continue,
            StmtKind::Return(Some(e)) => out.push(e.clone()),
            _ => {}
        }
        for child in crate::frontend::ir::child_blocks(s) {
            collect_returns(child, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn py(src: &str) -> InputVars {
        InputVars::compute(&parse_source(src, Language::Python).unwrap())
    }

    fn java(src: &str) -> InputVars {
        InputVars::compute(&parse_source(src, Language::Java).unwrap())
    }

    #[test]
    fn python_input_flows_through_assignments() {
        let iv = py("n = int(input())\nm = n * 2\nk = 5\naa = list(map(int, input().split()))\nl = len(aa)\nz = k + 1\n");
        assert_eq!(iv.var("n"), Taint::Input);
        assert_eq!(iv.var("m"), Taint::Input);
        assert_eq!(iv.var("l"), Taint::Input);
        assert_eq!(iv.var("k"), Taint::Const);
        assert_eq!(iv.var("z"), Taint::Const);
        assert_eq!(iv.var("never"), Taint::Unknown);
    }

    #[test]
    fn params_follow_call_sites() {
        let iv = py("def f(a, b):\n    return a\ndef g(c):\n    return c\nn = int(input())\nf(n, 3)\ng(4)\n");
        assert_eq!(iv.var("a"), Taint::Input);
        assert_eq!(iv.var("b"), Taint::Const);
        assert_eq!(iv.var("c"), Taint::Const);
        assert_eq!(iv.returns("f"), Taint::Input);
    }

    #[test]
    fn reader_functions_return_input() {
        let iv = py("def I():\n    return int(input())\nn = I()\n");
        assert_eq!(iv.var("n"), Taint::Input);
    }

    #[test]
    fn java_declarations_and_readers() {
        let iv = java("class A { public static void main(String[] args) { Scanner sc = new Scanner(System.in); int n = sc.nextInt(), k = 3; int[] a = new int[n]; long s = 0; s += a[0]; } }");
        assert_eq!(iv.var("n"), Taint::Input);
        assert_eq!(iv.var("k"), Taint::Const);
        assert_eq!(iv.var("a"), Taint::Input);
        assert_eq!(iv.var("s"), Taint::Input);
    }

    #[test]
    fn lhs_target_shapes() {
        let t = |s: &str| {
            let toks = crate::frontend::tokenize(s, Language::Java).unwrap();
            lhs_targets(&toks)
        };
        assert_eq!(t("int[] a"), ["a"]);
        assert_eq!(t("int a[]"), ["a"]);
        assert!(t("a[i]").is_empty());
        assert_eq!(t("this.n"), ["n"]);
        assert!(t("obj.n").is_empty());
        let p = crate::frontend::tokenize("a, (b, c)", Language::Python).unwrap();
        assert_eq!(lhs_targets(&p), ["a", "b", "c"]);
    }

    #[test]
    fn mutated_collections_are_not_constant() {
        let iv = py("q = []\nq.append(1)\nd = [1, 2]\n");
        assert_eq!(iv.var("q"), Taint::Unknown);
        assert_eq!(iv.var("d"), Taint::Const);
    }
}
