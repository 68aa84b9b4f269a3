//! Lightweight parsers for Python and Java producing a shared structural IR.
//!
//! The IR keeps statements structured (loops, conditionals, definitions) and
//! expressions as token sequences, which is all the symbolic analyzer and the
//! loop converter need.

pub mod ir;
mod java;
pub mod print;
mod python;
pub mod token;

pub use ir::{
    Block, CallSite, ClassDef, Clause, ForHeader, ForLoop, FunctionDef, FunctionUnit, IfStmt,
    LoopLoc, Other, Stmt, StmtKind, StructuralIr, WhileLoop,
};
pub use token::{Expr, TokKind, Token};

use crate::dataset::{CodeSnippet, Language};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {reason}")]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

/// Parses a snippet into the structural IR.
pub fn parse(snippet: &CodeSnippet) -> Result<StructuralIr, ParseError> {
    parse_source(&snippet.source, snippet.language)
}

pub fn parse_source(source: &str, language: Language) -> Result<StructuralIr, ParseError> {
    let tree = match language {
        Language::Python => python::parse(source)?,
        Language::Java => java::parse(source)?,
    };
    if tree.is_empty() {
        return Err(ParseError {
            line: 1,
            reason: "no code".into(),
        });
    }
    Ok(StructuralIr::build(language, tree))
}

/// Every function and method of a parsed snippet, nested ones included.
pub fn extract_functions(ir: &StructuralIr) -> &[FunctionUnit] {
    &ir.functions
}

/// The lexical token stream of a source, without layout tokens.
pub fn tokenize(source: &str, language: Language) -> Result<Vec<Token>, ParseError> {
    match language {
        Language::Python => python::tokens(source),
        Language::Java => java::lex(source).map(|(t, _)| t),
    }
}

/// Prints a tree back to source text in normalised layout.
pub fn print(ir: &StructuralIr) -> String {
    print::print_block(&ir.tree, ir.language)
}

/// Classifies a simple statement by its tokens.
pub(crate) fn classify_simple(e: Expr, keyword_led: bool, java: bool) -> StmtKind {
    let is_incdec = java
        && e.tokens.iter().any(|t| t.is_op("++") || t.is_op("--"))
        && e.find_top_level(|t| t.is_op("(")).is_none();
    if e.has_top_level_assignment() || is_incdec {
        return StmtKind::Assign(e);
    }
    if !keyword_led && !e.calls().is_empty() {
        if e.as_single_call()
            .is_some_and(|c| matches!(c.callee.as_str(), "sort" | "parallelSort"))
        {
            return StmtKind::SortCall(e);
        }
        return StmtKind::Call(e);
    }
    StmtKind::Other(Other {
        tokens: e,
        terminated: java,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SOLVE: &str = "def solve(aa, n):\n    bb = sorted(aa)\n    for x in aa:\n        print(x)\n\nn = int(input())\naa = list(map(int, input().split()))\nfor i in range(n):\n    aa[i] += 1\nsolve(aa, n)\n";

    #[test]
    fn python_module_shape() {
        let ir = parse_source(SOLVE, Language::Python).unwrap();
        assert_eq!(ir.functions.len(), 1);
        let f = &ir.functions[0];
        assert_eq!(f.name, "solve");
        assert_eq!(f.params, ["aa", "n"]);
        assert_eq!(f.line, 1);
        assert_eq!(ir.top_level.stmts.len(), 4);
        assert_eq!(ir.loop_count(), 2);
        assert!(matches!(ir.top_level.stmts[3].kind, StmtKind::Call(_)));
    }

    #[test]
    fn empty_sources_fail() {
        assert!(parse_source("", Language::Python).is_err());
        assert!(parse_source("  \n# only a comment\n", Language::Python).is_err());
        assert!(parse_source("// nothing\n", Language::Java).is_err());
    }

    #[test]
    fn java_main_and_helper() {
        let src = "import java.util.*;\npublic class Main {\n  static int helper(int[] a, int n) {\n    int s = 0;\n    for (int i = 0; i < n; i++) s += a[i];\n    return s;\n  }\n  public static void main(String[] args) {\n    Scanner sc = new Scanner(System.in);\n    int n = sc.nextInt();\n    System.out.println(helper(new int[n], n));\n  }\n}\n";
        let ir = parse_source(src, Language::Java).unwrap();
        let names: Vec<_> = ir.functions.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["helper", "main"]);
        assert_eq!(ir.functions[0].params, ["a", "n"]);
        assert_eq!(ir.functions[0].owner.as_deref(), Some("Main"));
        assert_eq!(ir.top_level.stmts.len(), 3);
        assert_eq!(ir.loop_count(), 1);
        let calls: Vec<_> = ir.functions[1]
            .call_sites
            .iter()
            .map(|c| c.callee.as_str())
            .collect();
        assert_eq!(calls, ["nextInt", "println", "helper"]);
    }

    #[test]
    fn nested_definitions_are_extracted() {
        let src = "def outer(n):\n    def inner(k):\n        return k * 2\n    return inner(n)\nclass A:\n    def m(self):\n        pass\n";
        let ir = parse_source(src, Language::Python).unwrap();
        let names: Vec<_> = ir.functions.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(names, ["outer", "inner", "m"]);
        assert_eq!(ir.functions[1].parent.as_deref(), Some("outer"));
        assert_eq!(ir.functions[2].owner.as_deref(), Some("A"));
        assert!(ir.top_level.is_empty());
    }

    #[test]
    fn parsing_is_deterministic() {
        let a = parse_source(SOLVE, Language::Python).unwrap();
        let b = parse_source(SOLVE, Language::Python).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn printed_python_reparses_to_same_structure() {
        let src = "import sys\nx = 3\nif x > 2: y = 1\nelif x < 0:\n    y = 2\nelse:\n    y = -1\nwhile x:\n    x -= 1\nelse:\n    pass\ntry:\n    f(x)\nexcept ValueError as e:\n    raise\nfinally:\n    z = [i*2 for i in range(10) if i % 2]\nwith open('f') as fh:\n    d = {'a': 1, **kw}\n@dec\ndef g(*args, **kwargs) -> int:\n    return lambda a, b=2: a + b\n";
        let ir = parse_source(src, Language::Python).unwrap();
        let printed = print(&ir);
        let again = parse_source(&printed, Language::Python).unwrap();
        assert!(ir.same_structure(&again), "{printed}");
        assert_eq!(print(&again), printed);
    }

    #[test]
    fn printed_java_reparses_to_same_structure() {
        let src = "package a.b;\nimport java.util.*;\n@SuppressWarnings(\"x\")\npublic class Main {\n  static final int MOD = 1_000_000_007;\n  static { init(); }\n  interface Op { int apply(int a); }\n  enum Color { RED, GREEN; int v; }\n  public static void main(String[] args) throws Exception {\n    int[] a = {1, 2, 3};\n    List<List<Integer>> g = new ArrayList<>();\n    for (int i = 0, j = 10; i < j; i++, j--) if (a[0] > i) a[0]--; else if (i == 2) continue; else { break; }\n    do { i--; } while (i > 0);\n    for (int x : a) { System.out.println(x); }\n    switch (a[0]) { case 1: case 2: a[0] = 3; break; default: a[0] = -a[0]; }\n    try (Scanner s = new Scanner(System.in)) { s.nextInt(); } catch (IOException | RuntimeException e) { throw e; } finally { }\n    outer: while (true) { break outer; }\n    Arrays.sort(a);\n    Runnable r = () -> { int q = 1; };\n    label: { }\n    x = i > 0 ? 1 : 2;\n    new Main().run();\n  }\n  abstract void run();\n}\n";
        let ir = parse_source(src, Language::Java).unwrap();
        let printed = print(&ir);
        let again = parse_source(&printed, Language::Java).unwrap();
        assert!(ir.same_structure(&again), "{printed}");
        assert_eq!(print(&again), printed);
        assert_eq!(ir.loop_count(), 4);
        let main = ir.function("main").unwrap();
        assert!(main
            .body
            .stmts
            .iter()
            .any(|s| matches!(s.kind, StmtKind::SortCall(_))));
    }

    #[test]
    fn loop_count_oracle() {
        // Loops counted by hand in each source.
        let cases = [
            ("for i in range(3):\n    for j in range(i):\n        pass\nwhile False:\n    pass\n", Language::Python, 3),
            ("x = [i for i in range(5)]\n", Language::Python, 0),
            ("class A { void f() { for(;;){ while(a){ do { } while(b); } } } }", Language::Java, 3),
            ("class A { void f() { int x = 1; } }", Language::Java, 0),
        ];
        for (src, lang, n) in cases {
            assert_eq!(parse_source(src, lang).unwrap().loop_count(), n, "{src}");
        }
    }
}
