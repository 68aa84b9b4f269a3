use super::*;
use crate::frontend::parse_source;
use TermKind::*;

fn py(src: &str) -> StructuralIr {
    parse_source(src, Language::Python).unwrap()
}

fn java(src: &str) -> StructuralIr {
    parse_source(src, Language::Java).unwrap()
}

fn levels(src: &str) -> Vec<Vec<TermKind>> {
    let ir = py(src);
    let taints = InputVars::compute(&ir);
    detect_loops(&ir.top_level, &taints)
        .into_iter()
        .map(|l| l.cost_per_level)
        .collect()
}

fn class_of(ir: &StructuralIr) -> ComplexityClass {
    analyze_ir(ir).class
}

#[test]
fn input_bounded_and_constant_loops() {
    assert_eq!(
        levels("n = int(input())\nfor i in range(n):\n    pass\n"),
        [[N]]
    );
    assert_eq!(levels("for i in range(5):\n    pass\n"), [[One]]);
    assert_eq!(
        levels("n = int(input())\nfor i in range(n):\n    for j in range(3):\n        pass\n    for j in range(n):\n        for k in range(n):\n            pass\n"),
        [vec![N, N, N]]
    );
}

/// Number of iterations of `i = 1; while i < n: i *= 2`.
fn doubling_iterations(n: u64) -> u64 {
    let (mut i, mut count) = (1u64, 0u64);
    while i < n {
        i *= 2;
        count += 1;
    }
    count
}

#[test]
fn multiplicative_loop_is_logarithmic() {
    // Simulated iteration counts grow exactly like log2(n): the count
    // increases by one each time n doubles.
    let counts: Vec<u64> = (1..=20).map(|k| doubling_iterations(1 << k)).collect();
    for (k, c) in counts.iter().enumerate() {
        assert_eq!(*c, k as u64 + 1);
    }
    let src = "n = int(input())\ni = 1\nwhile i < n:\n    i *= 2\n";
    assert_eq!(levels(src), [[Log]]);
    assert_eq!(
        levels("n = int(input())\nwhile n > 0:\n    n = n // 2\n"),
        [[Log]]
    );
    let j = java("class A { public static void main(String[] a) { int n = new java.util.Scanner(System.in).nextInt(); for (int i = 1; i < n; i <<= 1) { } } }");
    let taints = InputVars::compute(&j);
    assert_eq!(detect_loops(&j.top_level, &taints)[0].cost_per_level, [Log]);
}

#[test]
fn loop_locations_span_the_nest() {
    let ir = py("n = int(input())\nfor i in range(n):\n    x = 1\n    y = 2\nz = 3\n");
    let taints = InputVars::compute(&ir);
    let info = &detect_loops(&ir.top_level, &taints)[0];
    assert_eq!(info.location, (2, 4));
    assert_eq!(info.depth, info.cost_per_level.len());
}

fn calls_factorial(n: u64, calls: &mut u64) -> u64 {
    *calls += 1;
    if n <= 1 {
        1
    } else {
        n.wrapping_mul(calls_factorial(n - 1, calls))
    }
}

fn calls_fib(n: u64, calls: &mut u64) -> u64 {
    *calls += 1;
    if n < 2 {
        n
    } else {
        calls_fib(n - 1, calls) + calls_fib(n - 2, calls)
    }
}

fn calls_bsearch(lo: u64, hi: u64, calls: &mut u64) {
    *calls += 1;
    if lo < hi {
        let mid = (lo + hi) / 2;
        calls_bsearch(lo, mid, calls);
    }
}

const FACT: &str = "def fact(n):\n    if n <= 1:\n        return 1\n    return n * fact(n - 1)\nprint(fact(int(input())))\n";
const FIB: &str = "def fib(n):\n    if n < 2:\n        return n\n    return fib(n - 1) + fib(n - 2)\nprint(fib(int(input())))\n";
const BSEARCH: &str = "def find(a, lo, hi, x):\n    if lo >= hi:\n        return lo\n    mid = (lo + hi) // 2\n    if a[mid] < x:\n        return find(a, mid + 1, hi, x)\n    return find(a, lo, mid, x)\na = list(map(int, input().split()))\nprint(find(a, 0, len(a), 5))\n";

#[test]
fn factorial_recursion_is_linear() {
    // Call counts are exactly n for n in 1..=1000: a linear fit with slope 1.
    for n in 1..=1000u64 {
        let mut c = 0;
        calls_factorial(n, &mut c);
        assert_eq!(c, n);
    }
    let info = detect_recursion(&py(FACT));
    assert_eq!(
        info,
        [RecursionInfo {
            function: "fact".into(),
            self_call_count: 1,
            argument_shrink: Shrink::Decrement
        }]
    );
    assert_eq!(recursion_cost(&info[0], &ComplexityTerm::one()).kind, N);
    assert_eq!(class_of(&py(FACT)), ComplexityClass::Linear);
}

#[test]
fn fibonacci_recursion_is_exponential() {
    // Ratios of successive call counts approach the golden ratio.
    let counts: Vec<f64> = (1..=25)
        .map(|n| {
            let mut c = 0;
            calls_fib(n, &mut c);
            c as f64
        })
        .collect();
    let ratio = counts[24] / counts[23];
    assert!((ratio - 1.618).abs() < 0.01, "{ratio}");
    let info = detect_recursion(&py(FIB));
    assert_eq!(info[0].self_call_count, 2);
    assert_eq!(info[0].argument_shrink, Shrink::Decrement);
    assert_eq!(recursion_cost(&info[0], &ComplexityTerm::one()).kind, Exp);
    assert_eq!(class_of(&py(FIB)), ComplexityClass::Exponential);
}

#[test]
fn binary_search_recursion_is_logarithmic() {
    for k in 1..=20u32 {
        let mut c = 0;
        calls_bsearch(0, 1 << k, &mut c);
        assert_eq!(c, k as u64 + 2);
    }
    let info = detect_recursion(&py(BSEARCH));
    // Two syntactic self-calls on exclusive paths: one per invocation.
    assert_eq!(info[0].self_call_count, 1);
    assert_eq!(info[0].argument_shrink, Shrink::Halving);
    assert_eq!(recursion_cost(&info[0], &ComplexityTerm::one()).kind, Log);
    assert_eq!(class_of(&py(BSEARCH)), ComplexityClass::LogN);
}

#[test]
fn recursion_cost_table() {
    let info = |count, shrink| RecursionInfo {
        function: "f".into(),
        self_call_count: count,
        argument_shrink: shrink,
    };
    let body = |k| ComplexityTerm::new(k, "body");
    assert_eq!(
        recursion_cost(&info(1, Shrink::Decrement), &body(N)).kind,
        N2
    );
    assert_eq!(
        recursion_cost(&info(1, Shrink::Unknown), &body(One)).kind,
        N
    );
    assert_eq!(
        recursion_cost(&info(1, Shrink::Halving), &body(N)).kind,
        NLog
    );
    assert_eq!(
        recursion_cost(&info(1, Shrink::Halving), &body(Log)).kind,
        Log
    );
    assert_eq!(
        recursion_cost(&info(3, Shrink::Unknown), &body(One)).kind,
        Exp
    );
    assert_eq!(
        recursion_cost(&info(2, Shrink::Halving), &body(N)).kind,
        NLog
    );
    assert_eq!(
        recursion_cost(&info(2, Shrink::Halving), &body(One)).kind,
        N
    );
    let t = recursion_cost(&info(2, Shrink::Decrement), &body(One));
    assert!(t.trace.last().unwrap().contains("2 self-calls"));
}

#[test]
fn non_recursive_programs_have_no_recursion() {
    assert!(detect_recursion(&py("def f(x):\n    return g(x)\nprint(f(1))\n")).is_empty());
}

#[test]
fn merge_sort_is_nlogn() {
    let src = "def sort(a):\n    if len(a) <= 1:\n        return a\n    mid = len(a) // 2\n    left = sort(a[:mid])\n    right = sort(a[mid:])\n    out = []\n    i = j = 0\n    while i < len(left) and j < len(right):\n        if left[i] < right[j]:\n            out.append(left[i])\n            i += 1\n        else:\n            out.append(right[j])\n            j += 1\n    return out + left[i:] + right[j:]\nprint(sort(list(map(int, input().split()))))\n";
    assert_eq!(class_of(&py(src)), ComplexityClass::NLogN);
}

#[test]
fn graph_traversal_recursion_is_linear() {
    let src = "import sys\nn = int(input())\ng = [[] for _ in range(n)]\nfor _ in range(n - 1):\n    u, v = map(int, input().split())\n    g[u].append(v)\nseen = [False] * n\ndef dfs(u):\n    seen[u] = True\n    for v in g[u]:\n        if not seen[v]:\n            dfs(v)\ndfs(0)\n";
    let ir = py(src);
    assert_eq!(detect_recursion(&ir)[0].argument_shrink, Shrink::Unknown);
    assert_eq!(class_of(&ir), ComplexityClass::Linear);
}

#[test]
fn memoized_recursion_counts_once() {
    let src = "from functools import lru_cache\n@lru_cache(None)\ndef fib(n):\n    if n < 2:\n        return n\n    return fib(n - 1) + fib(n - 2)\nprint(fib(int(input())))\n";
    assert_eq!(class_of(&py(src)), ComplexityClass::Linear);
}

#[test]
fn switch_branches_are_alternatives() {
    let src = "class A { static int f(int n, int k) { switch (k) { case 0: return f(n - 1, 1); default: return f(n - 1, 0); } } public static void main(String[] x) { int n = new java.util.Scanner(System.in).nextInt(); System.out.println(f(n, 0)); } }";
    let ir = java(src);
    assert_eq!(detect_recursion(&ir)[0].self_call_count, 1);
    assert_eq!(class_of(&ir), ComplexityClass::Linear);
}

#[test]
fn special_idioms() {
    let ir = py("aa = list(map(int, input().split()))\nbb = sorted(aa)\n");
    let kinds: Vec<_> = detect_special_tc(&ir.top_level)
        .iter()
        .map(|t| t.kind)
        .collect();
    assert_eq!(kinds, [NLog]);
    assert!(detect_special_tc(&py("x = 1\nprint(x)\n").top_level).is_empty());
    let j = java("class A { public static void main(String[] x) { java.util.Scanner sc = new java.util.Scanner(System.in); int n = sc.nextInt(); int[] a = new int[n]; for (int i = 0; i < n; i++) { Arrays.sort(a); } } }");
    assert_eq!(detect_special_tc(&j.top_level).len(), 1);
    // N iterations of an N log N sort: capped at N^3 by the algebra.
    let a = analyze_ir(&j);
    assert_eq!(a.class, ComplexityClass::Cubic);
    assert!(
        a.trace.iter().any(|l| l == "O(N) x O(N log N) = O(N^3)"),
        "{:?}",
        a.trace
    );
}

#[test]
fn constant_and_cubic_examples() {
    let a = analyze_ir(&py("print(int(input()))\n"));
    assert_eq!(a.class, ComplexityClass::Constant);
    assert_eq!(a.trace, ["total: O(1)", "classification: constant"]);
    let cubic = "n = int(input())\nfor i in range(n):\n    for j in range(n):\n        for k in range(n):\n            pass\n";
    assert_eq!(class_of(&py(cubic)), ComplexityClass::Cubic);
}

#[test]
fn comprehensions_and_generators_count_as_loops() {
    assert_eq!(
        class_of(&py("n = int(input())\nx = [i * i for i in range(n)]\n")),
        ComplexityClass::Linear
    );
    assert_eq!(
        class_of(&py(
            "n = int(input())\nprint(sum(i * j for i in range(n) for j in range(n)))\n"
        )),
        ComplexityClass::Quadratic
    );
    assert_eq!(
        class_of(&py("x = [i for i in range(10)]\n")),
        ComplexityClass::Constant
    );
}

#[test]
fn calls_inside_loops_multiply() {
    let src = "def work(a):\n    for x in a:\n        pass\nn = int(input())\na = list(map(int, input().split()))\nfor i in range(n):\n    work(a)\n";
    let a = analyze_ir(&py(src));
    assert_eq!(a.class, ComplexityClass::Quadratic);
    assert!(
        a.trace
            .iter()
            .any(|l| l.contains("call to `work` costs O(N)")),
        "{:?}",
        a.trace
    );
}

#[test]
fn reader_helpers_are_constant() {
    let src = "import sys\ndef I():\n    return int(sys.stdin.readline())\nn = I()\nfor i in range(n):\n    x = I()\n";
    assert_eq!(class_of(&py(src)), ComplexityClass::Linear);
}

#[test]
fn java_loose_statements_and_root_functions() {
    let src =
        "static void go(int n) { for (int i = 0; i < n; i++) { for (int j = 0; j < n; j++) { } } }";
    assert_eq!(class_of(&java(src)), ComplexityClass::Quadratic);
    let src = "class A { void run(int n) { for (int i = 1; i < n; i *= 2) { } } }";
    assert_eq!(class_of(&java(src)), ComplexityClass::LogN);
}

#[test]
fn bitmask_enumeration_is_exponential() {
    let src = "n = int(input())\nfor mask in range(1 << n):\n    pass\n";
    assert_eq!(class_of(&py(src)), ComplexityClass::Exponential);
    let src = "from itertools import permutations\nn = int(input())\nfor p in permutations(range(n)):\n    pass\n";
    assert_eq!(class_of(&py(src)), ComplexityClass::Exponential);
}

#[test]
fn java_input_loops() {
    let src = "import java.io.*;\nclass A { public static void main(String[] x) throws IOException { BufferedReader br = new BufferedReader(new InputStreamReader(System.in)); int t = Integer.parseInt(br.readLine()); while (t-- > 0) { String line = br.readLine(); } } }";
    assert_eq!(class_of(&java(src)), ComplexityClass::Linear);
    let src =
        "class A { public static void main(String[] x) { int i = 0; while (i < 100) { i++; } } }";
    assert_eq!(class_of(&java(src)), ComplexityClass::Constant);
}

#[test]
fn input_vars_are_reported() {
    let vars = input_vars(&py("n = int(input())\nm = n + 1\nk = 2\n"));
    assert_eq!(vars.into_iter().collect::<Vec<_>>(), ["m", "n"]);
}
