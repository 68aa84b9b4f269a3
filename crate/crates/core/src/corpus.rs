//! Seeded synthetic corpus of small judge-style programs, a handful of
//! templates per complexity class in both supported languages.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::class::ComplexityClass::{self, *};
use crate::dataset::{CodeSnippet, LabeledExample, Language};

/// A generated corpus cut into train, validation and test sets with the
/// same class mix.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSplit {
    pub train: Vec<LabeledExample>,
    pub validation: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
}

/// Shares of each class that go to validation and test.
const VALIDATION_SHARE: f64 = 0.1;
const TEST_SHARE: f64 = 0.2;

struct Template {
    class: ComplexityClass,
    language: Language,
    /// Relative sampling weight within its class.
    weight: u32,
    funcs: &'static str,
    body: &'static str,
}

const fn py(
    class: ComplexityClass,
    weight: u32,
    funcs: &'static str,
    body: &'static str,
) -> Template {
    Template {
        class,
        language: Language::Python,
        weight,
        funcs,
        body,
    }
}

const fn java(
    class: ComplexityClass,
    weight: u32,
    funcs: &'static str,
    body: &'static str,
) -> Template {
    Template {
        class,
        language: Language::Java,
        weight,
        funcs,
        body,
    }
}

// Placeholders: {N} size, {A} array, {S} accumulator, {F} function,
// {I} {J} {K} loop variables, {X} {Y} {Z} scalars, {C} small constant,
// {M} modulus. A line holding only {FILL} receives constant-time filler.
const TEMPLATES: &[Template] = &[
    // constant
    py(Constant, 3, "", "{X}, {Y} = map(int, input().split())\n{S} = {X} * {C} + {Y}\n{FILL}\nif {S} % 2 == 0:\n    print({S} // 2)\nelse:\n    print({S})\n"),
    py(Constant, 2, "", "{N} = int(input())\n{S} = 0\nfor {I} in range({C}):\n    {S} += {N} * {I}\n{FILL}\nprint({S})\n"),
    py(Constant, 2, "", "{N} = int(input())\n{FILL}\nprint({N} * ({N} + 1) // 2 % {M})\n"),
    py(Constant, 2, "", "{X}, {Y}, {Z} = map(int, input().split())\n{FILL}\nprint(max({X}, {Y}, {Z}) - min({X}, {Y}, {Z}))\n"),
    java(Constant, 3, "", "long {X} = sc.nextLong();\nlong {Y} = sc.nextLong();\n{FILL}\nSystem.out.println(Math.max({X}, {Y}) * {C} % {M});\n"),
    java(Constant, 2, "", "int {N} = sc.nextInt();\nlong {S} = 0;\nfor (int {I} = 0; {I} < {C}; {I}++) {\n    {S} += (long) {N} * {I};\n}\n{FILL}\nSystem.out.println({S});\n"),
    java(Constant, 2, "", "long {N} = sc.nextLong();\n{FILL}\nif ({N} % 2 == 0) {\n    System.out.println({N} / 2);\n} else {\n    System.out.println(({N} + 1) / 2);\n}\n"),
    // logn
    py(LogN, 3, "", "{N} = int(input())\n{S} = 0\n{FILL}\nwhile {N} > 1:\n    {N} //= 2\n    {S} += 1\nprint({S})\n"),
    py(LogN, 2, "", "{N} = int(input())\nlo, hi = 0, {N}\nwhile lo < hi:\n    mid = (lo + hi + 1) // 2\n    if mid * mid <= {N}:\n        lo = mid\n    else:\n        hi = mid - 1\n{FILL}\nprint(lo)\n"),
    py(LogN, 2, "", "{N} = int(input())\n{I} = 1\n{S} = 0\nwhile {I} < {N}:\n    {I} *= 2\n    {S} += 1\n{FILL}\nprint({S})\n"),
    py(LogN, 2, "def {F}(b, e):\n    if e == 0:\n        return 1\n    h = {F}(b, e // 2)\n    if e % 2 == 1:\n        return h * h * b % {M}\n    return h * h % {M}\n\n\n", "{X}, {N} = map(int, input().split())\n{FILL}\nprint({F}({X}, {N}))\n"),
    py(LogN, 1, "", "{N} = int(input())\n{S} = 0\nwhile {N} > 0:\n    {S} += {N} % 10\n    {N} //= 10\n{FILL}\nprint({S})\n"),
    java(LogN, 3, "", "long {N} = sc.nextLong();\nint {S} = 0;\n{FILL}\nwhile ({N} > 1) {\n    {N} /= 2;\n    {S}++;\n}\nSystem.out.println({S});\n"),
    java(LogN, 2, "    static long {F}(long b, long e) {\n        if (e == 0) return 1;\n        long h = {F}(b, e / 2);\n        long r = h * h % {M};\n        if (e % 2 == 1) r = r * b % {M};\n        return r;\n    }\n\n", "long {X} = sc.nextLong();\nlong {N} = sc.nextLong();\n{FILL}\nSystem.out.println({F}({X}, {N}));\n"),
    java(LogN, 2, "", "long {N} = sc.nextLong();\nlong lo = 0, hi = {N};\nwhile (lo < hi) {\n    long mid = (lo + hi + 1) / 2;\n    if (mid * mid <= {N}) lo = mid;\n    else hi = mid - 1;\n}\n{FILL}\nSystem.out.println(lo);\n"),
    java(LogN, 1, "", "long {N} = sc.nextLong();\nint {S} = 0;\nfor (long {I} = 1; {I} < {N}; {I} *= 2) {\n    {S}++;\n}\n{FILL}\nSystem.out.println({S});\n"),
    // linear
    py(Linear, 3, "", "{N} = int(input())\n{A} = list(map(int, input().split()))\n{S} = 0\nfor {X} in {A}:\n    {S} += {X}\n{FILL}\nprint({S})\n"),
    py(Linear, 2, "", "{N} = int(input())\n{A} = list(map(int, input().split()))\n{S} = {A}[0]\nfor {I} in range(1, {N}):\n    if {A}[{I}] > {S}:\n        {S} = {A}[{I}]\n{FILL}\nprint({S})\n"),
    py(Linear, 2, "", "{N} = int(input())\n{A} = list(map(int, input().split()))\n{I} = 0\n{S} = 0\nwhile {I} < {N}:\n    {S} += {A}[{I}] * {C}\n    {I} += 1\n{FILL}\nprint({S})\n"),
    py(Linear, 1, "def {F}({N}):\n    if {N} <= 1:\n        return 1\n    return {N} * {F}({N} - 1) % {M}\n\n\n", "{N} = int(input())\n{FILL}\nprint({F}({N}))\n"),
    java(Linear, 3, "", "int {N} = sc.nextInt();\nlong {S} = 0;\nfor (int {I} = 0; {I} < {N}; {I}++) {\n    {S} += sc.nextInt();\n}\n{FILL}\nSystem.out.println({S});\n"),
    java(Linear, 2, "", "int {N} = sc.nextInt();\nint[] {A} = new int[{N}];\nfor (int {I} = 0; {I} < {N}; {I}++) {A}[{I}] = sc.nextInt();\nlong {S} = 0;\nint {J} = 0;\nwhile ({J} < {N}) {\n    {S} = Math.max({S}, {A}[{J}]);\n    {J}++;\n}\n{FILL}\nSystem.out.println({S});\n"),
    java(Linear, 1, "    static long {F}(int {N}) {\n        if ({N} <= 1) return 1;\n        return {N} * {F}({N} - 1) % {M};\n    }\n\n", "int {N} = sc.nextInt();\n{FILL}\nSystem.out.println({F}({N}));\n"),
    // nlogn
    py(NLogN, 3, "", "{N} = int(input())\n{A} = sorted(map(int, input().split()))\n{S} = 0\nfor {I} in range(1, {N}):\n    {S} = max({S}, {A}[{I}] - {A}[{I} - 1])\n{FILL}\nprint({S})\n"),
    py(NLogN, 2, "", "{N} = int(input())\n{A} = list(map(int, input().split()))\n{A}.sort()\n{S} = 0\nfor {I} in range({N}):\n    {S} += {A}[{I}] * ({I} + 1)\n{FILL}\nprint({S})\n"),
    py(NLogN, 2, "", "{N} = int(input())\n{S} = 0\nfor {I} in range({N}):\n    {J} = 1\n    while {J} < {N}:\n        {J} *= 2\n        {S} += 1\n{FILL}\nprint({S})\n"),
    py(NLogN, 1, "", "import bisect\n\n{N} = int(input())\n{A} = list(map(int, input().split()))\ntails = []\nfor {X} in {A}:\n    {K} = bisect.bisect_left(tails, {X})\n    if {K} == len(tails):\n        tails.append({X})\n    else:\n        tails[{K}] = {X}\n{FILL}\nprint(len(tails))\n"),
    java(NLogN, 3, "", "int {N} = sc.nextInt();\nint[] {A} = new int[{N}];\nfor (int {I} = 0; {I} < {N}; {I}++) {A}[{I}] = sc.nextInt();\nArrays.sort({A});\nlong {S} = 0;\nfor (int {I} = 0; {I} < {N}; {I}++) {\n    {S} += (long) {A}[{I}] * ({N} - {I});\n}\n{FILL}\nSystem.out.println({S});\n"),
    java(NLogN, 2, "", "int {N} = sc.nextInt();\nint[] {A} = new int[{N}];\nfor (int {I} = 0; {I} < {N}; {I}++) {A}[{I}] = sc.nextInt();\nArrays.sort({A});\nint {S} = 0;\nfor (int {I} = 0; {I} < {N}; {I}++) {\n    int {J} = Arrays.binarySearch({A}, {A}[{I}] * 2);\n    if ({J} >= 0) {S}++;\n}\n{FILL}\nSystem.out.println({S});\n"),
    java(NLogN, 1, "", "int {N} = sc.nextInt();\nlong {S} = 0;\nfor (int {I} = 0; {I} < {N}; {I}++) {\n    for (int {J} = 1; {J} < {N}; {J} *= 2) {\n        {S} += {J} % {C};\n    }\n}\n{FILL}\nSystem.out.println({S});\n"),
    // quadratic
    py(Quadratic, 3, "", "{N} = int(input())\n{A} = list(map(int, input().split()))\n{S} = 0\nfor {I} in range({N}):\n    for {J} in range({I} + 1, {N}):\n        if {A}[{I}] + {A}[{J}] == 0:\n            {S} += 1\n{FILL}\nprint({S})\n"),
    py(Quadratic, 2, "", "{N} = int(input())\n{S} = 0\nfor {I} in range({N}):\n    for {J} in range({N}):\n        {S} += ({I} * {J}) % {C}\n{FILL}\nprint({S})\n"),
    py(Quadratic, 2, "def {F}({A}, {X}):\n    {S} = 0\n    for {Y} in {A}:\n        if {Y} < {X}:\n            {S} += 1\n    return {S}\n\n\n", "{N} = int(input())\n{A} = list(map(int, input().split()))\n{Z} = 0\nfor {X} in {A}:\n    {Z} += {F}({A}, {X})\n{FILL}\nprint({Z})\n"),
    py(Quadratic, 1, "", "{N} = int(input())\n{A} = list(map(int, input().split()))\n{S} = 0\nfor {X} in {A}:\n    {S} = max({S}, {A}.count({X}))\n{FILL}\nprint({S})\n"),
    java(Quadratic, 3, "", "int {N} = sc.nextInt();\nint[] {A} = new int[{N}];\nfor (int {I} = 0; {I} < {N}; {I}++) {A}[{I}] = sc.nextInt();\nint {S} = 0;\nfor (int {I} = 0; {I} < {N}; {I}++) {\n    for (int {J} = {I} + 1; {J} < {N}; {J}++) {\n        if ({A}[{I}] > {A}[{J}]) {S}++;\n    }\n}\n{FILL}\nSystem.out.println({S});\n"),
    java(Quadratic, 2, "", "int {N} = sc.nextInt();\nint[] {A} = new int[{N}];\nfor (int {I} = 0; {I} < {N}; {I}++) {A}[{I}] = sc.nextInt();\nfor (int {I} = 0; {I} < {N}; {I}++) {\n    for (int {J} = 0; {J} + 1 < {N} - {I}; {J}++) {\n        if ({A}[{J}] > {A}[{J} + 1]) {\n            int t = {A}[{J}];\n            {A}[{J}] = {A}[{J} + 1];\n            {A}[{J} + 1] = t;\n        }\n    }\n}\n{FILL}\nSystem.out.println({A}[0]);\n"),
    java(Quadratic, 1, "", "int {N} = sc.nextInt();\nlong[][] {A} = new long[{N} + 1][{N} + 1];\nfor (int {I} = 0; {I} <= {N}; {I}++) {\n    {A}[{I}][0] = 1;\n    for (int {J} = 1; {J} <= {I}; {J}++) {\n        {A}[{I}][{J}] = ({A}[{I} - 1][{J} - 1] + {A}[{I} - 1][{J}]) % {M};\n    }\n}\n{FILL}\nSystem.out.println({A}[{N}][{N} / 2]);\n"),
    // cubic
    py(Cubic, 3, "", "{N} = int(input())\n{A} = [list(map(int, input().split())) for _ in range({N})]\nfor {K} in range({N}):\n    for {I} in range({N}):\n        for {J} in range({N}):\n            if {A}[{I}][{K}] + {A}[{K}][{J}] < {A}[{I}][{J}]:\n                {A}[{I}][{J}] = {A}[{I}][{K}] + {A}[{K}][{J}]\n{FILL}\nprint({A}[0][{N} - 1])\n"),
    py(Cubic, 2, "", "{N} = int(input())\n{A} = list(map(int, input().split()))\n{S} = 0\nfor {I} in range({N}):\n    for {J} in range({I} + 1, {N}):\n        for {K} in range({J} + 1, {N}):\n            if {A}[{I}] + {A}[{J}] + {A}[{K}] == 0:\n                {S} += 1\n{FILL}\nprint({S})\n"),
    py(Cubic, 2, "", "{N} = int(input())\n{S} = 0\nfor {I} in range({N}):\n    for {J} in range({N}):\n        for {K} in range({N}):\n            {S} += ({I} + {J} * {K}) % {C}\n{FILL}\nprint({S})\n"),
    java(Cubic, 3, "", "int {N} = sc.nextInt();\nlong[][] {A} = new long[{N}][{N}];\nfor (int {I} = 0; {I} < {N}; {I}++)\n    for (int {J} = 0; {J} < {N}; {J}++)\n        {A}[{I}][{J}] = sc.nextLong();\nlong[][] {Z} = new long[{N}][{N}];\nfor (int {I} = 0; {I} < {N}; {I}++)\n    for (int {J} = 0; {J} < {N}; {J}++)\n        for (int {K} = 0; {K} < {N}; {K}++)\n            {Z}[{I}][{J}] += {A}[{I}][{K}] * {A}[{K}][{J}];\n{FILL}\nSystem.out.println({Z}[0][0]);\n"),
    java(Cubic, 2, "", "int {N} = sc.nextInt();\nint[] {A} = new int[{N}];\nfor (int {I} = 0; {I} < {N}; {I}++) {A}[{I}] = sc.nextInt();\nint {S} = 0;\nfor (int {I} = 0; {I} < {N}; {I}++) {\n    for (int {J} = {I} + 1; {J} < {N}; {J}++) {\n        for (int {K} = {J} + 1; {K} < {N}; {K}++) {\n            if ({A}[{I}] + {A}[{J}] > {A}[{K}]) {S}++;\n        }\n    }\n}\n{FILL}\nSystem.out.println({S});\n"),
    // exponential
    py(Exponential, 3, "def {F}({N}):\n    if {N} < 2:\n        return {N}\n    return {F}({N} - 1) + {F}({N} - 2)\n\n\n", "{N} = int(input())\n{FILL}\nprint({F}({N}))\n"),
    py(Exponential, 2, "def {F}({I}, {N}, {S}):\n    if {I} == {N}:\n        return 1 if {S} == 0 else 0\n    return {F}({I} + 1, {N}, {S}) + {F}({I} + 1, {N}, {S} + 1)\n\n\n", "{N} = int(input())\n{FILL}\nprint({F}(0, {N}, 0))\n"),
    py(Exponential, 2, "def {F}({N}):\n    if {N} == 0:\n        return 0\n    return {F}({N} - 1) + 1 + {F}({N} - 1)\n\n\n", "{N} = int(input())\n{FILL}\nprint({F}({N}))\n"),
    java(Exponential, 3, "", "int {N} = sc.nextInt();\nint[] {A} = new int[{N}];\nfor (int {I} = 0; {I} < {N}; {I}++) {A}[{I}] = sc.nextInt();\nint {S} = Integer.MAX_VALUE;\nfor (int mask = 0; mask < (1 << {N}); mask++) {\n    int {Z} = 0;\n    for (int {I} = 0; {I} < {N}; {I}++) {\n        if ((mask >> {I} & 1) == 1) {Z} += {A}[{I}];\n        else {Z} -= {A}[{I}];\n    }\n    {S} = Math.min({S}, Math.abs({Z}));\n}\n{FILL}\nSystem.out.println({S});\n"),
    java(Exponential, 2, "    static long {F}(int {N}) {\n        if ({N} < 2) return {N};\n        return {F}({N} - 1) + {F}({N} - 2);\n    }\n\n", "int {N} = sc.nextInt();\n{FILL}\nSystem.out.println({F}({N}));\n"),
];

const NAMES_N: &[&str] = &["n", "m", "cnt", "size", "length", "num"];
const NAMES_A: &[&str] = &["a", "arr", "nums", "xs", "vals", "data", "v"];
const NAMES_S: &[&str] = &["s", "ans", "res", "total", "best", "acc", "out"];
const NAMES_F: &[&str] = &["solve", "go", "rec", "calc", "f", "dfs"];
const NAMES_LOOP: &[&str] = &["i", "j", "k", "p", "q", "r", "u", "w"];
const NAMES_SCALAR: &[&str] = &["x", "y", "z", "b", "c", "d", "g", "h"];
const MODULI: &[&str] = &["1000000007", "998244353", "1000003"];

struct Names {
    n: &'static str,
    a: &'static str,
    s: &'static str,
    f: &'static str,
    loops: [&'static str; 3],
    scalars: [&'static str; 3],
    c: u32,
    m: &'static str,
}

impl Names {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let pick = |rng: &mut ChaCha8Rng, pool: &[&'static str]| {
            *pool.choose(rng).expect("non-empty pool")
        };
        let distinct3 = |rng: &mut ChaCha8Rng, pool: &[&'static str]| {
            let v: Vec<_> = pool.choose_multiple(rng, 3).copied().collect();
            [v[0], v[1], v[2]]
        };
        // The conventional i, j, k most of the time.
        let loops = if rng.gen_bool(0.7) {
            ["i", "j", "k"]
        } else {
            distinct3(rng, NAMES_LOOP)
        };
        Names {
            n: pick(rng, NAMES_N),
            a: pick(rng, NAMES_A),
            s: pick(rng, NAMES_S),
            f: pick(rng, NAMES_F),
            loops,
            scalars: distinct3(rng, NAMES_SCALAR),
            c: rng.gen_range(3..=12),
            m: pick(rng, MODULI),
        }
    }

    fn fill(&self, text: &str) -> String {
        text.replace("{N}", self.n)
            .replace("{A}", self.a)
            .replace("{S}", self.s)
            .replace("{F}", self.f)
            .replace("{I}", self.loops[0])
            .replace("{J}", self.loops[1])
            .replace("{K}", self.loops[2])
            .replace("{X}", self.scalars[0])
            .replace("{Y}", self.scalars[1])
            .replace("{Z}", self.scalars[2])
            .replace("{C}", &self.c.to_string())
            .replace("{M}", self.m)
    }
}

/// Zero to two constant-time statements on a fresh variable.
fn filler(rng: &mut ChaCha8Rng, language: Language) -> String {
    let var = ["tmp", "flag", "extra", "lim"]
        .choose(rng)
        .expect("non-empty");
    let c1 = rng.gen_range(2..100);
    let c2 = rng.gen_range(2..10);
    let mut lines = Vec::new();
    let count = rng.gen_range(0..=2);
    for step in 0..count {
        let py = match (step, rng.gen_range(0..3)) {
            (0, _) => format!("{var} = {c1}"),
            (_, 0) => format!("if {var} > {c2}:\n    {var} -= {c2}"),
            (_, 1) => format!("{var} = max({var}, {c2})"),
            _ => format!("for t in range({c2}):\n    {var} += t"),
        };
        let java = match (step, rng.gen_range(0..3)) {
            (0, _) => format!("int {var} = {c1};"),
            (_, 0) => format!("if ({var} > {c2}) {var} -= {c2};"),
            (_, 1) => format!("{var} = Math.max({var}, {c2});"),
            _ => format!("for (int t = 0; t < {c2}; t++) {var} += t;"),
        };
        lines.push(if language == Language::Python {
            py
        } else {
            java
        });
    }
    lines.join("\n")
}

fn render(t: &Template, rng: &mut ChaCha8Rng) -> String {
    let names = Names::draw(rng);
    let fill = filler(rng, t.language);
    let body = names.fill(t.body);
    let body: String = body
        .lines()
        .filter_map(|l| match (l.trim() == "{FILL}", fill.is_empty()) {
            (true, true) => None,
            (true, false) => Some(format!("{fill}\n")),
            (false, _) => Some(format!("{l}\n")),
        })
        .collect();
    let funcs = names.fill(t.funcs);
    match t.language {
        Language::Python => format!("{funcs}{body}"),
        Language::Java => {
            let indented: String = body.lines().map(|l| format!("        {l}\n")).collect();
            format!(
                "import java.util.*;\n\npublic class Main {{\n{funcs}    public static void main(String[] args) {{\n        Scanner sc = new Scanner(System.in);\n{indented}    }}\n}}\n"
            )
        }
    }
}

/// `count` programs spread evenly over the seven classes (earlier classes
/// take the remainder), shuffled, with ids `syn0000`, `syn0001`, ...
pub fn generate(count: usize, seed: u64) -> Vec<LabeledExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for (ci, &class) in ComplexityClass::ALL.iter().enumerate() {
        let n = count / 7 + usize::from(ci < count % 7);
        let pool: Vec<&Template> = TEMPLATES.iter().filter(|t| t.class == class).collect();
        for _ in 0..n {
            let t = pool
                .choose_weighted(&mut rng, |t| t.weight)
                .expect("every class has templates");
            out.push((class, t.language, render(t, &mut rng)));
        }
    }
    out.shuffle(&mut rng);
    out.into_iter()
        .enumerate()
        .map(|(i, (class, lang, src))| {
            LabeledExample::new(CodeSnippet::new(format!("syn{i:04}"), src, lang), class)
        })
        .collect()
}

/// Generates `count` programs and splits each class 70/10/20 into train,
/// validation and test.
pub fn generate_split(count: usize, seed: u64) -> CorpusSplit {
    let all = generate(count, seed);
    let mut split = CorpusSplit {
        train: Vec::new(),
        validation: Vec::new(),
        test: Vec::new(),
    };
    for class in ComplexityClass::ALL {
        let of_class: Vec<&LabeledExample> = all.iter().filter(|e| e.label == class).collect();
        let n = of_class.len();
        let n_val = (n as f64 * VALIDATION_SHARE).round() as usize;
        let n_test = (n as f64 * TEST_SHARE).round() as usize;
        for (i, e) in of_class.into_iter().enumerate() {
            let dest = if i < n_val {
                &mut split.validation
            } else if i < n_val + n_test {
                &mut split.test
            } else {
                &mut split.train
            };
            dest.push(e.clone());
        }
    }
    for part in [&mut split.train, &mut split.validation, &mut split.test] {
        part.sort_by(|a, b| a.id().cmp(b.id()));
    }
    split
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::symbolic::analyze;

    #[test]
    fn placeholders_are_all_substituted() {
        for e in generate(350, 4) {
            for p in [
                "{N}", "{A}", "{S}", "{F}", "{I}", "{J}", "{K}", "{X}", "{Y}", "{Z}", "{C}", "{M}",
                "{FILL}",
            ] {
                assert!(
                    !e.snippet.source.contains(p),
                    "{p} left in\n{}",
                    e.snippet.source
                );
            }
        }
    }

    #[test]
    fn generation_is_seeded() {
        assert_eq!(generate(70, 9), generate(70, 9));
        assert_ne!(generate(70, 9), generate(70, 10));
    }

    #[test]
    fn classes_are_balanced_and_split_disjoint() {
        let s = generate_split(700, 1);
        assert_eq!(s.train.len() + s.validation.len() + s.test.len(), 700);
        let mut counts = BTreeMap::new();
        for e in &s.train {
            *counts.entry(e.label).or_insert(0) += 1;
        }
        assert!(counts.values().all(|&c| c == 70), "{counts:?}");
        assert_eq!(s.validation.len(), 70);
        assert_eq!(s.test.len(), 140);
    }

    #[test]
    fn every_template_parses() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for t in TEMPLATES {
            for _ in 0..20 {
                let src = render(t, &mut rng);
                let s = CodeSnippet::new("t", src.clone(), t.language);
                let parsed = crate::frontend::parse(&s);
                assert!(parsed.is_ok(), "{:?}\n{src}", parsed.err());
            }
        }
    }

    #[test]
    fn analyzer_mostly_agrees_with_templates() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut misses = Vec::new();
        for (ti, t) in TEMPLATES.iter().enumerate() {
            let src = render(t, &mut rng);
            let got = analyze(&CodeSnippet::new("t", src.clone(), t.language)).map(|a| a.class);
            if got != Ok(t.class) {
                misses.push(format!("template {ti} ({:?}) -> {got:?}\n{src}", t.class));
            }
        }
        // Only the count-inside-loop template is a known miss.
        assert!(misses.len() <= 1, "{}", misses.join("\n"));
    }
}
