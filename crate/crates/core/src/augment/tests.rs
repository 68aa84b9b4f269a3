use super::*;
use crate::frontend::{parse_source, LoopLoc, StmtKind};
use crate::symbolic::analyze;
use crate::Language;

fn py(src: &str) -> CodeSnippet {
    CodeSnippet::new("p", src, Language::Python)
}

fn java(src: &str) -> CodeSnippet {
    CodeSnippet::new("j", src, Language::Java)
}

fn class_of(src: &str, lang: Language) -> ComplexityClass {
    analyze(&CodeSnippet::new("x", src, lang)).unwrap().class
}

fn loop_kinds(src: &str, lang: Language) -> Vec<&'static str> {
    let ir = parse_source(src, lang).unwrap();
    ir.loops()
        .into_iter()
        .map(|(_, s)| match s.kind {
            StmtKind::For(_) => "for",
            StmtKind::While(_) => "while",
            _ => "other",
        })
        .collect()
}

fn compact(s: &str) -> String {
    s.split_whitespace().collect()
}

#[test]
fn java_counted_for_becomes_while() {
    let src = "class A { void f() { for (int i = 0; i < 5; i++) { x += i; } } }";
    let ir = parse_source(src, Language::Java).unwrap();
    let out = for_to_while(&ir, LoopLoc(0)).unwrap();
    let c = compact(&out);
    assert!(c.contains("inti=0;while(i<5){x+=i;i++;}"), "{out}");
    assert_eq!(loop_kinds(&out, Language::Java), ["while"]);
}

#[test]
fn python_range_for_becomes_counter_while() {
    let src = "n = int(input())\nfor i in range(n):\n    print(i)\n";
    let ir = parse_source(src, Language::Python).unwrap();
    let out = for_to_while(&ir, LoopLoc(0)).unwrap();
    let c = compact(&out);
    assert!(c.contains("i=0whilei<n:print(i)i+=1"), "{out}");
    assert_eq!(class_of(&out, Language::Python), ComplexityClass::Linear);
}

#[test]
fn negative_step_counts_down() {
    let src = "n = int(input())\nfor i in range(n, 0, -1):\n    print(i)\n";
    let ir = parse_source(src, Language::Python).unwrap();
    let out = for_to_while(&ir, LoopLoc(0)).unwrap();
    let c = compact(&out);
    assert!(c.contains("whilei>0:") && c.contains("i-=1"), "{out}");
}

#[test]
fn continue_is_refused_for_hoisted_updates() {
    let src = "class A { void f() { for (int i = 0; i < n; i++) { if (i % 2 == 0) continue; s += i; } } }";
    let ir = parse_source(src, Language::Java).unwrap();
    assert!(matches!(
        for_to_while(&ir, LoopLoc(0)),
        Err(AugmentError::UnsupportedLoopForm(_))
    ));
}

#[test]
fn java_while_takes_trailing_update() {
    let src = "class A { void f() { int i = 0; while (i < 10) { s += i; i++; } } }";
    let ir = parse_source(src, Language::Java).unwrap();
    let out = while_to_for(&ir, LoopLoc(0)).unwrap();
    assert!(compact(&out).contains("for(;i<10;i++){s+=i;}"), "{out}");
}

#[test]
fn java_decrement_condition_has_empty_update() {
    let src = "class A { void f() { int t = sc.nextInt(); while (t-- > 0) { solve(); } } }";
    let ir = parse_source(src, Language::Java).unwrap();
    let out = while_to_for(&ir, LoopLoc(0)).unwrap();
    assert!(compact(&out).contains("for(;t-->0;){solve();}"), "{out}");
}

#[test]
fn python_while_true_is_refused() {
    let src = "while True:\n    x = input()\n    if not x:\n        break\n";
    let ir = parse_source(src, Language::Python).unwrap();
    assert!(matches!(
        while_to_for(&ir, LoopLoc(0)),
        Err(AugmentError::UnsupportedLoopForm(_))
    ));
}

#[test]
fn python_while_round_trips_through_iter_surrogate() {
    let src = "n = int(input())\ni = 1\nwhile i < n:\n    i *= 2\n";
    let ir = parse_source(src, Language::Python).unwrap();
    let out = while_to_for(&ir, LoopLoc(0)).unwrap();
    assert!(out.contains("iter(lambda"), "{out}");
    assert_eq!(class_of(&out, Language::Python), ComplexityClass::LogN);
    let back = while_to_for(&parse_source(&out, Language::Python).unwrap(), LoopLoc(0));
    assert!(back.is_err(), "a for is not a while");
    let back = for_to_while(&parse_source(&out, Language::Python).unwrap(), LoopLoc(0)).unwrap();
    assert_eq!(loop_kinds(&back, Language::Python), ["while"]);
    assert_eq!(class_of(&back, Language::Python), ComplexityClass::LogN);
}

#[test]
fn for_else_is_refused() {
    let src = "for x in a:\n    if x:\n        break\nelse:\n    print(1)\n";
    let ir = parse_source(src, Language::Python).unwrap();
    assert!(for_to_while(&ir, LoopLoc(0)).is_err());
}

#[test]
fn wrong_location_kind_is_refused() {
    let src = "n = int(input())\nfor i in range(n):\n    pass\n";
    let ir = parse_source(src, Language::Python).unwrap();
    assert!(while_to_for(&ir, LoopLoc(0)).is_err());
    assert!(for_to_while(&ir, LoopLoc(3)).is_err());
}

#[test]
fn mixed_loops_flip_in_one_output() {
    let src =
        "n = int(input())\nfor i in range(n):\n    j = n\n    while j > 0:\n        j //= 2\n";
    let e = LabeledExample::new(py(src), ComplexityClass::NLogN);
    let a = loop_convert(&e).unwrap();
    assert_eq!(a.method, AugMethod::Lc);
    assert_eq!(a.label, ComplexityClass::NLogN);
    assert_eq!(a.original, "p");
    assert_eq!(a.snippet.id, "p#lc");
    assert_eq!(
        loop_kinds(&a.snippet.source, Language::Python),
        ["while", "for"]
    );
    assert_eq!(analyze(&a.snippet).unwrap().class, ComplexityClass::NLogN);
}

#[test]
fn loop_free_snippets_are_absent() {
    let e = LabeledExample::new(
        py("a, b = map(int, input().split())\nprint(a + b)\n"),
        ComplexityClass::Constant,
    );
    assert!(loop_convert(&e).is_none());
    let e = LabeledExample::new(py("def f(:\n"), ComplexityClass::Constant);
    assert!(loop_convert(&e).is_none());
}

#[test]
fn named_sequence_for_uses_index_loop() {
    let src = "a = list(map(int, input().split()))\ns = 0\nfor x in a:\n    s += x\nprint(s)\n";
    let e = LabeledExample::new(py(src), ComplexityClass::Linear);
    let a = loop_convert(&e).unwrap();
    assert_eq!(loop_kinds(&a.snippet.source, Language::Python), ["while"]);
    assert_eq!(analyze(&a.snippet).unwrap().class, ComplexityClass::Linear);
}

#[test]
fn dataset_lc_keeps_labels_and_fresh_ids() {
    let l = vec![
        LabeledExample::new(
            py("n = int(input())\nfor i in range(n):\n    print(i)\n"),
            ComplexityClass::Linear,
        ),
        LabeledExample::new(
            CodeSnippet::new("p#lc", "print(1)\n", Language::Python),
            ComplexityClass::Constant,
        ),
    ];
    let strategy = AugStrategy {
        kind: AugKind::Lc,
        sampling: Sampling::Natural,
    };
    let out = augment_dataset(&l, strategy, None).unwrap();
    assert_eq!(out.examples.len(), 1);
    let a = &out.examples[0];
    assert_eq!(a.label, ComplexityClass::Linear);
    assert!(l.iter().all(|e| e.id() != a.snippet.id), "{}", a.snippet.id);
}

#[test]
fn artificial_sampling_rejects_loop_free_seeds() {
    let l = vec![LabeledExample::new(
        py("print(1)\n"),
        ComplexityClass::Constant,
    )];
    let strategy = AugStrategy {
        kind: AugKind::Lc,
        sampling: Sampling::Artificial,
    };
    assert!(matches!(
        augment_dataset(&l, strategy, None),
        Err(AugmentError::NotLoopSampled(_))
    ));
}

#[test]
fn bt_without_backend_is_unavailable() {
    let l = vec![LabeledExample::new(
        py("print(1)\n"),
        ComplexityClass::Constant,
    )];
    let strategy = AugStrategy {
        kind: AugKind::Bt,
        sampling: Sampling::Natural,
    };
    assert_eq!(
        augment_dataset(&l, strategy, None).unwrap_err(),
        AugmentError::AugmenterUnavailable
    );
}

#[test]
fn validation_rejects_identical_and_garbage() {
    let s = java("class A { public static void main(String[] a) { int x = 1; } }");
    assert!(matches!(
        validate(&s, &s.source),
        Err(AugmentError::InvalidAugmentation(_))
    ));
    // Whitespace-only changes are still identical token streams.
    let spaced = s.source.replace(' ', "  ");
    assert!(matches!(
        validate(&s, &spaced),
        Err(AugmentError::InvalidAugmentation(_))
    ));
    assert!(matches!(
        validate(&s, "class { {"),
        Err(AugmentError::InvalidAugmentation(_))
    ));
    let ok = validate(
        &s,
        "class A { public static void main(String[] a) { int y = 1; } }",
    )
    .unwrap();
    assert_eq!(ok.id, "j#bt");
}

#[test]
fn rename_keeps_structure_and_class() {
    let src = "def f(a):\n    t = 0\n    for x in a:\n        t += x\n    return t\nn = int(input())\nend = f(list(range(n)))\nprint(end, end='')\n";
    let s = py(src);
    let out = bt::rename_variables(&s).unwrap();
    assert_ne!(out, src);
    assert!(
        compact(&out).contains("print(end_v,end=''"),
        "keyword argument must survive: {out}"
    );
    let v = validate(&s, &out).unwrap();
    assert_eq!(analyze(&v).unwrap().class, analyze(&s).unwrap().class);
}

#[test]
fn bt_prompt_names_both_languages() {
    let j = bt::bt_prompt(&java("class A {}"));
    assert!(j.contains("Java") && j.contains("Python"));
    let p = bt::bt_prompt(&py("x = 1\n"));
    assert!(p.contains("Python"));
    assert!(!bt::LC_PROMPT.is_empty());
}

#[test]
fn mock_server_speaks_ndjson() {
    let req = BtRequestLine::new("a", "x = 1\nprint(x)\n");
    let bad = "not json\n";
    let input = format!("{req}\n{bad}");
    let mut out = Vec::new();
    bt::serve_mock(input.as_bytes(), &mut out, MockMode::Rename).unwrap();
    let lines: Vec<serde_json::Value> = String::from_utf8(out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["id"], "a");
    assert!(lines[0]["code"].as_str().unwrap().contains("x_v"));
    assert!(lines[1]["error"].is_string());
}

struct BtRequestLine;

impl BtRequestLine {
    fn new(id: &str, code: &str) -> String {
        serde_json::to_string(&bt::BtRequest {
            op: "backtranslate".into(),
            id: id.into(),
            language: Language::Python,
            code: code.into(),
            prompt: String::new(),
        })
        .unwrap()
    }
}
