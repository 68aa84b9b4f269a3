//! Symbolic cost terms and their algebra.

use std::fmt;

use crate::class::ComplexityClass;

/// The kinds a cost term can take, in dominance order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    One,
    Log,
    N,
    NLog,
    N2,
    N3,
    Exp,
}

impl TermKind {
    pub const ALL: [TermKind; 7] = [
        TermKind::One,
        TermKind::Log,
        TermKind::N,
        TermKind::NLog,
        TermKind::N2,
        TermKind::N3,
        TermKind::Exp,
    ];

    pub fn class(self) -> ComplexityClass {
        ComplexityClass::ALL[self as usize]
    }

    pub fn from_class(c: ComplexityClass) -> Self {
        TermKind::ALL[c.index()]
    }

    /// (polynomial degree, log factor); `None` for EXP.
    fn shape(self) -> Option<(u8, bool)> {
        match self {
            TermKind::One => Some((0, false)),
            TermKind::Log => Some((0, true)),
            TermKind::N => Some((1, false)),
            TermKind::NLog => Some((1, true)),
            TermKind::N2 => Some((2, false)),
            TermKind::N3 => Some((3, false)),
            TermKind::Exp => None,
        }
    }

    /// Product rule. Powers of log collapse to one log; anything above
    /// N^2 without an exponential factor caps at N^3.
    pub fn times(self, other: TermKind) -> TermKind {
        let (Some((da, la)), Some((db, lb))) = (self.shape(), other.shape()) else {
            return TermKind::Exp;
        };
        match (da + db, la || lb) {
            (0, false) => TermKind::One,
            (0, true) => TermKind::Log,
            (1, false) => TermKind::N,
            (1, true) => TermKind::NLog,
            (2, false) => TermKind::N2,
            _ => TermKind::N3,
        }
    }

    pub fn big_o(self) -> &'static str {
        self.class().big_o()
    }
}

impl fmt::Display for TermKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.big_o())
    }
}

/// A cost with the derivation steps that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComplexityTerm {
    pub kind: TermKind,
    pub trace: Vec<String>,
}

impl ComplexityTerm {
    pub fn one() -> Self {
        ComplexityTerm {
            kind: TermKind::One,
            trace: Vec::new(),
        }
    }

    pub fn new(kind: TermKind, step: impl Into<String>) -> Self {
        ComplexityTerm {
            kind,
            trace: vec![step.into()],
        }
    }

    pub fn class(&self) -> ComplexityClass {
        self.kind.class()
    }
}

/// Sequential composition: the dominating term wins. Traces are concatenated.
pub fn combine_sequence(terms: &[ComplexityTerm]) -> ComplexityTerm {
    let kind = terms.iter().map(|t| t.kind).max().unwrap_or(TermKind::One);
    let trace = terms.iter().flat_map(|t| t.trace.iter().cloned()).collect();
    ComplexityTerm { kind, trace }
}

/// Nested composition (a loop of `outer` iterations around `inner`).
pub fn combine_nested(outer: &ComplexityTerm, inner: &ComplexityTerm) -> ComplexityTerm {
    let kind = outer.kind.times(inner.kind);
    let mut trace: Vec<String> = outer.trace.iter().chain(&inner.trace).cloned().collect();
    if outer.kind != TermKind::One && inner.kind != TermKind::One {
        trace.push(format!("{} x {} = {}", outer.kind, inner.kind, kind));
    }
    ComplexityTerm { kind, trace }
}

/// `a + b + c = d` over the given kinds, smallest first.
pub fn sum_line(kinds: &[TermKind]) -> String {
    let result = kinds.iter().copied().max().unwrap_or(TermKind::One);
    if kinds.len() < 2 {
        return result.big_o().to_string();
    }
    let mut sorted = kinds.to_vec();
    sorted.sort();
    let parts: Vec<&str> = sorted.iter().map(|k| k.big_o()).collect();
    format!("{} = {}", parts.join(" + "), result)
}
