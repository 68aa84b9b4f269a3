//! The complexity-class label space and its dominance order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// One of the seven asymptotic classes used as labels.
///
/// The derived `Ord` is the dominance order: `Constant < LogN < Linear <
/// NLogN < Quadratic < Cubic < Exponential`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComplexityClass {
    Constant,
    LogN,
    Linear,
    NLogN,
    Quadratic,
    Cubic,
    Exponential,
}

impl ComplexityClass {
    pub const ALL: [ComplexityClass; 7] = [
        ComplexityClass::Constant,
        ComplexityClass::LogN,
        ComplexityClass::Linear,
        ComplexityClass::NLogN,
        ComplexityClass::Quadratic,
        ComplexityClass::Cubic,
        ComplexityClass::Exponential,
    ];

    /// The five classes of CorCoD-style datasets.
    pub const FIVE: [ComplexityClass; 5] = [
        ComplexityClass::Constant,
        ComplexityClass::LogN,
        ComplexityClass::Linear,
        ComplexityClass::NLogN,
        ComplexityClass::Quadratic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ComplexityClass::Constant => "constant",
            ComplexityClass::LogN => "logn",
            ComplexityClass::Linear => "linear",
            ComplexityClass::NLogN => "nlogn",
            ComplexityClass::Quadratic => "quadratic",
            ComplexityClass::Cubic => "cubic",
            ComplexityClass::Exponential => "exponential",
        }
    }

    /// Big-O rendering used in derivation traces.
    pub fn big_o(self) -> &'static str {
        match self {
            ComplexityClass::Constant => "O(1)",
            ComplexityClass::LogN => "O(log N)",
            ComplexityClass::Linear => "O(N)",
            ComplexityClass::NLogN => "O(N log N)",
            ComplexityClass::Quadratic => "O(N^2)",
            ComplexityClass::Cubic => "O(N^3)",
            ComplexityClass::Exponential => "O(2^N)",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Returns the greater of two classes under the dominance order.
pub fn dominates(a: ComplexityClass, b: ComplexityClass) -> ComplexityClass {
    a.max(b)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown complexity class `{0}`")]
pub struct UnknownClass(pub String);

impl FromStr for ComplexityClass {
    type Err = UnknownClass;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ComplexityClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| UnknownClass(s.to_string()))
    }
}

impl fmt::Display for ComplexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for ComplexityClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for ComplexityClass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered subset of the label space, e.g. five classes for CorCoD-like
/// data and seven for CodeComplex-like data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassSet(Vec<ComplexityClass>);

impl ClassSet {
    /// Builds a class set; duplicates are removed and the result is sorted.
    pub fn new(classes: impl IntoIterator<Item = ComplexityClass>) -> Self {
        let mut v: Vec<_> = classes.into_iter().collect();
        v.sort();
        v.dedup();
        ClassSet(v)
    }

    pub fn all() -> Self {
        ClassSet(ComplexityClass::ALL.to_vec())
    }

    pub fn five() -> Self {
        ClassSet(ComplexityClass::FIVE.to_vec())
    }

    pub fn classes(&self) -> &[ComplexityClass] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, c: ComplexityClass) -> bool {
        self.0.binary_search(&c).is_ok()
    }

    pub fn position(&self, c: ComplexityClass) -> Option<usize> {
        self.0.binary_search(&c).ok()
    }

    /// Maps a class onto this set: the greatest member not above `c`, or the
    /// smallest member when every member is above `c`.
    pub fn clamp(&self, c: ComplexityClass) -> ComplexityClass {
        self.0
            .iter()
            .rev()
            .find(|&&m| m <= c)
            .or_else(|| self.0.first())
            .copied()
            .unwrap_or(c)
    }
}

impl Default for ClassSet {
    fn default() -> Self {
        ClassSet::all()
    }
}
