#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use tcpred::{CodeSnippet, ComplexityClass, Language};

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn load(path: &Path) -> CodeSnippet {
    let lang = match path.extension().and_then(|e| e.to_str()) {
        Some("py") => Language::Python,
        Some("java") => Language::Java,
        other => panic!("unexpected fixture extension {other:?}"),
    };
    let id = path.file_stem().unwrap().to_string_lossy().into_owned();
    CodeSnippet::new(id, fs::read_to_string(path).unwrap(), lang)
}

/// Hand-labelled programs named `<class>_<k>.<ext>`.
pub fn oracle() -> Vec<(CodeSnippet, ComplexityClass)> {
    let mut out: Vec<_> = fs::read_dir(fixture_dir().join("oracle"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    out.sort();
    out.iter()
        .map(|p| {
            let s = load(p);
            let label = s.id.rsplit_once('_').unwrap().0.parse().unwrap();
            (s, label)
        })
        .collect()
}

/// Every snippet under `fixtures/<dir>`, sorted by file name.
pub fn dir(name: &str) -> Vec<CodeSnippet> {
    let mut paths: Vec<_> = fs::read_dir(fixture_dir().join(name))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths.iter().map(|p| load(p)).collect()
}
