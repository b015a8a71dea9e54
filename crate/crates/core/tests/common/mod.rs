//! Loading of the golden corpus and its mutants.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use mrl_core::sexpr::{parse_session, Session};

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn sessions_in(dir: &Path) -> Vec<(PathBuf, String, Session)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "mrl"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).expect("readable corpus file");
            let session = parse_session(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (p, text, session)
        })
        .collect()
}

/// Sessions whose derivations must all be accepted.
pub fn golden() -> Vec<(PathBuf, Session)> {
    sessions_in(&corpus_dir()).into_iter().map(|(p, _, s)| (p, s)).collect()
}

/// Mutant sessions with the expected reason of each derivation, taken from
/// `; expect <name> <reason>` lines.
pub fn mutants() -> Vec<(PathBuf, Session, BTreeMap<String, String>)> {
    sessions_in(&corpus_dir().join("mutants"))
        .into_iter()
        .map(|(p, text, s)| {
            let expect = text
                .lines()
                .filter_map(|l| l.trim().strip_prefix("; expect "))
                .filter_map(|l| l.split_once(' '))
                .map(|(n, r)| (n.to_string(), r.trim().to_string()))
                .collect();
            (p, s, expect)
        })
        .collect()
}
