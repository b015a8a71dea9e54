mod common;

use std::collections::BTreeSet;

use mrl_core::sexpr::{format_session, parse_session, print_derivation};
use mrl_core::{check, RuleTag};

#[test]
fn golden_derivations_are_accepted() {
    let mut count = 0;
    for (path, session) in common::golden() {
        let calc = session.header.calculus();
        for (name, d) in session.derivations() {
            if let Err(r) = check(d, &calc) {
                panic!("{} {name}: {r}", path.display());
            }
            count += 1;
        }
    }
    assert!(count >= 30, "only {count} golden derivations");
}

#[test]
fn golden_corpus_covers_every_rule() {
    let mut seen = BTreeSet::new();
    for (_, session) in common::golden() {
        for (_, d) in session.derivations() {
            seen.extend(d.nodes().map(|n| n.rule.tag()));
        }
    }
    let missing: Vec<_> = RuleTag::ALL.into_iter().filter(|t| !seen.contains(t)).collect();
    assert!(missing.is_empty(), "uncovered rules: {missing:?}");
}

#[test]
fn mutants_are_rejected_with_the_expected_reason() {
    let mut count = 0;
    for (path, session, expect) in common::mutants() {
        let calc = session.header.calculus();
        for (name, d) in session.derivations() {
            let want = expect.get(name).unwrap_or_else(|| panic!("{} {name}: no expect line", path.display()));
            match check(d, &calc) {
                Ok(()) => panic!("{} {name}: accepted", path.display()),
                Err(r) => assert_eq!(&r.reason.to_string(), want, "{} {name}", path.display()),
            }
            count += 1;
        }
        assert_eq!(expect.len(), session.derivations().count(), "{}: stray expect lines", path.display());
    }
    assert!(count >= 15, "only {count} mutants");
}

#[test]
fn corpus_formatting_is_idempotent_and_lossless() {
    for (path, session) in common::golden() {
        let once = session.to_string();
        let twice = format_session(&once).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(once, twice, "{}", path.display());
        let reparsed = parse_session(&once).expect("formatted output parses");
        let a: Vec<_> = session.derivations().map(|(n, d)| (n.to_string(), print_derivation(d))).collect();
        let b: Vec<_> = reparsed.derivations().map(|(n, d)| (n.to_string(), print_derivation(d))).collect();
        assert_eq!(a, b, "{}", path.display());
    }
}
