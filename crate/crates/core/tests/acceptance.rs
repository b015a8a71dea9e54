//! Acceptance criteria, one printed PASS/FAIL line each. Heavy oracle runs
//! are shared between criteria through one premise pool per mode and size.

mod common;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use mrl_core::admissible::{lookup, registry, AdmissibleRule, MpCut, DERIVE_FULL, ONE_CUT};
use mrl_core::checker::is_f_intuitionistic;
use mrl_core::search::{
    verify_admissible, verify_construct, EnumSpace, OracleConfig, PremisePool, Stage, VerificationReport,
    RESTRICTED_RULES,
};
use mrl_core::{check, Calculus, Derivation, Engine, LogicMode, PrincipalFilter, RuleTag};

const MODES: [LogicMode; 2] = [LogicMode::Mrl, LogicMode::Lmrl];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, pass, detail }
}

fn pool(n: usize, measure: usize, mode: LogicMode, filter: Option<&[usize]>) -> PremisePool {
    let space = EnumSpace::standard(n, measure, mode).expect("space");
    let mut calc = Calculus::new(space.universe, mode);
    if let Some(core) = filter {
        calc = calc.restricted(PrincipalFilter::new(space.universe.set(core.iter().copied()).expect("core")));
    }
    PremisePool::new(space, OracleConfig::new(calc))
}

fn all_nodes_f(d: &Derivation, filter: PrincipalFilter) -> bool {
    d.nodes().all(|n| is_f_intuitionistic(filter, &n.conclusion))
}

fn corpus() -> Outcome {
    let start = Instant::now();
    let (mut accepted, mut golden, mut rejected, mut mutants) = (0, 0, 0, 0);
    let mut tags = BTreeSet::new();
    let (mut bang_ctx, mut forall_neg) = (false, false);
    let mut problems = Vec::new();
    for (path, session) in common::golden() {
        let calc = session.header.calculus();
        for (name, d) in session.derivations() {
            golden += 1;
            match check(d, &calc) {
                Ok(()) => accepted += 1,
                Err(r) => problems.push(format!("{} {name}: {r}", path.display())),
            }
            for node in d.nodes() {
                tags.insert(node.rule.tag());
                bang_ctx |= node.rule.tag() == RuleTag::BangPos && node.conclusion.len() > 1;
                forall_neg |= node.rule.tag() == RuleTag::ForallNeg;
            }
        }
    }
    for (path, session, expect) in common::mutants() {
        let calc = session.header.calculus();
        for (name, d) in session.derivations() {
            mutants += 1;
            match (check(d, &calc), expect.get(name)) {
                (Err(r), Some(want)) if &r.reason.to_string() == want => rejected += 1,
                (got, want) => problems.push(format!("{} {name}: got {got:?}, expected {want:?}", path.display())),
            }
        }
    }
    let elapsed = start.elapsed();
    let missing: Vec<_> = RuleTag::ALL.into_iter().filter(|t| !tags.contains(t)).map(|t| t.name()).collect();
    let pass = problems.is_empty()
        && golden >= 30
        && mutants >= 15
        && missing.is_empty()
        && bang_ctx
        && forall_neg
        && elapsed < Duration::from_secs(5);
    outcome(
        "1",
        pass,
        format!(
            "golden corpus: {accepted}/{golden} accepted, {rejected}/{mutants} mutants rejected as expected, \
             uncovered rules {missing:?}, bang-pos with context {bang_ctx}, forall-neg {forall_neg}, {elapsed:.2?}{}",
            problems.first().map(|p| format!("; first problem: {p}")).unwrap_or_default()
        ),
    )
}

struct OracleRun {
    n: usize,
    mode: LogicMode,
    reports: Vec<VerificationReport>,
}

fn oracle_runs() -> (Vec<OracleRun>, Duration) {
    let start = Instant::now();
    let mut runs = Vec::new();
    for n in [2, 3] {
        for mode in MODES {
            let mut p = pool(n, 1, mode, None);
            let reports = registry().iter().map(|r| verify_admissible(*r, &mut p).expect("oracle run")).collect();
            runs.push(OracleRun { n, mode, reports });
        }
    }
    (runs, start.elapsed())
}

fn oracle(runs: &[OracleRun], elapsed: Duration) -> Outcome {
    let mut failures = 0;
    let mut empty = Vec::new();
    let mut total = 0;
    for run in runs {
        for r in &run.reports {
            failures += r.failures.len();
            total += r.instances_tested;
            let optional = r.rule == "weaken" && run.mode == LogicMode::Lmrl;
            if r.instances_tested == 0 && !optional {
                empty.push(format!("{} n={} {}", r.rule, run.n, run.mode.name()));
            }
        }
    }
    let first = runs.iter().flat_map(|r| &r.reports).find(|r| !r.passed()).map(|r| format!("; {r}"));
    outcome(
        "2",
        failures == 0 && empty.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "admissibility oracle n=2,3 measure 1 both modes: {total} instances, {failures} failures, \
             rules without instances {empty:?}, {elapsed:.2?}{}",
            first.unwrap_or_default()
        ),
    )
}

fn height_bound() -> Outcome {
    let (mut instances, mut violations) = (0, 0);
    for n in [2, 3] {
        let mut p = pool(n, 1, LogicMode::Lmrl, None);
        for args in ONE_CUT.instances(&mut p).expect("instances") {
            let mut engine = Engine::new(p.calc());
            let Ok(out) = ONE_CUT.apply(&mut engine, &args) else { continue };
            instances += 1;
            if out.height() > args.derivations[0].height() {
                violations += 1;
            }
        }
    }
    outcome(
        "3",
        instances > 0 && violations == 0,
        format!("LMRL 1-cut height bound: {instances} instances, {violations} outputs taller than the input"),
    )
}

fn metric(runs: &[OracleRun]) -> Outcome {
    let mut calls = 0;
    let mut violations = 0;
    for r in runs.iter().flat_map(|r| &r.reports) {
        if matches!(r.rule.as_str(), "one_cut" | "two_cut_spill" | "role_split" | "mp_cut") {
            calls += r.recursive_calls;
            violations += r.failures_at(Stage::Metric);
        }
    }
    outcome(
        "4",
        calls > 0 && violations == 0,
        format!("termination metric: {calls} recursive calls, {violations} without a strict decrease"),
    )
}

fn binary_cut() -> Outcome {
    let two = MpCut { parties: &[2] };
    let (mut instances, mut bad) = (0, Vec::new());
    for mode in MODES {
        let mut p = pool(2, 1, mode, None);
        for args in two.instances(&mut p).expect("instances") {
            if args.label != "n=2 [0] [1]" {
                continue;
            }
            instances += 1;
            let expected = args.derivations[0].conclusion.without(args.positions[0])
                .extended(&args.derivations[1].conclusion.without(args.positions[1]));
            let mut engine = Engine::new(p.calc());
            match two.apply(&mut engine, &args) {
                Ok(out) if out.conclusion.multiset_eq(&expected) && check(&out, &p.calc()).is_ok() => {}
                Ok(out) => bad.push(format!("{}: got {}", args.describe(), out.conclusion)),
                Err(e) => bad.push(format!("{}: {e}", args.describe())),
            }
        }
    }
    outcome(
        "5",
        instances > 0 && bad.is_empty(),
        format!(
            "mp-cut with parts [0],[1] is the binary cut: {instances} instances, {} not concluding Γ1,Γ2{}",
            bad.len(),
            bad.first().map(|b| format!("; {b}")).unwrap_or_default()
        ),
    )
}

fn restriction() -> Vec<Outcome> {
    let start = Instant::now();
    let core = [0usize];
    let (mut scanned, mut scan_bad) = (0, 0);
    let mut cut_reports = Vec::new();
    let mut construct = Vec::new();
    for mode in MODES {
        let mut p = pool(2, 1, mode, Some(&core));
        let calc = p.calc();
        let filter = calc.restriction.expect("restricted");
        for d in p.derivable().expect("pool") {
            scanned += 1;
            if check(d, &calc).is_err() || !all_nodes_f(d, filter) {
                scan_bad += 1;
            }
        }
        for name in RESTRICTED_RULES {
            let rule = lookup(name).expect("registered");
            for args in rule.instances(&mut p).expect("instances") {
                let mut engine = Engine::new(calc);
                if let Ok(out) = rule.apply(&mut engine, &args) {
                    if check(&out, &calc).is_ok() {
                        scanned += 1;
                        if !all_nodes_f(&out, filter) {
                            scan_bad += 1;
                        }
                    }
                }
            }
            cut_reports.push(verify_admissible(rule, &mut p).expect("oracle run"));
        }
        for measure in [1, 2] {
            let space = EnumSpace::standard(2, measure, mode).expect("space");
            construct.push((mode, measure, verify_construct(&space, filter, 2).expect("construct")));
        }
    }
    for (path, session) in common::golden() {
        let calc = session.header.calculus();
        let Some(filter) = calc.restriction else { continue };
        for (_, d) in session.derivations() {
            if check(d, &calc).is_ok() {
                scanned += 1;
                if !all_nodes_f(d, filter) {
                    scan_bad += 1;
                    eprintln!("{}: non-F node", path.display());
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let cut_failures: usize = cut_reports.iter().map(|r| r.failures.len()).sum();
    let cut_instances: usize = cut_reports.iter().map(|r| r.instances_tested).sum();
    let construct_failures: usize = construct.iter().map(|(_, _, r)| r.failures.len()).sum();
    let construct_lines: Vec<String> = construct
        .iter()
        .map(|(mode, m, r)| format!("{} m={m}: {}/{}", mode.name(), r.failures.len(), r.instances_tested))
        .collect();
    let first_construct = construct.iter().flat_map(|(_, _, r)| &r.failures).next();
    let in_time = elapsed < Duration::from_secs(300);
    vec![
        outcome(
            "6a",
            scanned > 0 && scan_bad == 0 && in_time,
            format!("restricted derivations are F-intuitionistic at every node: {scanned} scanned, {scan_bad} not"),
        ),
        outcome(
            "6b",
            construct_failures == 0 && in_time,
            format!(
                "construct property under filter {{0}}, failures/instances {}{}",
                construct_lines.join(", "),
                first_construct.map(|f| format!("; counterexample {}", f.instance)).unwrap_or_default()
            ),
        ),
        outcome(
            "6c",
            cut_instances > 0 && cut_failures == 0 && in_time,
            format!(
                "restricted cut family: {cut_instances} instances, {cut_failures} failures, {elapsed:.2?} for criterion 6"
            ),
        ),
    ]
}

fn derive_full_positive() -> Outcome {
    let (mut outputs, mut offending) = (0, BTreeSet::new());
    for n in [2, 3] {
        let mut p = pool(n, 1, LogicMode::Lmrl, None);
        for args in DERIVE_FULL.instances(&mut p).expect("instances") {
            let mut engine = Engine::new(p.calc());
            let Ok(out) = DERIVE_FULL.apply(&mut engine, &args) else { continue };
            outputs += 1;
            for node in out.nodes() {
                let tag = node.rule.tag();
                if !(tag.is_neutral() || tag.is_positive()) {
                    offending.insert(tag.name());
                }
            }
        }
    }
    outcome(
        "7",
        outputs > 0 && offending.is_empty(),
        format!("LMRL derive-full uses only id, neg and positive rules: {outputs} outputs, other rules {offending:?}"),
    )
}

#[test]
fn acceptance() {
    let mut results = vec![corpus()];
    let (runs, elapsed) = oracle_runs();
    results.push(oracle(&runs, elapsed));
    results.push(height_bound());
    results.push(metric(&runs));
    results.push(binary_cut());
    results.extend(restriction());
    results.push(derive_full_positive());
    println!();
    for r in &results {
        println!("criterion {:<3} {} {}", r.id, if r.pass { "PASS" } else { "FAIL" }, r.detail);
    }
    let failed: Vec<_> = results.iter().filter(|r| !r.pass).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
