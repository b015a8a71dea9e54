//! Bounded backward proof search for the propositional fragment, small-space
//! enumeration, and the admissibility oracle built from the two.
//!
//! Search is cut-free and deterministic: sequents are explored in canonical
//! (sorted) order, rules in a fixed order, and every query is memoised on
//! (sequent, remaining depth, remaining contraction budget).

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::admissible::{AdmissibleRule, RuleArgs};
use crate::checker::{self, is_q_context, Calculus, Derivation, LogicMode, Rule};
use crate::roles::{Endomorphism, PrincipalFilter, RoleSet, Universe};
use crate::syntax::{Formula, IFormula, Sequent};
use crate::transform::Engine;

/// Backward `ImpPos` tries every split of the context, so goals are capped.
pub const MAX_CONTEXT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("quantified formulas are outside the search fragment")]
    QuantifierInGoal,
    #[error("goal context has {0} items; at most {MAX_CONTEXT} are searched")]
    ContextTooLarge(usize),
    #[error("instance space exceeds the cap of {cap} instances")]
    SpaceTooLarge { cap: usize },
    #[error("goal is not well-formed: {0}")]
    IllFormed(String),
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    /// Maximal height of a returned derivation.
    pub max_depth: usize,
    pub calc: Calculus,
    /// Contractions allowed on any one branch.
    pub contraction_budget: usize,
}

impl SearchConfig {
    pub const DEFAULT_BUDGET: usize = 2;

    pub fn new(calc: Calculus, max_depth: usize) -> Self {
        SearchConfig { max_depth, calc, contraction_budget: Self::DEFAULT_BUDGET }
    }

    /// A depth at which `NotFound` means "no cut-free derivation using at
    /// most `contraction_budget` contractions per branch".
    pub fn complete_for(calc: Calculus, goal: &Sequent) -> Self {
        let mut cfg = SearchConfig::new(calc, 1);
        cfg.max_depth = completeness_depth(goal, cfg.contraction_budget);
        cfg
    }
}

/// Every rule but contraction lowers the total measure of a sequent by at
/// least one, and a contraction adds at most the largest item measure, so
/// a branch has at most `(b + 1)(m + 1)` nodes for total measure `m`.
pub fn completeness_depth(goal: &Sequent, budget: usize) -> usize {
    (budget + 1) * (goal.total_measure() + 1)
}

type Key = (Vec<IFormula>, usize, usize);

/// A memoising prover. Results depend only on the configuration and the
/// query, never on earlier queries.
pub struct Prover {
    cfg: SearchConfig,
    memo: HashMap<Key, Option<Derivation>>,
}

impl Prover {
    pub fn new(cfg: SearchConfig) -> Self {
        Prover { cfg, memo: HashMap::new() }
    }

    pub fn config(&self) -> &SearchConfig {
        &self.cfg
    }

    pub fn prove(&mut self, goal: &Sequent) -> Result<Option<Derivation>, SearchError> {
        self.prove_at(goal, self.cfg.max_depth)
    }

    /// Searches with an explicit depth bound, sharing the memo table.
    pub fn prove_at(&mut self, goal: &Sequent, depth: usize) -> Result<Option<Derivation>, SearchError> {
        for item in goal.iter() {
            if item.formula.contains_forall() {
                return Err(SearchError::QuantifierInGoal);
            }
            self.cfg
                .calc
                .universe
                .check_set(item.roles)
                .and_then(|_| item.formula.validate(self.cfg.calc.universe))
                .map_err(|e| SearchError::IllFormed(e.to_string()))?;
        }
        if goal.len() > MAX_CONTEXT + 1 {
            return Err(SearchError::ContextTooLarge(goal.len() - 1));
        }
        let canonical = goal.canonical();
        let found = self.search(canonical, depth, self.cfg.contraction_budget);
        Ok(found.map(|d| {
            let d = reorder_root(d, goal);
            assert_eq!(checker::check(&d, &self.cfg.calc), Ok(()), "search returned an invalid derivation");
            d
        }))
    }

    fn search(&mut self, seq: Sequent, depth: usize, budget: usize) -> Option<Derivation> {
        if depth == 0 || !self.cfg.calc.is_intuitionistic(&seq) {
            return None;
        }
        let key = (seq.items.clone(), depth, budget);
        if let Some(hit) = self.memo.get(&key) {
            return hit.clone();
        }
        let found = self.expand(&seq, depth, budget);
        self.memo.insert(key, found.clone());
        found
    }

    fn premise(&mut self, items: Sequent, depth: usize, budget: usize) -> Option<Derivation> {
        self.search(items.canonical(), depth - 1, budget)
    }

    fn expand(&mut self, seq: &Sequent, depth: usize, budget: usize) -> Option<Derivation> {
        if let Some(rule) = self.identity(seq) {
            return Some(Derivation::new(seq.clone(), rule, Vec::new()));
        }
        if depth == 1 {
            return None;
        }
        let node = |rule: Rule, premises: Vec<Derivation>| Some(Derivation::new(seq.clone(), rule, premises));
        let lmrl = self.cfg.calc.mode == LogicMode::Lmrl;
        for at in distinct_positions(seq) {
            let item = seq.items[at].clone();
            let rest = seq.without(at);
            let r = item.roles;
            match &item.formula {
                Formula::Atom(_) | Formula::Forall(..) => {}
                Formula::Neg(f, a) => {
                    let pre = f.preimage(r).ok()?;
                    if let Some(p) = self.premise(rest.with(IFormula::new(pre, (**a).clone())), depth, budget) {
                        return node(Rule::Neg { at }, vec![p]);
                    }
                }
                Formula::Conj(u, a, b) => {
                    let pa = rest.clone().with(IFormula::new(r, (**a).clone()));
                    let pb = rest.clone().with(IFormula::new(r, (**b).clone()));
                    if u.contains(r) {
                        if let Some(p) = self.premise(pa, depth, budget) {
                            if let Some(q) = self.premise(pb, depth, budget) {
                                return node(Rule::ConjPos { at }, vec![p, q]);
                            }
                        }
                    } else {
                        if let Some(p) = self.premise(pa, depth, budget) {
                            return node(Rule::ConjNegL { at }, vec![p]);
                        }
                        if let Some(p) = self.premise(pb, depth, budget) {
                            return node(Rule::ConjNegR { at }, vec![p]);
                        }
                    }
                }
                Formula::Impl(f, u, a, b) => {
                    let ia = IFormula::new(f.preimage(r).ok()?, (**a).clone());
                    let ib = IFormula::new(r, (**b).clone());
                    if u.contains(r) {
                        let m = rest.len();
                        for mask in 0u32..(1 << m) {
                            let (left, right) = split_by_mask(&rest, mask);
                            let Some(p) = self.premise(left.with(ia.clone()), depth, budget) else { continue };
                            let Some(q) = self.premise(right.with(ib.clone()), depth, budget) else { continue };
                            let left_pos = (0..m).filter(|j| mask & (1 << j) != 0).map(|j| if j < at { j } else { j + 1 }).collect();
                            return node(Rule::ImpPos { at, left: left_pos }, vec![p, q]);
                        }
                    } else if let Some(p) = self.premise(rest.with(ia).with(ib), depth, budget) {
                        return node(Rule::ImpNeg { at }, vec![p]);
                    }
                }
                Formula::Bang(u, a) => {
                    let ia = IFormula::new(r, (**a).clone());
                    if u.contains(r) {
                        if is_q_context(&rest) {
                            if let Some(p) = self.premise(rest.with(ia), depth, budget) {
                                return node(Rule::BangPos { at }, vec![p]);
                            }
                        }
                    } else {
                        if let Some(p) = self.premise(rest.clone().with(ia), depth, budget) {
                            return node(Rule::BangNegDerelict { at }, vec![p]);
                        }
                        if let Some(p) = self.premise(rest, depth, budget) {
                            return node(Rule::BangNegWeaken { at }, vec![p]);
                        }
                        if budget > 0 {
                            if let Some(p) = self.premise(seq.clone().with(item.clone()), depth, budget - 1) {
                                return node(Rule::BangNegContract { at }, vec![p]);
                            }
                        }
                    }
                }
            }
        }
        if !lmrl && budget > 0 {
            for at in distinct_positions(seq) {
                let item = seq.items[at].clone();
                if let Some(p) = self.premise(seq.clone().with(item), depth, budget - 1) {
                    return node(Rule::Contract { at }, vec![p]);
                }
            }
        }
        None
    }

    /// An identity instance on `seq`, if any: in MRL some items over one
    /// atom partition the universe; in LMRL all of them must.
    fn identity(&self, seq: &Sequent) -> Option<Rule> {
        let full = self.cfg.calc.universe.full();
        if self.cfg.calc.mode == LogicMode::Lmrl {
            let first = seq.items.first()?;
            let roles: Vec<RoleSet> = seq.iter().map(|i| i.roles).collect();
            let atomic = seq.iter().all(|i| matches!(i.formula, Formula::Atom(_)) && i.formula == first.formula);
            return (atomic && crate::roles::is_partition(&roles, full)).then(|| Rule::Id { parts: (0..seq.len()).collect() });
        }
        let mut seen: Vec<&Formula> = Vec::new();
        for item in seq.iter() {
            if !matches!(item.formula, Formula::Atom(_)) || seen.contains(&&item.formula) {
                continue;
            }
            seen.push(&item.formula);
            let positions: Vec<usize> = (0..seq.len()).filter(|&j| seq.items[j].formula == item.formula).collect();
            for mask in 1u32..(1 << positions.len()) {
                let parts: Vec<usize> = positions.iter().enumerate().filter(|(k, _)| mask & (1 << k) != 0).map(|(_, &p)| p).collect();
                let roles: Vec<RoleSet> = parts.iter().map(|&p| seq.items[p].roles).collect();
                if crate::roles::is_partition(&roles, full) {
                    return Some(Rule::Id { parts });
                }
            }
        }
        None
    }
}

/// One-shot search with a fresh memo table.
pub fn prove(goal: &Sequent, cfg: &SearchConfig) -> Result<Option<Derivation>, SearchError> {
    Prover::new(*cfg).prove(goal)
}

/// First position of every distinct item.
fn distinct_positions(seq: &Sequent) -> Vec<usize> {
    (0..seq.len()).filter(|&i| !seq.items[..i].contains(&seq.items[i])).collect()
}

fn split_by_mask(seq: &Sequent, mask: u32) -> (Sequent, Sequent) {
    let mut left = Sequent::empty();
    let mut right = Sequent::empty();
    for (j, item) in seq.iter().enumerate() {
        if mask & (1 << j) != 0 {
            left.push(item.clone());
        } else {
            right.push(item.clone());
        }
    }
    (left, right)
}

/// Rewrites the root of a derivation of `goal`'s canonical form so that its
/// conclusion lists the items in `goal`'s order.
fn reorder_root(d: Derivation, goal: &Sequent) -> Derivation {
    let (conclusion, rule, premises) = d.into_parts();
    let mut used = vec![false; goal.len()];
    let map: Vec<usize> = conclusion
        .iter()
        .map(|item| {
            let j = (0..goal.len()).find(|&j| !used[j] && goal.items[j] == *item).expect("same multiset");
            used[j] = true;
            j
        })
        .collect();
    let rule = match rule {
        Rule::Id { parts } => Rule::Id { parts: parts.iter().map(|&p| map[p]).collect() },
        Rule::ImpPos { at, left } => Rule::ImpPos { at: map[at], left: left.iter().map(|&p| map[p]).collect() },
        Rule::Contract { at } => Rule::Contract { at: map[at] },
        Rule::Neg { at } => Rule::Neg { at: map[at] },
        Rule::ConjNegL { at } => Rule::ConjNegL { at: map[at] },
        Rule::ConjNegR { at } => Rule::ConjNegR { at: map[at] },
        Rule::ConjPos { at } => Rule::ConjPos { at: map[at] },
        Rule::ImpNeg { at } => Rule::ImpNeg { at: map[at] },
        Rule::BangPos { at } => Rule::BangPos { at: map[at] },
        Rule::BangNegWeaken { at } => Rule::BangNegWeaken { at: map[at] },
        Rule::BangNegDerelict { at } => Rule::BangNegDerelict { at: map[at] },
        Rule::BangNegContract { at } => Rule::BangNegContract { at: map[at] },
        Rule::ForallNeg { at, witness } => Rule::ForallNeg { at: map[at], witness },
        Rule::ForallPos { at, eigen } => Rule::ForallPos { at: map[at], eigen },
    };
    Derivation::new(goal.clone(), rule, premises)
}

// ---- enumeration -----------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Connective {
    Neg,
    Conj,
    Impl,
    Bang,
}

/// A finite space of formulas and sequents.
#[derive(Debug, Clone)]
pub struct EnumSpace {
    pub universe: Universe,
    pub mode: LogicMode,
    /// Propositional atoms `a`, `b`, ... in this number.
    pub atoms: usize,
    pub max_measure: usize,
    pub connectives: Vec<Connective>,
    pub endomorphisms: Vec<Endomorphism>,
    pub witnesses: Vec<usize>,
    /// Largest sequent size enumerated.
    pub max_items: usize,
}

impl EnumSpace {
    /// The standard oracle space for a universe: over two roles every
    /// connective and every endomorphism; over three roles conjunction and
    /// negation with the identity, a rotation and a constant map.
    pub fn standard(n: usize, max_measure: usize, mode: LogicMode) -> Result<Self, SearchError> {
        let universe = Universe::new(n).map_err(|e| SearchError::IllFormed(e.to_string()))?;
        let (connectives, endomorphisms) = if n <= 2 {
            let mut cs = vec![Connective::Neg, Connective::Conj, Connective::Impl];
            if mode == LogicMode::Lmrl {
                cs.push(Connective::Bang);
            }
            (cs, universe.all_endomorphisms())
        } else {
            let c0 = universe.constant(0).map_err(|e| SearchError::IllFormed(e.to_string()))?;
            (vec![Connective::Neg, Connective::Conj], vec![universe.identity(), universe.rotation(), c0])
        };
        Ok(EnumSpace {
            universe,
            mode,
            atoms: 1,
            max_measure,
            connectives,
            endomorphisms,
            witnesses: (0..n).collect(),
            max_items: 2,
        })
    }

    /// Atoms only: the space for multiparty cuts with several parties.
    pub fn atoms_only(n: usize, mode: LogicMode) -> Result<Self, SearchError> {
        let mut s = EnumSpace::standard(n, 0, mode)?;
        s.connectives.clear();
        Ok(s)
    }

    pub fn atom(i: usize) -> Formula {
        let name = if i < 26 { ((b'a' + i as u8) as char).to_string() } else { format!("a{i}") };
        Formula::prop(name)
    }

    /// All formulas up to the measure bound, by increasing measure.
    pub fn formulas(&self) -> Vec<Formula> {
        let uses = |c| self.connectives.contains(&c);
        let ufs: Vec<_> = self.witnesses.iter().filter_map(|&w| self.universe.ultrafilter(w).ok()).collect();
        let mut by_measure: Vec<Vec<Formula>> = vec![(0..self.atoms).map(EnumSpace::atom).collect()];
        for m in 1..=self.max_measure {
            let mut level = Vec::new();
            if uses(Connective::Neg) {
                for f in &self.endomorphisms {
                    for a in &by_measure[m - 1] {
                        level.push(Formula::neg(f.clone(), a.clone()));
                    }
                }
            }
            if uses(Connective::Conj) {
                for &u in &ufs {
                    for i in 0..m {
                        for a in &by_measure[i] {
                            for b in &by_measure[m - 1 - i] {
                                level.push(Formula::conj(u, a.clone(), b.clone()));
                            }
                        }
                    }
                }
            }
            if uses(Connective::Impl) {
                for f in &self.endomorphisms {
                    for &u in &ufs {
                        for i in 0..m {
                            for a in &by_measure[i] {
                                for b in &by_measure[m - 1 - i] {
                                    level.push(Formula::imp(f.clone(), u, a.clone(), b.clone()));
                                }
                            }
                        }
                    }
                }
            }
            if uses(Connective::Bang) && self.mode == LogicMode::Lmrl {
                for &u in &ufs {
                    for a in &by_measure[m - 1] {
                        level.push(Formula::bang(u, a.clone()));
                    }
                }
            }
            by_measure.push(level);
        }
        by_measure.into_iter().flatten().collect()
    }

    pub fn iformulas(&self) -> Vec<IFormula> {
        let subsets: Vec<RoleSet> = self.universe.subsets().collect();
        self.formulas()
            .into_iter()
            .flat_map(|f| subsets.iter().map(move |&r| IFormula::new(r, f.clone())))
            .collect()
    }

    pub fn summary(&self) -> String {
        format!(
            "n={} mode={} atoms={} measure<={} connectives={:?} endomorphisms={} witnesses={:?} items<={}",
            self.universe.size(),
            self.mode,
            self.atoms,
            self.max_measure,
            self.connectives,
            self.endomorphisms.len(),
            self.witnesses,
            self.max_items
        )
    }
}

/// Every sequent of 1 to `max_items` items over the space's i-formulas,
/// one representative per multiset, in a fixed order.
pub fn enumerate_goals(space: &EnumSpace) -> impl Iterator<Item = Sequent> {
    let items = space.iformulas();
    (1..=space.max_items).flat_map(move |k| multisets(items.clone(), k))
}

/// Multisets of size `k` as non-decreasing index sequences.
fn multisets(items: Vec<IFormula>, k: usize) -> impl Iterator<Item = Sequent> {
    let n = items.len();
    let mut idx = vec![0usize; k];
    let mut done = n == 0 && k > 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let out: Sequent = idx.iter().map(|&i| items[i].clone()).collect();
        // Advance to the next non-decreasing sequence.
        let mut pos = k;
        loop {
            if pos == 0 {
                done = true;
                break;
            }
            pos -= 1;
            if idx[pos] + 1 < n {
                let v = idx[pos] + 1;
                for slot in &mut idx[pos..] {
                    *slot = v;
                }
                break;
            }
        }
        Some(out)
    })
}

// ---- the oracle ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    /// The transformer returned an error.
    Transform,
    /// The output does not check.
    Check,
    /// The output's conclusion differs from the lemma's.
    Conclusion,
    /// Search cannot re-derive the output's conclusion.
    Reprove,
    /// A recursive call did not decrease the termination metric.
    Metric,
    /// An LMRL 1-cut output is taller than its input.
    HeightBound,
    /// A construct instance has neither conjunct derivable.
    Construct,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub instance: String,
    pub stage: Stage,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub rule: String,
    pub space: String,
    pub restriction: Option<String>,
    pub instances_tested: usize,
    /// Instances whose promised conclusion lies outside the restriction.
    pub skipped: usize,
    /// Instances per case label (e.g. role sets of the cut items).
    pub cases: BTreeMap<String, usize>,
    pub recursive_calls: usize,
    pub failures: Vec<Failure>,
}

impl VerificationReport {
    fn new(rule: &str, space: &EnumSpace, calc: &Calculus) -> Self {
        VerificationReport {
            rule: rule.to_string(),
            space: space.summary(),
            restriction: calc.restriction.map(|f| f.to_string()),
            instances_tested: 0,
            skipped: 0,
            cases: BTreeMap::new(),
            recursive_calls: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn failures_at(&self, stage: Stage) -> usize {
        self.failures.iter().filter(|f| f.stage == stage).count()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}{}]: {} instances, {} skipped, {} failures",
            self.rule,
            self.space,
            self.restriction.as_ref().map(|r| format!(" restriction={r}")).unwrap_or_default(),
            self.instances_tested,
            self.skipped,
            self.failures.len()
        )?;
        for failure in self.failures.iter().take(10) {
            write!(f, "\n  {:?} {}: {}", failure.stage, failure.instance, failure.detail)?;
        }
        Ok(())
    }
}

/// Settings of an oracle run.
#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    pub calc: Calculus,
    pub contraction_budget: usize,
    /// Upper bound on instances; exceeding it is `SpaceTooLarge`.
    pub max_instances: usize,
}

impl OracleConfig {
    pub fn new(calc: Calculus) -> Self {
        OracleConfig { calc, contraction_budget: SearchConfig::DEFAULT_BUDGET, max_instances: 2_000_000 }
    }

    fn search_config(&self, goal: &Sequent) -> SearchConfig {
        SearchConfig {
            max_depth: completeness_depth(goal, self.contraction_budget),
            calc: self.calc,
            contraction_budget: self.contraction_budget,
        }
    }
}

/// Derivable sequents of a space, found once and shared by every rule.
pub struct PremisePool {
    pub space: EnumSpace,
    pub config: OracleConfig,
    prover: Prover,
    derivable: Option<Vec<Derivation>>,
}

impl PremisePool {
    pub fn new(space: EnumSpace, config: OracleConfig) -> Self {
        let prover = Prover::new(SearchConfig {
            max_depth: 1,
            calc: config.calc,
            contraction_budget: config.contraction_budget,
        });
        PremisePool { space, config, prover, derivable: None }
    }

    pub fn calc(&self) -> Calculus {
        self.config.calc
    }

    /// Searches `goal` at its completeness depth.
    pub fn prove(&mut self, goal: &Sequent) -> Result<Option<Derivation>, SearchError> {
        let depth = self.config.search_config(goal).max_depth;
        self.prover.prove_at(goal, depth)
    }

    /// Derivations of every derivable goal of the space.
    pub fn derivable(&mut self) -> Result<&[Derivation], SearchError> {
        if self.derivable.is_none() {
            let mut out = Vec::new();
            for goal in enumerate_goals(&self.space) {
                if let Some(d) = self.prove(&goal)? {
                    out.push(d);
                }
            }
            self.derivable = Some(out);
        }
        Ok(self.derivable.as_deref().unwrap_or(&[]))
    }
}

/// Runs a transformer over every instance its premise shape admits in the
/// pool's space and checks each output four ways: it exists, it checks, its
/// conclusion is the lemma's, and search re-derives that conclusion. Cut and
/// role splitting also run with the metric assertion on, and LMRL 1-cut
/// outputs are held to the input's height.
pub fn verify_admissible(rule: &dyn AdmissibleRule, pool: &mut PremisePool) -> Result<VerificationReport, SearchError> {
    let calc = pool.calc();
    let mut report = VerificationReport::new(rule.name(), &pool.space, &calc);
    let instances = rule.instances(pool)?;
    if instances.len() > pool.config.max_instances {
        return Err(SearchError::SpaceTooLarge { cap: pool.config.max_instances });
    }
    for args in &instances {
        let expected = match rule.conclusion(args) {
            Ok(s) => s,
            Err(e) => {
                report.instances_tested += 1;
                report.failures.push(failure(args, Stage::Transform, e.to_string()));
                continue;
            }
        };
        if !calc.is_intuitionistic(&expected) {
            report.skipped += 1;
            continue;
        }
        report.instances_tested += 1;
        *report.cases.entry(args.label.clone()).or_default() += 1;
        let mut engine = Engine::new(calc).instrumented(false);
        let out = match rule.apply(&mut engine, args) {
            Ok(d) => d,
            Err(crate::transform::TransformError::OutputRejected(r)) => {
                report.failures.push(failure(args, Stage::Check, r.to_string()));
                continue;
            }
            Err(e) => {
                report.failures.push(failure(args, Stage::Transform, e.to_string()));
                continue;
            }
        };
        report.recursive_calls += engine.trace.recursive_calls;
        if let Err(r) = checker::check(&out, &calc) {
            report.failures.push(failure(args, Stage::Check, r.to_string()));
        }
        if !out.conclusion.multiset_eq(&expected) {
            report
                .failures
                .push(failure(args, Stage::Conclusion, format!("got {} expected {}", out.conclusion, expected)));
        }
        for v in &engine.trace.violations {
            report.failures.push(failure(args, Stage::Metric, v.clone()));
        }
        if rule.name() == "one_cut" && calc.mode == LogicMode::Lmrl {
            let input = args.derivations[0].height();
            if out.height() > input {
                report
                    .failures
                    .push(failure(args, Stage::HeightBound, format!("height {} > {}", out.height(), input)));
            }
        }
        match pool.prove(&out.conclusion) {
            Ok(Some(_)) => {}
            Ok(None) => report.failures.push(failure(args, Stage::Reprove, format!("{} not found", out.conclusion))),
            Err(e) => report.failures.push(failure(args, Stage::Reprove, e.to_string())),
        }
    }
    Ok(report)
}

fn failure(args: &RuleArgs, stage: Stage, detail: String) -> Failure {
    Failure { instance: args.describe(), stage, detail }
}

/// The conjunction half of the construct property: whenever
/// `⊢ [R](A1 ∧U A2)` is derivable with `R ∉ U`, so is `⊢ [R]A1` or
/// `⊢ [R]A2`. Searched under the restriction to `filter`.
pub fn verify_construct(
    space: &EnumSpace,
    filter: PrincipalFilter,
    contraction_budget: usize,
) -> Result<VerificationReport, SearchError> {
    let calc = Calculus::new(space.universe, space.mode).restricted(filter);
    let mut config = OracleConfig::new(calc);
    config.contraction_budget = contraction_budget;
    let mut pool = PremisePool::new(space.clone(), config);
    let mut report = VerificationReport::new("construct", space, &calc);
    for f in space.formulas() {
        let Formula::Conj(u, a1, a2) = &f else { continue };
        for r in space.universe.subsets().filter(|&r| !u.contains(r)) {
            let goal = Sequent::new(vec![IFormula::new(r, f.clone())]);
            if pool.prove(&goal)?.is_none() {
                continue;
            }
            report.instances_tested += 1;
            *report.cases.entry(format!("R={r}")).or_default() += 1;
            let left = pool.prove(&Sequent::new(vec![IFormula::new(r, (**a1).clone())]))?;
            let right = pool.prove(&Sequent::new(vec![IFormula::new(r, (**a2).clone())]))?;
            if left.is_none() && right.is_none() {
                report.failures.push(Failure {
                    instance: goal.to_string(),
                    stage: Stage::Construct,
                    detail: "neither conjunct is derivable".to_string(),
                });
            }
        }
    }
    Ok(report)
}

/// Rules whose preservation of the filter restriction is claimed: the cut
/// family. The other transformers may route through sequents with several
/// F-items and are only verified unrestricted.
pub const RESTRICTED_RULES: [&str; 3] = ["one_cut", "two_cut_spill", "mp_cut"];

/// Settings of a full oracle run.
#[derive(Debug, Clone)]
pub struct Selftest {
    pub universe: usize,
    pub measure: usize,
    pub modes: Vec<LogicMode>,
    /// Adds the restricted re-run and the construct check.
    pub filter_core: Option<Vec<usize>>,
    /// Measure bound of the construct check, which is vacuous below 2.
    pub construct_measure: usize,
    pub contraction_budget: usize,
}

impl Selftest {
    pub fn new(universe: usize, measure: usize) -> Self {
        Selftest {
            universe,
            measure,
            modes: vec![LogicMode::Mrl, LogicMode::Lmrl],
            filter_core: None,
            construct_measure: measure.max(2),
            contraction_budget: SearchConfig::DEFAULT_BUDGET,
        }
    }

    /// Runs every registered rule in every mode, then, with a filter, the
    /// restricted cut family and the construct property.
    pub fn run(&self) -> Result<Vec<VerificationReport>, SearchError> {
        let mut reports = Vec::new();
        for &mode in &self.modes {
            let space = EnumSpace::standard(self.universe, self.measure, mode)?;
            let mut config = OracleConfig::new(Calculus::new(space.universe, mode));
            config.contraction_budget = self.contraction_budget;
            let mut pool = PremisePool::new(space.clone(), config);
            for rule in crate::admissible::registry() {
                reports.push(verify_admissible(*rule, &mut pool)?);
            }
            let Some(core) = &self.filter_core else { continue };
            let filter = PrincipalFilter::new(
                space.universe.set(core.iter().copied()).map_err(|e| SearchError::IllFormed(e.to_string()))?,
            );
            config.calc = config.calc.restricted(filter);
            let mut pool = PremisePool::new(space, config);
            for name in RESTRICTED_RULES {
                let rule = crate::admissible::lookup(name).expect("registered");
                reports.push(verify_admissible(rule, &mut pool)?);
            }
            let construct_space = EnumSpace::standard(self.universe, self.construct_measure, mode)?;
            reports.push(verify_construct(&construct_space, filter, self.contraction_budget)?);
        }
        Ok(reports)
    }
}
