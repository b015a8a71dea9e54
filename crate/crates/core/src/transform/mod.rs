//! Constructive admissibility transformations.
//!
//! Every operation consumes checked derivations and returns a derivation of
//! the admissible rule's conclusion, which is checked again before it is
//! handed back. Internally items are addressed by value with a multiplicity:
//! sequents are multisets, so any occurrence of an equal i-formula is as good
//! as any other.
//!
//! Cut and role splitting recurse on the lexicographic pair (formula measure,
//! derivation height); [`Engine`] can record every step and flags any
//! recursive call whose metric fails to decrease.

mod cut;
mod one_cut;
mod split;

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::checker::{self, is_why_not, Calculus, Derivation, LogicMode, Rejection, Rule, RuleTag};
use crate::roles::{RoleError, RoleSet};
use crate::syntax::{Formula, FreshNames, IFormula, Sequent, Term};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransformError {
    #[error("input derivation {index} does not check: {rejection}")]
    InputRejected { index: usize, rejection: Rejection },
    #[error("transformed derivation does not check: {0}")]
    OutputRejected(Rejection),
    #[error("position {0} does not address an item of the conclusion")]
    BadPosition(usize),
    #[error("designated item is not interpreted at the empty role set")]
    NoEmptyInterpretation,
    #[error("complements of the cut role sets overlap")]
    ComplementsOverlap,
    #[error("designated items do not share one cut formula")]
    CutFormulaMismatch,
    #[error("complements of the cut role sets do not partition the universe")]
    PartitionInvalid,
    #[error("split parts are not disjoint")]
    NotDisjoint,
    #[error("split parts do not recombine to the designated role set")]
    RoleSetMismatch,
    #[error("weakening by a non-exponential is not admissible in LMRL")]
    LmrlMode,
    #[error("LMRL full-set derivations admit no context")]
    LmrlNonEmptyContext,
    #[error("a multiparty cut needs at least one premise")]
    NoPremises,
    #[error("exponential formula in MRL mode")]
    BangInMrl,
    #[error("induction case cannot be closed: {0}")]
    Stuck(String),
    #[error(transparent)]
    Role(#[from] RoleError),
}

pub type Result<T> = std::result::Result<T, TransformError>;

fn stuck(msg: impl Into<String>) -> TransformError {
    TransformError::Stuck(msg.into())
}

/// Lexicographic termination metric of cut and role splitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CutMetric {
    pub measure: usize,
    pub height: usize,
}

impl fmt::Display for CutMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.measure, self.height)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceStep {
    pub op: &'static str,
    pub case: String,
    pub metric: CutMetric,
    pub depth: usize,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{} {} metric={}", "  ".repeat(self.depth), self.op, self.case, self.metric)
    }
}

/// Instrumentation for the recursive transformations.
#[derive(Debug, Default, Clone)]
pub struct Trace {
    pub record_steps: bool,
    pub check_metric: bool,
    pub steps: Vec<TraceStep>,
    pub recursive_calls: usize,
    pub violations: Vec<String>,
}

/// Parameters of a rule beyond its principal item.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Param {
    None,
    Witness(Term),
    Eigen(String),
}

pub struct Engine {
    pub calc: Calculus,
    pub trace: Trace,
    fresh: FreshNames,
    depth: usize,
}

impl Engine {
    pub fn new(calc: Calculus) -> Self {
        Engine { calc, trace: Trace::default(), fresh: FreshNames::new(), depth: 0 }
    }

    /// Enables the metric-decrease assertion (and, optionally, a step log).
    pub fn instrumented(mut self, record_steps: bool) -> Self {
        self.trace.check_metric = true;
        self.trace.record_steps = record_steps;
        self
    }

    pub fn mode(&self) -> LogicMode {
        self.calc.mode
    }

    fn full(&self) -> RoleSet {
        self.calc.universe.full()
    }

    // ---- public operations -------------------------------------------------

    /// `(Γ) ⇒ Γ, extra`.
    pub fn admit_weakening(&mut self, d: Derivation, extra: IFormula) -> Result<Derivation> {
        self.check_input(0, &d)?;
        let out = self.weaken(d, &extra)?;
        self.check_output(out)
    }

    /// `() ⇒ Γ, [R̄∅]A`; in LMRL the context must be empty.
    pub fn derive_full(&mut self, a: &Formula, gamma: &Sequent) -> Result<Derivation> {
        self.validate_formula(a)?;
        let out = self.full_set(a, gamma)?;
        self.check_output(out)
    }

    /// `() ⇒ Γ, [R]A, [R̄]A`, built from the full-set derivation by splitting.
    pub fn identity_expand(&mut self, r: RoleSet, a: &Formula, gamma: &Sequent) -> Result<Derivation> {
        self.validate_formula(a)?;
        self.calc.universe.check_set(r)?;
        let d = self.full_set(a, gamma)?;
        let item = IFormula::new(self.full(), a.clone());
        let out = self.split(d, &item, r, r.complement(), 1, None)?;
        self.check_output(out)
    }

    /// `(Γ, [∅]A) ⇒ Γ`.
    pub fn one_cut(&mut self, d: Derivation, at: usize) -> Result<Derivation> {
        self.check_input(0, &d)?;
        let item = item_at(&d, at)?;
        if !item.roles.is_empty() {
            return Err(TransformError::NoEmptyInterpretation);
        }
        let out = self.elim_empty(d, &item, 1)?;
        self.check_output(out)
    }

    /// `(Γ1, [R1]A; Γ2, [R2]A) ⇒ Γ1, Γ2, [R1 ∩ R2]A` when the complements of
    /// `R1` and `R2` are disjoint.
    pub fn two_cut_spill(&mut self, d1: Derivation, at1: usize, d2: Derivation, at2: usize) -> Result<Derivation> {
        self.check_input(0, &d1)?;
        self.check_input(1, &d2)?;
        let v1 = item_at(&d1, at1)?;
        let v2 = item_at(&d2, at2)?;
        if v1.formula != v2.formula {
            return Err(TransformError::CutFormulaMismatch);
        }
        if !v1.roles.complement().is_disjoint(v2.roles.complement()) {
            return Err(TransformError::ComplementsOverlap);
        }
        let out = self.cut(d1, &v1, 1, d2, &v2, 1, None)?;
        self.check_output(out)
    }

    /// `(Γ, [R1 ⊎ R2]A) ⇒ Γ, [R1]A, [R2]A`.
    pub fn role_split(&mut self, d: Derivation, at: usize, r1: RoleSet, r2: RoleSet) -> Result<Derivation> {
        self.check_input(0, &d)?;
        let item = item_at(&d, at)?;
        self.calc.universe.check_set(r1)?;
        self.calc.universe.check_set(r2)?;
        if !r1.is_disjoint(r2) {
            return Err(TransformError::NotDisjoint);
        }
        if r1.union(r2)? != item.roles {
            return Err(TransformError::RoleSetMismatch);
        }
        let out = self.split(d, &item, r1, r2, 1, None)?;
        self.check_output(out)
    }

    /// Multiparty cut: `(Γ1,[R1]A; …; Γn,[Rn]A) ⇒ Γ1, …, Γn` when the
    /// complements of the `Ri` partition the universe. Folds two-party cuts
    /// with spill left to right and removes the final empty spill.
    pub fn mp_cut(&mut self, ds: Vec<Derivation>, ats: &[usize]) -> Result<Derivation> {
        if ds.is_empty() {
            return Err(TransformError::NoPremises);
        }
        if ds.len() != ats.len() {
            return Err(stuck("one designated position per premise is required"));
        }
        let mut items = Vec::with_capacity(ds.len());
        for (i, (d, &at)) in ds.iter().zip(ats).enumerate() {
            self.check_input(i, d)?;
            items.push(item_at(d, at)?);
        }
        if items.iter().any(|v| v.formula != items[0].formula) {
            return Err(TransformError::CutFormulaMismatch);
        }
        let complements: Vec<RoleSet> = items.iter().map(|v| v.roles.complement()).collect();
        if !crate::roles::is_partition(&complements, self.full()) {
            return Err(TransformError::PartitionInvalid);
        }
        let mut iter = ds.into_iter().zip(items);
        let (mut acc, mut acc_item) = iter.next().expect("non-empty");
        for (d, v) in iter {
            let spill = IFormula::new(acc_item.roles.intersection(v.roles)?, v.formula.clone());
            acc = self.cut(acc, &acc_item, 1, d, &v, 1, None)?;
            acc_item = spill;
        }
        debug_assert!(acc_item.roles.is_empty());
        let out = self.elim_empty(acc, &acc_item, 1)?;
        self.check_output(out)
    }

    // ---- checking ----------------------------------------------------------

    fn check_input(&self, index: usize, d: &Derivation) -> Result<()> {
        checker::check(d, &self.calc).map_err(|rejection| TransformError::InputRejected { index, rejection })
    }

    fn check_output(&self, d: Derivation) -> Result<Derivation> {
        checker::check(&d, &self.calc).map_err(TransformError::OutputRejected)?;
        Ok(d)
    }

    fn validate_formula(&self, a: &Formula) -> Result<()> {
        a.validate(self.calc.universe)?;
        if self.mode() == LogicMode::Mrl && a.contains_bang() {
            return Err(TransformError::BangInMrl);
        }
        Ok(())
    }

    // ---- instrumentation ---------------------------------------------------

    /// Records entry into a recursive step and checks the metric against the
    /// caller's.
    fn enter(&mut self, op: &'static str, case: &str, metric: impl FnOnce() -> CutMetric, parent: Option<CutMetric>) {
        self.depth += 1;
        if !(self.trace.check_metric || self.trace.record_steps) {
            return;
        }
        let metric = metric();
        if let Some(parent) = parent {
            self.trace.recursive_calls += 1;
            if self.trace.check_metric && metric >= parent {
                self.trace
                    .violations
                    .push(format!("{op} {case}: metric {metric} does not decrease below {parent}"));
            }
        }
        if self.trace.record_steps {
            self.trace.steps.push(TraceStep { op, case: case.to_string(), metric, depth: self.depth - 1 });
        }
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn metric_enabled(&self) -> bool {
        self.trace.check_metric || self.trace.record_steps
    }

    // ---- building blocks ---------------------------------------------------

    /// Builds a node from its premises. The conclusion is the principal item
    /// followed by the premises' contexts (premise minus active items).
    pub(crate) fn build(&self, tag: RuleTag, principal: IFormula, param: Param, premises: Vec<Derivation>) -> Result<Derivation> {
        let actives = self.active_items(tag, &principal, &param)?;
        if actives.len() != premises.len() {
            return Err(stuck(format!("{} expects {} premises", tag.name(), actives.len())));
        }
        let mut contexts = Vec::with_capacity(premises.len());
        for (p, act) in premises.iter().zip(&actives) {
            let ctx = p.conclusion.minus(act).ok_or_else(|| {
                stuck(format!("{}: premise {} lacks its active items {}", tag.name(), p.conclusion, Sequent::new(act.items.clone())))
            })?;
            contexts.push(ctx);
        }
        let mut conclusion = Sequent::new(vec![principal]);
        let rule = match tag {
            RuleTag::ConjPos => {
                if !contexts[0].multiset_eq(&contexts[1]) {
                    return Err(stuck("conj-pos premises disagree on their context"));
                }
                conclusion = conclusion.extended(&contexts[0]);
                Rule::ConjPos { at: 0 }
            }
            RuleTag::ImpPos => {
                let left = (1..=contexts[0].len()).collect();
                conclusion = conclusion.extended(&contexts[0]).extended(&contexts[1]);
                Rule::ImpPos { at: 0, left }
            }
            _ => {
                if let Some(ctx) = contexts.first() {
                    conclusion = conclusion.extended(ctx);
                }
                match (tag, param) {
                    (RuleTag::Contract, _) => Rule::Contract { at: 0 },
                    (RuleTag::Neg, _) => Rule::Neg { at: 0 },
                    (RuleTag::ConjNegL, _) => Rule::ConjNegL { at: 0 },
                    (RuleTag::ConjNegR, _) => Rule::ConjNegR { at: 0 },
                    (RuleTag::ImpNeg, _) => Rule::ImpNeg { at: 0 },
                    (RuleTag::BangPos, _) => Rule::BangPos { at: 0 },
                    (RuleTag::BangNegWeaken, _) => Rule::BangNegWeaken { at: 0 },
                    (RuleTag::BangNegDerelict, _) => Rule::BangNegDerelict { at: 0 },
                    (RuleTag::BangNegContract, _) => Rule::BangNegContract { at: 0 },
                    (RuleTag::ForallNeg, Param::Witness(t)) => Rule::ForallNeg { at: 0, witness: t },
                    (RuleTag::ForallPos, Param::Eigen(x)) => Rule::ForallPos { at: 0, eigen: x },
                    (tag, _) => return Err(stuck(format!("cannot build {} with these parameters", tag.name()))),
                }
            }
        };
        let d = Derivation::new(conclusion, rule, premises);
        debug_assert!(
            checker::check_local(&d, &self.calc.unrestricted()).is_ok(),
            "built node fails: {:?}",
            checker::check_local(&d, &self.calc.unrestricted())
        );
        Ok(d)
    }

    /// Items each premise of `tag` adds above the principal item.
    fn active_items(&self, tag: RuleTag, principal: &IFormula, param: &Param) -> Result<Vec<Sequent>> {
        let r = principal.roles;
        let one = |roles: RoleSet, f: &Formula| Sequent::new(vec![IFormula::new(roles, f.clone())]);
        let mismatch = || stuck(format!("{} cannot introduce {}", tag.name(), principal));
        Ok(match (tag, &principal.formula) {
            (RuleTag::Contract, _) | (RuleTag::BangNegContract, Formula::Bang(..)) => {
                vec![Sequent::new(vec![principal.clone(), principal.clone()])]
            }
            (RuleTag::Neg, Formula::Neg(f, a)) => vec![one(f.preimage(r)?, a)],
            (RuleTag::ConjNegL, Formula::Conj(_, a, _)) => vec![one(r, a)],
            (RuleTag::ConjNegR, Formula::Conj(_, _, b)) => vec![one(r, b)],
            (RuleTag::ConjPos, Formula::Conj(_, a, b)) => vec![one(r, a), one(r, b)],
            (RuleTag::ImpNeg, Formula::Impl(f, _, a, b)) => {
                vec![Sequent::new(vec![IFormula::new(f.preimage(r)?, (**a).clone()), IFormula::new(r, (**b).clone())])]
            }
            (RuleTag::ImpPos, Formula::Impl(f, _, a, b)) => vec![one(f.preimage(r)?, a), one(r, b)],
            (RuleTag::BangPos | RuleTag::BangNegDerelict, Formula::Bang(_, a)) => vec![one(r, a)],
            (RuleTag::BangNegWeaken, Formula::Bang(..)) => vec![Sequent::empty()],
            (RuleTag::ForallNeg, Formula::Forall(_, _, body)) => match param {
                Param::Witness(t) => vec![one(r, &body.instantiate(t))],
                _ => return Err(mismatch()),
            },
            (RuleTag::ForallPos, Formula::Forall(_, _, body)) => match param {
                Param::Eigen(x) => vec![one(r, &body.instantiate(&Term::Var(x.clone())))],
                _ => return Err(mismatch()),
            },
            _ => return Err(mismatch()),
        })
    }

    /// An identity axiom with the given partition items and context.
    pub(crate) fn build_id(&self, parts: Vec<IFormula>, ctx: Sequent) -> Derivation {
        let k = parts.len();
        let conclusion = Sequent::new(parts).extended(&ctx);
        Derivation::new(conclusion, Rule::Id { parts: (0..k).collect() }, Vec::new())
    }

    /// Contracts or weakens `d` until its conclusion equals `target` as a
    /// multiset. Surplus items must also occur in `target`.
    pub(crate) fn adjust(&mut self, mut d: Derivation, target: &Sequent) -> Result<Derivation> {
        let surplus = multiset_surplus(&d.conclusion, target);
        for item in surplus.items {
            if target.count(&item) == 0 {
                return Err(stuck(format!("surplus item {item} cannot be removed")));
            }
            d = self.contract(d, item)?;
        }
        let missing = multiset_surplus(target, &d.conclusion);
        for item in missing.items {
            d = self.weaken(d, &item)?;
        }
        Ok(d)
    }

    fn contract(&self, d: Derivation, item: IFormula) -> Result<Derivation> {
        match self.mode() {
            LogicMode::Mrl => self.build(RuleTag::Contract, item, Param::None, vec![d]),
            LogicMode::Lmrl if is_why_not(&item) => self.build(RuleTag::BangNegContract, item, Param::None, vec![d]),
            LogicMode::Lmrl => Err(stuck(format!("cannot contract {item} in LMRL"))),
        }
    }

    /// Admissible weakening. MRL pushes the item into every identity
    /// context; LMRL only weakens exponentials through `!`-neg-weaken.
    fn weaken(&mut self, d: Derivation, extra: &IFormula) -> Result<Derivation> {
        self.validate_formula(&extra.formula)?;
        self.calc.universe.check_set(extra.roles)?;
        match self.mode() {
            LogicMode::Lmrl if is_why_not(extra) => {
                self.build(RuleTag::BangNegWeaken, extra.clone(), Param::None, vec![d])
            }
            LogicMode::Lmrl => Err(TransformError::LmrlMode),
            LogicMode::Mrl => self.weaken_mrl(d, extra),
        }
    }

    fn weaken_mrl(&mut self, d: Derivation, extra: &IFormula) -> Result<Derivation> {
        stacker::maybe_grow(checker::RED_ZONE, checker::STACK_CHUNK, || {
            let mut d = d;
            if d.rule.tag() == RuleTag::Id {
                d.conclusion.push(extra.clone());
                return Ok(d);
            }
            if let Rule::ForallPos { eigen, .. } = &d.rule {
                if extra.formula.free_vars().contains(eigen) {
                    d = self.freshen_eigen(d)?;
                }
            }
            let (tag, principal, param) = node_parts(&d)?;
            let premises = std::mem::take(&mut d.premises);
            let mut new_premises = Vec::with_capacity(premises.len());
            for (i, p) in premises.into_iter().enumerate() {
                if i == 0 || tag == RuleTag::ConjPos {
                    new_premises.push(self.weaken_mrl(p, extra)?);
                } else {
                    new_premises.push(p);
                }
            }
            self.build(tag, principal, param, new_premises)
        })
    }

    /// `() ⇒ Γ, [R̄∅]A` by structural induction on `A`, using only positive
    /// rules (the full set belongs to every ultrafilter and is its own
    /// preimage).
    fn full_set(&mut self, a: &Formula, gamma: &Sequent) -> Result<Derivation> {
        if self.mode() == LogicMode::Lmrl && !gamma.is_empty() {
            return Err(TransformError::LmrlNonEmptyContext);
        }
        for item in gamma.iter() {
            self.calc.universe.check_set(item.roles)?;
            self.validate_formula(&item.formula)?;
        }
        self.full_set_rec(a, gamma)
    }

    fn full_set_rec(&mut self, a: &Formula, gamma: &Sequent) -> Result<Derivation> {
        stacker::maybe_grow(checker::RED_ZONE, checker::STACK_CHUNK, || {
            let full = self.full();
            let item = IFormula::new(full, a.clone());
            let empty = Sequent::empty();
            match a {
                Formula::Atom(_) => Ok(self.build_id(vec![item], gamma.clone())),
                Formula::Neg(_, b) => {
                    let p = self.full_set_rec(b, gamma)?;
                    self.build(RuleTag::Neg, item, Param::None, vec![p])
                }
                Formula::Conj(_, b, c) => {
                    let p = self.full_set_rec(b, gamma)?;
                    let q = self.full_set_rec(c, gamma)?;
                    self.build(RuleTag::ConjPos, item, Param::None, vec![p, q])
                }
                Formula::Impl(_, _, b, c) => {
                    let p = self.full_set_rec(b, gamma)?;
                    let q = self.full_set_rec(c, &empty)?;
                    self.build(RuleTag::ImpPos, item, Param::None, vec![p, q])
                }
                Formula::Bang(_, b) => {
                    let p = self.full_set_rec(b, gamma)?;
                    self.build(RuleTag::BangPos, item, Param::None, vec![p])
                }
                Formula::Forall(_, _, body) => {
                    let mut avoid = gamma.free_vars();
                    a.names_into(&mut avoid);
                    let x = self.fresh.fresh(&avoid);
                    let p = self.full_set_rec(&body.instantiate(&Term::Var(x.clone())), gamma)?;
                    self.build(RuleTag::ForallPos, item, Param::Eigen(x), vec![p])
                }
            }
        })
    }

    // ---- variables ---------------------------------------------------------

    /// Renames the eigenvariable of a `ForallPos` root to a fresh name.
    fn freshen_eigen(&mut self, d: Derivation) -> Result<Derivation> {
        let Rule::ForallPos { at, eigen } = d.rule.clone() else {
            return Ok(d);
        };
        let mut avoid = derivation_names(&d);
        avoid.insert(eigen.clone());
        let fresh = self.fresh.fresh(&avoid);
        let (conclusion, _, premises) = d.into_parts();
        let premise = premises.into_iter().next().ok_or_else(|| stuck("forall-pos without premise"))?;
        let premise = self.subst(premise, &eigen, &Term::Var(fresh.clone()))?;
        Ok(Derivation::new(conclusion, Rule::ForallPos { at, eigen: fresh }, vec![premise]))
    }

    /// Substitutes `t` for the free variable `x` throughout a derivation,
    /// renaming eigenvariables that would capture variables of `t`.
    fn subst(&mut self, d: Derivation, x: &str, t: &Term) -> Result<Derivation> {
        stacker::maybe_grow(checker::RED_ZONE, checker::STACK_CHUNK, || {
            if let Rule::ForallPos { eigen, .. } = &d.rule {
                if eigen == x {
                    // x is not free in this conclusion, and above it x is the
                    // eigenvariable itself.
                    return Ok(d);
                }
                let mut tvars = BTreeSet::new();
                collect_term_vars(t, &mut tvars);
                if tvars.contains(eigen) {
                    let d = self.freshen_eigen(d)?;
                    return self.subst(d, x, t);
                }
            }
            let (conclusion, rule, premises) = d.into_parts();
            let rule = match rule {
                Rule::ForallNeg { at, witness } => Rule::ForallNeg { at, witness: subst_term(&witness, x, t) },
                other => other,
            };
            let premises = premises
                .into_iter()
                .map(|p| self.subst(p, x, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(Derivation::new(conclusion.substitute(x, t), rule, premises))
        })
    }
}

fn collect_term_vars(t: &Term, out: &mut BTreeSet<String>) {
    match t {
        Term::Var(x) => {
            out.insert(x.clone());
        }
        Term::Bound(_) => {}
        Term::App(_, args) => args.iter().for_each(|a| collect_term_vars(a, out)),
    }
}

fn subst_term(s: &Term, x: &str, t: &Term) -> Term {
    match s {
        Term::Var(y) if y == x => t.clone(),
        Term::Var(_) | Term::Bound(_) => s.clone(),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| subst_term(a, x, t)).collect()),
    }
}

/// All names occurring anywhere in the derivation's conclusions and rule
/// parameters.
fn derivation_names(d: &Derivation) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for node in d.nodes() {
        for item in node.conclusion.iter() {
            item.formula.names_into(&mut out);
        }
        match &node.rule {
            Rule::ForallPos { eigen, .. } => {
                out.insert(eigen.clone());
            }
            Rule::ForallNeg { witness, .. } => collect_term_vars(witness, &mut out),
            _ => {}
        }
    }
    out
}

fn item_at(d: &Derivation, at: usize) -> Result<IFormula> {
    d.conclusion.get(at).cloned().ok_or(TransformError::BadPosition(at))
}

/// Tag, principal item and parameter of a non-identity node.
pub(crate) fn node_parts(d: &Derivation) -> Result<(RuleTag, IFormula, Param)> {
    let tag = d.rule.tag();
    let at = d.rule.at().ok_or_else(|| stuck("identity axioms have no single principal item"))?;
    let principal = d.conclusion.get(at).cloned().ok_or_else(|| stuck("principal position out of range"))?;
    let param = match &d.rule {
        Rule::ForallNeg { witness, .. } => Param::Witness(witness.clone()),
        Rule::ForallPos { eigen, .. } => Param::Eigen(eigen.clone()),
        _ => Param::None,
    };
    Ok((tag, principal, param))
}

/// Items of `a` in excess of `b`, with multiplicity.
fn multiset_surplus(a: &Sequent, b: &Sequent) -> Sequent {
    let mut rest = b.clone();
    let mut out = Sequent::empty();
    for item in a.iter() {
        if !rest.remove_one(item) {
            out.push(item.clone());
        }
    }
    out
}

/// Splits an identity node's conclusion into its partition items and its
/// context.
fn id_parts(d: &Derivation) -> (Vec<IFormula>, Sequent) {
    let Rule::Id { parts } = &d.rule else { unreachable!("id_parts on a non-identity node") };
    let mut is_part = vec![false; d.conclusion.len()];
    for &p in parts {
        is_part[p] = true;
    }
    let mut ps = Vec::new();
    let mut ctx = Sequent::empty();
    for (i, item) in d.conclusion.iter().enumerate() {
        if is_part[i] {
            ps.push(item.clone());
        } else {
            ctx.push(item.clone());
        }
    }
    (ps, ctx)
}

/// Number of copies of `v` in each premise's context, i.e. not counting the
/// items the rule adds.
fn context_counts(engine: &Engine, d: &Derivation, v: &IFormula) -> Result<Vec<usize>> {
    let (tag, principal, param) = node_parts(d)?;
    let actives = engine.active_items(tag, &principal, &param)?;
    d.premises
        .iter()
        .zip(&actives)
        .map(|(p, act)| {
            p.conclusion
                .minus(act)
                .map(|ctx| ctx.count(v))
                .ok_or_else(|| stuck("premise lacks its active items"))
        })
        .collect()
}

/// Splits `k` copies among premises for a context-splitting rule, taking as
/// many as possible from the earlier premises.
fn distribute(k: usize, available: &[usize], shared: bool) -> Result<Vec<usize>> {
    if shared {
        if available.iter().any(|&a| a < k) {
            return Err(stuck("shared context lacks the designated copies"));
        }
        return Ok(vec![k; available.len()]);
    }
    let mut left = k;
    let mut out = Vec::with_capacity(available.len());
    for &a in available {
        let take = a.min(left);
        out.push(take);
        left -= take;
    }
    if left > 0 {
        return Err(stuck("premises lack the designated copies"));
    }
    Ok(out)
}

/// `ConjPos` shares its context between premises; every other multi-premise
/// rule splits it.
fn shares_context(tag: RuleTag) -> bool {
    tag == RuleTag::ConjPos
}
