//! Derivation trees and the rule checker for MRL and LMRL.

use std::fmt;

use serde::Serialize;

use crate::roles::{PrincipalFilter, RoleSet, Universe};
use crate::syntax::{Formula, IFormula, Sequent, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum LogicMode {
    #[serde(rename = "mrl")]
    Mrl,
    #[serde(rename = "lmrl")]
    Lmrl,
}

impl LogicMode {
    pub fn name(self) -> &'static str {
        match self {
            LogicMode::Mrl => "mrl",
            LogicMode::Lmrl => "lmrl",
        }
    }
}

impl fmt::Display for LogicMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The calculus a derivation is checked against: universe, logic and an
/// optional filter every node conclusion must be intuitionistic for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Calculus {
    pub universe: Universe,
    pub mode: LogicMode,
    pub restriction: Option<PrincipalFilter>,
}

impl Calculus {
    pub fn new(universe: Universe, mode: LogicMode) -> Self {
        Calculus { universe, mode, restriction: None }
    }

    pub fn restricted(self, filter: PrincipalFilter) -> Self {
        Calculus { restriction: Some(filter), ..self }
    }

    pub fn unrestricted(self) -> Self {
        Calculus { restriction: None, ..self }
    }

    pub fn is_intuitionistic(&self, seq: &Sequent) -> bool {
        match self.restriction {
            None => true,
            Some(filter) => is_f_intuitionistic(filter, seq),
        }
    }
}

/// At most one i-formula of the sequent has its role set in `filter`.
pub fn is_f_intuitionistic(filter: PrincipalFilter, seq: &Sequent) -> bool {
    seq.iter().filter(|i| filter.contains(i.roles)).count() <= 1
}

/// A negatively interpreted exponential `[R](!B)U` with `R ∉ U`.
pub fn is_why_not(item: &IFormula) -> bool {
    matches!(&item.formula, Formula::Bang(u, _) if !u.contains(item.roles))
}

/// The promotion context `?(Γ)`: every item is a negatively interpreted
/// exponential.
pub fn is_q_context(seq: &Sequent) -> bool {
    seq.iter().all(is_why_not)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RuleTag {
    Id,
    Contract,
    Neg,
    ConjNegL,
    ConjNegR,
    ConjPos,
    ImpNeg,
    ImpPos,
    BangPos,
    BangNegWeaken,
    BangNegDerelict,
    BangNegContract,
    ForallNeg,
    ForallPos,
}

impl RuleTag {
    pub const ALL: [RuleTag; 14] = [
        RuleTag::Id,
        RuleTag::Contract,
        RuleTag::Neg,
        RuleTag::ConjNegL,
        RuleTag::ConjNegR,
        RuleTag::ConjPos,
        RuleTag::ImpNeg,
        RuleTag::ImpPos,
        RuleTag::BangPos,
        RuleTag::BangNegWeaken,
        RuleTag::BangNegDerelict,
        RuleTag::BangNegContract,
        RuleTag::ForallNeg,
        RuleTag::ForallPos,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RuleTag::Id => "id",
            RuleTag::Contract => "contract",
            RuleTag::Neg => "neg",
            RuleTag::ConjNegL => "conj-neg-l",
            RuleTag::ConjNegR => "conj-neg-r",
            RuleTag::ConjPos => "conj-pos",
            RuleTag::ImpNeg => "imp-neg",
            RuleTag::ImpPos => "imp-pos",
            RuleTag::BangPos => "bang-pos",
            RuleTag::BangNegWeaken => "bang-neg-weaken",
            RuleTag::BangNegDerelict => "bang-neg-derelict",
            RuleTag::BangNegContract => "bang-neg-contract",
            RuleTag::ForallNeg => "forall-neg",
            RuleTag::ForallPos => "forall-pos",
        }
    }

    pub fn from_name(name: &str) -> Option<RuleTag> {
        RuleTag::ALL.into_iter().find(|t| t.name() == name)
    }

    /// Rules whose side condition is `R ∈ U`.
    pub fn is_positive(self) -> bool {
        matches!(self, RuleTag::ConjPos | RuleTag::ImpPos | RuleTag::BangPos | RuleTag::ForallPos)
    }

    /// Rules whose side condition is `R ∉ U`.
    pub fn is_negative(self) -> bool {
        matches!(
            self,
            RuleTag::ConjNegL
                | RuleTag::ConjNegR
                | RuleTag::ImpNeg
                | RuleTag::BangNegWeaken
                | RuleTag::BangNegDerelict
                | RuleTag::BangNegContract
                | RuleTag::ForallNeg
        )
    }

    /// `Id` and `Neg` carry no polarity side condition.
    pub fn is_neutral(self) -> bool {
        matches!(self, RuleTag::Id | RuleTag::Neg)
    }
}

/// A rule application with every parameter recorded explicitly. Positions
/// index the conclusion of the node.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule {
    Id { parts: Vec<usize> },
    /// The printed "(Weaken)" rule of MRL, which has contraction shape.
    Contract { at: usize },
    Neg { at: usize },
    ConjNegL { at: usize },
    ConjNegR { at: usize },
    ConjPos { at: usize },
    ImpNeg { at: usize },
    /// `left` lists the context positions sent to the first premise; the
    /// remaining context goes to the second.
    ImpPos { at: usize, left: Vec<usize> },
    BangPos { at: usize },
    BangNegWeaken { at: usize },
    BangNegDerelict { at: usize },
    BangNegContract { at: usize },
    ForallNeg { at: usize, witness: Term },
    ForallPos { at: usize, eigen: String },
}

impl Rule {
    pub fn tag(&self) -> RuleTag {
        match self {
            Rule::Id { .. } => RuleTag::Id,
            Rule::Contract { .. } => RuleTag::Contract,
            Rule::Neg { .. } => RuleTag::Neg,
            Rule::ConjNegL { .. } => RuleTag::ConjNegL,
            Rule::ConjNegR { .. } => RuleTag::ConjNegR,
            Rule::ConjPos { .. } => RuleTag::ConjPos,
            Rule::ImpNeg { .. } => RuleTag::ImpNeg,
            Rule::ImpPos { .. } => RuleTag::ImpPos,
            Rule::BangPos { .. } => RuleTag::BangPos,
            Rule::BangNegWeaken { .. } => RuleTag::BangNegWeaken,
            Rule::BangNegDerelict { .. } => RuleTag::BangNegDerelict,
            Rule::BangNegContract { .. } => RuleTag::BangNegContract,
            Rule::ForallNeg { .. } => RuleTag::ForallNeg,
            Rule::ForallPos { .. } => RuleTag::ForallPos,
        }
    }

    /// Principal position for single-principal rules.
    pub fn at(&self) -> Option<usize> {
        match self {
            Rule::Id { .. } => None,
            Rule::Contract { at }
            | Rule::Neg { at }
            | Rule::ConjNegL { at }
            | Rule::ConjNegR { at }
            | Rule::ConjPos { at }
            | Rule::ImpNeg { at }
            | Rule::ImpPos { at, .. }
            | Rule::BangPos { at }
            | Rule::BangNegWeaken { at }
            | Rule::BangNegDerelict { at }
            | Rule::BangNegContract { at }
            | Rule::ForallNeg { at, .. }
            | Rule::ForallPos { at, .. } => Some(*at),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Rule::Id { .. } => 0,
            Rule::ConjPos { .. } | Rule::ImpPos { .. } => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Derivation {
    pub conclusion: Sequent,
    pub rule: Rule,
    pub premises: Vec<Derivation>,
}

impl Derivation {
    pub fn new(conclusion: Sequent, rule: Rule, premises: Vec<Derivation>) -> Self {
        Derivation { conclusion, rule, premises }
    }

    /// Consumes the node, returning its premises.
    pub fn into_premises(mut self) -> Vec<Derivation> {
        std::mem::take(&mut self.premises)
    }

    pub fn into_parts(mut self) -> (Sequent, Rule, Vec<Derivation>) {
        let premises = std::mem::take(&mut self.premises);
        let conclusion = std::mem::take(&mut self.conclusion);
        let rule = std::mem::replace(&mut self.rule, Rule::Id { parts: Vec::new() });
        (conclusion, rule, premises)
    }

    /// Tree height; leaves have height 1.
    pub fn height(&self) -> usize {
        stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || {
            1 + self.premises.iter().map(Derivation::height).max().unwrap_or(0)
        })
    }

    pub fn size(&self) -> usize {
        self.nodes().count()
    }

    /// Pre-order traversal of all nodes.
    pub fn nodes(&self) -> impl Iterator<Item = &Derivation> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let node = stack.pop()?;
            stack.extend(node.premises.iter().rev());
            Some(node)
        })
    }
}

impl Drop for Derivation {
    /// Tears tall trees down iteratively.
    fn drop(&mut self) {
        let mut stack = std::mem::take(&mut self.premises);
        while let Some(mut node) = stack.pop() {
            stack.append(&mut node.premises);
        }
    }
}

pub(crate) const RED_ZONE: usize = 4 * 1024 * 1024;
pub(crate) const STACK_CHUNK: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SideCondition {
    #[serde(rename = "R∈U")]
    InUltrafilter,
    #[serde(rename = "R∉U")]
    NotInUltrafilter,
    /// LMRL identity axioms carry no context.
    #[serde(rename = "linear-id-context")]
    LinearIdContext,
    #[serde(rename = "closed-witness")]
    ClosedWitness,
}

impl fmt::Display for SideCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SideCondition::InUltrafilter => "R∈U",
            SideCondition::NotInUltrafilter => "R∉U",
            SideCondition::LinearIdContext => "linear-id-context",
            SideCondition::ClosedWitness => "closed-witness",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "code", content = "detail")]
pub enum Reason {
    WrongPremiseCount { expected: usize, found: usize },
    SideConditionFailed(SideCondition),
    PrincipalMismatch(String),
    PremiseMismatch { premise: usize },
    PartitionInvalid,
    EigenvariableCaptured(String),
    QContextViolated,
    IntuitionisticViolated,
    BangInMRL,
    UniverseMismatch(String),
    /// The rule does not belong to the calculus of the session.
    RuleNotInCalculus(RuleTag),
}

impl Reason {
    pub fn code(&self) -> &'static str {
        match self {
            Reason::WrongPremiseCount { .. } => "WrongPremiseCount",
            Reason::SideConditionFailed(_) => "SideConditionFailed",
            Reason::PrincipalMismatch(_) => "PrincipalMismatch",
            Reason::PremiseMismatch { .. } => "PremiseMismatch",
            Reason::PartitionInvalid => "PartitionInvalid",
            Reason::EigenvariableCaptured(_) => "EigenvariableCaptured",
            Reason::QContextViolated => "QContextViolated",
            Reason::IntuitionisticViolated => "IntuitionisticViolated",
            Reason::BangInMRL => "BangInMRL",
            Reason::UniverseMismatch(_) => "UniverseMismatch",
            Reason::RuleNotInCalculus(_) => "RuleNotInCalculus",
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Reason::WrongPremiseCount { expected, found } => {
                write!(f, "WrongPremiseCount(expected {expected}, found {found})")
            }
            Reason::SideConditionFailed(c) => write!(f, "SideConditionFailed({c})"),
            Reason::PrincipalMismatch(m) => write!(f, "PrincipalMismatch({m})"),
            Reason::PremiseMismatch { premise } => write!(f, "PremiseMismatch(premise {premise})"),
            Reason::EigenvariableCaptured(x) => write!(f, "EigenvariableCaptured({x})"),
            Reason::UniverseMismatch(m) => write!(f, "UniverseMismatch({m})"),
            Reason::RuleNotInCalculus(t) => write!(f, "RuleNotInCalculus({})", t.name()),
            other => f.write_str(other.code()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub node_path: Vec<usize>,
    pub rule: RuleTag,
    pub reason: Reason,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rejected at {:?} ({}): {}", self.node_path, self.rule.name(), self.reason)
    }
}

impl std::error::Error for Rejection {}

/// Structured outcome of a check, as emitted by the CLI.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckReport {
    pub status: &'static str,
    pub node_path: Vec<usize>,
    pub reason: Option<Reason>,
}

impl CheckReport {
    pub fn from_result(result: &Result<(), Rejection>) -> Self {
        match result {
            Ok(()) => CheckReport { status: "accepted", node_path: Vec::new(), reason: None },
            Err(r) => CheckReport {
                status: "rejected",
                node_path: r.node_path.clone(),
                reason: Some(r.reason.clone()),
            },
        }
    }

    pub fn accepted(&self) -> bool {
        self.status == "accepted"
    }
}

/// Checks every node of `d` against the rules of `calc`.
pub fn check(d: &Derivation, calc: &Calculus) -> Result<(), Rejection> {
    let mut path = Vec::new();
    check_node(d, calc, &mut path)
}

fn check_node(d: &Derivation, calc: &Calculus, path: &mut Vec<usize>) -> Result<(), Rejection> {
    stacker::maybe_grow(RED_ZONE, STACK_CHUNK, || {
        check_local(d, calc).map_err(|reason| Rejection {
            node_path: path.clone(),
            rule: d.rule.tag(),
            reason,
        })?;
        for (i, p) in d.premises.iter().enumerate() {
            path.push(i);
            check_node(p, calc, path)?;
            path.pop();
        }
        Ok(())
    })
}

/// Checks a single node against its premises' conclusions, ignoring the
/// premises' own correctness.
pub fn check_local(d: &Derivation, calc: &Calculus) -> Result<(), Reason> {
    let concl = &d.conclusion;
    for item in concl.iter() {
        calc.universe
            .check_set(item.roles)
            .and_then(|_| item.formula.validate(calc.universe))
            .map_err(|e| Reason::UniverseMismatch(e.to_string()))?;
        if calc.mode == LogicMode::Mrl && item.formula.contains_bang() {
            return Err(Reason::BangInMRL);
        }
    }
    if !calc.is_intuitionistic(concl) {
        return Err(Reason::IntuitionisticViolated);
    }
    if calc.mode == LogicMode::Lmrl && d.rule.tag() == RuleTag::Contract {
        return Err(Reason::RuleNotInCalculus(RuleTag::Contract));
    }
    if d.premises.len() != d.rule.arity() {
        return Err(Reason::WrongPremiseCount { expected: d.rule.arity(), found: d.premises.len() });
    }
    let expected = expected_premises(&d.rule, concl, calc)?;
    for (i, (want, got)) in expected.iter().zip(&d.premises).enumerate() {
        if !want.multiset_eq(&got.conclusion) {
            return Err(Reason::PremiseMismatch { premise: i });
        }
    }
    Ok(())
}

fn principal(concl: &Sequent, at: usize) -> Result<&IFormula, Reason> {
    concl
        .get(at)
        .ok_or_else(|| Reason::PrincipalMismatch(format!("position {at} out of range")))
}

fn require(cond: bool, which: SideCondition) -> Result<(), Reason> {
    if cond {
        Ok(())
    } else {
        Err(Reason::SideConditionFailed(which))
    }
}

fn shape(expected: &str) -> Reason {
    Reason::PrincipalMismatch(format!("principal item is not {expected}"))
}

/// Premise sequents the rule demands for the given conclusion.
pub fn expected_premises(rule: &Rule, concl: &Sequent, calc: &Calculus) -> Result<Vec<Sequent>, Reason> {
    let full = calc.universe.full();
    match rule {
        Rule::Id { parts } => {
            let mut seen = vec![false; concl.len()];
            let mut atom = None;
            let mut roles: Vec<RoleSet> = Vec::with_capacity(parts.len());
            for &p in parts {
                let item = principal(concl, p)?;
                if std::mem::replace(&mut seen[p], true) {
                    return Err(Reason::PrincipalMismatch(format!("position {p} repeated")));
                }
                let Formula::Atom(a) = &item.formula else {
                    return Err(shape("an atom"));
                };
                match atom {
                    None => atom = Some(a),
                    Some(prev) if prev == a => {}
                    Some(_) => return Err(Reason::PrincipalMismatch("identity over distinct atoms".into())),
                }
                roles.push(item.roles);
            }
            if !crate::roles::is_partition(&roles, full) {
                return Err(Reason::PartitionInvalid);
            }
            if calc.mode == LogicMode::Lmrl {
                require(parts.len() == concl.len(), SideCondition::LinearIdContext)?;
            }
            Ok(Vec::new())
        }
        Rule::Contract { at } => {
            let item = principal(concl, *at)?;
            Ok(vec![concl.clone().with(item.clone())])
        }
        Rule::Neg { at } => {
            let item = principal(concl, *at)?;
            let Formula::Neg(f, a) = &item.formula else { return Err(shape("a negation")) };
            let pre = f.preimage(item.roles).map_err(|e| Reason::UniverseMismatch(e.to_string()))?;
            Ok(vec![concl.without(*at).with(IFormula::new(pre, (**a).clone()))])
        }
        Rule::ConjNegL { at } | Rule::ConjNegR { at } | Rule::ConjPos { at } => {
            let item = principal(concl, *at)?;
            let Formula::Conj(u, a, b) = &item.formula else { return Err(shape("a conjunction")) };
            let ctx = concl.without(*at);
            let r = item.roles;
            match rule {
                Rule::ConjPos { .. } => {
                    require(u.contains(r), SideCondition::InUltrafilter)?;
                    Ok(vec![
                        ctx.clone().with(IFormula::new(r, (**a).clone())),
                        ctx.with(IFormula::new(r, (**b).clone())),
                    ])
                }
                Rule::ConjNegL { .. } => {
                    require(!u.contains(r), SideCondition::NotInUltrafilter)?;
                    Ok(vec![ctx.with(IFormula::new(r, (**a).clone()))])
                }
                _ => {
                    require(!u.contains(r), SideCondition::NotInUltrafilter)?;
                    Ok(vec![ctx.with(IFormula::new(r, (**b).clone()))])
                }
            }
        }
        Rule::ImpNeg { at } => {
            let item = principal(concl, *at)?;
            let Formula::Impl(f, u, a, b) = &item.formula else { return Err(shape("an implication")) };
            require(!u.contains(item.roles), SideCondition::NotInUltrafilter)?;
            let pre = f.preimage(item.roles).map_err(|e| Reason::UniverseMismatch(e.to_string()))?;
            Ok(vec![concl
                .without(*at)
                .with(IFormula::new(pre, (**a).clone()))
                .with(IFormula::new(item.roles, (**b).clone()))])
        }
        Rule::ImpPos { at, left } => {
            let item = principal(concl, *at)?;
            let Formula::Impl(f, u, a, b) = &item.formula else { return Err(shape("an implication")) };
            require(u.contains(item.roles), SideCondition::InUltrafilter)?;
            let mut to_left = vec![false; concl.len()];
            for &p in left {
                if p >= concl.len() || p == *at || std::mem::replace(&mut to_left[p], true) {
                    return Err(Reason::PrincipalMismatch(format!("invalid context split position {p}")));
                }
            }
            let mut g1 = Sequent::empty();
            let mut g2 = Sequent::empty();
            for (i, it) in concl.iter().enumerate() {
                if i == *at {
                    continue;
                }
                if to_left[i] {
                    g1.push(it.clone());
                } else {
                    g2.push(it.clone());
                }
            }
            let pre = f.preimage(item.roles).map_err(|e| Reason::UniverseMismatch(e.to_string()))?;
            Ok(vec![
                g1.with(IFormula::new(pre, (**a).clone())),
                g2.with(IFormula::new(item.roles, (**b).clone())),
            ])
        }
        Rule::BangPos { at } | Rule::BangNegWeaken { at } | Rule::BangNegDerelict { at } | Rule::BangNegContract { at } => {
            let item = principal(concl, *at)?;
            let Formula::Bang(u, a) = &item.formula else { return Err(shape("an exponential")) };
            if calc.mode == LogicMode::Mrl {
                return Err(Reason::BangInMRL);
            }
            let ctx = concl.without(*at);
            let r = item.roles;
            match rule {
                Rule::BangPos { .. } => {
                    require(u.contains(r), SideCondition::InUltrafilter)?;
                    if !is_q_context(&ctx) {
                        return Err(Reason::QContextViolated);
                    }
                    Ok(vec![ctx.with(IFormula::new(r, (**a).clone()))])
                }
                Rule::BangNegWeaken { .. } => {
                    require(!u.contains(r), SideCondition::NotInUltrafilter)?;
                    Ok(vec![ctx])
                }
                Rule::BangNegDerelict { .. } => {
                    require(!u.contains(r), SideCondition::NotInUltrafilter)?;
                    Ok(vec![ctx.with(IFormula::new(r, (**a).clone()))])
                }
                _ => {
                    require(!u.contains(r), SideCondition::NotInUltrafilter)?;
                    Ok(vec![concl.clone().with(item.clone())])
                }
            }
        }
        Rule::ForallNeg { at, witness } => {
            let item = principal(concl, *at)?;
            let Formula::Forall(u, _, body) = &item.formula else { return Err(shape("a quantifier")) };
            require(!u.contains(item.roles), SideCondition::NotInUltrafilter)?;
            require(term_is_closed(witness), SideCondition::ClosedWitness)?;
            Ok(vec![concl.without(*at).with(IFormula::new(item.roles, body.instantiate(witness)))])
        }
        Rule::ForallPos { at, eigen } => {
            let item = principal(concl, *at)?;
            let Formula::Forall(u, _, body) = &item.formula else { return Err(shape("a quantifier")) };
            require(u.contains(item.roles), SideCondition::InUltrafilter)?;
            if concl.free_vars().contains(eigen) {
                return Err(Reason::EigenvariableCaptured(eigen.clone()));
            }
            let opened = body.instantiate(&Term::Var(eigen.clone()));
            Ok(vec![concl.without(*at).with(IFormula::new(item.roles, opened))])
        }
    }
}

fn term_is_closed(t: &Term) -> bool {
    match t {
        Term::Var(_) => true,
        Term::Bound(_) => false,
        Term::App(_, args) => args.iter().all(term_is_closed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roles::Universe;

    fn n2() -> Universe {
        Universe::new(2).unwrap()
    }

    fn ifm(roles: &[usize], f: Formula) -> IFormula {
        let n = Universe::new(2).unwrap();
        IFormula::new(n.set(roles.iter().copied()).unwrap(), f)
    }

    fn a() -> Formula {
        Formula::prop("a")
    }

    fn id2() -> Derivation {
        Derivation::new(Sequent::new(vec![ifm(&[0], a()), ifm(&[1], a())]), Rule::Id { parts: vec![0, 1] }, vec![])
    }

    #[test]
    fn identity_accepted() {
        let calc = Calculus::new(n2(), LogicMode::Mrl);
        assert_eq!(check(&id2(), &calc), Ok(()));
        assert_eq!(id2().height(), 1);
    }

    #[test]
    fn conj_pos_needs_witness() {
        let n = n2();
        let u0 = n.ultrafilter(0).unwrap();
        let conj = Formula::conj(u0, a(), Formula::prop("b"));
        let d = Derivation::new(
            Sequent::new(vec![ifm(&[1], conj)]),
            Rule::ConjPos { at: 0 },
            vec![id2(), id2()],
        );
        let err = check(&d, &Calculus::new(n, LogicMode::Mrl)).unwrap_err();
        assert_eq!(err.reason, Reason::SideConditionFailed(SideCondition::InUltrafilter));
        assert_eq!(err.node_path, Vec::<usize>::new());
    }

    #[test]
    fn linear_identity_has_no_context() {
        let mut d = id2();
        d.conclusion.push(ifm(&[0, 1], Formula::prop("b")));
        assert_eq!(check(&d, &Calculus::new(n2(), LogicMode::Mrl)), Ok(()));
        let err = check(&d, &Calculus::new(n2(), LogicMode::Lmrl)).unwrap_err();
        assert_eq!(err.reason, Reason::SideConditionFailed(SideCondition::LinearIdContext));
    }

    #[test]
    fn restriction_rejects_two_filter_members() {
        let n = n2();
        let d = Derivation::new(
            Sequent::new(vec![ifm(&[0], a()), ifm(&[0, 1], Formula::prop("b")), ifm(&[1], a())]),
            Rule::Id { parts: vec![0, 2] },
            vec![],
        );
        let calc = Calculus::new(n, LogicMode::Mrl).restricted(PrincipalFilter::new(n.set([0]).unwrap()));
        assert_eq!(check(&d, &calc).unwrap_err().reason, Reason::IntuitionisticViolated);
    }

    #[test]
    fn q_context_examples() {
        let n = n2();
        let u0 = n.ultrafilter(0).unwrap();
        assert!(is_q_context(&Sequent::new(vec![ifm(&[1], Formula::bang(u0, Formula::prop("b")))])));
        assert!(is_q_context(&Sequent::empty()));
        assert!(!is_q_context(&Sequent::new(vec![ifm(&[0], a())])));
        assert!(!is_q_context(&Sequent::new(vec![ifm(&[0], Formula::bang(u0, a()))])));
    }

    #[test]
    fn heights() {
        let n = n2();
        let swap = n.rotation();
        let neg = Derivation::new(
            Sequent::new(vec![ifm(&[0], Formula::neg(swap, a())), ifm(&[0], a())]),
            Rule::Neg { at: 0 },
            vec![Derivation::new(
                Sequent::new(vec![ifm(&[1], a()), ifm(&[0], a())]),
                Rule::Id { parts: vec![0, 1] },
                vec![],
            )],
        );
        assert_eq!(neg.height(), 2);
        let calc = Calculus::new(n, LogicMode::Mrl);
        assert_eq!(check(&neg, &calc), Ok(()));
        let u0 = n.ultrafilter(0).unwrap();
        let both = Derivation::new(
            Sequent::new(vec![ifm(&[0, 1], Formula::conj(u0, a(), a()))]),
            Rule::ConjPos { at: 0 },
            vec![
                Derivation::new(Sequent::new(vec![ifm(&[0, 1], a())]), Rule::Id { parts: vec![0] }, vec![]),
                Derivation::new(Sequent::new(vec![ifm(&[0, 1], a())]), Rule::Id { parts: vec![0] }, vec![]),
            ],
        );
        assert_eq!(both.height(), 2);
        assert_eq!(check(&both, &calc), Ok(()));
    }

    #[test]
    fn bang_rejected_in_mrl() {
        let n = n2();
        let u0 = n.ultrafilter(0).unwrap();
        let d = Derivation::new(
            Sequent::new(vec![ifm(&[1], Formula::bang(u0, a()))]).extended(&id2().conclusion),
            Rule::BangNegWeaken { at: 0 },
            vec![id2()],
        );
        assert_eq!(check(&d, &Calculus::new(n, LogicMode::Lmrl)), Ok(()));
        assert_eq!(check(&d, &Calculus::new(n, LogicMode::Mrl)).unwrap_err().reason, Reason::BangInMRL);
    }

    #[test]
    fn wrong_premise_count() {
        let d = Derivation::new(id2().conclusion.clone(), Rule::Id { parts: vec![0, 1] }, vec![id2()]);
        let err = check(&d, &Calculus::new(n2(), LogicMode::Mrl)).unwrap_err();
        assert_eq!(err.reason.code(), "WrongPremiseCount");
    }

    #[test]
    fn order_independent_acceptance() {
        let n = n2();
        let calc = Calculus::new(n, LogicMode::Mrl);
        let d = Derivation::new(
            Sequent::new(vec![ifm(&[1], a()), ifm(&[0], a()), ifm(&[0], Formula::prop("b"))]),
            Rule::Contract { at: 2 },
            vec![Derivation::new(
                Sequent::new(vec![ifm(&[0], Formula::prop("b")), ifm(&[0], a()), ifm(&[0], Formula::prop("b")), ifm(&[1], a())]),
                Rule::Id { parts: vec![1, 3] },
                vec![],
            )],
        );
        assert_eq!(check(&d, &calc), Ok(()));
    }
}
