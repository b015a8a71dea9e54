//! Two-party cut with spill: `(Γ1, [R1]A; Γ2, [R2]A) ⇒ Γ1, Γ2, [R1 ∩ R2]A`
//! whenever `R1 ∪ R2` is the whole universe.
//!
//! `k1` and `k2` copies of the cut items are removed at once (a multi-cut),
//! so contractions on a cut item recurse on a shorter derivation. Every
//! recursive call decreases `(measure(A), height(d1) + height(d2))`.

use std::collections::BTreeSet;

use super::{
    context_counts, derivation_names, distribute, id_parts, node_parts, shares_context, stuck, CutMetric, Engine,
    Param, Result,
};
use crate::checker::{self, is_q_context, is_why_not, Derivation, LogicMode, Rule, RuleTag};
use crate::syntax::{Formula, IFormula, Sequent, Term};

/// One side of a cut: a derivation and how many copies of its cut item go.
struct Side<'a> {
    d: Derivation,
    v: &'a IFormula,
    k: usize,
}

impl Engine {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn cut(
        &mut self,
        d1: Derivation,
        v1: &IFormula,
        k1: usize,
        d2: Derivation,
        v2: &IFormula,
        k2: usize,
        parent: Option<CutMetric>,
    ) -> Result<Derivation> {
        stacker::maybe_grow(checker::RED_ZONE, checker::STACK_CHUNK, || {
            debug_assert!(k1 > 0 && k2 > 0);
            debug_assert_eq!(v1.formula, v2.formula);
            let metric = || CutMetric { measure: v1.formula.measure(), height: d1.height() + d2.height() };
            let case = describe(&d1, v1, &d2, v2);
            let me = self.metric_enabled().then(metric);
            self.enter("two_cut_spill", &case, metric, parent);
            let res = self.cut_inner(Side { d: d1, v: v1, k: k1 }, Side { d: d2, v: v2, k: k2 }, me);
            self.leave();
            res
        })
    }

    fn cut_inner(&mut self, s1: Side<'_>, s2: Side<'_>, me: Option<CutMetric>) -> Result<Derivation> {
        let spill = IFormula::new(s1.v.roles.intersection(s2.v.roles)?, s1.v.formula.clone());
        let target = remainder(&s1)?.extended(&remainder(&s2)?).extended(&Sequent::new(vec![spill.clone()]));

        // Identity axioms holding the cut items in their context.
        if let Some(d) = self.cut_id_context(&s1, &s2, &spill)? {
            return Ok(d);
        }
        if let Some(d) = self.cut_id_context(&s2, &s1, &spill)? {
            return Ok(d);
        }
        let id1 = s1.d.rule.tag() == RuleTag::Id;
        let id2 = s2.d.rule.tag() == RuleTag::Id;
        if id1 && id2 {
            return self.cut_id_id(&s1, &s2, &spill);
        }

        // Contraction on a cut item: cut one more copy from the premise.
        if contracts_on(&s1) {
            let Side { d, v, k } = s1;
            let p = d.into_premises().into_iter().next().ok_or_else(|| stuck("contraction without premise"))?;
            return self.cut(p, v, k + 1, s2.d, s2.v, s2.k, me);
        }
        if contracts_on(&s2) {
            let Side { d, v, k } = s2;
            let p = d.into_premises().into_iter().next().ok_or_else(|| stuck("contraction without premise"))?;
            return self.cut(s1.d, s1.v, s1.k, p, v, k + 1, me);
        }

        // Commutation past a rule acting on another item.
        let np1 = !id1 && !is_principal(&s1);
        let np2 = !id2 && !is_principal(&s2);
        if np1 || np2 {
            let second_first = match (&s1.v.formula, self.mode()) {
                (Formula::Bang(u, _), LogicMode::Lmrl) => u.contains(s2.v.roles) && np2,
                _ => false,
            } || !np1;
            let order: [bool; 2] = if second_first { [true, false] } else { [false, true] };
            for second in order {
                let (this, other) = if second { (&s2, &s1) } else { (&s1, &s2) };
                let np = if second { np2 } else { np1 };
                if np && self.commutable(this, other, &spill)? {
                    return if second {
                        self.commute(s2, s1, &target, me)
                    } else {
                        self.commute(s1, s2, &target, me)
                    };
                }
            }
            return Err(stuck(format!("cannot commute the cut over {} or {}", s1.d.rule.tag().name(), s2.d.rule.tag().name())));
        }

        self.cut_principal(s1, s2, &spill, &target, me)
    }

    /// `Id` whose context holds all the designated copies: the other side's
    /// remainder and the spill join the context.
    fn cut_id_context(&self, this: &Side<'_>, other: &Side<'_>, spill: &IFormula) -> Result<Option<Derivation>> {
        if this.d.rule.tag() != RuleTag::Id {
            return Ok(None);
        }
        let (parts, ctx) = id_parts(&this.d);
        if ctx.count(this.v) < this.k {
            return Ok(None);
        }
        let mut ctx = ctx;
        for _ in 0..this.k {
            ctx.remove_one(this.v);
        }
        let ctx = ctx.extended(&remainder(other)?).extended(&Sequent::new(vec![spill.clone()]));
        Ok(Some(self.build_id(parts, ctx)))
    }

    /// Two identity axioms on the same atom, each using the cut item as a
    /// part: the remaining parts together with the spill partition the
    /// universe.
    fn cut_id_id(&self, s1: &Side<'_>, s2: &Side<'_>, spill: &IFormula) -> Result<Derivation> {
        let (p1, c1) = strip_id(s1)?;
        let (p2, c2) = strip_id(s2)?;
        let mut parts = p1;
        parts.extend(p2);
        parts.push(spill.clone());
        let roles: Vec<_> = parts.iter().map(|p| p.roles).collect();
        if !crate::roles::is_partition(&roles, self.full()) || parts.iter().any(|p| p.formula != spill.formula) {
            return Err(stuck("identity parts do not recombine into a partition"));
        }
        Ok(self.build_id(parts, c1.extended(&c2)))
    }

    fn commutable(&self, this: &Side<'_>, other: &Side<'_>, spill: &IFormula) -> Result<bool> {
        let tag = this.d.rule.tag();
        let rest = remainder(other)?.extended(&Sequent::new(vec![spill.clone()]));
        if tag == RuleTag::BangPos && !is_q_context(&rest) {
            return Ok(false);
        }
        if !shares_context(tag) && this.d.premises.len() > 1 {
            let counts = context_counts(self, &this.d, this.v)?;
            let shares = distribute(this.k, &counts, false)?;
            let used = shares.iter().filter(|&&c| c > 0).count();
            if used > 1 && self.mode() == LogicMode::Lmrl && !rest.iter().all(is_why_not) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn commute(
        &mut self,
        this: Side<'_>,
        other: Side<'_>,
        target: &Sequent,
        me: Option<CutMetric>,
    ) -> Result<Derivation> {
        let Side { d, v, k } = this;
        let d = if matches!(d.rule, Rule::ForallPos { .. }) {
            self.freshen_against(d, &other.d)?
        } else {
            d
        };
        let (tag, principal, param) = node_parts(&d)?;
        let counts = context_counts(self, &d, v)?;
        let shares = distribute(k, &counts, shares_context(tag))?;
        let mut premises = Vec::with_capacity(d.premises.len());
        let mut used = 0;
        for (p, c) in d.into_premises().into_iter().zip(shares) {
            if c > 0 {
                used += 1;
                premises.push(self.cut(p, v, c, other.d.clone(), other.v, other.k, me)?);
            } else {
                premises.push(p);
            }
        }
        let built = self.build(tag, principal, param, premises)?;
        if used > 1 && !shares_context(tag) {
            self.adjust(built, target)
        } else {
            Ok(built)
        }
    }

    fn cut_principal(
        &mut self,
        s1: Side<'_>,
        s2: Side<'_>,
        spill: &IFormula,
        target: &Sequent,
        me: Option<CutMetric>,
    ) -> Result<Derivation> {
        // Orient so that a negative rule, if any, is on the first side.
        let (s1, s2) = if s1.d.rule.tag().is_positive() && !s2.d.rule.tag().is_positive() {
            (s2, s1)
        } else {
            (s1, s2)
        };
        let d1 = self.freshen_if_forall(s1.d, &s2.d)?;
        let d2 = self.freshen_if_forall(s2.d, &d1)?;
        let (v1, v2) = (s1.v, s2.v);
        let (r1, r2) = (v1.roles, v2.roles);
        let (t1, _, par1) = node_parts(&d1)?;
        let (t2, _, par2) = node_parts(&d2)?;

        // Remaining copies of each cut item in the premises.
        let p1 = self.cut_remaining(&d1, v1, s1.k, &d2, v2, s2.k, false, me)?;
        let p2 = self.cut_remaining(&d2, v2, s2.k, &d1, v1, s1.k, true, me)?;
        let mut p1 = p1.into_iter();
        let mut p2 = p2.into_iter();
        let mut next1 = || p1.next().ok_or_else(|| stuck("missing premise"));
        let mut next2 = || p2.next().ok_or_else(|| stuck("missing premise"));
        let at = |r, f: &Formula| IFormula::new(r, f.clone());
        let s = spill.roles;

        let e = match (&v1.formula, t1, t2) {
            (Formula::Neg(f, a), RuleTag::Neg, RuleTag::Neg) => {
                let (q1, q2) = (next1()?, next2()?);
                let x = self.cut(q1, &at(f.preimage(r1)?, a), 1, q2, &at(f.preimage(r2)?, a), 1, me)?;
                self.build(RuleTag::Neg, spill.clone(), Param::None, vec![x])?
            }
            (Formula::Conj(_, a, b), RuleTag::ConjPos, RuleTag::ConjPos) => {
                let (qa1, qb1, qa2, qb2) = (next1()?, next1()?, next2()?, next2()?);
                let x = self.cut(qa1, &at(r1, a), 1, qa2, &at(r2, a), 1, me)?;
                let y = self.cut(qb1, &at(r1, b), 1, qb2, &at(r2, b), 1, me)?;
                let target_ctx = self.common_context(x, y, s, a, b)?;
                self.build(RuleTag::ConjPos, spill.clone(), Param::None, target_ctx)?
            }
            (Formula::Conj(_, a, b), RuleTag::ConjNegL | RuleTag::ConjNegR, RuleTag::ConjPos) => {
                let q1 = next1()?;
                let (qa2, qb2) = (next2()?, next2()?);
                let (c, q2) = if t1 == RuleTag::ConjNegL { (a, qa2) } else { (b, qb2) };
                let x = self.cut(q1, &at(r1, c), 1, q2, &at(r2, c), 1, me)?;
                self.build(t1, spill.clone(), Param::None, vec![x])?
            }
            (Formula::Impl(f, _, a, b), RuleTag::ImpPos, RuleTag::ImpPos) => {
                let (qa1, qb1, qa2, qb2) = (next1()?, next1()?, next2()?, next2()?);
                let x = self.cut(qa1, &at(f.preimage(r1)?, a), 1, qa2, &at(f.preimage(r2)?, a), 1, me)?;
                let y = self.cut(qb1, &at(r1, b), 1, qb2, &at(r2, b), 1, me)?;
                self.build(RuleTag::ImpPos, spill.clone(), Param::None, vec![x, y])?
            }
            (Formula::Impl(f, _, a, b), RuleTag::ImpNeg, RuleTag::ImpPos) => {
                let q1 = next1()?;
                let (qa2, qb2) = (next2()?, next2()?);
                let x = self.cut(qa2, &at(f.preimage(r2)?, a), 1, q1, &at(f.preimage(r1)?, a), 1, me)?;
                let y = self.cut(qb2, &at(r2, b), 1, x, &at(r1, b), 1, me)?;
                self.build(RuleTag::ImpNeg, spill.clone(), Param::None, vec![y])?
            }
            (Formula::Forall(_, _, body), RuleTag::ForallPos, RuleTag::ForallPos) => {
                let (Param::Eigen(y1), Param::Eigen(y2)) = (&par1, &par2) else {
                    return Err(stuck("forall-pos without eigenvariable"));
                };
                let y = Term::Var(y1.clone());
                let q2 = self.subst(next2()?, y2, &y)?;
                let opened = body.instantiate(&y);
                let x = self.cut(next1()?, &at(r1, &opened), 1, q2, &at(r2, &opened), 1, me)?;
                self.build(RuleTag::ForallPos, spill.clone(), par1.clone(), vec![x])?
            }
            (Formula::Forall(_, _, body), RuleTag::ForallNeg, RuleTag::ForallPos) => {
                let (Param::Witness(t), Param::Eigen(y2)) = (&par1, &par2) else {
                    return Err(stuck("forall rules without parameters"));
                };
                let q2 = self.subst(next2()?, y2, t)?;
                let opened = body.instantiate(t);
                let x = self.cut(next1()?, &at(r1, &opened), 1, q2, &at(r2, &opened), 1, me)?;
                self.build(RuleTag::ForallNeg, spill.clone(), par1.clone(), vec![x])?
            }
            (Formula::Bang(_, a), RuleTag::BangPos, RuleTag::BangPos)
            | (Formula::Bang(_, a), RuleTag::BangNegDerelict, RuleTag::BangPos) => {
                let x = self.cut(next1()?, &at(r1, a), 1, next2()?, &at(r2, a), 1, me)?;
                self.build(t1, spill.clone(), Param::None, vec![x])?
            }
            (Formula::Bang(..), RuleTag::BangNegWeaken, RuleTag::BangPos) => next1()?,
            _ => {
                return Err(stuck(format!(
                    "no principal reduction for {} against {}",
                    t1.name(),
                    t2.name()
                )))
            }
        };
        self.adjust(e, target)
    }

    /// Premises of `d` with the `k - 1` copies of `v` that the rule did not
    /// introduce cut against the whole of the other side.
    #[allow(clippy::too_many_arguments)]
    fn cut_remaining(
        &mut self,
        d: &Derivation,
        v: &IFormula,
        k: usize,
        od: &Derivation,
        ov: &IFormula,
        ok: usize,
        flipped: bool,
        me: Option<CutMetric>,
    ) -> Result<Vec<Derivation>> {
        let (tag, _, _) = node_parts(d)?;
        let counts = context_counts(self, d, v)?;
        let shares = distribute(k - 1, &counts, shares_context(tag))?;
        let mut out = Vec::with_capacity(d.premises.len());
        for (p, c) in d.premises.iter().zip(shares) {
            if c == 0 {
                out.push(p.clone());
            } else if flipped {
                out.push(self.cut(od.clone(), ov, ok, p.clone(), v, c, me)?);
            } else {
                out.push(self.cut(p.clone(), v, c, od.clone(), ov, ok, me)?);
            }
        }
        Ok(out)
    }

    /// Both conjunction subcuts yield the same context up to surplus copies
    /// of the other side's remainder; bring them into agreement.
    fn common_context(
        &mut self,
        x: Derivation,
        y: Derivation,
        s: crate::roles::RoleSet,
        a: &Formula,
        b: &Formula,
    ) -> Result<Vec<Derivation>> {
        let ax = Sequent::new(vec![IFormula::new(s, a.clone())]);
        let by = Sequent::new(vec![IFormula::new(s, b.clone())]);
        let cx = x.conclusion.minus(&ax).ok_or_else(|| stuck("conjunction subcut lost its spill"))?;
        let cy = y.conclusion.minus(&by).ok_or_else(|| stuck("conjunction subcut lost its spill"))?;
        if cx.multiset_eq(&cy) {
            return Ok(vec![x, y]);
        }
        let x = self.adjust(x, &cy.extended(&ax))?;
        Ok(vec![x, y])
    }

    fn freshen_if_forall(&mut self, d: Derivation, other: &Derivation) -> Result<Derivation> {
        if matches!(d.rule, Rule::ForallPos { .. }) {
            self.freshen_against(d, other)
        } else {
            Ok(d)
        }
    }

    /// Renames the eigenvariable of a `ForallPos` root so that it occurs
    /// nowhere in `other`.
    fn freshen_against(&mut self, d: Derivation, other: &Derivation) -> Result<Derivation> {
        let Rule::ForallPos { eigen, .. } = &d.rule else { return Ok(d) };
        let names: BTreeSet<String> = derivation_names(other);
        if !names.contains(eigen) {
            return Ok(d);
        }
        loop {
            let d2 = self.freshen_eigen(d.clone())?;
            if let Rule::ForallPos { eigen, .. } = &d2.rule {
                if !names.contains(eigen) {
                    return Ok(d2);
                }
            }
        }
    }
}

fn is_principal(s: &Side<'_>) -> bool {
    s.d.rule.at().and_then(|at| s.d.conclusion.get(at)) == Some(s.v)
}

fn contracts_on(s: &Side<'_>) -> bool {
    matches!(s.d.rule.tag(), RuleTag::Contract | RuleTag::BangNegContract) && is_principal(s)
}

/// A side's conclusion without its designated copies.
fn remainder(s: &Side<'_>) -> Result<Sequent> {
    let mut rest = s.d.conclusion.clone();
    for _ in 0..s.k {
        if !rest.remove_one(s.v) {
            return Err(stuck("conclusion lacks the designated copies"));
        }
    }
    Ok(rest)
}

/// An identity axiom without its designated copies, taken from the context
/// first.
fn strip_id(s: &Side<'_>) -> Result<(Vec<IFormula>, Sequent)> {
    let (mut parts, mut ctx) = id_parts(&s.d);
    for _ in 0..s.k {
        if !ctx.remove_one(s.v) {
            let pos = parts.iter().position(|p| p == s.v).ok_or_else(|| stuck("identity lacks the cut item"))?;
            parts.remove(pos);
        }
    }
    Ok((parts, ctx))
}

fn describe(d1: &Derivation, v1: &IFormula, d2: &Derivation, v2: &IFormula) -> String {
    let side = |d: &Derivation, v: &IFormula| {
        let principal = d.rule.at().and_then(|at| d.conclusion.get(at)) == Some(v);
        format!("{}{}", d.rule.tag().name(), if principal { "*" } else { "" })
    };
    format!("{}/{}", side(d1, v1), side(d2, v2))
}
