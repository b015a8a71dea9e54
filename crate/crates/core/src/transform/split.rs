//! Splitting of roles: `(Γ, [R1 ⊎ R2]A) ⇒ Γ, [R1]A, [R2]A`.
//!
//! Several copies of the designated item are split at once so that a
//! contraction on it becomes a height-decreasing call. If `R1 ⊎ R2 ∈ U`
//! the witness of `U` lies in exactly one part; that part keeps the
//! positive rule and the other is rebuilt with the matching negative rule.

use super::{context_counts, distribute, id_parts, node_parts, shares_context, stuck, CutMetric, Engine, Param, Result};
use crate::checker::{self, Derivation, RuleTag};
use crate::roles::RoleSet;
use crate::syntax::{Formula, IFormula, Term};

impl Engine {
    pub(crate) fn split(
        &mut self,
        d: Derivation,
        v: &IFormula,
        r1: RoleSet,
        r2: RoleSet,
        k: usize,
        parent: Option<CutMetric>,
    ) -> Result<Derivation> {
        stacker::maybe_grow(checker::RED_ZONE, checker::STACK_CHUNK, || {
            if k == 0 {
                return Ok(d);
            }
            let case = describe(&d, v);
            let enabled = self.metric_enabled();
            self.enter("role_split", &case, || CutMetric { measure: v.formula.measure(), height: d.height() }, parent);
            let me = enabled.then(|| CutMetric { measure: v.formula.measure(), height: d.height() });
            let res = self.split_inner(d, v, r1, r2, k, me);
            self.leave();
            res
        })
    }

    fn split_inner(
        &mut self,
        d: Derivation,
        v: &IFormula,
        r1: RoleSet,
        r2: RoleSet,
        k: usize,
        me: Option<CutMetric>,
    ) -> Result<Derivation> {
        let a = &v.formula;
        let at = |r: RoleSet, f: &Formula| IFormula::new(r, f.clone());
        if d.rule.tag() == RuleTag::Id {
            let (mut parts, mut ctx) = id_parts(&d);
            for _ in 0..k {
                if ctx.remove_one(v) {
                    ctx.push(at(r1, a));
                    ctx.push(at(r2, a));
                } else {
                    let pos = parts.iter().position(|p| p == v).ok_or_else(|| stuck("identity lacks the split item"))?;
                    parts.remove(pos);
                    parts.push(at(r1, a));
                    parts.push(at(r2, a));
                }
            }
            return Ok(self.build_id(parts, ctx));
        }

        let (tag, principal, param) = node_parts(&d)?;
        if principal != *v {
            let counts = context_counts(self, &d, v)?;
            let shares = distribute(k, &counts, shares_context(tag))?;
            let premises = d
                .into_premises()
                .into_iter()
                .zip(shares)
                .map(|(p, c)| self.split(p, v, r1, r2, c, me))
                .collect::<Result<Vec<_>>>()?;
            return self.build(tag, principal, param, premises);
        }

        if matches!(tag, RuleTag::Contract | RuleTag::BangNegContract) {
            let premise = d.into_premises().into_iter().next().ok_or_else(|| stuck("contraction without premise"))?;
            let p = self.split(premise, v, r1, r2, k + 1, me)?;
            let p = self.build(tag, at(r1, a), Param::None, vec![p])?;
            return self.build(tag, at(r2, a), Param::None, vec![p]);
        }

        // Split the other designated copies first (smaller height).
        let counts = context_counts(self, &d, v)?;
        let shares = distribute(k - 1, &counts, shares_context(tag))?;
        let mut ps = d
            .into_premises()
            .into_iter()
            .zip(shares)
            .map(|(p, c)| self.split(p, v, r1, r2, c, me))
            .collect::<Result<Vec<_>>>()?;

        let r = v.roles;
        let (first, second) = (at(r1, a), at(r2, a));
        match (a, tag) {
            (Formula::Neg(f, b), RuleTag::Neg) => {
                let p = self.split(ps.remove(0), &at(f.preimage(r)?, b), f.preimage(r1)?, f.preimage(r2)?, 1, me)?;
                let p = self.build(RuleTag::Neg, first, Param::None, vec![p])?;
                self.build(RuleTag::Neg, second, Param::None, vec![p])
            }
            (Formula::Conj(_, b, _), RuleTag::ConjNegL) | (Formula::Conj(_, _, b), RuleTag::ConjNegR)
            | (Formula::Bang(_, b), RuleTag::BangNegDerelict) => {
                let p = self.split(ps.remove(0), &at(r, b), r1, r2, 1, me)?;
                let p = self.build(tag, first, Param::None, vec![p])?;
                self.build(tag, second, Param::None, vec![p])
            }
            (Formula::Forall(_, _, body), RuleTag::ForallNeg) => {
                let Param::Witness(t) = &param else { return Err(stuck("forall-neg without witness")) };
                let p = self.split(ps.remove(0), &at(r, &body.instantiate(t)), r1, r2, 1, me)?;
                let p = self.build(tag, first, param.clone(), vec![p])?;
                self.build(tag, second, param, vec![p])
            }
            (Formula::Bang(..), RuleTag::BangNegWeaken) => {
                let p = self.build(tag, first, Param::None, vec![ps.remove(0)])?;
                self.build(tag, second, Param::None, vec![p])
            }
            (Formula::Impl(f, _, b, c), RuleTag::ImpNeg) => {
                let p = self.split(ps.remove(0), &at(f.preimage(r)?, b), f.preimage(r1)?, f.preimage(r2)?, 1, me)?;
                let p = self.split(p, &at(r, c), r1, r2, 1, me)?;
                let p = self.build(tag, first, Param::None, vec![p])?;
                self.build(tag, second, Param::None, vec![p])
            }
            (Formula::Conj(u, b, c), RuleTag::ConjPos) => {
                let (pos, neg) = if u.contains(r1) { (first, second) } else { (second, first) };
                let pb = self.split(ps.remove(0), &at(r, b), r1, r2, 1, me)?;
                let pc = self.split(ps.remove(0), &at(r, c), r1, r2, 1, me)?;
                let pb = self.build(RuleTag::ConjNegL, neg.clone(), Param::None, vec![pb])?;
                let pc = self.build(RuleTag::ConjNegR, neg, Param::None, vec![pc])?;
                self.build(RuleTag::ConjPos, pos, Param::None, vec![pb, pc])
            }
            (Formula::Impl(f, u, b, c), RuleTag::ImpPos) => {
                let (pos, neg) = if u.contains(r1) { (first, second) } else { (second, first) };
                let pb = self.split(ps.remove(0), &at(f.preimage(r)?, b), f.preimage(r1)?, f.preimage(r2)?, 1, me)?;
                let pc = self.split(ps.remove(0), &at(r, c), r1, r2, 1, me)?;
                let p = self.build(RuleTag::ImpPos, pos, Param::None, vec![pb, pc])?;
                self.build(RuleTag::ImpNeg, neg, Param::None, vec![p])
            }
            (Formula::Forall(u, _, body), RuleTag::ForallPos) => {
                let Param::Eigen(x) = &param else { return Err(stuck("forall-pos without eigenvariable")) };
                let (pos, neg) = if u.contains(r1) { (first, second) } else { (second, first) };
                let opened = body.instantiate(&Term::Var(x.clone()));
                let p = self.split(ps.remove(0), &at(r, &opened), r1, r2, 1, me)?;
                let p = self.build(RuleTag::ForallNeg, neg, Param::Witness(Term::Var(x.clone())), vec![p])?;
                self.build(RuleTag::ForallPos, pos, param, vec![p])
            }
            (Formula::Bang(u, b), RuleTag::BangPos) => {
                let (pos, neg) = if u.contains(r1) { (first, second) } else { (second, first) };
                let p = self.split(ps.remove(0), &at(r, b), r1, r2, 1, me)?;
                let p = self.build(RuleTag::BangNegDerelict, neg, Param::None, vec![p])?;
                self.build(RuleTag::BangPos, pos, Param::None, vec![p])
            }
            _ => Err(stuck(format!("role_split: unexpected principal rule {}", tag.name()))),
        }
    }
}

fn describe(d: &Derivation, v: &IFormula) -> String {
    let tag = d.rule.tag();
    let principal = d.rule.at().and_then(|at| d.conclusion.get(at)) == Some(v);
    if tag == RuleTag::Id {
        "id".to_string()
    } else if principal {
        format!("principal {}", tag.name())
    } else {
        format!("commute {}", tag.name())
    }
}
