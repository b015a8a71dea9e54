//! Elimination of empty interpretations: `(Γ, [∅]A) ⇒ Γ`.
//!
//! No ultrafilter contains `∅`, so a rule introducing `[∅]A` is always
//! negative and its premise mentions `A`'s parts at `∅` again (every
//! preimage of `∅` is `∅`). The output is never taller than the input.

use super::{context_counts, distribute, id_parts, node_parts, shares_context, stuck, Engine, Result};
use crate::checker::{self, Derivation, RuleTag};
use crate::syntax::IFormula;

impl Engine {
    /// Removes `k` copies of the empty interpretation `item` from the
    /// conclusion of `d`.
    pub(crate) fn elim_empty(&mut self, d: Derivation, item: &IFormula, k: usize) -> Result<Derivation> {
        stacker::maybe_grow(checker::RED_ZONE, checker::STACK_CHUNK, || {
            if k == 0 {
                return Ok(d);
            }
            debug_assert!(item.roles.is_empty());
            if d.rule.tag() == RuleTag::Id {
                let (mut parts, mut ctx) = id_parts(&d);
                for _ in 0..k {
                    if !ctx.remove_one(item) {
                        let pos = parts.iter().position(|p| p == item).ok_or_else(|| stuck("identity lacks the empty item"))?;
                        parts.remove(pos);
                    }
                }
                return Ok(self.build_id(parts, ctx));
            }
            let (tag, principal, param) = node_parts(&d)?;
            if principal == *item {
                let actives = self.active_items(tag, &principal, &param)?;
                let premise = d.into_premises().into_iter().next().ok_or_else(|| stuck("negative rule without premise"))?;
                return match tag {
                    RuleTag::Contract | RuleTag::BangNegContract => self.elim_empty(premise, item, k + 1),
                    RuleTag::Neg
                    | RuleTag::ConjNegL
                    | RuleTag::ConjNegR
                    | RuleTag::ImpNeg
                    | RuleTag::ForallNeg
                    | RuleTag::BangNegDerelict
                    | RuleTag::BangNegWeaken => {
                        let mut p = self.elim_empty(premise, item, k - 1)?;
                        for active in actives[0].iter() {
                            p = self.elim_empty(p, active, 1)?;
                        }
                        Ok(p)
                    }
                    _ => Err(stuck(format!("positive rule {} at the empty role set", tag.name()))),
                };
            }
            let counts = context_counts(self, &d, item)?;
            let shares = distribute(k, &counts, shares_context(tag))?;
            let premises = d
                .into_premises()
                .into_iter()
                .zip(shares)
                .map(|(p, c)| self.elim_empty(p, item, c))
                .collect::<Result<Vec<_>>>()?;
            self.build(tag, principal, param, premises)
        })
    }
}
