//! The admissible rules as named strategies.
//!
//! Each rule knows how to run its transformer, what conclusion the lemma
//! promises, and how to enumerate its premise shapes over a premise pool.
//! The CLI selects rules by name and the oracle iterates over all of them.

use std::fmt::Write as _;

use crate::checker::{is_why_not, Derivation, LogicMode};
use crate::roles::{is_partition, RoleSet};
use crate::search::{PremisePool, SearchError};
use crate::syntax::{Formula, IFormula, Sequent};
use crate::transform::{Engine, TransformError};

/// Arguments of one rule instance. Each rule reads the fields it needs.
#[derive(Debug, Clone, Default)]
pub struct RuleArgs {
    pub derivations: Vec<Derivation>,
    /// Designated positions, one per derivation.
    pub positions: Vec<usize>,
    /// Split parts for `role_split`, the role set for `identity_expand`.
    pub roles: Vec<RoleSet>,
    pub formula: Option<Formula>,
    /// The weakening item.
    pub extra: Option<IFormula>,
    /// Context of the derivations built from nothing.
    pub context: Sequent,
    /// Case label for reports.
    pub label: String,
}

impl RuleArgs {
    pub fn describe(&self) -> String {
        let mut s = self.label.clone();
        for (d, at) in self.derivations.iter().zip(&self.positions) {
            let _ = write!(s, " | {} @{}", d.conclusion, at);
        }
        if let Some(f) = &self.formula {
            let _ = write!(s, " | A={f}");
        }
        if let Some(x) = &self.extra {
            let _ = write!(s, " | +{x}");
        }
        if !self.roles.is_empty() {
            let _ = write!(s, " | roles={:?}", self.roles);
        }
        if !self.context.is_empty() {
            let _ = write!(s, " | ctx={}", self.context);
        }
        s
    }

    fn derivation(&self, i: usize) -> Result<&Derivation, TransformError> {
        self.derivations.get(i).ok_or_else(|| TransformError::Stuck(format!("missing derivation {i}")))
    }

    fn position(&self, i: usize) -> Result<usize, TransformError> {
        self.positions.get(i).copied().ok_or_else(|| TransformError::Stuck(format!("missing position {i}")))
    }

    fn item(&self, i: usize) -> Result<IFormula, TransformError> {
        let at = self.position(i)?;
        self.derivation(i)?.conclusion.get(at).cloned().ok_or(TransformError::BadPosition(at))
    }

    fn rest(&self, i: usize) -> Result<Sequent, TransformError> {
        let at = self.position(i)?;
        let d = self.derivation(i)?;
        if at >= d.conclusion.len() {
            return Err(TransformError::BadPosition(at));
        }
        Ok(d.conclusion.without(at))
    }

    fn formula(&self) -> Result<&Formula, TransformError> {
        self.formula.as_ref().ok_or_else(|| TransformError::Stuck("missing formula".into()))
    }

    fn role(&self, i: usize) -> Result<RoleSet, TransformError> {
        self.roles.get(i).copied().ok_or_else(|| TransformError::Stuck(format!("missing role set {i}")))
    }
}

pub trait AdmissibleRule: Sync {
    fn name(&self) -> &'static str;
    /// The lemma, in words.
    fn statement(&self) -> &'static str;
    fn apply(&self, engine: &mut Engine, args: &RuleArgs) -> Result<Derivation, TransformError>;
    /// The conclusion the lemma promises for these arguments.
    fn conclusion(&self, args: &RuleArgs) -> Result<Sequent, TransformError>;
    /// Every instance of the premise shape over the pool's space.
    fn instances(&self, pool: &mut PremisePool) -> Result<Vec<RuleArgs>, SearchError>;
}

pub struct OneCut;
pub struct TwoCutSpill;
pub struct RoleSplit;
pub struct Weaken;
pub struct DeriveFull;
pub struct IdentityExpand;
/// Multiparty cut, enumerated with the given party counts. Instances with
/// three or more parties use only atomic premises: the ordered choices grow
/// with the cube of the pool and the atoms-only space is where partitions
/// into three or more parts are exercised.
pub struct MpCut {
    pub parties: &'static [usize],
}

pub static ONE_CUT: OneCut = OneCut;
pub static TWO_CUT_SPILL: TwoCutSpill = TwoCutSpill;
pub static ROLE_SPLIT: RoleSplit = RoleSplit;
pub static MP_CUT: MpCut = MpCut { parties: &[1, 2, 3] };
pub static WEAKEN: Weaken = Weaken;
pub static DERIVE_FULL: DeriveFull = DeriveFull;
pub static IDENTITY_EXPAND: IdentityExpand = IdentityExpand;

static REGISTRY: [&dyn AdmissibleRule; 7] =
    [&ONE_CUT, &TWO_CUT_SPILL, &ROLE_SPLIT, &MP_CUT, &WEAKEN, &DERIVE_FULL, &IDENTITY_EXPAND];

/// All rules in a fixed order.
pub fn registry() -> &'static [&'static dyn AdmissibleRule] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Option<&'static dyn AdmissibleRule> {
    registry().iter().copied().find(|r| r.name() == name)
}

pub fn names() -> Vec<&'static str> {
    registry().iter().map(|r| r.name()).collect()
}

/// First position of every distinct item of `d`'s conclusion.
fn distinct_positions(d: &Derivation) -> impl Iterator<Item = usize> + '_ {
    let items = &d.conclusion.items;
    (0..items.len()).filter(move |&i| !items[..i].contains(&items[i]))
}

fn designated(ds: &[Derivation]) -> Vec<(usize, usize, IFormula)> {
    ds.iter()
        .enumerate()
        .flat_map(|(i, d)| distinct_positions(d).map(move |at| (i, at, d.conclusion.items[at].clone())))
        .collect()
}

impl AdmissibleRule for OneCut {
    fn name(&self) -> &'static str {
        "one_cut"
    }

    fn statement(&self) -> &'static str {
        "(Γ, [∅]A) ⇒ Γ"
    }

    fn apply(&self, engine: &mut Engine, args: &RuleArgs) -> Result<Derivation, TransformError> {
        engine.one_cut(args.derivation(0)?.clone(), args.position(0)?)
    }

    fn conclusion(&self, args: &RuleArgs) -> Result<Sequent, TransformError> {
        args.rest(0)
    }

    fn instances(&self, pool: &mut PremisePool) -> Result<Vec<RuleArgs>, SearchError> {
        let ds = pool.derivable()?;
        Ok(designated(ds)
            .into_iter()
            .filter(|(_, _, v)| v.roles.is_empty())
            .map(|(i, at, _)| RuleArgs {
                derivations: vec![ds[i].clone()],
                positions: vec![at],
                label: "∅".into(),
                ..RuleArgs::default()
            })
            .collect())
    }
}

impl AdmissibleRule for TwoCutSpill {
    fn name(&self) -> &'static str {
        "two_cut_spill"
    }

    fn statement(&self) -> &'static str {
        "(Γ1, [R1]A; Γ2, [R2]A) ⇒ Γ1, Γ2, [R1 ∩ R2]A  if R̄1 ∩ R̄2 = ∅"
    }

    fn apply(&self, engine: &mut Engine, args: &RuleArgs) -> Result<Derivation, TransformError> {
        engine.two_cut_spill(args.derivation(0)?.clone(), args.position(0)?, args.derivation(1)?.clone(), args.position(1)?)
    }

    fn conclusion(&self, args: &RuleArgs) -> Result<Sequent, TransformError> {
        let (v1, v2) = (args.item(0)?, args.item(1)?);
        let spill = IFormula::new(v1.roles.intersection(v2.roles)?, v1.formula);
        Ok(args.rest(0)?.extended(&args.rest(1)?).with(spill))
    }

    fn instances(&self, pool: &mut PremisePool) -> Result<Vec<RuleArgs>, SearchError> {
        let ds = pool.derivable()?;
        let items = designated(ds);
        let mut out = Vec::new();
        for (i1, at1, v1) in &items {
            for (i2, at2, v2) in &items {
                if v1.formula == v2.formula && v1.roles.complement().is_disjoint(v2.roles.complement()) {
                    out.push(RuleArgs {
                        derivations: vec![ds[*i1].clone(), ds[*i2].clone()],
                        positions: vec![*at1, *at2],
                        label: format!("R1={} R2={}", v1.roles, v2.roles),
                        ..RuleArgs::default()
                    });
                }
            }
        }
        Ok(out)
    }
}

impl AdmissibleRule for RoleSplit {
    fn name(&self) -> &'static str {
        "role_split"
    }

    fn statement(&self) -> &'static str {
        "(Γ, [R1 ⊎ R2]A) ⇒ Γ, [R1]A, [R2]A"
    }

    fn apply(&self, engine: &mut Engine, args: &RuleArgs) -> Result<Derivation, TransformError> {
        engine.role_split(args.derivation(0)?.clone(), args.position(0)?, args.role(0)?, args.role(1)?)
    }

    fn conclusion(&self, args: &RuleArgs) -> Result<Sequent, TransformError> {
        let v = args.item(0)?;
        Ok(args
            .rest(0)?
            .with(IFormula::new(args.role(0)?, v.formula.clone()))
            .with(IFormula::new(args.role(1)?, v.formula)))
    }

    fn instances(&self, pool: &mut PremisePool) -> Result<Vec<RuleArgs>, SearchError> {
        let universe = pool.space.universe;
        let ds = pool.derivable()?;
        let mut out = Vec::new();
        for (i, at, v) in designated(ds) {
            for r1 in universe.subsets().filter(|r1| r1.is_subset(v.roles)) {
                let r2 = v.roles.difference(r1).expect("same universe");
                out.push(RuleArgs {
                    derivations: vec![ds[i].clone()],
                    positions: vec![at],
                    roles: vec![r1, r2],
                    label: format!("{} = {} ⊎ {}", v.roles, r1, r2),
                    ..RuleArgs::default()
                });
            }
        }
        Ok(out)
    }
}

impl AdmissibleRule for MpCut {
    fn name(&self) -> &'static str {
        "mp_cut"
    }

    fn statement(&self) -> &'static str {
        "(Γ1, [R1]A; …; Γn, [Rn]A) ⇒ Γ1, …, Γn  if R̄1, …, R̄n partition the universe"
    }

    fn apply(&self, engine: &mut Engine, args: &RuleArgs) -> Result<Derivation, TransformError> {
        engine.mp_cut(args.derivations.clone(), &args.positions)
    }

    fn conclusion(&self, args: &RuleArgs) -> Result<Sequent, TransformError> {
        (0..args.derivations.len()).try_fold(Sequent::empty(), |acc, i| Ok(acc.extended(&args.rest(i)?)))
    }

    fn instances(&self, pool: &mut PremisePool) -> Result<Vec<RuleArgs>, SearchError> {
        let full = pool.space.universe.full();
        let ds = pool.derivable()?;
        let all = designated(ds);
        let atomic: Vec<_> = all.iter().filter(|(i, _, _)| ds[*i].conclusion.total_measure() == 0).cloned().collect();
        let mut out = Vec::new();
        for &n in self.parties {
            let items = if n >= 3 { &atomic } else { &all };
            let mut chosen: Vec<usize> = Vec::with_capacity(n);
            extend_parties(items, n, full, &mut chosen, &mut |picked| {
                let labels: Vec<String> = picked.iter().map(|&k| items[k].2.roles.to_string()).collect();
                out.push(RuleArgs {
                    derivations: picked.iter().map(|&k| ds[items[k].0].clone()).collect(),
                    positions: picked.iter().map(|&k| items[k].1).collect(),
                    label: format!("n={n} {}", labels.join(" ")),
                    ..RuleArgs::default()
                });
            });
        }
        Ok(out)
    }
}

/// Ordered choices of `n` designated items over one formula whose role-set
/// complements partition `full`.
fn extend_parties(
    items: &[(usize, usize, IFormula)],
    n: usize,
    full: RoleSet,
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    let complements: Vec<RoleSet> = chosen.iter().map(|&k| items[k].2.roles.complement()).collect();
    if chosen.len() == n {
        if is_partition(&complements, full) {
            emit(chosen);
        }
        return;
    }
    let used = complements.iter().fold(full.complement(), |acc, &c| acc.union(c).expect("same universe"));
    for (k, (_, _, v)) in items.iter().enumerate() {
        if chosen.first().is_some_and(|&f| items[f].2.formula != v.formula) {
            continue;
        }
        if !v.roles.complement().is_disjoint(used) {
            continue;
        }
        chosen.push(k);
        extend_parties(items, n, full, chosen, emit);
        chosen.pop();
    }
}

impl AdmissibleRule for Weaken {
    fn name(&self) -> &'static str {
        "weaken"
    }

    fn statement(&self) -> &'static str {
        "(Γ) ⇒ Γ, [R]A  (in LMRL only for why-not items)"
    }

    fn apply(&self, engine: &mut Engine, args: &RuleArgs) -> Result<Derivation, TransformError> {
        let extra = args.extra.clone().ok_or_else(|| TransformError::Stuck("missing weakening item".into()))?;
        engine.admit_weakening(args.derivation(0)?.clone(), extra)
    }

    fn conclusion(&self, args: &RuleArgs) -> Result<Sequent, TransformError> {
        let extra = args.extra.clone().ok_or_else(|| TransformError::Stuck("missing weakening item".into()))?;
        Ok(args.derivation(0)?.conclusion.clone().with(extra))
    }

    fn instances(&self, pool: &mut PremisePool) -> Result<Vec<RuleArgs>, SearchError> {
        let lmrl = pool.space.mode == LogicMode::Lmrl;
        let extras: Vec<IFormula> = pool.space.iformulas().into_iter().filter(|x| !lmrl || is_why_not(x)).collect();
        let ds = pool.derivable()?;
        let mut out = Vec::new();
        for d in ds {
            for x in &extras {
                out.push(RuleArgs {
                    derivations: vec![d.clone()],
                    positions: vec![0],
                    extra: Some(x.clone()),
                    label: format!("+{}", x.roles),
                    ..RuleArgs::default()
                });
            }
        }
        Ok(out)
    }
}

/// Contexts for the rules that build derivations from nothing: empty, and
/// in MRL also every single item of the space.
fn contexts(pool: &PremisePool) -> Vec<Sequent> {
    let mut out = vec![Sequent::empty()];
    if pool.space.mode == LogicMode::Mrl {
        out.extend(pool.space.iformulas().into_iter().map(|x| Sequent::new(vec![x])));
    }
    out
}

impl AdmissibleRule for DeriveFull {
    fn name(&self) -> &'static str {
        "derive_full"
    }

    fn statement(&self) -> &'static str {
        "() ⇒ Γ, [R̄∅]A  (Γ empty in LMRL)"
    }

    fn apply(&self, engine: &mut Engine, args: &RuleArgs) -> Result<Derivation, TransformError> {
        engine.derive_full(args.formula()?, &args.context)
    }

    fn conclusion(&self, args: &RuleArgs) -> Result<Sequent, TransformError> {
        // `roles[0]` carries the full role set of the session's universe.
        Ok(args.context.clone().with(IFormula::new(args.role(0)?, args.formula()?.clone())))
    }

    fn instances(&self, pool: &mut PremisePool) -> Result<Vec<RuleArgs>, SearchError> {
        let full = pool.space.universe.full();
        let mut out = Vec::new();
        for ctx in contexts(pool) {
            for f in pool.space.formulas() {
                out.push(RuleArgs {
                    formula: Some(f),
                    roles: vec![full],
                    context: ctx.clone(),
                    label: format!("ctx={}", ctx.len()),
                    ..RuleArgs::default()
                });
            }
        }
        Ok(out)
    }
}

impl AdmissibleRule for IdentityExpand {
    fn name(&self) -> &'static str {
        "identity_expand"
    }

    fn statement(&self) -> &'static str {
        "() ⇒ Γ, [R]A, [R̄]A  (Γ empty in LMRL)"
    }

    fn apply(&self, engine: &mut Engine, args: &RuleArgs) -> Result<Derivation, TransformError> {
        engine.identity_expand(args.role(0)?, args.formula()?, &args.context)
    }

    fn conclusion(&self, args: &RuleArgs) -> Result<Sequent, TransformError> {
        let (r, a) = (args.role(0)?, args.formula()?);
        Ok(args.context.clone().with(IFormula::new(r, a.clone())).with(IFormula::new(r.complement(), a.clone())))
    }

    fn instances(&self, pool: &mut PremisePool) -> Result<Vec<RuleArgs>, SearchError> {
        let universe = pool.space.universe;
        let mut out = Vec::new();
        for ctx in contexts(pool) {
            for f in pool.space.formulas() {
                for r in universe.subsets() {
                    out.push(RuleArgs {
                        formula: Some(f.clone()),
                        roles: vec![r],
                        context: ctx.clone(),
                        label: format!("R={r}"),
                        ..RuleArgs::default()
                    });
                }
            }
        }
        Ok(out)
    }
}
