//! Terms, formulas, i-formulas and sequents.
//!
//! Bound variables are de Bruijn indices, so alpha-equivalent formulas are
//! structurally equal. Binder names survive only as printing hints and never
//! take part in comparisons.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::roles::{Endomorphism, RoleError, RoleSet, Ultrafilter, Universe};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    /// De Bruijn index of an enclosing `Forall`.
    Bound(usize),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn cst(name: impl Into<String>) -> Term {
        Term::App(name.into(), Vec::new())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    fn is_locally_closed(&self) -> bool {
        match self {
            Term::Var(_) => true,
            Term::Bound(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_locally_closed),
        }
    }

    fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Bound(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.free_vars_into(out)),
        }
    }

    fn names_into(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::Bound(_) => {}
            Term::App(f, args) => {
                out.insert(f.clone());
                args.iter().for_each(|a| a.names_into(out));
            }
        }
    }

    fn subst_free(&self, x: &str, t: &Term) -> Term {
        match self {
            Term::Var(y) if y == x => t.clone(),
            Term::Var(_) | Term::Bound(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.subst_free(x, t)).collect()),
        }
    }

    fn open(&self, depth: usize, t: &Term) -> Term {
        match self {
            Term::Bound(i) if *i == depth => t.clone(),
            Term::Var(_) | Term::Bound(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.open(depth, t)).collect()),
        }
    }

    fn close(&self, x: &str, depth: usize) -> Term {
        match self {
            Term::Var(y) if y == x => Term::Bound(depth),
            Term::Var(_) | Term::Bound(_) => self.clone(),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.close(x, depth)).collect()),
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, env: &[String]) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "(var {x})"),
            Term::Bound(i) => match env.len().checked_sub(i + 1).and_then(|k| env.get(k)) {
                Some(name) => write!(f, "(var {name})"),
                None => write!(f, "(bound {i})"),
            },
            Term::App(c, args) if args.is_empty() => write!(f, "(cst {c})"),
            Term::App(c, args) => {
                write!(f, "(app {c}")?;
                for a in args {
                    f.write_str(" ")?;
                    a.write(f, env)?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, &[])
    }
}

/// A printing hint for a bound variable. All hints compare equal.
#[derive(Debug, Clone, Default)]
pub struct BinderName(pub String);

impl PartialEq for BinderName {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}
impl Eq for BinderName {}
impl PartialOrd for BinderName {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for BinderName {
    fn cmp(&self, _: &Self) -> std::cmp::Ordering {
        std::cmp::Ordering::Equal
    }
}
impl std::hash::Hash for BinderName {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Neg(Endomorphism, Arc<Formula>),
    Conj(Ultrafilter, Arc<Formula>, Arc<Formula>),
    Impl(Endomorphism, Ultrafilter, Arc<Formula>, Arc<Formula>),
    Bang(Ultrafilter, Arc<Formula>),
    /// Body uses `Term::Bound(0)` for the bound variable.
    Forall(Ultrafilter, BinderName, Arc<Formula>),
}

impl Formula {
    pub fn atom(pred: impl Into<String>, args: Vec<Term>) -> Formula {
        Formula::Atom(Atom { pred: pred.into(), args })
    }

    /// A 0-ary atom.
    pub fn prop(pred: impl Into<String>) -> Formula {
        Formula::atom(pred, Vec::new())
    }

    pub fn neg(f: Endomorphism, a: Formula) -> Formula {
        Formula::Neg(f, Arc::new(a))
    }

    pub fn conj(u: Ultrafilter, a: Formula, b: Formula) -> Formula {
        Formula::Conj(u, Arc::new(a), Arc::new(b))
    }

    pub fn imp(f: Endomorphism, u: Ultrafilter, a: Formula, b: Formula) -> Formula {
        Formula::Impl(f, u, Arc::new(a), Arc::new(b))
    }

    pub fn bang(u: Ultrafilter, a: Formula) -> Formula {
        Formula::Bang(u, Arc::new(a))
    }

    /// `∀U(λx.body)`, binding the free occurrences of `x` in `body`.
    pub fn forall(u: Ultrafilter, x: &str, body: Formula) -> Formula {
        Formula::Forall(u, BinderName(x.to_string()), Arc::new(body.close(x, 0)))
    }

    /// Number of logical constructors. Terms and atoms contribute nothing,
    /// so instances of a quantified body are strictly smaller than the
    /// quantified formula.
    pub fn measure(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Neg(_, a) | Formula::Bang(_, a) | Formula::Forall(_, _, a) => 1 + a.measure(),
            Formula::Conj(_, a, b) | Formula::Impl(_, _, a, b) => 1 + a.measure() + b.measure(),
        }
    }

    pub fn contains_bang(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Bang(..) => true,
            Formula::Neg(_, a) | Formula::Forall(_, _, a) => a.contains_bang(),
            Formula::Conj(_, a, b) | Formula::Impl(_, _, a, b) => a.contains_bang() || b.contains_bang(),
        }
    }

    pub fn contains_forall(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Forall(..) => true,
            Formula::Neg(_, a) | Formula::Bang(_, a) => a.contains_forall(),
            Formula::Conj(_, a, b) | Formula::Impl(_, _, a, b) => a.contains_forall() || b.contains_forall(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.free_vars_into(&mut out);
        out
    }

    fn free_vars_into(&self, out: &mut BTreeSet<String>) {
        self.each_term(&mut |t| t.free_vars_into(out));
    }

    /// Every variable and function/predicate-free symbol name occurring in
    /// terms, used to pick names that cannot clash.
    pub fn names_into(&self, out: &mut BTreeSet<String>) {
        self.each_term(&mut |t| t.names_into(out));
        if let Formula::Forall(_, BinderName(x), _) = self {
            out.insert(x.clone());
        }
    }

    fn each_term(&self, visit: &mut dyn FnMut(&Term)) {
        match self {
            Formula::Atom(a) => a.args.iter().for_each(visit),
            Formula::Neg(_, a) | Formula::Bang(_, a) | Formula::Forall(_, _, a) => a.each_term(visit),
            Formula::Conj(_, a, b) | Formula::Impl(_, _, a, b) => {
                a.each_term(visit);
                b.each_term(visit);
            }
        }
    }

    fn map_terms(&self, depth: usize, g: &dyn Fn(&Term, usize) -> Term) -> Formula {
        match self {
            Formula::Atom(a) => Formula::Atom(Atom {
                pred: a.pred.clone(),
                args: a.args.iter().map(|t| g(t, depth)).collect(),
            }),
            Formula::Neg(f, a) => Formula::Neg(f.clone(), Arc::new(a.map_terms(depth, g))),
            Formula::Bang(u, a) => Formula::Bang(*u, Arc::new(a.map_terms(depth, g))),
            Formula::Forall(u, x, a) => Formula::Forall(*u, x.clone(), Arc::new(a.map_terms(depth + 1, g))),
            Formula::Conj(u, a, b) => {
                Formula::Conj(*u, Arc::new(a.map_terms(depth, g)), Arc::new(b.map_terms(depth, g)))
            }
            Formula::Impl(f, u, a, b) => Formula::Impl(
                f.clone(),
                *u,
                Arc::new(a.map_terms(depth, g)),
                Arc::new(b.map_terms(depth, g)),
            ),
        }
    }

    /// Capture-avoiding substitution of `t` for the free variable `x`.
    /// Capture cannot happen: bound variables are indices, and `t` is
    /// required to be locally closed.
    pub fn substitute(&self, x: &str, t: &Term) -> Formula {
        debug_assert!(t.is_locally_closed());
        self.map_terms(0, &|term, _| term.subst_free(x, t))
    }

    /// For a `Forall` body: replace the outermost bound variable by `t`.
    pub fn instantiate(&self, t: &Term) -> Formula {
        debug_assert!(t.is_locally_closed());
        self.map_terms(0, &|term, depth| term.open(depth, t))
    }

    fn close(&self, x: &str, depth: usize) -> Formula {
        self.map_terms(depth, &|term, d| term.close(x, d))
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, env: &mut Vec<String>) -> fmt::Result {
        match self {
            Formula::Atom(a) => {
                write!(f, "(atom {}", a.pred)?;
                for t in &a.args {
                    f.write_str(" ")?;
                    t.write(f, env)?;
                }
                f.write_str(")")
            }
            Formula::Neg(g, a) => {
                write!(f, "(neg {g} ")?;
                a.write(f, env)?;
                f.write_str(")")
            }
            Formula::Conj(u, a, b) => {
                write!(f, "(conj {} ", u.witness())?;
                a.write(f, env)?;
                f.write_str(" ")?;
                b.write(f, env)?;
                f.write_str(")")
            }
            Formula::Impl(g, u, a, b) => {
                write!(f, "(imp {g} {} ", u.witness())?;
                a.write(f, env)?;
                f.write_str(" ")?;
                b.write(f, env)?;
                f.write_str(")")
            }
            Formula::Bang(u, a) => {
                write!(f, "(bang {} ", u.witness())?;
                a.write(f, env)?;
                f.write_str(")")
            }
            Formula::Forall(u, BinderName(hint), a) => {
                let mut taken = a.free_vars();
                taken.extend(env.iter().cloned());
                let base = if hint.is_empty() { "x".to_string() } else { hint.clone() };
                let mut name = base.clone();
                while taken.contains(&name) {
                    name.push('\'');
                }
                write!(f, "(forall {} {name} ", u.witness())?;
                env.push(name);
                let res = a.write(f, env);
                env.pop();
                res?;
                f.write_str(")")
            }
        }
    }

    /// Checks every role-level parameter against `universe`.
    pub fn validate(&self, universe: Universe) -> Result<(), RoleError> {
        match self {
            Formula::Atom(_) => Ok(()),
            Formula::Neg(g, a) => {
                universe.check_endomorphism(g)?;
                a.validate(universe)
            }
            Formula::Conj(u, a, b) => {
                universe.check_ultrafilter(*u)?;
                a.validate(universe)?;
                b.validate(universe)
            }
            Formula::Impl(g, u, a, b) => {
                universe.check_endomorphism(g)?;
                universe.check_ultrafilter(*u)?;
                a.validate(universe)?;
                b.validate(universe)
            }
            Formula::Bang(u, a) | Formula::Forall(u, _, a) => {
                universe.check_ultrafilter(*u)?;
                a.validate(universe)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, &mut Vec::new())
    }
}

/// `A ⊗U B`, shorthand for the implication with the identity endomorphism.
pub fn tensor(universe: Universe, u: Ultrafilter, a: Formula, b: Formula) -> Formula {
    Formula::imp(universe.identity(), u, a, b)
}

/// An i-formula `[R]A`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IFormula {
    pub roles: RoleSet,
    pub formula: Formula,
}

impl IFormula {
    pub fn new(roles: RoleSet, formula: Formula) -> Self {
        IFormula { roles, formula }
    }
}

impl fmt::Display for IFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(ifm {} {})", self.roles, self.formula)
    }
}

/// A multiset of i-formulas. Item order is presentation only; positions are
/// used to address principal items.
#[derive(Debug, Clone, Default)]
pub struct Sequent {
    pub items: Vec<IFormula>,
}

impl Sequent {
    pub fn new(items: Vec<IFormula>) -> Self {
        Sequent { items }
    }

    pub fn empty() -> Self {
        Sequent { items: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, pos: usize) -> Option<&IFormula> {
        self.items.get(pos)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, IFormula> {
        self.items.iter()
    }

    pub fn push(&mut self, item: IFormula) {
        self.items.push(item);
    }

    pub fn with(mut self, item: IFormula) -> Self {
        self.items.push(item);
        self
    }

    pub fn extended(mut self, other: &Sequent) -> Self {
        self.items.extend(other.items.iter().cloned());
        self
    }

    pub fn count(&self, item: &IFormula) -> usize {
        self.items.iter().filter(|i| *i == item).count()
    }

    pub fn position(&self, item: &IFormula) -> Option<usize> {
        self.items.iter().position(|i| i == item)
    }

    /// Removes one occurrence of `item`; returns whether one was present.
    pub fn remove_one(&mut self, item: &IFormula) -> bool {
        match self.position(item) {
            Some(p) => {
                self.items.remove(p);
                true
            }
            None => false,
        }
    }

    /// The sequent without the item at `pos`.
    pub fn without(&self, pos: usize) -> Sequent {
        let mut items = self.items.clone();
        items.remove(pos);
        Sequent { items }
    }

    /// Multiset difference; `None` when `other` is not contained in `self`.
    pub fn minus(&self, other: &Sequent) -> Option<Sequent> {
        let mut out = self.clone();
        for item in &other.items {
            if !out.remove_one(item) {
                return None;
            }
        }
        Some(out)
    }

    pub fn sorted(&self) -> Vec<IFormula> {
        let mut v = self.items.clone();
        v.sort();
        v
    }

    pub fn canonical(&self) -> Sequent {
        Sequent { items: self.sorted() }
    }

    pub fn multiset_eq(&self, other: &Sequent) -> bool {
        self.items.len() == other.items.len() && self.sorted() == other.sorted()
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for item in &self.items {
            item.formula.free_vars_into(&mut out);
        }
        out
    }

    pub fn total_measure(&self) -> usize {
        self.items.iter().map(|i| i.formula.measure()).sum()
    }

    pub fn substitute(&self, x: &str, t: &Term) -> Sequent {
        Sequent {
            items: self
                .items
                .iter()
                .map(|i| IFormula::new(i.roles, i.formula.substitute(x, t)))
                .collect(),
        }
    }
}

impl PartialEq for Sequent {
    fn eq(&self, other: &Self) -> bool {
        self.multiset_eq(other)
    }
}
impl Eq for Sequent {}

impl std::hash::Hash for Sequent {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.sorted().hash(state)
    }
}

impl FromIterator<IFormula> for Sequent {
    fn from_iter<I: IntoIterator<Item = IFormula>>(iter: I) -> Self {
        Sequent { items: iter.into_iter().collect() }
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(seq")?;
        for item in &self.items {
            write!(f, " {item}")?;
        }
        f.write_str(")")
    }
}

/// Produces variable names not occurring in an avoid set. One generator is
/// shared across a transformation session so names never repeat.
#[derive(Debug, Default)]
pub struct FreshNames {
    counter: usize,
}

impl FreshNames {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh(&mut self, avoid: &BTreeSet<String>) -> String {
        loop {
            self.counter += 1;
            let name = format!("_v{}", self.counter);
            if !avoid.contains(&name) {
                return name;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n2() -> Universe {
        Universe::new(2).unwrap()
    }

    fn p(args: &[Term]) -> Formula {
        Formula::atom("p", args.to_vec())
    }

    #[test]
    fn substitute_examples() {
        let u0 = n2().ultrafilter(0).unwrap();
        let (x, y, c) = (Term::var("x"), Term::var("y"), Term::cst("c"));
        assert_eq!(p(std::slice::from_ref(&x)).substitute("x", &c), p(std::slice::from_ref(&c)));
        let under = Formula::forall(u0, "x", p(&[x.clone(), y.clone()]));
        assert_eq!(under.substitute("y", &c), Formula::forall(u0, "x", p(&[x.clone(), c.clone()])));
        let shadowed = Formula::forall(u0, "x", p(std::slice::from_ref(&x)));
        assert_eq!(shadowed.substitute("x", &c), shadowed);
    }

    #[test]
    fn substitution_does_not_capture() {
        let u0 = n2().ultrafilter(0).unwrap();
        let a = Formula::forall(u0, "x", p(&[Term::var("x"), Term::var("y")]));
        let b = a.substitute("y", &Term::var("x"));
        let Formula::Forall(_, _, body) = &b else { panic!() };
        assert_eq!(**body, p(&[Term::Bound(0), Term::var("x")]));
        assert_eq!(b.free_vars(), BTreeSet::from(["x".to_string()]));
        assert_eq!(b.to_string(), "(forall 0 x' (atom p (var x') (var x)))");
    }

    #[test]
    fn alpha_equivalence() {
        let u0 = n2().ultrafilter(0).unwrap();
        let a = Formula::forall(u0, "x", p(&[Term::var("x")]));
        let b = Formula::forall(u0, "z", p(&[Term::var("z")]));
        assert_eq!(a, b);
        let c = Formula::forall(n2().ultrafilter(1).unwrap(), "x", p(&[Term::var("x")]));
        assert_ne!(a, c);
    }

    #[test]
    fn measure_examples() {
        let n = n2();
        let u0 = n.ultrafilter(0).unwrap();
        assert_eq!(p(&[Term::cst("c")]).measure(), 0);
        let q = Formula::forall(u0, "x", p(&[Term::var("x")]));
        assert_eq!(q.measure(), 1);
        let Formula::Forall(_, _, body) = &q else { panic!() };
        let t = Term::app("f", vec![Term::cst("c"), Term::var("z")]);
        assert_eq!(body.instantiate(&t).measure(), 0);
        let a = Formula::prop("a");
        let b = Formula::prop("b");
        assert_eq!(Formula::neg(n.rotation(), Formula::conj(u0, a, b)).measure(), 2);
    }

    #[test]
    fn tensor_is_identity_implication() {
        let n = n2();
        let u0 = n.ultrafilter(0).unwrap();
        let (a, b) = (Formula::prop("a"), Formula::prop("b"));
        let t = tensor(n, u0, a.clone(), b.clone());
        assert_eq!(t, Formula::imp(n.identity(), u0, a.clone(), b.clone()));
        assert_ne!(t, Formula::imp(n.rotation(), u0, a, b));
        let r = n.set([0]).unwrap();
        assert_eq!(n.identity().preimage(r).unwrap(), r);
    }

    #[test]
    fn free_vars_examples() {
        let u0 = n2().ultrafilter(0).unwrap();
        let (x, y) = (Term::var("x"), Term::var("y"));
        let both: BTreeSet<String> = ["x", "y"].iter().map(|s| s.to_string()).collect();
        assert_eq!(p(&[x.clone(), y.clone()]).free_vars(), both);
        assert_eq!(
            Formula::forall(u0, "x", p(&[x, y])).free_vars(),
            BTreeSet::from(["y".to_string()])
        );
        assert!(Sequent::empty().free_vars().is_empty());
    }

    #[test]
    fn sequent_multiset_semantics() {
        let n = n2();
        let a = IFormula::new(n.set([0]).unwrap(), Formula::prop("a"));
        let b = IFormula::new(n.set([1]).unwrap(), Formula::prop("a"));
        let s1 = Sequent::new(vec![a.clone(), b.clone(), a.clone()]);
        let s2 = Sequent::new(vec![b.clone(), a.clone(), a.clone()]);
        assert_eq!(s1, s2);
        assert_ne!(s1, Sequent::new(vec![a.clone(), b.clone(), b.clone()]));
        assert_eq!(s1.minus(&Sequent::new(vec![a.clone(), a.clone()])), Some(Sequent::new(vec![b.clone()])));
        assert_eq!(s1.minus(&Sequent::new(vec![b.clone(), b])), None);
        assert_eq!(s1.count(&a), 2);
    }

    #[test]
    fn printing() {
        let n = n2();
        let u1 = n.ultrafilter(1).unwrap();
        let f = Formula::imp(
            n.rotation(),
            u1,
            Formula::atom("p", vec![Term::app("f", vec![Term::cst("c")])]),
            Formula::bang(u1, Formula::prop("b")),
        );
        assert_eq!(f.to_string(), "(imp [1,0] 1 (atom p (app f (cst c))) (bang 1 (atom b)))");
        let i = IFormula::new(n.set([0]).unwrap(), Formula::prop("a"));
        assert_eq!(Sequent::new(vec![i]).to_string(), "(seq (ifm [0] (atom a)))");
    }

    #[test]
    fn fresh_names_avoid() {
        let mut fresh = FreshNames::new();
        let avoid = BTreeSet::from(["_v1".to_string()]);
        assert_eq!(fresh.fresh(&avoid), "_v2");
        assert_eq!(fresh.fresh(&avoid), "_v3");
    }
}
