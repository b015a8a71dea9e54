use proptest::prelude::*;

use super::*;
use crate::checker::check;
use crate::search::EnumSpace;

fn mrl2() -> SessionHeader {
    SessionHeader::new(Universe::new(2).unwrap(), LogicMode::Mrl)
}

fn lmrl2() -> SessionHeader {
    SessionHeader::new(Universe::new(2).unwrap(), LogicMode::Lmrl)
}

#[test]
fn one_sequent_session() {
    let s = parse_session("(session 2 mrl)(seq (ifm [0] (atom a)) (ifm [1] (atom a)))").unwrap();
    assert_eq!(s.header, mrl2());
    assert_eq!(s.objects.len(), 1);
    let Object::Sequent(seq) = &s.objects[0].object else { panic!("not a sequent") };
    assert_eq!(seq.len(), 2);
    assert_eq!(s.objects[0].name, "0");
}

#[test]
fn out_of_range_role_is_a_universe_mismatch() {
    let err = parse_session("(session 2 mrl)(ifm [0,2] (atom a))").unwrap_err();
    assert!(matches!(err, ParseError::UniverseMismatch { .. }), "{err}");
    assert_eq!(err.pos(), Pos { line: 1, col: 21 });
}

#[test]
fn exponential_in_mrl_is_refused() {
    let err = parse_session("(session 2 mrl)(bang 0 (atom a))").unwrap_err();
    assert_eq!(err, ParseError::BangInMRL { pos: Pos { line: 1, col: 17 } });
    assert!(parse_session("(session 2 lmrl)(bang 0 (atom a))").is_ok());
}

#[test]
fn syntax_errors_carry_line_and_column() {
    let err = parse_session("(session 2 mrl)\n(seq (ifm [0] (atm a)))").unwrap_err();
    assert_eq!(err.code(), "SyntaxError");
    assert_eq!(err.pos(), Pos { line: 2, col: 16 });
    let err = parse_session("(session 2 mrl)\n(seq (ifm [0] (atom a))").unwrap_err();
    assert!(err.to_string().contains("unexpected end of input"), "{err}");
    assert!(parse_session("(sesion 2 mrl)").is_err());
    assert!(parse_session("(session 2 mrl)(ifm [0,x] (atom a))").is_err());
}

#[test]
fn wrong_endomorphism_arity_is_a_universe_mismatch() {
    let err = parse_formula("(neg [0] (atom a))", &mrl2()).unwrap_err();
    assert_eq!(err.code(), "UniverseMismatch");
    let err = parse_formula("(conj 2 (atom a) (atom a))", &mrl2()).unwrap_err();
    assert_eq!(err.code(), "UniverseMismatch");
}

#[test]
fn header_with_filter() {
    let s = parse_session("(session 2 mrl (filter [0]))").unwrap();
    assert_eq!(s.header.filter.unwrap().core(), Universe::new(2).unwrap().set([0]).unwrap());
    assert!(s.header.calculus().restriction.is_some());
    assert!(parse_session("(session 2 mrl (filter []))").is_err());
}

#[test]
fn forall_binders_are_alpha_invariant() {
    let h = mrl2();
    let f = parse_formula("(forall 0 x (atom p (var x)))", &h).unwrap();
    let g = parse_formula("(forall 0 y (atom p (var y)))", &h).unwrap();
    assert_eq!(f, g);
    let free = parse_formula("(forall 0 x (atom p (var y)))", &h).unwrap();
    assert_ne!(f, free);
    assert_eq!(parse_formula(&f.to_string(), &h).unwrap(), f);
}

#[test]
fn derivation_round_trips() {
    let text = "(d (seq (ifm [0,1] (conj 0 (atom a) (atom a)))) (rule conj-pos 0)
      (d (seq (ifm [0,1] (atom a))) (rule id [0]))
      (d (seq (ifm [0,1] (atom a))) (rule id [0])))";
    let d = parse_derivation(text, &mrl2()).unwrap();
    assert_eq!(check(&d, &mrl2().calculus()), Ok(()));
    let printed = print_derivation(&d);
    let again = parse_derivation(&printed, &mrl2()).unwrap();
    assert_eq!(print_derivation(&again), printed);
}

#[test]
fn every_rule_shape_round_trips() {
    let rules = [
        Rule::Id { parts: vec![0, 2] },
        Rule::Contract { at: 1 },
        Rule::ImpPos { at: 0, left: vec![1, 3] },
        Rule::ImpPos { at: 2, left: vec![] },
        Rule::ForallNeg { at: 0, witness: Term::app("f", vec![Term::cst("c"), Term::var("y")]) },
        Rule::ForallPos { at: 1, eigen: "z".into() },
        Rule::BangNegContract { at: 4 },
    ];
    for r in rules {
        let text = format!("(d (seq) {})", print_rule(&r));
        let d = parse_derivation(&text, &lmrl2()).unwrap();
        assert_eq!(d.rule, r);
    }
}

#[test]
fn defs_name_objects_and_duplicates_are_refused() {
    let s = parse_session("(session 2 mrl)\n(def g (seq (ifm [0] (atom a))))\n(atom b)").unwrap();
    assert!(s.get("g").is_some());
    assert_eq!(s.objects[1].name, "1");
    assert_eq!(s.objects[1].pos, Pos { line: 3, col: 1 });
    let err = parse_session("(session 2 mrl)(def g (atom a))(def g (atom b))").unwrap_err();
    assert!(err.to_string().contains("defined twice"));
}

#[test]
fn comments_are_skipped() {
    let s = parse_session("; header\n(session 3 lmrl) ; trailing\n(atom a) ; done").unwrap();
    assert_eq!(s.objects.len(), 1);
}

#[test]
fn fmt_is_idempotent_on_a_mixed_session() {
    let text = "(session 2 lmrl (filter [0]))  (def f (bang 1 (atom a)))\n(seq)\n(def d (d (seq (ifm [0] (atom a)) (ifm [1] (atom a))) (rule id [0,1])))";
    let once = format_session(text).unwrap();
    let twice = format_session(&once).unwrap();
    assert_eq!(once, twice);
    assert!(once.starts_with("(session 2 lmrl (filter [0]))\n"));
}

#[test]
fn deep_derivations_parse_and_print() {
    let h = mrl2();
    let mut deep = parse_derivation("(d (seq (ifm [0] (atom a)) (ifm [1] (atom a))) (rule id [0,1]))", &h).unwrap();
    for _ in 0..10_000 {
        // Contract the first item: the premise carries one extra copy.
        let mut concl = deep.conclusion.clone();
        let x = concl.items.remove(0);
        deep = Derivation::new(Sequent::new(vec![x]).extended(&concl), Rule::Contract { at: 0 }, vec![deep]);
    }
    let text = print_derivation(&deep);
    let back = parse_derivation(&text, &h).unwrap();
    assert_eq!(back.height(), 10_001);
}

fn space_formula() -> impl Strategy<Value = Formula> {
    let fs = EnumSpace::standard(2, 2, LogicMode::Lmrl).unwrap().formulas();
    prop::sample::select(fs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn formulas_round_trip(f in space_formula()) {
        prop_assert_eq!(parse_formula(&f.to_string(), &lmrl2()).unwrap(), f);
    }

    #[test]
    fn sequents_round_trip(fs in prop::collection::vec(space_formula(), 0..4), roles in prop::collection::vec(0usize..4, 4)) {
        let u = Universe::new(2).unwrap();
        let subsets: Vec<RoleSet> = u.subsets().collect();
        let s: Sequent = fs.into_iter().zip(roles).map(|(f, r)| IFormula::new(subsets[r], f)).collect();
        let back = parse_sequent(&s.to_string(), &lmrl2()).unwrap();
        prop_assert_eq!(back.items, s.items);
    }
}
