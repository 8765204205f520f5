use dijkstra_core::signature::Signature;
use dijkstra_core::syntax::{Kind, Term};
use dijkstra_core::validity::validity;
use dijkstra_core::vc::{conjunctive, predicate_free, stronger_than, stronger_than_literal};
use proptest::prelude::*;

fn base() -> impl Strategy<Value = Term> {
    prop_oneof![
        Just(Term::int_ty()),
        Just(Term::bool_ty()),
        Just(Term::unit_ty()),
        Just(Term::var("X")),
    ]
}

/// Predicate-free types of bounded depth.
fn pf_type() -> impl Strategy<Value = Term> {
    base().prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::prod(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::sum(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Term::arrow(a, b)),
        ]
    })
}

/// Types in the image of the type translation: predicate-free types and
/// weakest-precondition types over them.
fn wp_type() -> impl Strategy<Value = Term> {
    (pf_type(), prop::option::of(pf_type())).prop_map(|(a, s)| {
        let wp = Term::arrow(Term::arrow(a, Term::type0()), Term::type0());
        match s {
            Some(s) => Term::arrow(s, wp),
            None => wp,
        }
    })
}

fn closed(t: &Term, phi: Term) -> Term {
    let body = Term::forall("x", t.clone(), Term::forall("y", t.clone(), phi));
    Term::forall("X", Term::type0(), body)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stronger_is_symmetric_at_predicate_free_types(t in pf_type()) {
        prop_assert!(predicate_free(&t));
        let (x, y) = (Term::var("x"), Term::var("y"));
        let phi = Term::implies(stronger_than(&t, &x, &y).unwrap(), stronger_than(&t, &y, &x).unwrap());
        let v = validity(&Signature::new(), &[], &closed(&t, phi));
        prop_assert!(v.is_valid(), "{t}: {v}");
    }

    #[test]
    fn equal_terms_are_related_at_predicate_free_types(t in pf_type()) {
        let (x, y) = (Term::var("x"), Term::var("y"));
        let phi = Term::implies(Term::eq(t.clone(), x.clone(), y.clone()), stronger_than_literal(&t, &x, &y).unwrap());
        let v = validity(&Signature::new(), &[], &closed(&t, phi));
        prop_assert!(v.is_valid(), "{t}: {v}");
    }

    #[test]
    fn arrow_clause_relates_applications(d in wp_type(), c in wp_type()) {
        let t = Term::arrow(d.clone(), c.clone());
        let (f, g) = (Term::var("f"), Term::var("g"));
        let phi = stronger_than_literal(&t, &f, &g).unwrap();
        let Kind::Forall(a, _, rest) = phi.kind() else { panic!("{phi}") };
        let Kind::Forall(b, _, rest) = rest.kind() else { panic!("{phi}") };
        let Kind::Implies(prem, concl) = rest.kind() else { panic!("{phi}") };
        let (va, vb) = (Term::var_n(a), Term::var_n(b));
        let want = stronger_than_literal(&c, &Term::app(f.clone(), va.clone()), &Term::app(g.clone(), vb.clone())).unwrap();
        prop_assert!(concl.alpha_eq(&want));
        let triple = Term::ands(vec![
            stronger_than_literal(&d, &va, &va).unwrap(),
            stronger_than_literal(&d, &va, &vb).unwrap(),
            stronger_than_literal(&d, &vb, &vb).unwrap(),
        ]);
        prop_assert!(prem.alpha_eq(&triple));
    }

    #[test]
    fn conjunctivity_is_pointwise_at_arrows(d in pf_type(), c in wp_type()) {
        let t = Term::arrow(d, c.clone());
        let w = Term::var("w");
        let phi = conjunctive(&t, &w).unwrap();
        let Kind::Forall(x, _, body) = phi.kind() else { panic!("{phi}") };
        let want = conjunctive(&c, &Term::app(w.clone(), Term::var_n(x))).unwrap();
        prop_assert!(body.alpha_eq(&want), "{phi}");
    }

    #[test]
    fn predicate_free_types_are_trivially_conjunctive(t in pf_type()) {
        prop_assert!(matches!(conjunctive(&t, &Term::var("w")).unwrap().kind(), Kind::True));
    }
}
