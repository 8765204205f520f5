use dijkstra_core::cps::cps_term;
use dijkstra_core::dm::{classify, typecheck_dm, DmCtx, DmTerm, DmType, Eff};
use dijkstra_core::elab::{elab_f, elab_term};
use dijkstra_core::syntax::{name, PrimOp};
use dijkstra_core::{validity, Checker, Ctx, Signature, Term};
use proptest::prelude::*;

/// Integer expressions over the free variable `n`.
#[derive(Clone, Debug)]
enum IntExpr {
    Lit(i64),
    N,
    Add(Box<IntExpr>, Box<IntExpr>),
    IfLt(Box<IntExpr>, Box<IntExpr>, Box<IntExpr>, Box<IntExpr>),
    Beta(Box<IntExpr>),
    FstPair(Box<IntExpr>, Box<IntExpr>),
    CaseInl(Box<IntExpr>),
}

fn int_expr() -> impl Strategy<Value = IntExpr> {
    prop_oneof![(-9i64..10).prop_map(IntExpr::Lit), Just(IntExpr::N)].prop_recursive(4, 24, 4, |inner| {
        let b = |e: IntExpr| Box::new(e);
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| IntExpr::Add(b(x), b(y))),
            (inner.clone(), inner.clone(), inner.clone(), inner.clone())
                .prop_map(move |(p, q, x, y)| IntExpr::IfLt(b(p), b(q), b(x), b(y))),
            inner.clone().prop_map(move |x| IntExpr::Beta(b(x))),
            (inner.clone(), inner.clone()).prop_map(move |(x, y)| IntExpr::FstPair(b(x), b(y))),
            inner.prop_map(move |x| IntExpr::CaseInl(b(x))),
        ]
    })
}

fn add(a: DmTerm, b: DmTerm) -> DmTerm {
    DmTerm::Op(PrimOp::Add, vec![a, b])
}

fn dm(e: &IntExpr) -> DmTerm {
    match e {
        IntExpr::Lit(k) => DmTerm::int(*k),
        IntExpr::N => DmTerm::var("n"),
        IntExpr::Add(a, b) => add(dm(a), dm(b)),
        IntExpr::IfLt(p, q, a, b) => DmTerm::If(
            Box::new(DmTerm::Op(PrimOp::Lt, vec![dm(p), dm(q)])),
            Box::new(dm(a)),
            Box::new(dm(b)),
        ),
        IntExpr::Beta(a) => DmTerm::app(
            DmTerm::lam("y", DmType::int(), add(DmTerm::var("y"), DmTerm::var("y"))),
            dm(a),
        ),
        IntExpr::FstPair(a, b) => DmTerm::fst(DmTerm::pair(dm(a), dm(b))),
        IntExpr::CaseInl(a) => DmTerm::case(
            DmTerm::Inl(Box::new(dm(a)), DmType::bool()),
            "y",
            add(DmTerm::var("y"), DmTerm::int(0)),
            "z",
            DmTerm::int(0),
        ),
    }
}

/// `fun (m:int -> tau int) -> bind x = m e1 in return (x + e2)`
fn monadic(e1: &IntExpr, e2: &IntExpr) -> DmTerm {
    let m_ty = DmType::tau_arrow(DmType::int(), DmType::int());
    DmTerm::lam(
        "m",
        m_ty,
        DmTerm::bind(
            DmTerm::app(DmTerm::var("m"), dm(e1)),
            "x",
            DmTerm::ret(add(DmTerm::var("x"), dm(e2))),
        ),
    )
}

fn ctx_with_n() -> DmCtx {
    DmCtx {
        delta: vec![],
        gamma: vec![(name("n"), DmType::int())],
    }
}

fn dm_type() -> impl Strategy<Value = DmType> {
    let leaf = prop_oneof![
        Just(DmType::int()),
        Just(DmType::bool()),
        Just(DmType::var("a")),
        Just(DmType::var("b")),
        Just(DmType::var("c")),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(x, y)| DmType::arrow(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| DmType::tau_arrow(x, y)),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| DmType::sum(x, y)),
            (inner.clone(), inner).prop_map(|(x, y)| DmType::prod(x, y)),
        ]
    })
}

fn gt(k: i64) -> Term {
    Term::refine(
        "v",
        Term::int_ty(),
        Term::eq(Term::bool_ty(), Term::binop(PrimOp::Lt, Term::int(k), Term::var("v")), Term::bool(true)),
    )
}

/// `λx p. p (x + k)` or, flipped, `λx p. p (k + x)`.
fn shift_wp(k: i64, flipped: bool) -> Term {
    let (x, kk) = (Term::var("x"), Term::int(k));
    let arg = if flipped { Term::binop(PrimOp::Add, kk, x) } else { Term::binop(PrimOp::Add, x, kk) };
    let post = Term::arrow(Term::int_ty(), Term::type0());
    Term::lam("x", Term::int_ty(), Term::lam("p", post, Term::app(Term::var("p"), arg)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dm_types_are_unique_and_stable_under_weakening(e in int_expr(), e2 in int_expr()) {
        let wide = DmCtx {
            delta: vec![name("c")],
            gamma: vec![(name("q"), DmType::bool()), (name("n"), DmType::int())],
        };
        for t in [dm(&e), monadic(&e, &e2)] {
            let d1 = typecheck_dm(&ctx_with_n(), &t).unwrap();
            let d2 = typecheck_dm(&wide, &t).unwrap();
            prop_assert_eq!((&d1.ty, d1.eff), (&d2.ty, d2.eff));
        }
        let d = typecheck_dm(&ctx_with_n(), &dm(&e)).unwrap();
        prop_assert_eq!((d.ty, d.eff), (DmType::int(), Eff::N));
    }

    #[test]
    fn cps_commutes_with_substitution(e in int_expr(), e2 in int_expr(), k in -9i64..10) {
        let closed = DmCtx::default();
        for t in [dm(&e), monadic(&e, &e2)] {
            let open = cps_term(&typecheck_dm(&ctx_with_n(), &t).unwrap());
            let inst = cps_term(&typecheck_dm(&closed, &t.subst("n", &DmTerm::int(k))).unwrap());
            let lhs = open.subst("n", &Term::int(k));
            prop_assert!(lhs.alpha_eq(&inst), "{} vs {}", lhs, inst);
        }
    }

    #[test]
    fn tau_free_terms_elaborate_to_their_translation(e in int_expr()) {
        let ctx = ctx_with_n();
        let d = typecheck_dm(&ctx, &dm(&e)).unwrap();
        let el = elab_term(&[], &ctx.gamma, &d);
        prop_assert!(el.term.alpha_eq(&cps_term(&d)), "{} vs {}", el.term, cps_term(&d));
    }

    #[test]
    fn classification_is_stable_under_weakening(t in dm_type()) {
        let (ab, abc) = ([name("a"), name("b")], [name("a"), name("b"), name("c"), name("d")]);
        if let Ok(s) = classify(&ab, &t) {
            prop_assert_eq!(classify(&abc, &t), Ok(s));
        }
    }

    #[test]
    fn refinement_subtyping_is_a_preorder(a in -5i64..5, b in -5i64..5, c in -5i64..5) {
        let sig = Signature::new();
        let chk = Checker::new(&sig);
        let ctx = Ctx::new();
        let sub = |x: &Term, y: &Term| chk.subtype(&ctx, x, y).is_ok();
        let (ta, tb, tc) = (gt(a), gt(b), gt(c));
        prop_assert!(sub(&ta, &ta));
        prop_assert!(sub(&ta, &Term::int_ty()));
        prop_assert!(!sub(&ta, &tb) || a >= b);
        if sub(&ta, &tb) && sub(&tb, &tc) {
            prop_assert!(sub(&ta, &tc));
        }
    }

    #[test]
    fn validity_is_monotone_under_extension(a in -20i64..20, b in -20i64..20, off in 0i64..2) {
        let sig = Signature::new();
        let (x, int) = (Term::var("x"), Term::int_ty());
        let phi = Term::implies(
            Term::eq(int.clone(), x.clone(), Term::int(a)),
            Term::eq(int.clone(), Term::binop(PrimOp::Add, x, Term::int(b)), Term::int(a + b + off)),
        );
        let small = [(name("x"), int.clone())];
        let large = [(name("x"), int.clone()), (name("z"), int.clone()), (name("t"), Term::type0())];
        let v = validity(&sig, &small, &phi);
        prop_assert_eq!(v.is_valid(), off == 0);
        if v.is_valid() {
            prop_assert!(validity(&sig, &large, &phi).is_valid());
        }
    }

    #[test]
    fn equal_specifications_give_interchangeable_types(k in -9i64..10) {
        let sig = Signature::new();
        let chk = Checker::new(&sig);
        let c = DmType::tau_arrow(DmType::int(), DmType::int());
        let f = |w: Term| elab_f(&[], &c, &w);
        let (f1, f2) = (f(shift_wp(k, false)), f(shift_wp(k, true)));
        prop_assert!(chk.subtype(&Ctx::new(), &f1, &f2).is_ok());
        prop_assert!(chk.subtype(&Ctx::new(), &f2, &f1).is_ok());
        let other = f(shift_wp(k + 1, false));
        prop_assert!(chk.subtype(&Ctx::new(), &f1, &other).is_err());
    }
}
