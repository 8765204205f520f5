use dijkstra_core::gen::gen_closed;
use dijkstra_core::print::sexp;
use dijkstra_core::sexp::parse_term;
use dijkstra_core::syntax::PrimOp;
use dijkstra_core::{Checker, Ctx, Signature, Term};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Term skeletons with binders referenced by index, so one skeleton can be
/// rendered with different binder names.
#[derive(Clone, Debug)]
enum Shape {
    Free(bool),
    Bound(usize),
    Int(i64),
    Lam(Box<Shape>),
    App(Box<Shape>, Box<Shape>),
    Pair(Box<Shape>, Box<Shape>),
    Add(Box<Shape>, Box<Shape>),
}

fn shape() -> impl Strategy<Value = Shape> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(Shape::Free),
        (0usize..4).prop_map(Shape::Bound),
        (-9i64..10).prop_map(Shape::Int),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|b| Shape::Lam(Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::App(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Shape::Pair(Box::new(a), Box::new(b))),
            (inner.clone(), inner).prop_map(|(a, b)| Shape::Add(Box::new(a), Box::new(b))),
        ]
    })
}

/// Renders `s` naming the binder at depth `d` by `binder(d)`. Free variables
/// are `x` and `w`.
fn render(s: &Shape, binder: &dyn Fn(usize) -> String, depth: usize) -> Term {
    match s {
        Shape::Free(b) => Term::var(if *b { "x" } else { "w" }),
        Shape::Bound(k) if depth > 0 => Term::var(&binder(depth - 1 - k % depth)),
        Shape::Bound(_) => Term::var("x"),
        Shape::Int(n) => Term::int(*n),
        Shape::Lam(b) => Term::lam(&binder(depth), Term::int_ty(), render(b, binder, depth + 1)),
        Shape::App(a, b) => Term::app(render(a, binder, depth), render(b, binder, depth)),
        Shape::Pair(a, b) => Term::pair(render(a, binder, depth), render(b, binder, depth)),
        Shape::Add(a, b) => Term::binop(PrimOp::Add, render(a, binder, depth), render(b, binder, depth)),
    }
}

/// Binder names that collide with the free variables of the substituted term.
fn capturing(d: usize) -> String {
    ["y", "z"].get(d).map(|s| s.to_string()).unwrap_or_else(|| format!("y{d}"))
}

fn plain(d: usize) -> String {
    format!("b{d}")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn renderings_of_one_shape_are_alpha_equivalent(s in shape()) {
        prop_assert!(render(&s, &capturing, 0).alpha_eq(&render(&s, &plain, 0)));
    }

    #[test]
    fn substitution_respects_alpha_equivalence(s in shape(), k in -5i64..5) {
        let (e1, e2) = (render(&s, &capturing, 0), render(&s, &plain, 0));
        let v = Term::binop(PrimOp::Add, Term::var("y"), Term::binop(PrimOp::Add, Term::var("z"), Term::int(k)));
        let (r1, r2) = (e1.subst("x", &v), e2.subst("x", &v));
        prop_assert!(r1.alpha_eq(&r2), "{} vs {}", r1, r2);
        prop_assert!(!r1.has_free("x"));
        if e1.has_free("x") {
            prop_assert!(r1.has_free("y") && r1.has_free("z"));
        }
    }

    #[test]
    fn sexp_round_trips_on_skeletons(s in shape()) {
        let t = render(&s, &capturing, 0);
        let back = parse_term(&sexp(&t)).unwrap();
        prop_assert!(back.alpha_eq(&t));
    }

    #[test]
    fn sexp_round_trips_on_generated_terms(seed in any::<u64>()) {
        let sig = dijkstra_core::corpus::corpus_signature().unwrap();
        let t = gen_closed(&sig, &mut ChaCha8Rng::seed_from_u64(seed), 4).term;
        let back = parse_term(&sexp(&t)).unwrap();
        prop_assert!(back.alpha_eq(&t), "{}", sexp(&t));
    }

    #[test]
    fn universes_are_cumulative_levels(i in 0u32..6, k in -5i64..5) {
        let sig = Signature::new();
        let chk = Checker::new(&sig);
        let ctx = Ctx::new();
        prop_assert_eq!(chk.universe(&ctx, &Term::univ(i)).unwrap(), i + 1);
        let refined = Term::refine(
            "n",
            Term::int_ty(),
            Term::eq(Term::bool_ty(), Term::binop(PrimOp::Lt, Term::int(k), Term::var("n")), Term::bool(true)),
        );
        prop_assert_eq!(chk.universe(&ctx, &refined).unwrap(), chk.universe(&ctx, &Term::int_ty()).unwrap());
        let arrow = Term::arrow(Term::univ(i), Term::int_ty());
        prop_assert_eq!(chk.universe(&ctx, &arrow).unwrap(), i + 1);
    }
}
