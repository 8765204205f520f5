use dijkstra_core::corpus::corpus_signature;
use dijkstra_core::eval::{is_value, normalize, plug, positions, step, Step, DEFAULT_FUEL};
use dijkstra_core::gen::{check_subject_reduction, gen_closed};
use dijkstra_core::state::{classify_context, gen_stateful, oracle, simulate_check, to_emf, Sort, StTerm};
use dijkstra_core::syntax::PURE;
use dijkstra_core::{Kind, Signature, Term};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sig() -> Signature {
    corpus_signature().unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn step_is_a_function(seed in any::<u64>()) {
        let sig = sig();
        let mut cur = gen_closed(&sig, &mut rng(seed), 4).term;
        for _ in 0..200 {
            let (a, b) = (step(&sig, &cur), step(&sig, &cur));
            match (a, b) {
                (Step::Next(t1, r1), Step::Next(t2, r2)) => {
                    prop_assert!(t1.alpha_eq(&t2) && r1 == r2);
                    cur = t1;
                }
                (Step::Stuck, Step::Stuck) => break,
                _ => prop_assert!(false, "step disagreed with itself on {}", cur),
            }
        }
    }

    #[test]
    fn decomposition_and_plugging_are_inverse(seed in any::<u64>()) {
        let sig = sig();
        let t = gen_closed(&sig, &mut rng(seed), 3).term;
        for (ctx, sub) in positions(&t) {
            prop_assert!(plug(&ctx, sub).alpha_eq(&t));
        }
    }

    #[test]
    fn closed_normal_forms_are_values(seed in any::<u64>()) {
        let sig = sig();
        let s = gen_closed(&sig, &mut rng(seed), 4);
        let n = normalize(&sig, &s.term, DEFAULT_FUEL).unwrap();
        prop_assert_eq!(step(&sig, &n), Step::Stuck);
        prop_assert!(is_value(&sig, &n), "{}", n);
        if let Some(v) = s.value {
            prop_assert!(n.alpha_eq(&v), "{} vs {}", n, v);
        }
    }

    #[test]
    fn effectful_computations_wait_for_reify(seed in any::<u64>(), depth in 1usize..6) {
        let sig = sig();
        let n = normalize(&sig, &to_emf(&gen_stateful(&mut rng(seed), depth)), DEFAULT_FUEL).unwrap();
        let head_eff = match n.kind() {
            Kind::Return(m, ..) => m.clone(),
            Kind::Bind { eff, .. } | Kind::Act { eff, .. } => eff.clone(),
            _ => return Err(TestCaseError::fail(format!("unexpected normal form {n}"))),
        };
        prop_assert!(&*head_eff != PURE, "{}", n);
    }

    #[test]
    fn reduction_preserves_types(seed in any::<u64>(), random in any::<bool>()) {
        let sig = sig();
        let t = gen_closed(&sig, &mut rng(seed), 4).term;
        let r = if random {
            check_subject_reduction(&sig, &t, DEFAULT_FUEL, Some(&mut rng(seed ^ 1)))
        } else {
            check_subject_reduction(&sig, &t, DEFAULT_FUEL, None::<&mut ChaCha8Rng>)
        };
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }

    #[test]
    fn reified_programs_simulate_and_agree_with_the_oracle(
        seed in any::<u64>(),
        depth in 1usize..7,
        s0 in -10i64..=10,
    ) {
        let sig = sig();
        let p = gen_stateful(&mut rng(seed), depth);
        let e = to_emf(&p);
        let k = classify_context(&sig, &Term::app(Term::reify(e.clone()), Term::int(s0)));
        prop_assert_eq!(k.map(|k| k.sort).ok(), Some(Sort::Active));
        let rep = simulate_check(&sig, &e, s0, DEFAULT_FUEL);
        prop_assert!(rep.ok(), "{}: {}", p, rep.to_sexp());
        let (v, s) = oracle(&p, s0);
        let want = Some((v.to_st(), StTerm::int(s)));
        prop_assert_eq!(&rep.st_result, &want);
        prop_assert_eq!(&rep.emf_result, &want);
    }
}
