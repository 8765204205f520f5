//! The acceptance criteria, one PASS/FAIL line each.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dijkstra_core::corpus::{corpus_signature, load_corpus};
use dijkstra_core::cps::cps_checked;
use dijkstra_core::dm::DmFile;
use dijkstra_core::elab::{elab_checked, install_effect};
use dijkstra_core::eval::{normalize, DEFAULT_FUEL};
use dijkstra_core::gen::{check_subject_reduction, check_total_correctness, gen_closed, gen_pure_program};
use dijkstra_core::golden::{compare_printed, elaborate_file, parse_golden, translate_file, Entry};
use dijkstra_core::norm::nf;
use dijkstra_core::sexp::parse_term;
use dijkstra_core::state::{incr, simulate_check, simulate_suite, to_emf, Sort, StTerm};
use dijkstra_core::vc::{
    conjunctive, discharge, effect_vcs, monad_law_vcs, morphism_vcs, stronger_than, VcKind,
};
use dijkstra_core::{eqpres, Signature, Term};

const SECOND: Duration = Duration::from_secs(1);

type Outcome = Result<String, String>;

fn corpus() -> (Signature, Vec<(&'static str, DmFile)>) {
    let (_, files) = load_corpus().expect("corpus loads");
    (corpus_signature().expect("corpus installs"), files)
}

fn file<'a>(files: &'a [(&str, DmFile)], n: &str) -> &'a DmFile {
    &files.iter().find(|(m, _)| *m == n).unwrap().1
}

fn printed(n: &str) -> Vec<Entry> {
    let path = format!("{}/../../corpus/golden/{n}.paper", env!("CARGO_MANIFEST_DIR"));
    parse_golden(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Derives every combinator of `f` and compares those with a printed form.
fn golden(f: &DmFile, n: &str, need: &[&str]) -> Outcome {
    let start = Instant::now();
    let sig = Signature::new();
    let mut got = translate_file(f);
    got.extend(elaborate_file(&sig, f).map_err(|(d, e)| format!("{d}: {e}"))?);
    let want = printed(n);
    let diffs = compare_printed(&sig, &got, &want, false);
    let took = start.elapsed();
    if let Some(d) = diffs.first() {
        return Err(d.to_string());
    }
    for l in need {
        if !want.iter().any(|w| w.label == *l) {
            return Err(format!("no printed form for {l}"));
        }
    }
    if took >= SECOND {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{} printed forms match", want.len()))
}

fn c1(files: &[(&str, DmFile)]) -> Outcome {
    golden(file(files, "st"), "st", &["(st a)*", "return*", "bind*", "get*", "put*", "return_ST"])
}

fn c2(files: &[(&str, DmFile)]) -> Outcome {
    golden(file(files, "cont"), "cont", &["(cont a)*", "return*", "bind*", "un-return", "un-bind"])
}

fn c3(files: &[(&str, DmFile)]) -> Outcome {
    let sig = Signature::new();
    let mut n = 0;
    for (f, file) in files {
        for d in file.effect.iter().flat_map(|e| e.defs()).chain(file.defs.iter()) {
            cps_checked(&sig, &d.delta, &[], &d.deriv).map_err(|e| format!("{f}.{}: {e}", d.name))?;
            n += 1;
        }
    }
    Ok(format!("{n}/{n} operations"))
}

fn c4(files: &[(&str, DmFile)]) -> Outcome {
    let sig = Signature::new();
    let mut n = 0;
    for (f, file) in files {
        for d in file.effect.iter().flat_map(|e| e.defs()).chain(file.defs.iter()) {
            elab_checked(&sig, &d.delta, &[], &d.deriv).map_err(|e| format!("{f}.{}: {e}", d.name))?;
            n += 1;
        }
    }
    let mut got = translate_file(file(files, "st"));
    got.extend(elaborate_file(&sig, file(files, "st")).map_err(|(d, e)| format!("{d}: {e}"))?);
    let want: Vec<Entry> = printed("st").into_iter().filter(|e| e.label == "un-bind : type").collect();
    if want.len() != 1 {
        return Err("no printed type for un-bind".into());
    }
    if let Some(d) = compare_printed(&sig, &got, &want, true).first() {
        return Err(d.to_string());
    }
    Ok(format!("{n}/{n} operations; un-bind type verbatim"))
}

fn c5(sig: &Signature) -> Outcome {
    let mut n = 0;
    for eff in ["ST", "EXN", "EXNST", "STEXNC", "CONT"] {
        for vc in monad_law_vcs(sig, eff).map_err(|e| e.to_string())? {
            let start = Instant::now();
            let v = discharge(sig, &vc);
            let took = start.elapsed();
            if !v.is_valid() {
                return Err(format!("{}: {v}", vc.name));
            }
            if took >= SECOND {
                return Err(format!("{} took {took:?}", vc.name));
            }
            n += 1;
        }
    }
    for to in ["EXNST", "STEXNC"] {
        for vc in morphism_vcs(sig, "ST", to).map_err(|e| e.to_string())? {
            let v = discharge(sig, &vc);
            if !v.is_valid() {
                return Err(format!("{}: {v}", vc.name));
            }
            n += 1;
        }
    }
    let src = dijkstra_core::corpus::source("st").unwrap().replace("g x s1", "g x s0");
    let f = dijkstra_core::dm::load(&src, &Default::default()).map_err(|e| e.to_string())?;
    let bad = install_effect(&Signature::new(), f.effect.as_ref().unwrap()).map_err(|e| e.to_string())?;
    let laws = monad_law_vcs(&bad, "ST").map_err(|e| e.to_string())?;
    if laws.iter().all(|vc| discharge(&bad, vc).is_valid()) {
        return Err("mutated state bind still satisfies every law".into());
    }
    Ok(format!("{n} law and morphism VCs valid; mutant rejected"))
}

fn c6(sig: &Signature, files: &[(&str, DmFile)]) -> Outcome {
    let mut n = 0;
    for (_, f) in files {
        let Some(e) = &f.effect else { continue };
        for vc in effect_vcs(sig, e, &[VcKind::Monotonicity, VcKind::Conjunctivity]).map_err(|e| e.to_string())? {
            let v = discharge(sig, &vc);
            if !v.is_valid() {
                return Err(format!("{}: {v}", vc.name));
            }
            n += 1;
        }
    }
    let empty = Signature::new();
    let wp = parse_term("(arrow int (arrow (arrow (prod X int) (Type 0)) (Type 0)))").unwrap();
    let f = Term::var("f");
    let mono = parse_term(
        "(forall s int (forall p1 (arrow (prod X int) (Type 0)) (forall p2 (arrow (prod X int) (Type 0))
           (implies (forall x X (forall s1 int (implies (app p1 (pair x s1)) (app p2 (pair x s1)))))
                    (implies (app (app f s) p1) (app (app f s) p2))))))",
    )
    .unwrap();
    let conj = parse_term(
        "(forall s int (forall p1 (arrow (prod X int) (Type 0)) (forall p2 (arrow (prod X int) (Type 0))
           (eq (Type 0) (and (app (app f s) p1) (app (app f s) p2))
               (app (app f s) (lam x (prod X int) (and (app p1 x) (app p2 x))))))))",
    )
    .unwrap();
    let got_mono = nf(&empty, &stronger_than(&wp, &f, &f).map_err(|e| e.to_string())?);
    if !got_mono.alpha_eq(&nf(&empty, &mono)) {
        return Err(format!("state monotonicity unfolds to {got_mono}"));
    }
    let got_conj = nf(&empty, &conjunctive(&wp, &f).map_err(|e| e.to_string())?);
    if !got_conj.alpha_eq(&nf(&empty, &conj)) {
        return Err(format!("state conjunctivity unfolds to {got_conj}"));
    }
    Ok(format!("{n} VCs valid; state unfoldings match"))
}

fn c7(sig: &Signature) -> Outcome {
    let suite = simulate_suite(sig, 2017, 500, 6, DEFAULT_FUEL);
    if let Some(r) = suite.mismatches().first() {
        return Err(r.to_sexp());
    }
    if suite.stateful() < 500 || suite.runs.iter().any(|r| r.stateful && r.report.sort != Some(Sort::Active)) {
        return Err("fewer than 500 stateful runs".into());
    }
    for s0 in -5..=5 {
        let rep = simulate_check(sig, &to_emf(&incr()), s0, DEFAULT_FUEL);
        if !rep.ok() || rep.st_result != Some((StTerm::unit(), StTerm::int(s0 + 1))) || rep.emf_result != rep.st_result {
            return Err(format!("incr at {s0}: {}", rep.to_sexp()));
        }
    }
    Ok(format!("{}; incr ok for s0 in -5..=5", suite.summary_sexp()))
}

fn c8(sig: &Signature) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut steps = 0;
    for i in 0..1000u64 {
        let s = gen_closed(sig, &mut rng, 4);
        let r = if i % 2 == 0 {
            check_subject_reduction(sig, &s.term, DEFAULT_FUEL, None::<&mut ChaCha8Rng>)
        } else {
            check_subject_reduction(sig, &s.term, DEFAULT_FUEL, Some(&mut ChaCha8Rng::seed_from_u64(i)))
        };
        steps += r.map_err(|v| format!("term {i}: {v}"))?;
    }
    Ok(format!("1000 terms, {steps} steps, 0 violations"))
}

fn c9(sig: &Signature, files: &[(&str, DmFile)]) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for i in 0..200 {
        let p = gen_pure_program(&mut rng, 4);
        let v = check_total_correctness(sig, &p, DEFAULT_FUEL).map_err(|v| format!("program {i}: {v}"))?;
        if v != Term::int(p.expected) {
            return Err(format!("program {i} returned {v}"));
        }
    }
    let empty = Signature::new();
    let mut n = 0;
    for (f, file) in files {
        for d in file.effect.iter().flat_map(|e| e.defs()) {
            let star = dijkstra_core::cps::cps_term(&d.deriv);
            let un = elab_checked(&empty, &d.delta, &[], &d.deriv).map_err(|e| e.to_string())?.term;
            for t in [star, un] {
                normalize(sig, &t, DEFAULT_FUEL).map_err(|e| format!("{f}.{}: {e}", d.name))?;
                n += 1;
            }
        }
    }
    Ok(format!("200 programs, 0 violations; {n} corpus terms normalize within fuel"))
}

fn c10() -> Outcome {
    let sig = Signature::new();
    let suite = eqpres::suite().map_err(|e| e.to_string())?;
    if suite.len() < 20 {
        return Err(format!("only {} instances", suite.len()));
    }
    for i in &suite {
        let v = i.check(&sig)?;
        if !v.is_valid() {
            return Err(format!("{}: {v}", i.name));
        }
    }
    Ok(format!("{n}/{n} instances", n = suite.len()))
}

fn main() {
    let (sig, files) = corpus();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 golden st", Box::new(|| c1(&files))),
        ("2 golden cont", Box::new(|| c2(&files))),
        ("3 well-typing of translations", Box::new(|| c3(&files))),
        ("4 logical relation of elaborations", Box::new(|| c4(&files))),
        ("5 monad laws and morphisms", Box::new(|| c5(&sig))),
        ("6 monotonicity and conjunctivity", Box::new(|| c6(&sig, &files))),
        ("7 simulation", Box::new(|| c7(&sig))),
        ("8 subject reduction", Box::new(|| c8(&sig))),
        ("9 total correctness", Box::new(|| c9(&sig, &files))),
        ("10 equality preservation", Box::new(c10)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let r = run();
        let took = start.elapsed();
        match r {
            Ok(msg) => println!("PASS criterion {name} ({took:.2?}): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name} ({took:.2?}): {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
}
