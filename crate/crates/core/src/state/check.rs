//! Differential check of the machine against EMF* reduction of the
//! reified program.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eval::normalize_traced;
use crate::signature::Signature;
use crate::syntax::{Kind, Term, PURE};
use crate::typing::typecheck;

use super::program::{gen_pure_program, gen_stateful, oracle, to_emf};
use super::{classify_context, erase, run_st, translate_st, Sort, StConfig, StTerm};

/// Outcome of one paired run. `emf_result` and `st_result` are
/// `(value, final state)`.
#[derive(Clone, Debug, Default)]
pub struct SimReport {
    pub sort: Option<Sort>,
    pub emf_steps: u64,
    pub st_steps: usize,
    pub checkpoints: usize,
    pub bind_frames: usize,
    pub emf_result: Option<(StTerm, StTerm)>,
    pub st_result: Option<(StTerm, StTerm)>,
    pub violations: Vec<String>,
}

impl SimReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_sexp(&self) -> String {
        let pair = |r: &Option<(StTerm, StTerm)>| match r {
            Some((v, s)) => format!("({v} {s})"),
            None => "none".into(),
        };
        let mut out = format!(
            "(sort {}) (emf-steps {}) (st-steps {}) (checkpoints {}) (bind-frames {}) (emf {}) (st {}) (verdict {})",
            self.sort.map(Sort::label).unwrap_or("none"),
            self.emf_steps,
            self.st_steps,
            self.checkpoints,
            self.bind_frames,
            pair(&self.emf_result),
            pair(&self.st_result),
            if self.ok() { "match" } else { "mismatch" },
        );
        for v in &self.violations {
            out.push_str(&format!(" (violation {v:?})"));
        }
        out
    }
}

fn final_of(sort: Sort, t: &Term, s0: &StTerm) -> Option<(StTerm, StTerm)> {
    match (sort, t.kind()) {
        (Sort::Active, Kind::Return(m, _, v)) if &**m == PURE => match v.kind() {
            Kind::Pair(a, s) => Some((erase(a).ok()?, erase(s).ok()?)),
            _ => None,
        },
        (Sort::Pure, Kind::Return(m, _, v)) if &**m == PURE => Some((erase(v).ok()?, s0.clone())),
        (Sort::Tot, _) => Some((erase(t).ok()?, s0.clone())),
        _ => None,
    }
}

/// Runs `program` (reified at `s0` when it is a stateful computation) on
/// both sides and checks the simulation clauses:
///
/// - every EMF* term in the invariant shape translates to a configuration
///   the machine passes through, in order (terms are compared after
///   contracting closed pure redexes);
/// - the sort stays the same, except that an `Active` run may turn `Pure`
///   once for good, which is the tail ending in `Pure.return (v, s')`;
/// - outside `Active` the machine never changes the state;
/// - both sides end in the same value and state.
pub fn simulate_check(sig: &Signature, program: &Term, s0: i64, fuel: u64) -> SimReport {
    let mut rep = SimReport::default();
    let s0t = StTerm::int(s0);
    let run = match classify_context(sig, program) {
        Ok(k) if k.sort == Sort::Inert => Term::app(Term::reify(program.clone()), Term::int(s0)),
        _ => program.clone(),
    };
    let k0 = match classify_context(sig, &run) {
        Ok(k) if k.sort != Sort::Inert => k,
        Ok(_) => {
            rep.violations.push("program is Inert after reification".into());
            return rep;
        }
        Err(e) => {
            rep.violations.push(format!("initial term: {e}"));
            return rep;
        }
    };
    let sort = k0.sort;
    rep.sort = Some(sort);

    let start = StConfig::new(k0.state.clone().unwrap_or_else(|| s0t.clone()), translate_st(&k0));
    let trace = match run_st(&start, fuel) {
        Ok(t) => t,
        Err(e) => {
            rep.violations.push(format!("machine: {e}"));
            return rep;
        }
    };
    rep.st_steps = trace.len() - 1;
    rep.bind_frames = trace.iter().filter(|(_, r)| *r == "ST-bind").count();
    let canon: Vec<StConfig> = trace.iter().map(|(c, _)| c.canon()).collect();
    let last = trace.last().map(|(c, _)| c.clone()).unwrap_or(start);
    rep.st_result = match (&last.term, sort) {
        (StTerm::Return(_, v), Sort::Active | Sort::Pure) => Some(((**v).clone(), last.state.clone())),
        (v, Sort::Tot) => Some((v.clone(), last.state.clone())),
        _ => None,
    };
    if sort != Sort::Active {
        if let Some((c, _)) = trace.iter().find(|(c, _)| c.state != s0t) {
            rep.violations.push(format!("state changed outside Active at {c}"));
        }
    }

    let mut cursor = 0usize;
    let mut left_sort = false;
    let mut steps = 0u64;
    let mut violations = Vec::new();
    let mut checkpoints = 0usize;
    let mut visit = |t: &Term| {
        let Ok(k) = classify_context(sig, t) else { return };
        checkpoints += 1;
        if k.sort != sort {
            if sort == Sort::Active && k.sort == Sort::Pure {
                left_sort = true;
            } else {
                violations.push(format!("sort {} became {} at {t}", sort.label(), k.sort.label()));
            }
            return;
        }
        if left_sort {
            violations.push(format!("Active again after finishing at {t}"));
            return;
        }
        let cfg = StConfig::new(k.state.clone().unwrap_or_else(|| s0t.clone()), translate_st(&k)).canon();
        match canon[cursor..].iter().position(|c| c.alpha_eq(&cfg)) {
            Some(j) => cursor += j,
            None => violations.push(format!("checkpoint {cfg} is not a later machine configuration")),
        }
    };
    visit(&run);
    let result = normalize_traced(sig, &run, fuel, |_, t| {
        steps += 1;
        visit(t);
    });
    rep.emf_steps = steps;
    rep.checkpoints = checkpoints;
    rep.violations.extend(violations);
    match result {
        Ok(nf) => {
            rep.emf_result = final_of(sort, &nf, &s0t);
            if rep.emf_result.is_none() {
                rep.violations.push(format!("EMF* normal form {nf} is not a final result"));
            }
        }
        Err(e) => rep.violations.push(format!("EMF*: {e}")),
    }
    let agree = match (&rep.emf_result, &rep.st_result) {
        (Some((v1, s1)), Some((v2, s2))) => v1.canon().alpha_eq(&v2.canon()) && s1.canon().alpha_eq(&s2.canon()),
        _ => false,
    };
    if !agree && rep.emf_result.is_some() {
        rep.violations.push("final value or state differs".into());
    }
    rep
}

/// One run of the suite.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub index: u64,
    pub seed: u64,
    pub stateful: bool,
    pub program: String,
    pub s0: i64,
    pub well_typed: bool,
    pub oracle: (StTerm, StTerm),
    pub report: SimReport,
}

impl RunRecord {
    pub fn agrees_with_oracle(&self) -> bool {
        let o = Some(self.oracle.clone());
        self.report.emf_result == o && self.report.st_result == o
    }

    pub fn ok(&self) -> bool {
        self.well_typed && self.report.ok() && self.agrees_with_oracle()
    }

    pub fn to_sexp(&self) -> String {
        format!(
            "(run (seed {}) (index {}) (kind {}) (program {:?}) (s0 {}) (typed {}) (oracle ({} {})) {})",
            self.seed,
            self.index,
            if self.stateful { "stateful" } else { "pure" },
            self.program,
            self.s0,
            self.well_typed,
            self.oracle.0,
            self.oracle.1,
            self.report.to_sexp()
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub runs: Vec<RunRecord>,
}

impl SuiteReport {
    pub fn mismatches(&self) -> Vec<&RunRecord> {
        self.runs.iter().filter(|r| !r.ok()).collect()
    }

    pub fn stateful(&self) -> usize {
        self.runs.iter().filter(|r| r.stateful).count()
    }

    pub fn summary_sexp(&self) -> String {
        format!(
            "(simulation (runs {}) (stateful {}) (mismatches {}) (checkpoints {}) (bind-frames {}))",
            self.runs.len(),
            self.stateful(),
            self.mismatches().len(),
            self.runs.iter().map(|r| r.report.checkpoints).sum::<usize>(),
            self.runs.iter().map(|r| r.report.bind_frames).sum::<usize>(),
        )
    }
}

/// `count` stateful programs plus one `Tot`/`Pure` program per eight,
/// each from its own generator seeded with `seed + index`.
pub fn simulate_suite(sig: &Signature, seed: u64, count: u64, depth: usize, fuel: u64) -> SuiteReport {
    let mut runs = Vec::new();
    let pure = count.div_ceil(8);
    for index in 0..count + pure {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(index));
        let s0 = rng.gen_range(-10..=10);
        let stateful = index < count;
        let (term, program, oracle_result) = if stateful {
            let p = gen_stateful(&mut rng, depth);
            let (v, s) = oracle(&p, s0);
            (to_emf(&p), p.to_string(), (v.to_st(), StTerm::int(s)))
        } else {
            let (t, v) = gen_pure_program(&mut rng);
            let text = t.to_string();
            (t, text, (v.to_st(), StTerm::int(s0)))
        };
        let checked = if stateful { Term::app(Term::reify(term.clone()), Term::int(s0)) } else { term.clone() };
        let well_typed = typecheck(sig, &checked).is_ok();
        let report = simulate_check(sig, &term, s0, fuel);
        runs.push(RunRecord {
            index,
            seed: seed.wrapping_add(index),
            stateful,
            program,
            s0,
            well_typed,
            oracle: oracle_result,
            report,
        });
    }
    SuiteReport { runs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus_signature;
    use crate::eval::DEFAULT_FUEL;
    use crate::state::program::incr;

    #[test]
    fn incr_matches_for_small_states() {
        let sig = corpus_signature().unwrap();
        for s0 in -5..=5 {
            let rep = simulate_check(&sig, &to_emf(&incr()), s0, DEFAULT_FUEL);
            assert!(rep.ok(), "{}", rep.to_sexp());
            assert_eq!(rep.sort, Some(Sort::Active));
            assert_eq!(rep.st_result, Some((StTerm::unit(), StTerm::int(s0 + 1))));
            assert_eq!(rep.emf_result, rep.st_result);
        }
    }

    #[test]
    fn small_suite_has_no_mismatches() {
        let sig = corpus_signature().unwrap();
        let suite = simulate_suite(&sig, 11, 40, 6, DEFAULT_FUEL);
        for r in suite.mismatches() {
            panic!("{}", r.to_sexp());
        }
        assert!(suite.runs.iter().any(|r| !r.stateful));
    }
}
