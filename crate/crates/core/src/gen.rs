//! Seeded generators of closed well-typed terms, and the checks that run
//! them: subject reduction along reduction sequences and total correctness
//! of `Pure` programs.
//!
//! Generated terms are built backwards from the value they must produce,
//! so every generated term comes with its expected result without running
//! the evaluator.

use rand::Rng;
use thiserror::Error;

use crate::eval::{is_value, normalize, step, step_random, Step};
use crate::signature::{pure_bind_star, pure_return_star, Signature};
use crate::state::{gen_stateful, to_emf, Prog, ST};
use crate::syntax::{Comp, PrimOp, Term, PURE};
use crate::typing::{typecheck, Checker, Ctx};
use crate::validity::{validity, Verdict};

/// A closed term and the value it must evaluate to (`None` when the
/// generator does not track it).
#[derive(Clone, Debug)]
pub struct Sample {
    pub term: Term,
    pub value: Option<Term>,
}

pub struct TermGen<'r, R: Rng> {
    rng: &'r mut R,
    env: Vec<(String, i64)>,
    next: usize,
}

impl<'r, R: Rng> TermGen<'r, R> {
    pub fn new(rng: &'r mut R) -> Self {
        TermGen {
            rng,
            env: Vec::new(),
            next: 0,
        }
    }

    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("v{}", self.next)
    }

    fn small(&mut self) -> i64 {
        self.rng.gen_range(-4..=4)
    }

    /// Binds a fresh variable to `a` while `k` builds the body.
    fn with_var<T>(&mut self, a: i64, k: impl FnOnce(&mut Self, &str) -> T) -> T {
        let x = self.fresh();
        self.env.push((x.clone(), a));
        let r = k(self, &x);
        self.env.pop();
        r
    }

    /// A `Tot int` term evaluating to `v`.
    pub fn int(&mut self, v: i64, d: usize) -> Term {
        if d == 0 {
            return match self.env.iter().find(|(_, w)| *w == v) {
                Some((x, _)) if self.rng.gen_bool(0.5) => Term::var(x),
                _ => Term::int(v),
            };
        }
        let d = d - 1;
        match self.rng.gen_range(0..10) {
            0 => Term::int(v),
            1 => {
                let k = self.small();
                Term::binop(PrimOp::Add, self.int(v - k, d), self.int(k, d))
            }
            2 => {
                let k = self.small();
                Term::binop(PrimOp::Sub, self.int(v + k, d), self.int(k, d))
            }
            3 if v % 2 == 0 => Term::binop(PrimOp::Mul, self.int(v / 2, d), self.int(2, d)),
            3 | 4 => {
                let b = self.rng.gen_bool(0.5);
                let other = self.small();
                let c = self.boolean(b, d);
                let (t, e) = if b { (v, other) } else { (other, v) };
                Term::ite(c, self.int(t, d), self.int(e, d))
            }
            5 => {
                let b = self.rng.gen_bool(0.5);
                Term::fst(Term::pair(self.int(v, d), self.boolean(b, d)))
            }
            6 => {
                let k = self.small();
                Term::snd(Term::pair(self.int(k, d), self.int(v, d)))
            }
            7 => {
                let a = self.small();
                let arg = self.int(a, d);
                let (x, body) = self.with_var(a, |g, x| (x.to_string(), g.int(v, d)));
                Term::app(Term::lam(&x, Term::int_ty(), body), arg)
            }
            8 => {
                let left = self.rng.gen_bool(0.5);
                let (lx, rx) = (self.fresh(), self.fresh());
                let scrut = if left {
                    Term::inl(self.int(v, d), Term::bool_ty())
                } else {
                    let b = self.rng.gen_bool(0.5);
                    Term::inr(Term::int_ty(), self.boolean(b, d))
                };
                let l = if left { Term::var(&lx) } else { Term::int(self.small()) };
                let r = if left { Term::int(self.small()) } else { self.int(v, d) };
                Term::case(scrut, "z", Term::tot(Term::int_ty()), &lx, l, &rx, r)
            }
            _ => match self.env.last().cloned() {
                Some((x, w)) => Term::binop(PrimOp::Add, Term::var(&x), self.int(v - w, d)),
                None => Term::int(v),
            },
        }
    }

    /// A `Tot bool` term evaluating to `b`.
    pub fn boolean(&mut self, b: bool, d: usize) -> Term {
        if d == 0 {
            return Term::bool(b);
        }
        let d = d - 1;
        match self.rng.gen_range(0..5) {
            0 => Term::bool(b),
            1 => {
                let n = self.small();
                let m = if b { n + self.rng.gen_range(1..=3) } else { n - self.rng.gen_range(0..=3) };
                Term::binop(PrimOp::Lt, self.int(n, d), self.int(m, d))
            }
            2 => {
                let n = self.small();
                let m = if b { n } else { n + 1 };
                Term::binop(PrimOp::Eq, self.int(n, d), self.int(m, d))
            }
            3 => Term::prim(PrimOp::Not, vec![self.boolean(!b, d)]),
            _ => {
                let (l, r) = if b {
                    (true, true)
                } else if self.rng.gen_bool(0.5) {
                    (false, self.rng.gen_bool(0.5))
                } else {
                    (self.rng.gen_bool(0.5), false)
                };
                Term::binop(PrimOp::And, self.boolean(l, d), self.boolean(r, d))
            }
        }
    }

    /// A `Pure int` computation returning `v`, with its WP.
    pub fn pure(&mut self, v: i64, d: usize) -> (Term, Term) {
        let int = Term::int_ty();
        let ret = |g: &mut Self, v: i64, d: usize| {
            let e = g.int(v, d);
            (
                Term::ret(PURE, int.clone(), e.clone()),
                Term::apps(pure_return_star(), [int.clone(), e]),
            )
        };
        if d == 0 {
            return ret(self, v, 0);
        }
        let d = d - 1;
        match self.rng.gen_range(0..4) {
            0 => ret(self, v, d),
            1 => {
                let a = self.small();
                let (e1, w1) = self.pure(a, d);
                let (x, e2, w2) = self.with_var(a, |g, x| {
                    let (e2, w2) = g.pure(v, d);
                    (x.to_string(), e2, w2)
                });
                let w2 = Term::lam(&x, int.clone(), w2);
                let wp = Term::apps(pure_bind_star(), [int.clone(), int.clone(), w1.clone(), w2.clone()]);
                (Term::bind(PURE, int.clone(), int.clone(), w1, e1, w2, &x, e2), wp)
            }
            2 => {
                let b = self.rng.gen_bool(0.5);
                let other = self.small();
                let c = self.boolean(b, d);
                let (t, e) = if b { (v, other) } else { (other, v) };
                let (ct, wt) = self.pure(t, d);
                let (ce, we) = self.pure(e, d);
                (Term::ite(c.clone(), ct, ce), Term::ite(c, wt, we))
            }
            _ => {
                let a = self.small();
                let arg = self.int(a, d);
                let (x, body, w) = self.with_var(a, |g, x| {
                    let (b, w) = g.pure(v, d);
                    (x.to_string(), b, w)
                });
                (Term::app(Term::lam(&x, int, body), arg.clone()), w.subst(&x, &arg))
            }
        }
    }
}

/// Reifies a stateful program at `s0`, sometimes through the lift into
/// exceptions-with-state.
fn reified(sig: &Signature, p: &Prog, s0: i64, lift: bool) -> Term {
    let e = to_emf(p);
    let e = if lift && sig.lift(ST, "EXNST").is_ok() {
        let ty = match p.ret() {
            crate::state::Ret::Int => Term::int_ty(),
            crate::state::Ret::Unit => Term::unit_ty(),
        };
        let wp = match typecheck(sig, &e) {
            Ok(Comp::M(_, _, wp)) => wp,
            _ => return Term::app(Term::reify(e), Term::int(s0)),
        };
        Term::lift(ST, "EXNST", ty, wp, e)
    } else {
        e
    };
    Term::app(Term::reify(e), Term::int(s0))
}

/// A closed well-typed term: a `Tot` term, a `Pure` computation, `run` of
/// one, or a reified stateful program.
pub fn gen_closed<R: Rng>(sig: &Signature, rng: &mut R, depth: usize) -> Sample {
    let v = rng.gen_range(-20..=20);
    let kind = rng.gen_range(0..6);
    let mut g = TermGen::new(rng);
    match kind {
        0 | 1 => Sample {
            term: g.int(v, depth),
            value: Some(Term::int(v)),
        },
        2 => {
            let b = v % 2 == 0;
            Sample {
                term: g.boolean(b, depth),
                value: Some(Term::bool(b)),
            }
        }
        3 => Sample {
            term: g.pure(v, depth).0,
            value: Some(Term::ret(PURE, Term::int_ty(), Term::int(v))),
        },
        4 => Sample {
            term: Term::run(g.pure(v, depth).0),
            value: Some(Term::int(v)),
        },
        _ => {
            let lift = g.rng.gen_bool(0.3);
            let p = gen_stateful(g.rng, depth.min(6));
            Sample {
                term: reified(sig, &p, v.clamp(-10, 10), lift),
                value: None,
            }
        }
    }
}

#[derive(Debug, Error, Clone)]
pub enum Violation {
    #[error("generated term is ill typed: {0}")]
    IllTyped(String),
    #[error("step {step} ({rule}) lost the type {comp}: {term}: {err}")]
    Lost {
        step: usize,
        rule: &'static str,
        comp: String,
        term: String,
        err: String,
    },
    #[error("fuel exhausted after {0} steps")]
    Fuel(u64),
    #[error("normal form {got} is not the expected {want}")]
    Value { got: String, want: String },
    #[error("WP does not hold of the postcondition: {0}")]
    Precondition(String),
    #[error("postcondition fails on the result: {0}")]
    Postcondition(String),
}

/// Reduces `e` (leftmost-outermost, or at random positions when `rng` is
/// given) and checks every intermediate term against `e`'s type.
pub fn check_subject_reduction<R: Rng>(
    sig: &Signature,
    e: &Term,
    fuel: u64,
    mut rng: Option<&mut R>,
) -> Result<usize, Violation> {
    let comp = typecheck(sig, e).map_err(|err| Violation::IllTyped(format!("{e}: {err}")))?;
    let chk = Checker::new(sig);
    let mut cur = e.clone();
    for i in 0..fuel as usize {
        let next = match rng.as_deref_mut() {
            Some(r) => step_random(sig, &cur, r),
            None => step(sig, &cur),
        };
        match next {
            Step::Stuck => return Ok(i),
            Step::Next(t, rule) => {
                if let Err(err) = chk.check(&Ctx::new(), &t, &comp) {
                    return Err(Violation::Lost {
                        step: i + 1,
                        rule,
                        comp: comp.to_string(),
                        term: t.to_string(),
                        err: err.to_string(),
                    });
                }
                cur = t;
            }
        }
    }
    Err(Violation::Fuel(fuel))
}

/// A `Pure int` program with the postcondition `λr. r = v` for its
/// expected result `v`.
#[derive(Clone, Debug)]
pub struct PureProgram {
    pub term: Term,
    pub wp: Term,
    pub expected: i64,
}

impl PureProgram {
    pub fn post(&self) -> Term {
        Term::lam("r", Term::int_ty(), Term::eq(Term::int_ty(), Term::var("r"), Term::int(self.expected)))
    }
}

pub fn gen_pure_program<R: Rng>(rng: &mut R, depth: usize) -> PureProgram {
    let v = rng.gen_range(-50..=50);
    let (term, wp) = TermGen::new(rng).pure(v, depth);
    PureProgram { term, wp, expected: v }
}

/// Total correctness: the program has type `Pure int wp`, `wp post` is
/// valid, and `run e` normalizes within `fuel` to a value satisfying `post`.
pub fn check_total_correctness(sig: &Signature, p: &PureProgram, fuel: u64) -> Result<Term, Violation> {
    let chk = Checker::new(sig);
    let comp = Comp::M(crate::syntax::name(PURE), Term::int_ty(), p.wp.clone());
    chk.check(&Ctx::new(), &p.term, &comp)
        .map_err(|err| Violation::IllTyped(format!("{}: {err}", p.term)))?;
    let post = p.post();
    let pre = validity(sig, &[], &Term::app(p.wp.clone(), post.clone()));
    if !pre.is_valid() {
        return Err(Violation::Precondition(pre.to_string()));
    }
    let v = normalize(sig, &Term::run(p.term.clone()), fuel).map_err(|e| Violation::Fuel(e.steps))?;
    if !is_value(sig, &v) {
        return Err(Violation::Value {
            got: v.to_string(),
            want: p.expected.to_string(),
        });
    }
    match validity(sig, &[], &Term::app(post, v.clone())) {
        Verdict::Valid => Ok(v),
        other => Err(Violation::Postcondition(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus_signature;
    use crate::eval::DEFAULT_FUEL;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_values_are_the_normal_forms() {
        let sig = corpus_signature().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let s = gen_closed(&sig, &mut rng, 4);
            if let Some(v) = &s.value {
                let n = normalize(&sig, &s.term, DEFAULT_FUEL).unwrap();
                assert!(n.alpha_eq(v), "{} gave {n}, want {v}", s.term);
            }
        }
    }

    #[test]
    fn subject_reduction_on_a_small_sample() {
        let sig = corpus_signature().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for i in 0..60 {
            let s = gen_closed(&sig, &mut rng, 3);
            let mut r2 = ChaCha8Rng::seed_from_u64(i);
            check_subject_reduction(&sig, &s.term, DEFAULT_FUEL, None::<&mut ChaCha8Rng>).unwrap();
            check_subject_reduction(&sig, &s.term, DEFAULT_FUEL, Some(&mut r2)).unwrap();
        }
    }

    #[test]
    fn total_correctness_on_a_small_sample() {
        let sig = corpus_signature().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..40 {
            let p = gen_pure_program(&mut rng, 4);
            let v = check_total_correctness(&sig, &p, DEFAULT_FUEL).unwrap();
            assert_eq!(v, Term::int(p.expected));
        }
    }

    #[test]
    fn wrong_postcondition_is_caught() {
        let sig = corpus_signature().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut p = gen_pure_program(&mut rng, 3);
        p.expected += 1;
        assert!(matches!(check_total_correctness(&sig, &p, DEFAULT_FUEL), Err(Violation::Precondition(_))));
    }
}
