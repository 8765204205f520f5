//! Bidirectional type checker for the monadic core calculus.
//!
//! `synth` infers a computation type; `check` checks against one, falling
//! back to subsumption. Every rule application is recorded in a trace of
//! rule labels. Rules marked `*` are reconstructions for constructs the
//! calculus leaves implicit (conditionals, pairs, sums, primitives).

use std::cell::RefCell;
use std::collections::HashSet;

use thiserror::Error;

use crate::matching::Matcher;
use crate::norm::nf;
use crate::print::sexp;
use crate::signature::{pure_wp_of, SigError, Signature};
use crate::syntax::{fresh, name, Comp, Field, Kind, Lit, Name, Term, PURE};
use crate::validity::{validity, Verdict};

#[derive(Debug, Error, Clone)]
pub enum TypeError {
    #[error("[{rule}] {msg} in `{term}`")]
    Rule { rule: &'static str, term: String, msg: String },
    #[error("[{rule}] could not decide validity of `{residual}`")]
    Unknown { rule: &'static str, residual: String },
    #[error("[{rule}] formula `{formula}` is invalid ({model})")]
    Invalid { rule: &'static str, formula: String, model: String },
    #[error(transparent)]
    Sig(#[from] SigError),
}

impl TypeError {
    pub fn rule(&self) -> &'static str {
        match self {
            TypeError::Rule { rule, .. } | TypeError::Unknown { rule, .. } | TypeError::Invalid { rule, .. } => rule,
            TypeError::Sig(_) => "Signature",
        }
    }

    /// Machine-readable report.
    pub fn to_sexp(&self) -> String {
        match self {
            TypeError::Rule { rule, term, msg } => format!("(type-error (rule {rule}) (msg {msg:?}) (term {term:?}))"),
            TypeError::Unknown { rule, residual } => format!("(type-error (rule {rule}) (unknown {residual:?}))"),
            TypeError::Invalid { rule, formula, model } => {
                format!("(type-error (rule {rule}) (invalid {formula:?}) (model {model:?}))")
            }
            TypeError::Sig(e) => format!("(type-error (rule Signature) (msg {:?}))", e.to_string()),
        }
    }
}

type R<T> = Result<T, TypeError>;

fn err<T>(rule: &'static str, t: &Term, msg: impl Into<String>) -> R<T> {
    Err(TypeError::Rule {
        rule,
        term: t.to_string(),
        msg: msg.into(),
    })
}

/// Typing context: an ordered list of bindings.
#[derive(Clone, Debug, Default)]
pub struct Ctx {
    binds: Vec<(Name, Term)>,
}

impl Ctx {
    pub fn new() -> Ctx {
        Ctx::default()
    }

    pub fn from_binds(binds: Vec<(Name, Term)>) -> Ctx {
        Ctx { binds }
    }

    pub fn push(&self, x: &Name, t: Term) -> Ctx {
        let mut c = self.clone();
        c.binds.push((x.clone(), t));
        c
    }

    pub fn lookup(&self, x: &str) -> Option<&Term> {
        self.binds.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    pub fn binds(&self) -> &[(Name, Term)] {
        &self.binds
    }

    pub fn contains(&self, x: &str) -> bool {
        self.lookup(x).is_some()
    }

    fn names(&self) -> HashSet<Name> {
        let mut s = HashSet::new();
        for (x, t) in &self.binds {
            s.insert(x.clone());
            t.all_names(&mut s);
        }
        s
    }
}

pub struct Checker<'s> {
    sig: &'s Signature,
    trace: RefCell<Vec<&'static str>>,
}

impl<'s> Checker<'s> {
    pub fn new(sig: &'s Signature) -> Checker<'s> {
        Checker {
            sig,
            trace: RefCell::new(Vec::new()),
        }
    }

    pub fn signature(&self) -> &Signature {
        self.sig
    }

    /// Rule labels applied so far, in order.
    pub fn trace(&self) -> Vec<&'static str> {
        self.trace.borrow().clone()
    }

    fn note(&self, rule: &'static str) {
        self.trace.borrow_mut().push(rule);
    }

    fn nf(&self, t: &Term) -> Term {
        nf(self.sig, t)
    }

    pub fn check_type_of(&self, ctx: &Ctx, e: &Term, ty: &Term) -> R<()> {
        self.check(ctx, e, &Comp::Tot(ty.clone()))
    }

    /// Synthesizes the type of a term that must be total.
    pub fn synth_tot(&self, ctx: &Ctx, e: &Term) -> R<Term> {
        match self.synth(ctx, e)? {
            Comp::Tot(t) => Ok(t),
            c => err("T-Tot", e, format!("expected a total term, found computation {}", c.to_term())),
        }
    }

    /// Universe level of a type.
    pub fn universe(&self, ctx: &Ctx, t: &Term) -> R<u32> {
        let u = self.synth_tot(ctx, t)?;
        match self.nf(&u).kind() {
            Kind::Univ(i) => Ok(*i),
            _ => err("T-Type", t, format!("not a type; it has type {u}")),
        }
    }

    fn expect_type0(&self, ctx: &Ctx, t: &Term, rule: &'static str) -> R<()> {
        match self.universe(ctx, t)? {
            0 => Ok(()),
            i => err(rule, t, format!("expected a type in Type0, found Type{i}")),
        }
    }

    /// Well-formedness of a computation type; returns its universe.
    pub fn comp_universe(&self, ctx: &Ctx, c: &Comp) -> R<u32> {
        match c {
            Comp::Tot(t) => self.universe(ctx, t),
            Comp::M(m, t, wp) if &**m == PURE => {
                self.note("C-Pure");
                self.expect_type0(ctx, t, "C-Pure")?;
                self.check_type_of(ctx, wp, &pure_wp_of(t.clone()))?;
                Ok(0)
            }
            Comp::M(m, t, wp) => {
                self.note("C-F");
                self.sig.effect(m)?;
                self.expect_type0(ctx, t, "C-F")?;
                self.check_type_of(ctx, wp, &Term::app(Term::cnst(m, Field::WpType), t.clone()))?;
                self.universe(ctx, &repr(m, t, wp))
            }
        }
    }

    fn wp_type_of(&self, m: &str, t: &Term) -> Term {
        if m == PURE {
            pure_wp_of(t.clone())
        } else {
            Term::app(Term::cnst(m, Field::WpType), t.clone())
        }
    }

    fn return_star(&self, m: &str, t: &Term, e: &Term) -> Term {
        Term::apps(Term::cnst(m, Field::ReturnStar), [t.clone(), e.clone()])
    }

    /// Binder names not clashing with the context.
    fn enter(&self, ctx: &Ctx, x: &Name, body: &Term) -> (Name, Term) {
        if ctx.contains(x) {
            let mut used = ctx.names();
            body.all_names(&mut used);
            let y = fresh(x, &|n| used.contains(n));
            (y.clone(), body.rename(x, &y))
        } else {
            (x.clone(), body.clone())
        }
    }

    pub fn synth(&self, ctx: &Ctx, e: &Term) -> R<Comp> {
        use Kind::*;
        let tot = |t: Term| Ok(Comp::Tot(t));
        match e.kind() {
            Var(x) => {
                self.note("T-Var");
                match ctx.lookup(x) {
                    Some(t) => tot(t.clone()),
                    None => err("T-Var", e, format!("unbound variable `{x}`")),
                }
            }
            Univ(i) => {
                self.note("T-Type");
                tot(Term::univ(i + 1))
            }
            Base(_) => {
                self.note("T-Base*");
                tot(Term::type0())
            }
            Lit(l) => {
                self.note("T-Const");
                tot(Term::base(l.base()))
            }
            Prim(op, args) => {
                self.note("T-Prim*");
                let (doms, res) = op.signature();
                if doms.len() != args.len() {
                    return err("T-Prim*", e, "wrong number of operands");
                }
                for (a, b) in args.iter().zip(doms) {
                    self.check_type_of(ctx, a, &Term::base(*b))?;
                }
                tot(Term::base(res))
            }
            Const(m, f) => {
                self.note("T-Const");
                tot(self.sig.field_type(m, f)?)
            }
            Prod(a, b) | Sum(a, b) => {
                self.note("T-Prod*");
                let i = self.universe(ctx, a)?;
                let j = self.universe(ctx, b)?;
                tot(Term::univ(i.max(j)))
            }
            Pair(a, b) => {
                self.note("T-Pair*");
                let ta = self.synth_tot(ctx, a)?;
                let tb = self.synth_tot(ctx, b)?;
                tot(Term::prod(ta, tb))
            }
            Fst(p) | Snd(p) => {
                self.note("T-Proj*");
                let tp = self.synth_tot(ctx, p)?;
                match self.nf(&tp).kind() {
                    Prod(l, r) => tot(if matches!(e.kind(), Fst(_)) { l.clone() } else { r.clone() }),
                    _ => err("T-Proj*", e, format!("projection from non-pair of type {tp}")),
                }
            }
            Inl(v, r) => {
                self.note("T-Inj*");
                let tv = self.synth_tot(ctx, v)?;
                self.universe(ctx, r)?;
                tot(Term::sum(tv, r.clone()))
            }
            Inr(l, v) => {
                self.note("T-Inj*");
                let tv = self.synth_tot(ctx, v)?;
                self.universe(ctx, l)?;
                tot(Term::sum(l.clone(), tv))
            }
            Case { .. } => self.case(ctx, e, None),
            If(c, a, b) => {
                self.note("T-If*");
                self.check_type_of(ctx, c, &Term::bool_ty())?;
                let ca = self.synth(ctx, a)?;
                let cb = self.synth(ctx, b)?;
                match (&ca, &cb) {
                    (Comp::Tot(ta), Comp::Tot(tb)) => {
                        if self.subtype(ctx, tb, ta).is_ok() {
                            tot(ta.clone())
                        } else if self.subtype(ctx, ta, tb).is_ok() {
                            tot(tb.clone())
                        } else {
                            err("T-If*", e, format!("branches have types {ta} and {tb}"))
                        }
                    }
                    (Comp::M(m1, t1, w1), Comp::M(m2, t2, w2)) if m1 == m2 => {
                        self.subtype(ctx, t1, t2)?;
                        self.subtype(ctx, t2, t1)?;
                        Ok(Comp::M(m1.clone(), t1.clone(), Term::ite(c.clone(), w1.clone(), w2.clone())))
                    }
                    _ => err("T-If*", e, "branches have incompatible computation types"),
                }
            }
            Refine(x, t, phi) => {
                self.note("T-Refine");
                let i = self.universe(ctx, t)?;
                let (x2, phi2) = self.enter(ctx, x, phi);
                self.universe(&ctx.push(&x2, t.clone()), &phi2)?;
                tot(Term::univ(i))
            }
            Lam(x, t, b) => {
                self.note("T-Abs");
                self.universe(ctx, t)?;
                let (x2, b2) = self.enter(ctx, x, b);
                let c = self.synth(&ctx.push(&x2, t.clone()), &b2)?;
                tot(Term::pi(&x2, t.clone(), c.to_term()))
            }
            Pi(x, t, c) => {
                self.note("T-Arr");
                let i = self.universe(ctx, t)?;
                let (x2, c2) = self.enter(ctx, x, c);
                let comp = Comp::from_term(&c2).ok_or_else(|| TypeError::Rule {
                    rule: "T-Arr",
                    term: e.to_string(),
                    msg: "codomain is not a computation type".into(),
                })?;
                let j = self.comp_universe(&ctx.push(&x2, t.clone()), &comp)?;
                tot(Term::univ(i.max(j)))
            }
            App(f, a) => {
                self.note("T-App");
                let tf = self.synth_tot(ctx, f)?;
                let tf = self.nf(&tf);
                match tf.kind() {
                    Pi(x, dom, cod) => {
                        self.check_type_of(ctx, a, dom)?;
                        let c = Comp::from_term(cod).expect("codomain is a computation type");
                        Ok(c.subst(x, a))
                    }
                    _ => err("T-App", e, format!("applying a non-function of type {tf}")),
                }
            }
            Run(inner) => {
                self.note("T-Run");
                match self.synth(ctx, inner)? {
                    Comp::M(m, t, wp) if &*m == PURE => {
                        let post = Term::lam("_r", t.clone(), Term::tt());
                        self.valid(ctx, &Term::app(wp, post), "T-Run")?;
                        tot(t)
                    }
                    Comp::Tot(t) => err("T-Run", e, format!("run of a total term of type {t}")),
                    Comp::M(m, ..) => err("T-Run", e, format!("run of a {m} computation; only Pure can be run")),
                }
            }
            Reify(inner) => {
                self.note("T-Reify");
                match self.synth(ctx, inner)? {
                    Comp::M(m, t, wp) if &*m != PURE => tot(repr(&m, &t, &wp)),
                    _ => err("T-Reify", e, "reify expects a computation in a user effect"),
                }
            }
            Reflect(m, inner) => {
                self.note("T-Reflect");
                let ti = self.synth_tot(ctx, inner)?;
                let (t, wp) = self.match_repr(m, &ti).ok_or_else(|| TypeError::Rule {
                    rule: "T-Reflect",
                    term: e.to_string(),
                    msg: format!("type {ti} is not an instance of {m}.repr"),
                })?;
                Ok(Comp::M(m.clone(), t, wp))
            }
            Return(m, t, v) => {
                self.note("T-Return");
                self.expect_type0(ctx, t, "T-Return")?;
                self.check_type_of(ctx, v, t)?;
                Ok(Comp::M(m.clone(), t.clone(), self.return_star(m, t, v)))
            }
            Bind {
                eff,
                t1,
                t2,
                wp1,
                e1,
                wp2,
                x,
                e2,
            } => {
                self.note("T-Bind");
                self.expect_type0(ctx, t1, "T-Bind")?;
                self.expect_type0(ctx, t2, "T-Bind")?;
                self.check_type_of(ctx, wp1, &self.wp_type_of(eff, t1))?;
                let xw = name("x");
                let wp2_ty = Term::pi_tot(&xw, t1.clone(), self.wp_type_of(eff, t2));
                self.check_type_of(ctx, wp2, &wp2_ty)?;
                self.check(ctx, e1, &Comp::M(eff.clone(), t1.clone(), wp1.clone()))?;
                let (x2, e2b) = self.enter(ctx, x, e2);
                let want = Comp::M(eff.clone(), t2.clone(), Term::app(wp2.clone(), Term::var_n(&x2)));
                self.check(&ctx.push(&x2, t1.clone()), &e2b, &want)?;
                let w = Term::apps(
                    Term::cnst(eff, Field::BindStar),
                    [t1.clone(), t2.clone(), wp1.clone(), wp2.clone()],
                );
                Ok(Comp::M(eff.clone(), t2.clone(), w))
            }
            Lift { from, to, ty, wp, e: inner } => {
                self.note("T-Lift");
                self.sig.lift(from, to)?;
                self.expect_type0(ctx, ty, "T-Lift")?;
                self.check(ctx, inner, &Comp::M(from.clone(), ty.clone(), wp.clone()))?;
                let w = Term::apps(Term::cnst(from, Field::LiftStar(to.clone())), [ty.clone(), wp.clone()]);
                Ok(Comp::M(to.clone(), ty.clone(), w))
            }
            Act { eff, act, args } => {
                self.note("T-Act");
                let mut ty = self.sig.action_type(eff, act)?;
                for a in args {
                    let n = self.nf(&ty);
                    match n.kind() {
                        Pi(x, dom, cod) => {
                            self.check_type_of(ctx, a, dom)?;
                            ty = cod.subst(x, a);
                            if let Tot(inner) = ty.kind() {
                                let inner = inner.clone();
                                ty = inner;
                            }
                        }
                        _ => return err("T-Act", e, "too many action arguments"),
                    }
                }
                match Comp::from_term(&ty) {
                    Some(c @ Comp::M(..)) => Ok(c),
                    _ => err("T-Act", e, "too few action arguments"),
                }
            }
            Tot(_) | CompTy(..) => err("T-Type", e, "computation types are not terms"),
            True | False => {
                self.note("T-Prop*");
                tot(Term::type0())
            }
            Eq(ty, a, b) => {
                self.note("T-Eq*");
                self.universe(ctx, ty)?;
                self.check_type_of(ctx, a, ty)?;
                self.check_type_of(ctx, b, ty)?;
                tot(Term::type0())
            }
            Implies(a, b) | And(a, b) => {
                self.note("T-Prop*");
                self.expect_type0(ctx, a, "T-Prop*")?;
                self.expect_type0(ctx, b, "T-Prop*")?;
                tot(Term::type0())
            }
            Forall(x, ty, body) => {
                self.note("T-Forall*");
                self.universe(ctx, ty)?;
                let (x2, b2) = self.enter(ctx, x, body);
                self.expect_type0(&ctx.push(&x2, ty.clone()), &b2, "T-Forall*")?;
                tot(Term::type0())
            }
        }
    }

    /// Solves `ty ≡ repr ?t ?w` by matching normal forms.
    fn match_repr(&self, m: &str, ty: &Term) -> Option<(Term, Term)> {
        let mt = name("?t");
        let mw = name("?w");
        let pat = self.nf(&repr(m, &Term::var_n(&mt), &Term::var_n(&mw)));
        let metas: HashSet<Name> = [mt.clone(), mw.clone()].into_iter().collect();
        let mut matcher = Matcher::new(&metas);
        if !matcher.matches(&pat, &self.nf(ty)) {
            return None;
        }
        let t = matcher.solution.get(&mt)?.clone();
        let w = matcher.solution.get(&mw)?.clone();
        Some((t, w))
    }

    fn case(&self, ctx: &Ctx, e: &Term, expected: Option<&Comp>) -> R<Comp> {
        let Kind::Case {
            scrut,
            as_name,
            ret,
            lx,
            left,
            rx,
            right,
        } = e.kind()
        else {
            unreachable!()
        };
        self.note("T-Case*");
        let ts = self.synth_tot(ctx, scrut)?;
        let (a1, a2) = match self.nf(&ts).kind() {
            Kind::Sum(l, r) => (l.clone(), r.clone()),
            _ => return err("T-Case*", e, format!("scrutinee has non-sum type {ts}")),
        };
        let (z, ret2) = self.enter(ctx, as_name, ret);
        let rc = Comp::from_term(&ret2).ok_or_else(|| TypeError::Rule {
            rule: "T-Case*",
            term: e.to_string(),
            msg: "annotation is not a computation type".into(),
        })?;
        self.comp_universe(&ctx.push(&z, ts.clone()), &rc)?;
        let (x, l2) = self.enter(ctx, lx, left);
        let inl = Term::inl(Term::var_n(&x), a2.clone());
        self.check(&ctx.push(&x, a1.clone()), &l2, &rc.subst(&z, &inl))?;
        let (y, r2) = self.enter(ctx, rx, right);
        let inr = Term::inr(a1.clone(), Term::var_n(&y));
        self.check(&ctx.push(&y, a2.clone()), &r2, &rc.subst(&z, &inr))?;
        let got = rc.subst(&z, scrut);
        if let Some(want) = expected {
            self.subtype_comp(ctx, &got, want)?;
        }
        Ok(got)
    }

    pub fn check(&self, ctx: &Ctx, e: &Term, c: &Comp) -> R<()> {
        match (e.kind(), c) {
            (Kind::Lam(x, t, b), Comp::Tot(want)) => {
                let wn = self.nf(want);
                if let Kind::Pi(y, dom, cod) = wn.kind() {
                    self.note("T-Abs");
                    self.universe(ctx, t)?;
                    self.subtype(ctx, dom, t)?;
                    let (x2, b2) = self.enter(ctx, x, b);
                    let cod = Comp::from_term(&cod.rename(y, &x2)).expect("codomain");
                    return self.check(&ctx.push(&x2, dom.clone()), &b2, &cod);
                }
            }
            (Kind::If(cond, a, b), _) => {
                self.note("T-If*");
                self.check_type_of(ctx, cond, &Term::bool_ty())?;
                let mut used = ctx.names();
                e.all_names(&mut used);
                c.to_term().all_names(&mut used);
                let h = fresh("_h", &|n| used.contains(n));
                let fact = |v: bool| Term::refine("_", Term::unit_ty(), Term::eq(Term::bool_ty(), cond.clone(), Term::bool(v)));
                self.check(&ctx.push(&h, fact(true)), a, c)?;
                return self.check(&ctx.push(&h, fact(false)), b, c);
            }
            (Kind::Case { .. }, _) => {
                self.case(ctx, e, Some(c))?;
                return Ok(());
            }
            (Kind::Reflect(m, inner), Comp::M(m2, t, wp)) if m == m2 => {
                self.note("T-Reflect");
                return self.check_type_of(ctx, inner, &repr(m, t, wp));
            }
            (_, Comp::Tot(want)) if matches!(self.nf(want).kind(), Kind::Refine(..)) => {
                let wn = self.nf(want);
                let Kind::Refine(y, base, phi) = wn.kind() else { unreachable!() };
                self.note("T-RefineIntro");
                self.check_type_of(ctx, e, base)?;
                return self.valid(ctx, &phi.subst(y, e), "T-RefineIntro");
            }
            (Kind::Pair(a, b), Comp::Tot(want)) => {
                if let Kind::Prod(l, r) = self.nf(want).kind() {
                    self.note("T-Pair*");
                    self.check_type_of(ctx, a, l)?;
                    return self.check_type_of(ctx, b, r);
                }
            }
            _ => {}
        }
        let got = self.synth(ctx, e)?;
        self.subtype_comp(ctx, &got, c)
    }

    fn valid(&self, ctx: &Ctx, phi: &Term, rule: &'static str) -> R<()> {
        match validity(self.sig, ctx.binds(), phi) {
            Verdict::Valid => Ok(()),
            Verdict::Unknown(r) => Err(TypeError::Unknown {
                rule,
                residual: r.to_string(),
            }),
            Verdict::Invalid(m) => Err(TypeError::Invalid {
                rule,
                formula: nf(self.sig, phi).to_string(),
                model: m.iter().map(|(x, v)| format!("{x}={}", Term::lit(*v))).collect::<Vec<_>>().join(" "),
            }),
        }
    }

    /// `c1 <: c2`
    pub fn subtype_comp(&self, ctx: &Ctx, c1: &Comp, c2: &Comp) -> R<()> {
        match (c1, c2) {
            (Comp::Tot(t1), Comp::Tot(t2)) => self.subtype(ctx, t1, t2),
            (Comp::M(m1, t1, w1), Comp::M(m2, t2, w2)) if m1 == m2 && &**m1 == PURE => {
                self.note("S-Pure");
                self.subtype(ctx, t1, t2)?;
                if self.nf(w1).alpha_eq(&self.nf(w2)) {
                    return Ok(());
                }
                let mut used = ctx.names();
                w1.all_names(&mut used);
                w2.all_names(&mut used);
                let p = fresh("p", &|n| used.contains(n));
                let pv = Term::var_n(&p);
                let phi = Term::forall(
                    &p,
                    Term::arrow(t2.clone(), Term::type0()),
                    Term::implies(Term::app(w2.clone(), pv.clone()), Term::app(w1.clone(), pv)),
                );
                self.valid(ctx, &phi, "S-Pure")
            }
            (Comp::M(m1, t1, w1), Comp::M(m2, t2, w2)) if m1 == m2 => {
                self.note("S-F");
                self.subtype(ctx, &repr(m1, t1, w1), &repr(m2, t2, w2))
            }
            _ => Err(TypeError::Rule {
                rule: "T-Sub",
                term: c1.to_term().to_string(),
                msg: format!("not a subtype of {}", c2.to_term()),
            }),
        }
    }

    /// `t1 <: t2`
    pub fn subtype(&self, ctx: &Ctx, t1: &Term, t2: &Term) -> R<()> {
        let n1 = self.nf(t1);
        let n2 = self.nf(t2);
        self.subtype_nf(ctx, &n1, &n2)
    }

    fn subtype_nf(&self, ctx: &Ctx, n1: &Term, n2: &Term) -> R<()> {
        use Kind::*;
        if n1.alpha_eq(n2) {
            self.note("S-Conv");
            return Ok(());
        }
        match (n1.kind(), n2.kind()) {
            (_, Refine(y, b2, psi)) => {
                self.note("S-RefineR");
                self.subtype_nf(ctx, n1, b2)?;
                let mut used = ctx.names();
                n1.all_names(&mut used);
                psi.all_names(&mut used);
                let v = fresh(y, &|n| used.contains(n));
                let ctx2 = ctx.push(&v, n1.clone());
                self.valid(&ctx2, &psi.rename(y, &v), "S-RefineR")
            }
            (Refine(_, b1, _), _) => {
                self.note("S-RefineL");
                self.subtype_nf(ctx, b1, n2)
            }
            (Pi(x, d1, c1), Pi(y, d2, c2)) => {
                self.note("S-Prod");
                self.subtype_nf(ctx, d2, d1)?;
                let mut used = ctx.names();
                n1.all_names(&mut used);
                n2.all_names(&mut used);
                let z = fresh(x, &|n| used.contains(n));
                let zv = Term::var_n(&z);
                let c1 = Comp::from_term(&c1.subst(x, &zv)).expect("codomain");
                let c2 = Comp::from_term(&c2.subst(y, &zv)).expect("codomain");
                let ctx2 = ctx.push(&z, d2.clone());
                self.subtype_comp_nf(&ctx2, &c1, &c2)
            }
            (Prod(a1, b1), Prod(a2, b2)) | (Sum(a1, b1), Sum(a2, b2)) => {
                self.note("S-Pair*");
                self.subtype_nf(ctx, a1, a2)?;
                self.subtype_nf(ctx, b1, b2)
            }
            _ => Err(TypeError::Rule {
                rule: "S-Conv",
                term: n1.to_string(),
                msg: format!("not a subtype of {n2}"),
            }),
        }
    }

    fn subtype_comp_nf(&self, ctx: &Ctx, c1: &Comp, c2: &Comp) -> R<()> {
        match (c1, c2) {
            (Comp::Tot(t1), Comp::Tot(t2)) => self.subtype_nf(ctx, t1, t2),
            _ => self.subtype_comp(ctx, c1, c2),
        }
    }
}

/// `F.repr t wp`
pub fn repr(m: &str, t: &Term, wp: &Term) -> Term {
    Term::apps(Term::cnst(m, Field::Repr), [t.clone(), wp.clone()])
}

/// Type checks a closed term in the empty context.
pub fn typecheck(sig: &Signature, e: &Term) -> R<Comp> {
    Checker::new(sig).synth(&Ctx::new(), e)
}

/// True if the term is a value of the calculus.
pub fn is_literal(t: &Term) -> Option<Lit> {
    t.as_lit()
}

pub fn show_comp(c: &Comp) -> String {
    sexp(&c.to_term())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::parse_term;

    fn ty(src: &str) -> R<Comp> {
        typecheck(&Signature::new(), &parse_term(src).unwrap())
    }

    #[test]
    fn literals_and_lambdas() {
        assert_eq!(ty("3").unwrap(), Comp::Tot(Term::int_ty()));
        let c = ty("(lam x int (prim + x 1))").unwrap();
        assert!(c.to_term().alpha_eq(&parse_term("(Tot (pi y int (Tot int)))").unwrap()));
    }

    #[test]
    fn universes() {
        assert_eq!(ty("(Type 0)").unwrap(), Comp::Tot(Term::univ(1)));
        assert_eq!(ty("(pi a (Type 0) (Tot a))").unwrap(), Comp::Tot(Term::univ(1)));
    }

    #[test]
    fn pure_return_has_return_star() {
        let c = ty("(return Pure int 3)").unwrap();
        match c {
            Comp::M(m, t, wp) => {
                assert_eq!(&*m, PURE);
                assert_eq!(t, Term::int_ty());
                let w = nf(&Signature::new(), &wp);
                assert!(w.alpha_eq(&parse_term("(lam p (pi _ int (Tot (Type 0))) (app p 3))").unwrap()));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn run_needs_satisfiable_wp() {
        assert!(ty("(run (return Pure int 3))").is_ok());
    }

    #[test]
    fn ill_typed_application() {
        let e = ty("(app 3 4)").unwrap_err();
        assert_eq!(e.rule(), "T-App");
    }

    #[test]
    fn refinement_subtyping() {
        let sig = Signature::new();
        let ck = Checker::new(&sig);
        let nat = parse_term("(refine n int (eq bool (prim < n 0) false))").unwrap();
        assert!(ck.check_type_of(&Ctx::new(), &Term::int(2), &nat).is_ok());
        assert!(ck.check_type_of(&Ctx::new(), &Term::int(-1), &nat).is_err());
    }
}
