//! The call-by-value machine with primitive state and its relation to the
//! pure state-passing encoding.
//!
//! Machine terms are EMF* terms with the type and WP arguments of the
//! monadic operators dropped and without `reify`/`reflect`. A configuration
//! pairs the store with such a term. [`classify_context`] recognises the
//! shapes a reified stateful computation goes through under EMF* reduction
//! and [`translate_st`] maps them back to machine terms.

mod check;
mod program;

use std::fmt;

use thiserror::Error;

use crate::norm::{eval_prim, nf};
use crate::signature::Signature;
use crate::syntax::{name, Comp, Kind, Lit, Name, PrimOp, Term, PURE};
use crate::typing::{Checker, Ctx};

pub use check::{simulate_check, simulate_suite, RunRecord, SimReport, SuiteReport};
pub use program::{gen_pure_program, gen_stateful, incr, oracle, to_emf, Expr, Prog, Ret, Value};

/// The effect whose actions the machine implements natively.
pub const ST: &str = "ST";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StError {
    #[error("stuck machine term {0}")]
    Stuck(StTerm),
    #[error("no machine counterpart for {0}")]
    Untranslatable(String),
    #[error("not in the simulation invariant: {0}")]
    NotInForm(String),
    #[error("machine ran out of fuel after {0} steps")]
    Fuel(u64),
}

/// EMF*_ST terms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StTerm {
    Var(Name),
    Lit(Lit),
    Prim(PrimOp, Vec<StTerm>),
    If(Box<StTerm>, Box<StTerm>, Box<StTerm>),
    Pair(Box<StTerm>, Box<StTerm>),
    Fst(Box<StTerm>),
    Snd(Box<StTerm>),
    Lam(Name, Box<StTerm>),
    App(Box<StTerm>, Box<StTerm>),
    /// `M.return v` for `M` either `Pure` or `ST`.
    Return(Name, Box<StTerm>),
    Bind(Name, Box<StTerm>, Name, Box<StTerm>),
    Get(Box<StTerm>),
    Put(Box<StTerm>),
}

impl StTerm {
    pub fn int(n: i64) -> StTerm {
        StTerm::Lit(Lit::Int(n))
    }

    pub fn unit() -> StTerm {
        StTerm::Lit(Lit::Unit)
    }

    pub fn st_return(v: StTerm) -> StTerm {
        StTerm::Return(name(ST), Box::new(v))
    }

    pub fn is_value(&self) -> bool {
        match self {
            StTerm::Lit(_) | StTerm::Lam(..) => true,
            StTerm::Pair(a, b) => a.is_value() && b.is_value(),
            _ => false,
        }
    }

    /// Values and `M.return v`: the configurations the machine stops at.
    pub fn is_final(&self) -> bool {
        match self {
            StTerm::Return(_, v) => v.is_value(),
            t => t.is_value(),
        }
    }

    fn map(&self, f: &mut impl FnMut(&StTerm) -> StTerm) -> StTerm {
        use StTerm::*;
        let b = |t: &StTerm, f: &mut dyn FnMut(&StTerm) -> StTerm| Box::new(f(t));
        match self {
            Var(_) | Lit(_) => self.clone(),
            Prim(op, args) => Prim(*op, args.iter().map(&mut *f).collect()),
            If(c, a, e) => If(b(c, f), b(a, f), b(e, f)),
            Pair(l, r) => Pair(b(l, f), b(r, f)),
            Fst(e) => Fst(b(e, f)),
            Snd(e) => Snd(b(e, f)),
            Lam(x, e) => Lam(x.clone(), b(e, f)),
            App(g, a) => App(b(g, f), b(a, f)),
            Return(m, e) => Return(m.clone(), b(e, f)),
            Bind(m, e1, x, e2) => Bind(m.clone(), b(e1, f), x.clone(), b(e2, f)),
            Get(e) => Get(b(e, f)),
            Put(e) => Put(b(e, f)),
        }
    }

    /// Substitution of a closed term.
    pub fn subst(&self, x: &str, v: &StTerm) -> StTerm {
        match self {
            StTerm::Var(y) if &**y == x => v.clone(),
            StTerm::Lam(y, _) if &**y == x => self.clone(),
            StTerm::Bind(m, e1, y, e2) if &**y == x => {
                StTerm::Bind(m.clone(), Box::new(e1.subst(x, v)), y.clone(), e2.clone())
            }
            _ => self.map(&mut |t| t.subst(x, v)),
        }
    }

    /// Equality up to renaming of bound variables.
    pub fn alpha_eq(&self, other: &StTerm) -> bool {
        alpha(self, other, &mut Vec::new())
    }

    /// Contracts every pure redex whose arguments are literals, pairs of
    /// values or closed lambdas, also below binders. Two configurations
    /// that differ only in when such redexes fire have the same canon.
    pub fn canon(&self) -> StTerm {
        use StTerm::*;
        let t = self.map(&mut |t| t.canon());
        match &t {
            Prim(op, args) => {
                let lits: Option<Vec<crate::syntax::Lit>> = args
                    .iter()
                    .map(|a| match a {
                        Lit(l) => Some(*l),
                        _ => None,
                    })
                    .collect();
                match lits.and_then(|ls| eval_prim(*op, &ls)) {
                    Some(l) => Lit(l),
                    None => t,
                }
            }
            If(c, a, e) => match **c {
                Lit(crate::syntax::Lit::Bool(true)) => (**a).clone(),
                Lit(crate::syntax::Lit::Bool(false)) => (**e).clone(),
                _ => t,
            },
            Fst(p) => match &**p {
                Pair(a, b) if a.is_value() && b.is_value() => (**a).clone(),
                _ => t,
            },
            Snd(p) => match &**p {
                Pair(a, b) if a.is_value() && b.is_value() => (**b).clone(),
                _ => t,
            },
            App(f, a) => match &**f {
                Lam(x, body) if a.is_value() => body.subst(x, a).canon(),
                _ => t,
            },
            _ => t,
        }
    }
}

fn alpha(a: &StTerm, b: &StTerm, env: &mut Vec<(Name, Name)>) -> bool {
    use StTerm::*;
    match (a, b) {
        (Var(x), Var(y)) => match env.iter().rev().find(|(l, r)| l == x || r == y) {
            Some((l, r)) => l == x && r == y,
            None => x == y,
        },
        (Lit(l), Lit(r)) => l == r,
        (Prim(o1, a1), Prim(o2, a2)) => {
            o1 == o2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(l, r)| alpha(l, r, env))
        }
        (If(c1, a1, e1), If(c2, a2, e2)) => alpha(c1, c2, env) && alpha(a1, a2, env) && alpha(e1, e2, env),
        (Pair(l1, r1), Pair(l2, r2)) | (App(l1, r1), App(l2, r2)) => alpha(l1, l2, env) && alpha(r1, r2, env),
        (Fst(l), Fst(r)) | (Snd(l), Snd(r)) | (Get(l), Get(r)) | (Put(l), Put(r)) => alpha(l, r, env),
        (Return(m1, l), Return(m2, r)) => m1 == m2 && alpha(l, r, env),
        (Lam(x, l), Lam(y, r)) => under(env, x, y, |env| alpha(l, r, env)),
        (Bind(m1, a1, x, b1), Bind(m2, a2, y, b2)) => {
            m1 == m2 && alpha(a1, a2, env) && under(env, x, y, |env| alpha(b1, b2, env))
        }
        _ => false,
    }
}

fn under(env: &mut Vec<(Name, Name)>, x: &Name, y: &Name, k: impl FnOnce(&mut Vec<(Name, Name)>) -> bool) -> bool {
    env.push((x.clone(), y.clone()));
    let r = k(env);
    env.pop();
    r
}

impl fmt::Display for StTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use StTerm::*;
        match self {
            Var(x) => write!(f, "{x}"),
            Lit(crate::syntax::Lit::Unit) => write!(f, "()"),
            Lit(crate::syntax::Lit::Bool(b)) => write!(f, "{b}"),
            Lit(crate::syntax::Lit::Int(n)) => write!(f, "{n}"),
            Prim(PrimOp::Not, a) => write!(f, "(not {})", a[0]),
            Prim(op, a) => write!(f, "({} {} {})", a[0], op.symbol(), a[1]),
            If(c, a, e) => write!(f, "(if {c} then {a} else {e})"),
            Pair(a, b) => write!(f, "({a}, {b})"),
            Fst(e) => write!(f, "(fst {e})"),
            Snd(e) => write!(f, "(snd {e})"),
            Lam(x, e) => write!(f, "(fun {x} -> {e})"),
            App(g, a) => write!(f, "({g} {a})"),
            Return(m, e) => write!(f, "{m}.return {e}"),
            Bind(m, e1, x, e2) => write!(f, "{m}.bind ({e1}) {x}. ({e2})"),
            Get(e) => write!(f, "ST.get {e}"),
            Put(e) => write!(f, "ST.put {e}"),
        }
    }
}

/// Drops type and WP arguments. Fails on `reify`, `reflect` and forms
/// the machine has no rule for.
pub fn erase(t: &Term) -> Result<StTerm, StError> {
    use Kind::*;
    let bx = |t: &Term| erase(t).map(Box::new);
    Ok(match t.kind() {
        Var(x) => StTerm::Var(x.clone()),
        Lit(l) => StTerm::Lit(*l),
        Prim(op, args) => StTerm::Prim(*op, args.iter().map(erase).collect::<Result<_, _>>()?),
        If(c, a, b) => StTerm::If(bx(c)?, bx(a)?, bx(b)?),
        Pair(a, b) => StTerm::Pair(bx(a)?, bx(b)?),
        Fst(e) => StTerm::Fst(bx(e)?),
        Snd(e) => StTerm::Snd(bx(e)?),
        Lam(x, _, b) => StTerm::Lam(x.clone(), bx(b)?),
        App(f, a) => StTerm::App(bx(f)?, bx(a)?),
        Return(m, _, v) if &**m == PURE || &**m == ST => StTerm::Return(m.clone(), bx(v)?),
        Bind { eff, e1, x, e2, .. } if &**eff == PURE || &**eff == ST => {
            StTerm::Bind(eff.clone(), bx(e1)?, x.clone(), bx(e2)?)
        }
        Act { eff, act, args } if &**eff == ST && args.len() == 1 => match &**act {
            "get" => StTerm::Get(bx(&args[0])?),
            "put" => StTerm::Put(bx(&args[0])?),
            _ => return Err(StError::Untranslatable(t.to_string())),
        },
        _ => return Err(StError::Untranslatable(t.to_string())),
    })
}

/// A machine configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StConfig {
    pub state: StTerm,
    pub term: StTerm,
}

impl StConfig {
    pub fn new(state: StTerm, term: StTerm) -> StConfig {
        StConfig { state, term }
    }

    pub fn canon(&self) -> StConfig {
        StConfig::new(self.state.canon(), self.term.canon())
    }

    pub fn alpha_eq(&self, other: &StConfig) -> bool {
        self.state.alpha_eq(&other.state) && self.term.alpha_eq(&other.term)
    }
}

impl fmt::Display for StConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.state, self.term)
    }
}

/// One call-by-value step with its rule label, or `None` once the term is
/// a value or `M.return v`.
pub fn step_st(cfg: &StConfig) -> Result<Option<(StConfig, &'static str)>, StError> {
    if cfg.term.is_final() {
        return Ok(None);
    }
    match step_in(&cfg.term, &cfg.state)? {
        Some((term, state, rule)) => Ok(Some((StConfig { state, term }, rule))),
        None => Err(StError::Stuck(cfg.term.clone())),
    }
}

type Stepped = Option<(StTerm, StTerm, &'static str)>;

/// Steps the first non-value among `parts`, rebuilding with `k`.
fn congruence(parts: &[&StTerm], s: &StTerm, k: impl FnOnce(Vec<StTerm>) -> StTerm) -> Result<Stepped, StError> {
    for (i, p) in parts.iter().enumerate() {
        if !p.is_value() {
            return Ok(step_in(p, s)?.map(|(p2, s2, rule)| {
                let mut v: Vec<StTerm> = parts.iter().map(|t| (*t).clone()).collect();
                v[i] = p2;
                (k(v), s2, rule)
            }));
        }
    }
    Ok(None)
}

fn step_in(t: &StTerm, s: &StTerm) -> Result<Stepped, StError> {
    use StTerm::*;
    let same = |t: StTerm, rule| Ok(Some((t, s.clone(), rule)));
    match t {
        Var(_) | Lit(_) | Lam(..) => Ok(None),
        Prim(op, args) => {
            let refs: Vec<&StTerm> = args.iter().collect();
            if let Some(r) = congruence(&refs, s, |v| Prim(*op, v))? {
                return Ok(Some(r));
            }
            let lits: Option<Vec<crate::syntax::Lit>> = args
                .iter()
                .map(|a| if let Lit(l) = a { Some(*l) } else { None })
                .collect();
            match lits.and_then(|ls| eval_prim(*op, &ls)) {
                Some(l) => same(Lit(l), "ST-prim"),
                None => Ok(None),
            }
        }
        If(c, a, e) => {
            if let Some(r) = congruence(&[c], s, |mut v| If(Box::new(v.remove(0)), a.clone(), e.clone()))? {
                return Ok(Some(r));
            }
            match **c {
                Lit(crate::syntax::Lit::Bool(true)) => same((**a).clone(), "ST-if"),
                Lit(crate::syntax::Lit::Bool(false)) => same((**e).clone(), "ST-if"),
                _ => Ok(None),
            }
        }
        Pair(a, b) => congruence(&[a, b], s, |mut v| {
            let b = v.pop().unwrap();
            Pair(Box::new(v.pop().unwrap()), Box::new(b))
        }),
        Fst(p) | Snd(p) => {
            let is_fst = matches!(t, Fst(_));
            let wrap = |v: StTerm| if is_fst { Fst(Box::new(v)) } else { Snd(Box::new(v)) };
            if let Some(r) = congruence(&[p], s, |mut v| wrap(v.remove(0)))? {
                return Ok(Some(r));
            }
            match &**p {
                Pair(a, b) => same(if is_fst { (**a).clone() } else { (**b).clone() }, "ST-proj"),
                _ => Ok(None),
            }
        }
        App(f, a) => {
            if let Some(r) = congruence(&[f, a], s, |mut v| {
                let a = v.pop().unwrap();
                App(Box::new(v.pop().unwrap()), Box::new(a))
            })? {
                return Ok(Some(r));
            }
            match &**f {
                Lam(x, body) => same(body.subst(x, a), "ST-beta"),
                _ => Ok(None),
            }
        }
        Return(m, v) => congruence(&[v], s, |mut v| Return(m.clone(), Box::new(v.remove(0)))),
        Bind(m, e1, x, e2) => match &**e1 {
            Return(m1, v) if m1 == m && v.is_value() => same(e2.subst(x, v), "ST-bind"),
            _ => Ok(step_in(e1, s)?.map(|(e1, s2, rule)| (Bind(m.clone(), Box::new(e1), x.clone(), e2.clone()), s2, rule))),
        },
        Get(u) => {
            if let Some(r) = congruence(&[u], s, |mut v| Get(Box::new(v.remove(0))))? {
                return Ok(Some(r));
            }
            same(StTerm::st_return(s.clone()), "ST-get")
        }
        Put(v) => {
            if let Some(r) = congruence(&[v], s, |mut v| Put(Box::new(v.remove(0))))? {
                return Ok(Some(r));
            }
            Ok(Some((StTerm::st_return(StTerm::unit()), (**v).clone(), "ST-put")))
        }
    }
}

/// Runs to a final configuration, returning every configuration visited.
pub fn run_st(cfg: &StConfig, fuel: u64) -> Result<Vec<(StConfig, &'static str)>, StError> {
    let mut trace = vec![(cfg.clone(), "init")];
    let mut cur = cfg.clone();
    for _ in 0..fuel {
        match step_st(&cur)? {
            Some((next, rule)) => {
                trace.push((next.clone(), rule));
                cur = next;
            }
            None => return Ok(trace),
        }
    }
    if cur.term.is_final() {
        Ok(trace)
    } else {
        Err(StError::Fuel(fuel))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    Tot,
    Pure,
    Inert,
    Active,
}

impl Sort {
    pub fn label(self) -> &'static str {
        match self {
            Sort::Tot => "Tot",
            Sort::Pure => "Pure",
            Sort::Inert => "Inert",
            Sort::Active => "Active",
        }
    }
}

/// One `Pure.bind [] p. ((λx. reify f) (fst p) (snd p))` frame.
#[derive(Clone, Debug, PartialEq)]
pub struct TeleFrame {
    pub x: Name,
    pub f: Term,
    pub f_st: StTerm,
}

/// A context `K s` with its fill. For `Active`, `state` is the `s` of the
/// innermost `reify Ê s` and `telescope` lists the frames innermost first;
/// for the other sorts the fill is the whole term.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedContext {
    pub sort: Sort,
    pub state: Option<StTerm>,
    pub telescope: Vec<TeleFrame>,
    pub fill: Term,
    pub fill_st: StTerm,
}

fn mentions(t: &Term, p: &dyn Fn(&Kind) -> bool) -> bool {
    if p(t.kind()) {
        return true;
    }
    let mut found = false;
    t.map_children(|c| {
        found = found || mentions(c, p);
        c.clone()
    });
    found
}

fn has_reify(t: &Term) -> bool {
    mentions(t, &|k| matches!(k, Kind::Reify(_) | Kind::Reflect(..)))
}

fn has_effectful_op(t: &Term) -> bool {
    mentions(t, &|k| match k {
        Kind::Return(m, ..) | Kind::Bind { eff: m, .. } | Kind::Act { eff: m, .. } => &**m != PURE,
        Kind::Lift { .. } => true,
        _ => false,
    })
}

fn not_in_form(t: &Term, why: &str) -> StError {
    StError::NotInForm(format!("{why}: {t}"))
}

/// Decomposes a closed term as `K s f`.
///
/// The state argument of `reify Ê s` and the fill are accepted up to the
/// pure redexes that reduction leaves behind (`snd (v, s)` and the like);
/// the state must normalize to a value.
pub fn classify_context(sig: &Signature, e: &Term) -> Result<SortedContext, StError> {
    if let Kind::Bind { eff, e1, x: p, e2, .. } = e.kind() {
        if &**eff == PURE {
            if let Some((x, f)) = telescope_body(p, e2) {
                let inner = classify_context(sig, e1)?;
                if inner.sort != Sort::Active {
                    return Err(not_in_form(e, "telescope around a non-Active context"));
                }
                if has_reify(&f) {
                    return Err(not_in_form(e, "telescope body is not reify-free"));
                }
                let f_st = erase(&f)?;
                let mut k = inner;
                k.telescope.push(TeleFrame { x, f, f_st });
                return Ok(k);
            }
        }
    }
    if let Kind::App(r, s) = e.kind() {
        if let Kind::Reify(f) = r.kind() {
            if has_reify(f) || has_reify(s) {
                return Err(not_in_form(e, "nested reify"));
            }
            let s = nf(sig, s);
            let state = erase(&s)?;
            if !state.is_value() {
                return Err(not_in_form(e, "state is not a value"));
            }
            return Ok(SortedContext {
                sort: Sort::Active,
                state: Some(state),
                telescope: vec![],
                fill: f.clone(),
                fill_st: erase(f)?,
            });
        }
    }
    if has_reify(e) {
        return Err(not_in_form(e, "reify or reflect outside the telescope"));
    }
    if !e.free_vars().is_empty() {
        return Err(not_in_form(e, "open term"));
    }
    let sort = if has_effectful_op(e) {
        Sort::Inert
    } else {
        match Checker::new(sig).synth(&Ctx::new(), e) {
            Ok(Comp::Tot(_)) => Sort::Tot,
            Ok(Comp::M(m, ..)) if &*m == PURE => Sort::Pure,
            _ => return Err(not_in_form(e, "neither Tot nor Pure")),
        }
    };
    Ok(SortedContext {
        sort,
        state: None,
        telescope: vec![],
        fill: e.clone(),
        fill_st: erase(e)?,
    })
}

/// Matches `(λx. reify f) (fst p) (snd p)`.
fn telescope_body(p: &Name, body: &Term) -> Option<(Name, Term)> {
    let Kind::App(g, sp) = body.kind() else { return None };
    let Kind::App(lam, fp) = g.kind() else { return None };
    let Kind::Lam(x, _, r) = lam.kind() else { return None };
    let Kind::Reify(f) = r.kind() else { return None };
    let is_proj = |t: &Term, fst: bool| match t.kind() {
        Kind::Fst(v) if fst => v.as_var() == Some(p),
        Kind::Snd(v) if !fst => v.as_var() == Some(p),
        _ => false,
    };
    (is_proj(fp, true) && is_proj(sp, false)).then(|| (x.clone(), f.clone()))
}

/// `{{·}}`: `{{Ê}} = Ê`, `{{reify Ê s}} = Ê` and a telescope frame becomes
/// `ST.bind {{K s}} x. f`.
pub fn translate_st(k: &SortedContext) -> StTerm {
    k.telescope.iter().fold(k.fill_st.clone(), |inner, fr| {
        StTerm::Bind(name(ST), Box::new(inner), fr.x.clone(), Box::new(fr.f_st.clone()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::corpus_signature;

    fn run(s: i64, t: StTerm) -> StConfig {
        let trace = run_st(&StConfig::new(StTerm::int(s), t), 1000).unwrap();
        trace.last().unwrap().0.clone()
    }

    #[test]
    fn get_and_put_rules() {
        let (c, rule) = step_st(&StConfig::new(StTerm::int(3), StTerm::Get(Box::new(StTerm::unit()))))
            .unwrap()
            .unwrap();
        assert_eq!(rule, "ST-get");
        assert_eq!(c, StConfig::new(StTerm::int(3), StTerm::st_return(StTerm::int(3))));
        let (c, rule) = step_st(&StConfig::new(StTerm::int(3), StTerm::Put(Box::new(StTerm::int(7)))))
            .unwrap()
            .unwrap();
        assert_eq!(rule, "ST-put");
        assert_eq!(c, StConfig::new(StTerm::int(7), StTerm::st_return(StTerm::unit())));
    }

    #[test]
    fn incr_body_increments() {
        for s0 in -5..=5 {
            let body = erase(&to_emf(&incr())).unwrap();
            assert_eq!(run(s0, body), StConfig::new(StTerm::int(s0 + 1), StTerm::st_return(StTerm::unit())));
        }
    }

    #[test]
    fn stuck_terms_are_errors() {
        let bad = StTerm::App(Box::new(StTerm::int(1)), Box::new(StTerm::int(2)));
        assert!(matches!(step_st(&StConfig::new(StTerm::int(0), bad)), Err(StError::Stuck(_))));
    }

    #[test]
    fn classification_examples() {
        let sig = corpus_signature().unwrap();
        let prog = to_emf(&incr());
        let active = Term::app(Term::reify(prog.clone()), Term::int(0));
        let k = classify_context(&sig, &active).unwrap();
        assert_eq!(k.sort, Sort::Active);
        assert!(k.telescope.is_empty());
        assert_eq!(translate_st(&k), erase(&prog).unwrap());

        let tot = Term::binop(PrimOp::Add, Term::int(1), Term::int(2));
        let k = classify_context(&sig, &tot).unwrap();
        assert_eq!(k.sort, Sort::Tot);
        assert_eq!(translate_st(&k), erase(&tot).unwrap());

        assert_eq!(classify_context(&sig, &prog).unwrap().sort, Sort::Inert);

        let refl = Term::reflect(ST, Term::lam("s", Term::int_ty(), Term::ret(PURE, Term::int_ty(), Term::int(0))));
        assert!(matches!(classify_context(&sig, &refl), Err(StError::NotInForm(_))));
    }

    #[test]
    fn one_frame_telescope_is_one_bind() {
        let sig = corpus_signature().unwrap();
        let f = Term::act(ST, "put", vec![Term::var("x")]);
        let inner = Term::app(Term::reify(Term::act(ST, "get", vec![Term::unit()])), Term::int(4));
        let cont = Term::apps(
            Term::lam("x", Term::int_ty(), Term::reify(f)),
            [Term::fst(Term::var("p")), Term::snd(Term::var("p"))],
        );
        let pty = Term::prod(Term::int_ty(), Term::int_ty());
        let e = Term::bind(PURE, pty.clone(), pty, Term::var("w1"), inner, Term::var("w2"), "p", cont);
        let k = classify_context(&sig, &e).unwrap();
        assert_eq!(k.sort, Sort::Active);
        assert_eq!(k.telescope.len(), 1);
        assert_eq!(k.state, Some(StTerm::int(4)));
        assert_eq!(translate_st(&k).to_string(), "ST.bind (ST.get ()) x. (ST.put x)");
    }

    #[test]
    fn canon_is_alpha_invariant() {
        let a = StTerm::Bind(
            name(ST),
            Box::new(StTerm::Get(Box::new(StTerm::unit()))),
            name("x"),
            Box::new(StTerm::Put(Box::new(StTerm::Prim(PrimOp::Add, vec![StTerm::Var(name("x")), StTerm::int(1)])))),
        );
        let b = StTerm::Bind(
            name(ST),
            Box::new(StTerm::Get(Box::new(StTerm::unit()))),
            name("y"),
            Box::new(StTerm::Put(Box::new(StTerm::Prim(PrimOp::Add, vec![StTerm::Var(name("y")), StTerm::int(1)])))),
        );
        assert!(a.alpha_eq(&b));
        assert!(!a.alpha_eq(&StTerm::Get(Box::new(StTerm::unit()))));
        let fold = StTerm::Fst(Box::new(StTerm::Pair(Box::new(StTerm::int(2)), Box::new(StTerm::int(3)))));
        assert_eq!(fold.canon(), StTerm::int(2));
    }
}
