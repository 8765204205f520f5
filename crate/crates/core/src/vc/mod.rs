//! Verification conditions for derived Dijkstra monads: the stronger-than
//! relation, conjunctivity, monad laws and monad-morphism equations.

pub mod smt;

use std::fmt;

use thiserror::Error;

use crate::cps::{cps_judgment_type, cps_term};
use crate::dm::{DmDef, DmEffect};
use crate::norm::{mk_and, mk_implies};
use crate::signature::{SigError, Signature};
use crate::syntax::{fresh_for, Field, Kind, Name, Term};
use crate::validity::{validity, Verdict};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum VcError {
    #[error("type `{0}` is outside the all-Tot non-dependent fragment")]
    Unsupported(String),
    #[error(transparent)]
    Sig(#[from] SigError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Stronger,
    Conjunctive,
    Equality,
}

impl Relation {
    pub fn label(self) -> &'static str {
        match self {
            Relation::Stronger => "monotonic",
            Relation::Conjunctive => "conjunctive",
            Relation::Equality => "equality",
        }
    }
}

/// Which VCs to generate for an effect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VcKind {
    Laws,
    Morphisms,
    Monotonicity,
    Conjunctivity,
}

impl VcKind {
    pub const ALL: [VcKind; 4] = [VcKind::Laws, VcKind::Morphisms, VcKind::Monotonicity, VcKind::Conjunctivity];

    pub fn parse(s: &str) -> Option<VcKind> {
        match s {
            "laws" => Some(VcKind::Laws),
            "morphisms" | "lifts" => Some(VcKind::Morphisms),
            "monotonicity" | "mono" => Some(VcKind::Monotonicity),
            "conjunctivity" | "conj" => Some(VcKind::Conjunctivity),
            _ => None,
        }
    }
}

/// A generated obligation.
#[derive(Clone, Debug)]
pub struct RelFormula {
    /// `effect.item`, e.g. `ST.right_unit` or `ST.get.monotonic`.
    pub name: String,
    pub relation: Relation,
    /// The type the relation is taken at.
    pub index: Term,
    /// Closed formula in `Type0`.
    pub formula: Term,
}

impl fmt::Display for RelFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.name, self.relation.label(), self.formula)
    }
}

/// Types that do not mention `Type0`.
pub fn predicate_free(t: &Term) -> bool {
    match t.kind() {
        Kind::Univ(_) => false,
        Kind::Base(_) | Kind::Var(_) => true,
        Kind::Prod(a, b) | Kind::Sum(a, b) => predicate_free(a) && predicate_free(b),
        Kind::Pi(_, d, c) => match c.kind() {
            Kind::Tot(r) => predicate_free(d) && predicate_free(r),
            _ => false,
        },
        _ => false,
    }
}

/// Types all of whose inhabitants are monotonic: predicate-free types and
/// `d1 -> ... -> dn -> Type0` with predicate-free `di`, closed under products.
fn first_order(t: &Term) -> bool {
    if predicate_free(t) {
        return true;
    }
    match t.kind() {
        Kind::Univ(0) => true,
        Kind::Prod(a, b) => first_order(a) && first_order(b),
        Kind::Pi(_, d, c) => match c.kind() {
            Kind::Tot(r) => predicate_free(d) && first_order(r),
            _ => false,
        },
        _ => false,
    }
}

/// Splits a non-dependent total arrow.
fn arrow(t: &Term) -> Option<(&Term, &Term)> {
    match t.kind() {
        Kind::Pi(x, d, c) => match c.kind() {
            Kind::Tot(r) if !r.has_free(x) => Some((d, r)),
            _ => None,
        },
        _ => None,
    }
}

fn unsupported(t: &Term) -> VcError {
    VcError::Unsupported(t.to_string())
}

fn fresh_pair(base: &str, terms: &[&Term]) -> (Name, Name) {
    let x = fresh_for(&format!("{base}1"), terms);
    let xv = Term::var_n(&x);
    let mut all: Vec<&Term> = terms.to_vec();
    all.push(&xv);
    let y = fresh_for(&format!("{base}2"), &all);
    (x, y)
}

/// `x ≼_t y`, with the simplifications that hold at predicate-free and
/// first-order domains: a predicate-free argument is shared between both
/// sides, and the reflexive premises are dropped where they are trivial.
pub fn stronger_than(t: &Term, x: &Term, y: &Term) -> Result<Term, VcError> {
    stronger(t, x, y, true)
}

/// `x ≼_t y` exactly as defined, with the triple premise at every arrow.
pub fn stronger_than_literal(t: &Term, x: &Term, y: &Term) -> Result<Term, VcError> {
    stronger(t, x, y, false)
}

fn stronger(t: &Term, x: &Term, y: &Term, simplify: bool) -> Result<Term, VcError> {
    match t.kind() {
        Kind::Univ(0) => Ok(Term::implies(x.clone(), y.clone())),
        Kind::Base(_) | Kind::Var(_) => Ok(Term::eq(t.clone(), x.clone(), y.clone())),
        Kind::Prod(a, b) => Ok(Term::and(
            stronger(a, &Term::fst(x.clone()), &Term::fst(y.clone()), simplify)?,
            stronger(b, &Term::snd(x.clone()), &Term::snd(y.clone()), simplify)?,
        )),
        Kind::Sum(a, b) => {
            let (v1, v2) = fresh_pair("v", &[t, x, y]);
            let (t1, t2) = (Term::var_n(&v1), Term::var_n(&v2));
            let ret = Term::tot(Term::type0());
            let inner = |left: bool| -> Result<Term, VcError> {
                let (l, r) = if left {
                    (stronger(a, &t1, &t2, simplify)?, Term::ff())
                } else {
                    (Term::ff(), stronger(b, &t1, &t2, simplify)?)
                };
                Ok(Term::case(y.clone(), "_", ret.clone(), &v2, l, &v2, r))
            };
            Ok(Term::case(x.clone(), "_", ret.clone(), &v1, inner(true)?, &v1, inner(false)?))
        }
        _ => {
            let (dom, cod) = arrow(t).ok_or_else(|| unsupported(t))?;
            if simplify && predicate_free(dom) {
                let v = fresh_for("x", &[t, x, y]);
                let a = Term::var_n(&v);
                let body = stronger(cod, &Term::app(x.clone(), a.clone()), &Term::app(y.clone(), a), simplify)?;
                return Ok(Term::forall(&v, dom.clone(), body));
            }
            let base = if matches!(arrow(dom), Some((_, r)) if matches!(r.kind(), Kind::Univ(0))) { "p" } else { "x" };
            let (v1, v2) = fresh_pair(base, &[t, x, y]);
            let (a1, a2) = (Term::var_n(&v1), Term::var_n(&v2));
            let cross = stronger(dom, &a1, &a2, simplify)?;
            let prem = if simplify && first_order(dom) {
                cross
            } else {
                Term::ands(vec![
                    stronger(dom, &a1, &a1, simplify)?,
                    cross,
                    stronger(dom, &a2, &a2, simplify)?,
                ])
            };
            let concl = stronger(cod, &Term::app(x.clone(), a1), &Term::app(y.clone(), a2), simplify)?;
            Ok(Term::forall(
                &v1,
                dom.clone(),
                Term::forall(&v2, dom.clone(), Term::implies(prem, concl)),
            ))
        }
    }
}

/// `(a -> Type0) -> Type0` with predicate-free `a`.
fn double_negation(t: &Term) -> Option<&Term> {
    let (post, r) = arrow(t)?;
    let (a, r2) = arrow(post)?;
    (matches!(r.kind(), Kind::Univ(0)) && matches!(r2.kind(), Kind::Univ(0)) && predicate_free(a)).then_some(a)
}

/// `𝒞_t(w)`
pub fn conjunctive(t: &Term, w: &Term) -> Result<Term, VcError> {
    if let Some(a) = double_negation(t) {
        let (p1, p2) = fresh_pair("p", &[t, w]);
        let pt = Term::arrow(a.clone(), Term::type0());
        let x = fresh_for("x", &[t, w, &Term::var_n(&p1), &Term::var_n(&p2)]);
        let xv = Term::var_n(&x);
        let both = Term::lam(
            &x,
            a.clone(),
            Term::and(Term::app(Term::var_n(&p1), xv.clone()), Term::app(Term::var_n(&p2), xv)),
        );
        let eq = Term::eq(
            Term::type0(),
            Term::and(Term::app(w.clone(), Term::var_n(&p1)), Term::app(w.clone(), Term::var_n(&p2))),
            Term::app(w.clone(), both),
        );
        return Ok(Term::forall(&p1, pt.clone(), Term::forall(&p2, pt, eq)));
    }
    if predicate_free(t) {
        return Ok(Term::tt());
    }
    match t.kind() {
        Kind::Prod(a, b) => Ok(mk_and(
            conjunctive(a, &Term::fst(w.clone()))?,
            conjunctive(b, &Term::snd(w.clone()))?,
        )),
        _ => {
            let (dom, cod) = arrow(t).ok_or_else(|| unsupported(t))?;
            let v = fresh_for("x", &[t, w]);
            let a = Term::var_n(&v);
            let body = mk_implies(conjunctive(dom, &a)?, conjunctive(cod, &Term::app(w.clone(), a))?);
            Ok(Term::forall(&v, dom.clone(), body))
        }
    }
}

fn close_types(delta: &[Name], phi: Term) -> Term {
    delta.iter().rev().fold(phi, |acc, a| Term::forall(a, Term::type0(), acc))
}

fn tys(names: &[&str]) -> Vec<Name> {
    names.iter().map(|n| crate::syntax::name(n)).collect()
}

/// Monotonicity and conjunctivity of `d*` at `H*`, closed over its type variables.
pub fn operation_vcs(effect: &str, d: &DmDef, kinds: &[VcKind]) -> Result<Vec<RelFormula>, VcError> {
    let ty = cps_judgment_type(&d.ty, d.deriv.eff);
    let star = crate::cps::abstract_types(&d.delta, cps_term(&d.deriv));
    let inst = Term::apps(star, d.delta.iter().map(Term::var_n));
    let mut out = Vec::new();
    if kinds.contains(&VcKind::Monotonicity) {
        out.push(RelFormula {
            name: format!("{effect}.{}.monotonic", d.name),
            relation: Relation::Stronger,
            index: ty.clone(),
            formula: close_types(&d.delta, stronger_than(&ty, &inst, &inst)?),
        });
    }
    if kinds.contains(&VcKind::Conjunctivity) {
        out.push(RelFormula {
            name: format!("{effect}.{}.conjunctive", d.name),
            relation: Relation::Conjunctive,
            index: ty.clone(),
            formula: close_types(&d.delta, conjunctive(&ty, &inst)?),
        });
    }
    Ok(out)
}

/// The three monad laws over the installed `return*` and `bind*` of `eff`.
pub fn monad_law_vcs(sig: &Signature, eff: &str) -> Result<Vec<RelFormula>, VcError> {
    sig.effect(eff)?;
    let (a, b, c) = (Term::var("a"), Term::var("b"), Term::var("c"));
    let wp = |t: &Term| Term::app(Term::cnst(eff, Field::WpType), t.clone());
    let ret = |t: &Term, x: Term| Term::apps(Term::cnst(eff, Field::ReturnStar), [t.clone(), x]);
    let bind = |t1: &Term, t2: &Term, m: Term, f: Term| Term::apps(Term::cnst(eff, Field::BindStar), [t1.clone(), t2.clone(), m, f]);
    let kfun = |t1: &Term, t2: &Term| Term::arrow(t1.clone(), wp(t2));
    let (m, f, g, x) = (Term::var("m"), Term::var("f"), Term::var("g"), Term::var("x"));

    let right = Term::forall(
        "m",
        wp(&a),
        Term::eq(wp(&a), bind(&a, &a, m.clone(), Term::app(Term::cnst(eff, Field::ReturnStar), a.clone())), m.clone()),
    );
    let left = Term::forall(
        "x",
        a.clone(),
        Term::forall(
            "f",
            kfun(&a, &b),
            Term::eq(wp(&b), bind(&a, &b, ret(&a, x.clone()), f.clone()), Term::app(f.clone(), x.clone())),
        ),
    );
    let assoc_l = bind(
        &a,
        &c,
        m.clone(),
        Term::lam("x", a.clone(), bind(&b, &c, Term::app(f.clone(), x.clone()), g.clone())),
    );
    let assoc_r = bind(&b, &c, bind(&a, &b, m.clone(), f.clone()), g.clone());
    let assoc = Term::forall(
        "m",
        wp(&a),
        Term::forall(
            "f",
            kfun(&a, &b),
            Term::forall("g", kfun(&b, &c), Term::eq(wp(&c), assoc_l, assoc_r)),
        ),
    );
    let mk = |n: &str, ts: &[&str], phi: Term, idx: Term| RelFormula {
        name: format!("{eff}.{n}"),
        relation: Relation::Equality,
        index: idx,
        formula: close_types(&tys(ts), phi),
    };
    Ok(vec![
        mk("right_unit", &["a"], right, wp(&a)),
        mk("left_unit", &["a", "b"], left, wp(&b)),
        mk("assoc", &["a", "b", "c"], assoc, wp(&c)),
    ])
}

/// `lift* ∘ return*_from == return*_to` and the bind commutation square.
pub fn morphism_vcs(sig: &Signature, from: &str, to: &str) -> Result<Vec<RelFormula>, VcError> {
    sig.lift(from, to)?;
    let (a, b) = (Term::var("a"), Term::var("b"));
    let wp = |e: &str, t: &Term| Term::app(Term::cnst(e, Field::WpType), t.clone());
    let ret = |e: &str, t: &Term, x: Term| Term::apps(Term::cnst(e, Field::ReturnStar), [t.clone(), x]);
    let bind = |e: &str, m: Term, f: Term| Term::apps(Term::cnst(e, Field::BindStar), [a.clone(), b.clone(), m, f]);
    let lift = |t: &Term, w: Term| Term::apps(Term::cnst(from, Field::LiftStar(crate::syntax::name(to))), [t.clone(), w]);
    let (m, f, x) = (Term::var("m"), Term::var("f"), Term::var("x"));

    let unit = Term::forall(
        "x",
        a.clone(),
        Term::eq(wp(to, &a), lift(&a, ret(from, &a, x.clone())), ret(to, &a, x.clone())),
    );
    let lifted_f = Term::lam("x", a.clone(), lift(&b, Term::app(f.clone(), x.clone())));
    let square = Term::forall(
        "m",
        wp(from, &a),
        Term::forall(
            "f",
            Term::arrow(a.clone(), wp(from, &b)),
            Term::eq(
                wp(to, &b),
                lift(&b, bind(from, m.clone(), f.clone())),
                bind(to, lift(&a, m.clone()), lifted_f),
            ),
        ),
    );
    let mk = |n: &str, ts: &[&str], phi: Term, idx: Term| RelFormula {
        name: format!("lift[{from}->{to}].{n}"),
        relation: Relation::Equality,
        index: idx,
        formula: close_types(&tys(ts), phi),
    };
    Ok(vec![
        mk("return", &["a"], unit, wp(to, &a)),
        mk("bind", &["a", "b"], square, wp(to, &b)),
    ])
}

/// All requested VCs for an installed effect and its definitions.
pub fn effect_vcs(sig: &Signature, e: &DmEffect, kinds: &[VcKind]) -> Result<Vec<RelFormula>, VcError> {
    let mut out = Vec::new();
    if kinds.contains(&VcKind::Laws) {
        out.extend(monad_law_vcs(sig, &e.name)?);
    }
    if kinds.contains(&VcKind::Morphisms) {
        for l in &e.lifts {
            out.extend(morphism_vcs(sig, &l.from, &e.name)?);
        }
    }
    for d in e.defs() {
        out.extend(operation_vcs(&e.name, d, kinds)?);
    }
    Ok(out)
}

/// Decides an obligation with the validity oracle.
pub fn discharge(sig: &Signature, vc: &RelFormula) -> Verdict {
    validity(sig, &[], &vc.formula)
}

/// `(vc NAME KIND STATUS RESIDUAL)`
pub fn report_sexp(vc: &RelFormula, verdict: &Verdict) -> String {
    let (status, residual) = match verdict {
        Verdict::Valid => ("valid", "()".to_string()),
        Verdict::Invalid(m) => {
            let items: Vec<String> = m.iter().map(|(x, v)| format!("({x} {})", Term::lit(*v))).collect();
            ("invalid", format!("({})", items.join(" ")))
        }
        Verdict::Unknown(r) => ("unknown", crate::print::sexp(r)),
    };
    format!(
        "(vc \"{}\" {} {} {})",
        vc.name,
        vc.relation.label(),
        status,
        residual
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{corpus_signature, load_corpus};
    use crate::norm::nf;
    use crate::sexp::parse_term;

    fn st_wp() -> Term {
        parse_term("(arrow int (arrow (arrow (prod X int) (Type 0)) (Type 0)))").unwrap()
    }

    #[test]
    fn type0_is_implication() {
        let t = stronger_than(&Term::type0(), &Term::var("x"), &Term::var("y")).unwrap();
        assert!(t.alpha_eq(&Term::implies(Term::var("x"), Term::var("y"))));
    }

    #[test]
    fn base_is_equality() {
        let t = stronger_than(&Term::int_ty(), &Term::var("x"), &Term::var("y")).unwrap();
        assert!(t.alpha_eq(&Term::eq(Term::int_ty(), Term::var("x"), Term::var("y"))));
    }

    #[test]
    fn state_unfolding_matches_the_usual_monotonicity() {
        let sig = Signature::new();
        let f = Term::var("f");
        let got = nf(&sig, &stronger_than(&st_wp(), &f, &f).unwrap());
        let want = parse_term(
            "(forall s int (forall p1 (arrow (prod X int) (Type 0)) (forall p2 (arrow (prod X int) (Type 0))
               (implies (forall x X (forall s1 int (implies (app p1 (pair x s1)) (app p2 (pair x s1)))))
                        (implies (app (app f s) p1) (app (app f s) p2))))))",
        )
        .unwrap();
        let want = nf(&sig, &want);
        assert!(got.alpha_eq(&want), "{got}\n{want}");
    }

    #[test]
    fn state_conjunctivity_unfolding() {
        let sig = Signature::new();
        let f = Term::var("f");
        let got = nf(&sig, &conjunctive(&st_wp(), &f).unwrap());
        let want = parse_term(
            "(forall s int (forall p1 (arrow (prod X int) (Type 0)) (forall p2 (arrow (prod X int) (Type 0))
               (eq (Type 0) (and (app (app f s) p1) (app (app f s) p2))
                   (app (app f s) (lam x (prod X int) (and (app p1 x) (app p2 x))))))))",
        )
        .unwrap();
        assert!(got.alpha_eq(&nf(&sig, &want)), "{got}");
    }

    #[test]
    fn outside_the_fragment() {
        let dep = Term::pi_tot("x", Term::type0(), Term::var("x"));
        assert!(stronger_than(&dep, &Term::var("f"), &Term::var("f")).is_err());
        assert!(conjunctive(&Term::type0(), &Term::var("f")).is_err());
    }

    #[test]
    fn literal_and_simplified_agree_on_state() {
        let sig = Signature::new();
        let get = parse_term("(lam s int (lam p (arrow (prod int int) (Type 0)) (app p (pair s s))))").unwrap();
        let t = parse_term("(arrow int (arrow (arrow (prod int int) (Type 0)) (Type 0)))").unwrap();
        for phi in [
            stronger_than(&t, &get, &get).unwrap(),
            stronger_than_literal(&t, &get, &get).unwrap(),
        ] {
            assert!(validity(&sig, &[], &phi).is_valid(), "{phi}");
        }
    }

    #[test]
    fn corpus_vcs_discharge() {
        let sig = corpus_signature().unwrap();
        let (_, files) = load_corpus().unwrap();
        let mut failed = vec![];
        for (_, f) in &files {
            let e = f.effect.as_ref().unwrap();
            for vc in effect_vcs(&sig, e, &VcKind::ALL).unwrap() {
                let t = std::time::Instant::now();
                let v = discharge(&sig, &vc);
                println!("{} {} {:?}", vc.name, v.is_valid(), t.elapsed());
                if !v.is_valid() {
                    failed.push(format!("{}: {v}", vc.name));
                }
            }
        }
        assert!(failed.is_empty(), "{}", failed.join("\n"));
    }

    #[test]
    fn swapped_state_threading_breaks_right_unit() {
        let src = crate::corpus::source("st").unwrap().replace("g x s1", "g x s0");
        let f = crate::dm::load(&src, &Default::default()).unwrap();
        let sig = crate::elab::install_effect(&Signature::new(), f.effect.as_ref().unwrap()).unwrap();
        let laws = monad_law_vcs(&sig, "ST").unwrap();
        assert!(!discharge(&sig, &laws[0]).is_valid());
    }

    #[test]
    fn literal_monotonicity_of_state_bind() {
        let (_, files) = load_corpus().unwrap();
        let e = files[0].1.effect.as_ref().unwrap();
        let d = &e.bind;
        let ty = cps_judgment_type(&d.ty, d.deriv.eff);
        let star = crate::cps::abstract_types(&d.delta, cps_term(&d.deriv));
        let inst = Term::apps(star, d.delta.iter().map(Term::var_n));
        let phi = close_types(&d.delta, stronger_than_literal(&ty, &inst, &inst).unwrap());
        assert!(validity(&Signature::new(), &[], &phi).is_valid());
    }
}
