//! The selective CPS (`*`) translation of DM types and typing derivations.

use thiserror::Error;

use crate::dm::types::IllFormed;
use crate::dm::{classify, Deriv, DmTerm, DmType, Eff};
use crate::signature::Signature;
use crate::syntax::{fresh, Comp, Name, Term};
use crate::typing::{Checker, Ctx, TypeError};

/// `H*`
pub fn cps_type(t: &DmType) -> Term {
    match t {
        DmType::Var(x) => Term::var_n(x),
        DmType::Base(b) => Term::base(*b),
        DmType::Arrow(h, Eff::N, h2) => Term::arrow(cps_type(h), cps_type(h2)),
        DmType::Arrow(h, Eff::Tau, a) => Term::arrow(cps_type(h), wp_of(cps_type(a))),
        DmType::Sum(a, b) => Term::sum(cps_type(a), cps_type(b)),
        DmType::Prod(a, b) => Term::prod(cps_type(a), cps_type(b)),
    }
}

/// `(t -> Type0) -> Type0`
pub fn wp_of(t: Term) -> Term {
    crate::signature::pure_wp_of(t)
}

/// The type of `e*` for a judgment `e : H ! ε`.
pub fn cps_judgment_type(ty: &DmType, eff: Eff) -> Term {
    match eff {
        Eff::N => cps_type(ty),
        Eff::Tau => wp_of(cps_type(ty)),
    }
}

/// `e*`, by recursion on the derivation.
pub fn cps_term(d: &Deriv) -> Term {
    use DmTerm::*;
    let k = |i: usize| cps_term(&d.kids[i]);
    match &d.term {
        Var(x) => Term::var_n(x),
        Lit(l) => Term::lit(*l),
        Op(op, _) => Term::prim(*op, (0..d.kids.len()).map(k).collect()),
        If(..) => Term::ite(k(0), k(1), k(2)),
        Lam(x, h, _) => Term::lam(x, cps_type(h), k(0)),
        App(..) => Term::app(k(0), k(1)),
        Pair(..) => Term::pair(k(0), k(1)),
        Fst(_) => Term::fst(k(0)),
        Snd(_) => Term::snd(k(0)),
        Inl(_, r) => Term::inl(k(0), cps_type(r)),
        Inr(l, _) => Term::inr(cps_type(l), k(0)),
        Case(_, x, _, y, _) => {
            let ret = Term::tot(cps_judgment_type(&d.ty, d.eff));
            Term::case(k(0), "_", ret, x, k(1), y, k(2))
        }
        Return(_) => {
            let v = k(0);
            let p = fresh("p", &|n| v.has_free(n));
            let a = cps_type(&d.ty);
            Term::lam(&p, Term::arrow(a, Term::type0()), Term::app(Term::var_n(&p), v))
        }
        Bind(_, x, _) => {
            let (e1, e2) = (k(0), k(1));
            let p = fresh("p", &|n| e1.has_free(n) || e2.has_free(n) || n == &**x);
            let a = cps_type(&d.kids[0].ty);
            let a2 = cps_type(&d.ty);
            let cont = Term::lam(x, a, Term::app(e2, Term::var_n(&p)));
            Term::lam(&p, Term::arrow(a2, Term::type0()), Term::app(e1, cont))
        }
    }
}

#[derive(Clone, Debug, Error)]
pub enum CpsError {
    #[error(transparent)]
    IllFormed(#[from] IllFormed),
    #[error("e* does not have type {expected}: {err}")]
    Typing { expected: String, err: TypeError },
}

/// `Δ*, Γ*`: type variables at `Type0`, then the translated bindings.
pub fn cps_ctx(delta: &[Name], gamma: &[(Name, DmType)]) -> Ctx {
    let mut binds: Vec<(Name, Term)> = delta.iter().map(|x| (x.clone(), Term::type0())).collect();
    binds.extend(gamma.iter().map(|(x, t)| (x.clone(), cps_type(t))));
    Ctx::from_binds(binds)
}

/// Result of translating a derivation.
#[derive(Clone, Debug)]
pub struct CpsOutput {
    pub term: Term,
    pub ty: Term,
    pub ctx: Ctx,
}

/// Translates and checks the well-typing instance: `Δ*, Γ* ⊢ e* : Tot H*`
/// (or `Tot ((A* -> Type0) -> Type0)` when the effect is τ).
pub fn cps_checked(
    sig: &Signature,
    delta: &[Name],
    gamma: &[(Name, DmType)],
    d: &Deriv,
) -> Result<CpsOutput, CpsError> {
    classify(delta, &d.ty)?;
    let term = cps_term(d);
    let ty = cps_judgment_type(&d.ty, d.eff);
    let ctx = cps_ctx(delta, gamma);
    Checker::new(sig)
        .check(&ctx, &term, &Comp::Tot(ty.clone()))
        .map_err(|err| CpsError::Typing {
            expected: ty.to_string(),
            err,
        })?;
    Ok(CpsOutput { term, ty, ctx })
}

/// Abstracts a translated definition over its type variables.
pub fn abstract_types(delta: &[Name], t: Term) -> Term {
    delta.iter().rev().fold(t, |acc, x| Term::lam(x, Term::type0(), acc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dm::{typecheck_dm, DmCtx};
    use crate::sexp::parse_term;
    use crate::syntax::name;

    fn st(x: DmType) -> DmType {
        DmType::tau_arrow(DmType::int(), DmType::prod(x, DmType::int()))
    }

    #[test]
    fn state_type() {
        let t = cps_type(&st(DmType::var("X")));
        let want = parse_term("(arrow int (arrow (arrow (prod X int) (Type 0)) (Type 0)))").unwrap();
        assert!(t.alpha_eq(&want), "{t}");
    }

    #[test]
    fn value_arrow_is_identity() {
        let t = cps_type(&DmType::arrow(DmType::var("X"), DmType::var("X")));
        assert!(t.alpha_eq(&Term::arrow(Term::var("X"), Term::var("X"))));
    }

    #[test]
    fn return_st() {
        let e = DmTerm::lam(
            "x",
            DmType::var("X"),
            DmTerm::lam("s", DmType::int(), DmTerm::ret(DmTerm::pair(DmTerm::var("x"), DmTerm::var("s")))),
        );
        let d = typecheck_dm(&DmCtx::new(vec![name("X")]), &e).unwrap();
        let out = cps_checked(&Signature::new(), &[name("X")], &[], &d).unwrap();
        let want = Term::lam(
            "x",
            Term::var("X"),
            Term::lam(
                "s",
                Term::int_ty(),
                Term::lam(
                    "p",
                    Term::arrow(Term::prod(Term::var("X"), Term::int_ty()), Term::type0()),
                    Term::app(Term::var("p"), Term::pair(Term::var("x"), Term::var("s"))),
                ),
            ),
        );
        assert!(out.term.alpha_eq(&want), "{}", out.term);
    }

    #[test]
    fn postcondition_name_avoids_capture() {
        let e = DmTerm::lam("p", DmType::int(), DmTerm::ret(DmTerm::var("p")));
        let d = typecheck_dm(&DmCtx::default(), &e).unwrap();
        let t = cps_term(&d);
        assert!(t.to_string().contains("p1"), "{t}");
        cps_checked(&Signature::new(), &[], &[], &d).unwrap();
    }
}
