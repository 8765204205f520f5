//! Elaboration of DM derivations into EMF* terms, the type translations
//! `F` and `G`, and installation of a DM monad as a signature entry.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::cps::{abstract_types, cps_term, cps_type, wp_of};
use crate::dm::{classify, Deriv, DmDef, DmEffect, DmTerm, DmType, Eff, Sort};
use crate::signature::{wf_signature, ActionDef, EffectDef, LiftDef, SigError, Signature};
use crate::syntax::{fresh, name, Comp, Name, Term, PURE};
use crate::typing::{Checker, Ctx, TypeError};

fn is_c(delta: &[Name], t: &DmType) -> bool {
    classify(delta, t) == Ok(Sort::C)
}

fn taken_by(terms: &[&Term]) -> HashSet<Name> {
    let mut s = HashSet::new();
    for t in terms {
        t.all_names(&mut s);
    }
    s
}

/// `F(C, w)`: the type of elaborations whose specification is `w : C*`.
pub fn elab_f(delta: &[Name], c: &DmType, w: &Term) -> Term {
    match c {
        DmType::Prod(c1, c2) => Term::prod(
            elab_f(delta, c1, &Term::fst(w.clone())),
            elab_f(delta, c2, &Term::snd(w.clone())),
        ),
        DmType::Arrow(h, eff, h2) if is_c(delta, h) => {
            let used = taken_by(&[w]);
            let w1 = fresh("w", &|n| used.contains(n));
            let x = fresh("x", &|n| used.contains(n) || n == &*w1);
            let wv = Term::var_n(&w1);
            let inner = Term::pi(
                &x,
                elab_f(delta, h, &wv),
                elab_g(delta, *eff, h2, &Term::app(w.clone(), wv.clone())),
            );
            Term::pi_tot(&w1, cps_type(h), inner)
        }
        DmType::Arrow(a, eff, h2) => {
            let used = taken_by(&[w]);
            let x = fresh("x", &|n| used.contains(n));
            Term::pi(&x, cps_type(a), elab_g(delta, *eff, h2, &Term::app(w.clone(), Term::var_n(&x))))
        }
        // A-types: F is the identity on τ-free types.
        _ => cps_type(c),
    }
}

/// `G(ε, H, w)` as a computation type.
pub fn elab_g(delta: &[Name], eff: Eff, h: &DmType, w: &Term) -> Term {
    match eff {
        Eff::N => Term::tot(elab_f(delta, h, w)),
        Eff::Tau => Term::comp(PURE, cps_type(h), w.clone()),
    }
}

/// Elaborates derivations in a fixed `Δ`, naming `w`-twins consistently.
pub struct Elaborator {
    delta: Vec<Name>,
    twins: HashMap<Name, Name>,
    used: HashSet<Name>,
}

impl Elaborator {
    /// Prepares twins for every computational binder of `d` and of `gamma`.
    pub fn new(delta: &[Name], gamma: &[(Name, DmType)], d: &Deriv) -> Elaborator {
        let mut used: HashSet<Name> = delta.iter().cloned().collect();
        d.term.all_names(&mut used);
        for (x, _) in gamma {
            used.insert(x.clone());
        }
        let mut el = Elaborator {
            delta: delta.to_vec(),
            twins: HashMap::new(),
            used,
        };
        for (x, t) in gamma {
            if is_c(delta, t) {
                el.twin(x);
            }
        }
        el.collect(d);
        el
    }

    fn twin(&mut self, x: &Name) -> Name {
        if let Some(w) = self.twins.get(x) {
            return w.clone();
        }
        let used = &self.used;
        let w = fresh(&format!("{x}_w"), &|n| used.contains(n));
        self.used.insert(w.clone());
        self.twins.insert(x.clone(), w.clone());
        w
    }

    fn collect(&mut self, d: &Deriv) {
        if let DmTerm::Lam(x, h, _) = &d.term {
            if is_c(&self.delta, h) {
                self.twin(x);
            }
        }
        for k in &d.kids {
            self.collect(k);
        }
    }

    pub fn twin_of(&self, x: &str) -> Option<&Name> {
        self.twins.get(x)
    }

    /// `e*σ` for the given scope of computational variables.
    fn star(&self, d: &Deriv, sigma: &[Name]) -> Term {
        let pairs: Vec<(Name, Term)> = sigma
            .iter()
            .map(|y| (y.clone(), Term::var_n(&self.twins[y])))
            .collect();
        cps_term(d).subst_many(&pairs)
    }

    /// `un-Γ` and the scope σ of its computational variables.
    pub fn env(&self, gamma: &[(Name, DmType)]) -> (Ctx, Vec<Name>) {
        let mut binds: Vec<(Name, Term)> = self.delta.iter().map(|x| (x.clone(), Term::type0())).collect();
        let mut sigma = Vec::new();
        for (x, t) in gamma {
            if is_c(&self.delta, t) {
                let w = self.twins[x].clone();
                binds.push((w.clone(), cps_type(t)));
                binds.push((x.clone(), elab_f(&self.delta, t, &Term::var_n(&w))));
                sigma.push(x.clone());
            } else {
                binds.push((x.clone(), cps_type(t)));
            }
        }
        (Ctx::from_binds(binds), sigma)
    }

    /// `un-e`.
    pub fn elab(&self, d: &Deriv, sigma: &[Name]) -> Term {
        use DmTerm::*;
        let un = |i: usize| self.elab(&d.kids[i], sigma);
        match &d.term {
            Var(x) => Term::var_n(x),
            Lit(l) => Term::lit(*l),
            Op(op, _) => Term::prim(*op, (0..d.kids.len()).map(un).collect()),
            If(..) => Term::ite(un(0), un(1), un(2)),
            Lam(x, h, _) if is_c(&self.delta, h) => {
                let w = &self.twins[x];
                let mut s2 = sigma.to_vec();
                s2.push(x.clone());
                let body = self.elab(&d.kids[0], &s2);
                Term::lam(
                    w,
                    cps_type(h),
                    Term::lam(x, elab_f(&self.delta, h, &Term::var_n(w)), body),
                )
            }
            Lam(x, a, _) => Term::lam(x, cps_type(a), un(0)),
            App(..) => {
                let arg = &d.kids[1];
                if is_c(&self.delta, &arg.ty) {
                    Term::apps(un(0), [self.star(arg, sigma), un(1)])
                } else {
                    Term::app(un(0), un(1))
                }
            }
            Pair(..) => Term::pair(un(0), un(1)),
            Fst(_) => Term::fst(un(0)),
            Snd(_) => Term::snd(un(0)),
            Inl(_, r) => Term::inl(un(0), cps_type(r)),
            Inr(l, _) => Term::inr(cps_type(l), un(0)),
            Case(_, x, _, y, _) => {
                let (l, r) = (self.star(&d.kids[1], sigma), self.star(&d.kids[2], sigma));
                let mut used = self.used.clone();
                l.all_names(&mut used);
                r.all_names(&mut used);
                let z = fresh("z", &|n| used.contains(n));
                let zv = Term::var_n(&z);
                let wp_case = |ann: Term| Term::case(zv.clone(), "_", Term::tot(ann), x, l.clone(), y, r.clone());
                let ret = if is_c(&self.delta, &d.ty) {
                    let w = wp_case(cps_type(&d.ty));
                    Term::tot(elab_f(&self.delta, &d.ty, &w))
                } else {
                    match d.eff {
                        Eff::N => Term::tot(cps_type(&d.ty)),
                        Eff::Tau => Term::comp(PURE, cps_type(&d.ty), wp_case(wp_of(cps_type(&d.ty)))),
                    }
                };
                Term::case(un(0), &z, ret, x, un(1), y, un(2))
            }
            Return(_) => Term::ret(PURE, cps_type(&d.ty), un(0)),
            Bind(_, x, _) => {
                let (d1, d2) = (&d.kids[0], &d.kids[1]);
                let a = cps_type(&d1.ty);
                let wp2 = Term::lam(x, a.clone(), self.star(d2, sigma));
                Term::bind(PURE, a, cps_type(&d.ty), self.star(d1, sigma), un(0), wp2, x, un(1))
            }
        }
    }

    /// The type the logical-relations lemma assigns to `un-e`.
    pub fn expected(&self, d: &Deriv, sigma: &[Name]) -> Comp {
        let w = self.star(d, sigma);
        match d.eff {
            Eff::Tau => Comp::M(name(PURE), cps_type(&d.ty), w),
            Eff::N => Comp::Tot(elab_f(&self.delta, &d.ty, &w)),
        }
    }
}

#[derive(Clone, Debug, Error)]
pub enum ElabError {
    #[error("un-e does not have the type {expected}: {err}")]
    LogicalRelation { expected: String, err: TypeError },
}

#[derive(Clone, Debug)]
pub struct ElabOutput {
    pub term: Term,
    pub comp: Comp,
    pub ctx: Ctx,
    /// Computational variables and their twins.
    pub sigma: Vec<(Name, Name)>,
}

/// Elaborates `d` without checking.
pub fn elab_term(delta: &[Name], gamma: &[(Name, DmType)], d: &Deriv) -> ElabOutput {
    let el = Elaborator::new(delta, gamma, d);
    let (ctx, sigma) = el.env(gamma);
    let term = el.elab(d, &sigma);
    let comp = el.expected(d, &sigma);
    let sigma = sigma.iter().map(|y| (y.clone(), el.twins[y].clone())).collect();
    ElabOutput { term, comp, ctx, sigma }
}

/// Elaborates `d` and checks the logical-relations instance.
pub fn elab_checked(
    sig: &Signature,
    delta: &[Name],
    gamma: &[(Name, DmType)],
    d: &Deriv,
) -> Result<ElabOutput, ElabError> {
    let out = elab_term(delta, gamma, d);
    Checker::new(sig)
        .check(&out.ctx, &out.term, &out.comp)
        .map_err(|err| ElabError::LogicalRelation {
            expected: out.comp.to_string(),
            err,
        })?;
    Ok(out)
}

#[derive(Clone, Debug, Error)]
pub enum InstallError {
    #[error(transparent)]
    Sig(#[from] SigError),
    #[error("`{0}` does not match its expected shape")]
    Shape(String),
    #[error("`{def}`: {err}")]
    Type { def: String, err: TypeError },
    #[error("ill-formed entry for `{effect}`: {failures}")]
    Wf { effect: String, failures: String },
}

/// Splits an action type into its value parameters and the carrier instance.
pub fn action_shape(e: &DmEffect, d: &DmDef) -> Option<(Vec<DmType>, DmType)> {
    let mut params = Vec::new();
    let mut t = &d.ty;
    loop {
        let mut sol = Vec::new();
        if e.carrier.match_with(t, std::slice::from_ref(&e.param), &mut sol) {
            let r = sol.pop().map(|(_, r)| r).unwrap_or_else(DmType::unit);
            return Some((params, r));
        }
        match t {
            DmType::Arrow(a, Eff::N, cod) if classify(&d.delta, a) == Ok(Sort::A) => {
                params.push((**a).clone());
                t = cod;
            }
            _ => return None,
        }
    }
}

/// The starred and elaborated forms of a definition, abstracted over Δ.
fn forms(d: &DmDef) -> (Term, Term) {
    let star = abstract_types(&d.delta, cps_term(&d.deriv));
    let un = abstract_types(&d.delta, elab_term(&d.delta, &[], &d.deriv).term);
    (star, un)
}

/// Adds the Dijkstra monad derived from `e`, with its actions and lifts.
pub fn install_effect(sig: &Signature, e: &DmEffect) -> Result<Signature, InstallError> {
    if sig.has_effect(&e.name) {
        return Err(SigError::Clash(e.name.to_string()).into());
    }
    let p = e.param.clone();
    let cstar = cps_type(&e.carrier);
    let wp_type = Term::lam(&p, Term::type0(), cstar.clone());
    let w = fresh("w", &|n| n == &*p || cstar.has_free(n));
    let fc = elab_f(std::slice::from_ref(&p), &e.carrier, &Term::var_n(&w));
    let repr = Term::lam(&p, Term::type0(), Term::lam(&w, cstar.clone(), fc.clone()));
    let chk = Checker::new(sig);
    let ctx = Ctx::new().push(&p, Term::type0());
    let ty_err = |def: &str| {
        let def = def.to_string();
        move |err| InstallError::Type { def, err }
    };
    let wp_level = chk.universe(&ctx, &cstar).map_err(ty_err("wp_type"))?;
    let repr_level = chk
        .universe(&ctx.push(&w, cstar.clone()), &fc)
        .map_err(ty_err("repr"))?;

    let (return_star, un_return) = forms(&e.ret);
    let (bind_star, un_bind) = forms(&e.bind);
    let mut actions = Vec::new();
    for a in &e.actions {
        let (params, result) = action_shape(e, a).ok_or_else(|| InstallError::Shape(a.name.to_string()))?;
        let mut binders = Vec::new();
        let mut t = &a.term;
        for (i, pt) in params.iter().enumerate() {
            let x = match t {
                DmTerm::Lam(x, _, b) => {
                    t = b;
                    x.clone()
                }
                _ => name(&format!("x{}", i + 1)),
            };
            binders.push((x, cps_type(pt)));
        }
        let (star, un) = forms(a);
        actions.push(ActionDef {
            name: a.name.clone(),
            tparams: a.delta.clone(),
            params: binders,
            result: cps_type(&result),
            star,
            un,
        });
    }
    let def = EffectDef {
        name: e.name.clone(),
        wp_type,
        repr,
        return_star,
        bind_star,
        un_return,
        un_bind,
        actions,
        wp_level,
        repr_level,
    };
    let mut out = sig.add_effect(def)?;
    for l in &e.lifts {
        let (star, un) = forms(&l.def);
        out = out.add_lift(LiftDef {
            from: l.from.clone(),
            to: e.name.clone(),
            star,
            un,
        })?;
    }
    let report = wf_signature(&out);
    let bad: Vec<String> = report
        .failures()
        .iter()
        .map(|f| format!("{}.{}: {}", f.effect, f.field, f.result.as_ref().unwrap_err()))
        .collect();
    if !bad.is_empty() {
        return Err(InstallError::Wf {
            effect: e.name.to_string(),
            failures: bad.join("; "),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dm::{typecheck_dm, DmCtx};
    use crate::norm::nf;

    fn st(x: DmType) -> DmType {
        DmType::tau_arrow(DmType::int(), DmType::prod(x, DmType::int()))
    }

    #[test]
    fn f_of_state() {
        let w = Term::var("wp");
        let t = elab_f(&[name("X")], &st(DmType::var("X")), &w);
        let want = Term::pi(
            "s",
            Term::int_ty(),
            Term::comp(
                PURE,
                Term::prod(Term::var("X"), Term::int_ty()),
                Term::app(Term::var("wp"), Term::var("s")),
            ),
        );
        assert!(t.alpha_eq(&want), "{t}");
    }

    #[test]
    fn return_of_literal() {
        let d = typecheck_dm(&DmCtx::default(), &DmTerm::ret(DmTerm::int(3))).unwrap();
        let out = elab_checked(&Signature::new(), &[], &[], &d).unwrap();
        assert!(out.term.alpha_eq(&Term::ret(PURE, Term::int_ty(), Term::int(3))));
    }

    #[test]
    fn tau_free_coincides_with_star() {
        let e = DmTerm::lam(
            "x",
            DmType::int(),
            DmTerm::pair(DmTerm::var("x"), DmTerm::Op(crate::syntax::PrimOp::Add, vec![DmTerm::var("x"), DmTerm::int(1)])),
        );
        let d = typecheck_dm(&DmCtx::default(), &e).unwrap();
        let out = elab_checked(&Signature::new(), &[], &[], &d).unwrap();
        assert!(out.term.alpha_eq(&cps_term(&d)));
    }

    #[test]
    fn computational_parameter_gets_a_twin() {
        let c = st(DmType::var("X"));
        let e = DmTerm::lam("f", c.clone(), DmTerm::var("f"));
        let delta = [name("X")];
        let d = typecheck_dm(&DmCtx::new(delta.to_vec()), &e).unwrap();
        let out = elab_checked(&Signature::new(), &delta, &[], &d).unwrap();
        let Some(crate::syntax::Kind::Lam(w, _, _)) = Some(out.term.kind()) else { panic!() };
        assert_eq!(&**w, "f_w");
        let sig = Signature::new();
        assert!(nf(&sig, &out.term).alpha_eq(&out.term));
    }
}
