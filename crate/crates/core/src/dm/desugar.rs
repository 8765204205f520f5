//! Direct-style DM to explicit `return`/`bind` form.
//!
//! Inference is bidirectional. Monadic subterms in operand positions are
//! sequenced with `bind` in evaluation order, and pure terms are wrapped in
//! `return` where a monadic term is expected. Pure `let`s are inlined; a
//! monadic `let` becomes a `bind`, with pair patterns taken apart by
//! projections.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::parse::{Arm, Ex, ExKind, Param, Pat, Pos, Side, TyExpr};
use super::term::DmTerm;
use super::types::{classify, DmType, Eff, Sort};
use crate::syntax::{fresh, name, Base, Lit, Name};

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{pos}: {msg}")]
pub struct DesugarError {
    pub pos: Pos,
    pub msg: String,
}

type R<T> = Result<T, DesugarError>;

fn fail<T>(pos: Pos, msg: impl Into<String>) -> R<T> {
    Err(DesugarError { pos, msg: msg.into() })
}

/// Type abbreviations: name ↦ (parameters, body).
#[derive(Clone, Debug, Default)]
pub struct Aliases {
    map: HashMap<Name, (Vec<Name>, TyExpr)>,
}

impl Aliases {
    pub fn insert(&mut self, n: Name, params: Vec<Name>, body: TyExpr) {
        self.map.insert(n, (params, body));
    }

    pub fn get(&self, n: &str) -> Option<&(Vec<Name>, TyExpr)> {
        self.map.get(n)
    }

    pub fn extend(&mut self, other: &Aliases) {
        for (k, v) in &other.map {
            self.map.entry(k.clone()).or_insert_with(|| v.clone());
        }
    }

    /// Resolves a surface type; unknown nullary names become type variables.
    pub fn resolve(&self, t: &TyExpr) -> R<DmType> {
        self.resolve_depth(t, 0)
    }

    fn resolve_depth(&self, t: &TyExpr, depth: usize) -> R<DmType> {
        match t {
            TyExpr::Con(c, args, pos) => {
                if depth > 64 {
                    return fail(*pos, format!("type abbreviation `{c}` is cyclic"));
                }
                let base = match &**c {
                    "int" => Some(Base::Int),
                    "bool" => Some(Base::Bool),
                    "unit" => Some(Base::Unit),
                    _ => None,
                };
                if let Some(b) = base {
                    if !args.is_empty() {
                        return fail(*pos, format!("`{c}` takes no arguments"));
                    }
                    return Ok(DmType::Base(b));
                }
                if &**c == "option" {
                    if args.len() != 1 {
                        return fail(*pos, "`option` takes one argument");
                    }
                    return Ok(DmType::option(self.resolve_depth(&args[0], depth)?));
                }
                if &**c == "tau" {
                    return fail(*pos, "`tau` may only mark the codomain of an arrow");
                }
                match self.map.get(c) {
                    Some((params, body)) => {
                        if params.len() != args.len() {
                            return fail(*pos, format!("`{c}` expects {} arguments", params.len()));
                        }
                        let mut out = self.resolve_depth(body, depth + 1)?;
                        let actual: Vec<DmType> =
                            args.iter().map(|a| self.resolve_depth(a, depth)).collect::<R<_>>()?;
                        // Simultaneous substitution through placeholder names.
                        let holes: Vec<Name> = params.iter().map(|p| name(&format!("?{p}"))).collect();
                        for (p, h) in params.iter().zip(&holes) {
                            out = out.subst(p, &DmType::Var(h.clone()));
                        }
                        for (h, a) in holes.iter().zip(&actual) {
                            out = out.subst(h, a);
                        }
                        Ok(out)
                    }
                    None if args.is_empty() => Ok(DmType::Var(c.clone())),
                    None => fail(*pos, format!("unknown type constructor `{c}`")),
                }
            }
            TyExpr::Arrow(a, tau, b) => {
                let eff = if *tau { Eff::Tau } else { Eff::N };
                Ok(DmType::Arrow(
                    Box::new(self.resolve_depth(a, depth)?),
                    eff,
                    Box::new(self.resolve_depth(b, depth)?),
                ))
            }
            TyExpr::Sum(a, b) => Ok(DmType::sum(self.resolve_depth(a, depth)?, self.resolve_depth(b, depth)?)),
            TyExpr::Prod(a, b) => Ok(DmType::prod(self.resolve_depth(a, depth)?, self.resolve_depth(b, depth)?)),
        }
    }
}

/// Monomorphic top-level definitions that are inlined at use sites.
pub type Globals = HashMap<Name, (DmTerm, DmType)>;

#[derive(Clone, Default)]
pub struct Scope {
    /// Surface name ↦ (the term it stands for, its type).
    vars: Vec<(Name, DmTerm, DmType)>,
    /// DM-level binders in scope.
    bound: Vec<Name>,
}

impl Scope {
    fn lookup(&self, x: &str) -> Option<(&DmTerm, &DmType)> {
        self.vars.iter().rev().find(|(y, _, _)| &**y == x).map(|(_, t, ty)| (t, ty))
    }
}

pub struct Desugarer<'a> {
    aliases: &'a Aliases,
    globals: &'a Globals,
    delta: Vec<Name>,
    /// Every binder introduced so far; hoisted temporaries avoid them all.
    used: RefCell<HashSet<Name>>,
    temps: RefCell<HashSet<Name>>,
}

type Acc = Vec<(Name, DmTerm)>;

impl<'a> Desugarer<'a> {
    pub fn new(aliases: &'a Aliases, globals: &'a Globals, delta: Vec<Name>) -> Desugarer<'a> {
        Desugarer {
            aliases,
            globals,
            delta,
            used: RefCell::new(HashSet::new()),
            temps: RefCell::new(HashSet::new()),
        }
    }

    fn resolve(&self, t: &TyExpr) -> R<DmType> {
        let ty = self.aliases.resolve(t)?;
        if let Err(e) = classify(&self.delta, &ty) {
            let pos = match t {
                TyExpr::Con(_, _, p) => *p,
                _ => Pos::default(),
            };
            return fail(pos, e.to_string());
        }
        Ok(ty)
    }

    fn sort(&self, t: &DmType, pos: Pos) -> R<Sort> {
        classify(&self.delta, t).or_else(|e| fail(pos, e.to_string()))
    }

    /// A DM binder for surface name `x`, renamed if it would repeat a name in scope.
    fn binder(&self, sc: &Scope, x: &str) -> Name {
        let temps = self.temps.borrow();
        let clash = |n: &str| {
            sc.bound.iter().any(|b| &**b == n)
                || self.delta.iter().any(|b| &**b == n)
                || temps.contains(n)
                || self.globals.contains_key(n)
        };
        let n = if clash(x) { fresh(x, &clash) } else { name(x) };
        self.used.borrow_mut().insert(n.clone());
        n
    }

    fn temp(&self, sc: &Scope, base: &str) -> Name {
        let used = self.used.borrow();
        let n = fresh(base, &|n| {
            used.contains(n) || sc.bound.iter().any(|b| &**b == n) || self.delta.iter().any(|b| &**b == n)
        });
        drop(used);
        self.used.borrow_mut().insert(n.clone());
        self.temps.borrow_mut().insert(n.clone());
        n
    }

    /// Binds a pattern at type `ty`; returns the DM binder and the extended scope.
    fn bind_pat(&self, sc: &Scope, p: &Pat, ty: &DmType, pos: Pos) -> R<(Name, Scope)> {
        let mut sc2 = sc.clone();
        let x = match p {
            Pat::Var(x) => {
                let b = self.binder(sc, x);
                sc2.vars.push((x.clone(), DmTerm::Var(b.clone()), ty.clone()));
                b
            }
            Pat::Wild => self.binder(sc, "_u"),
            Pat::Unit => {
                if *ty != DmType::unit() {
                    return fail(pos, format!("pattern `()` at type {ty}"));
                }
                self.binder(sc, "_u")
            }
            Pat::Pair(..) => {
                let z = self.temp(sc, "p");
                self.project(&mut sc2, p, DmTerm::Var(z.clone()), ty, pos)?;
                z
            }
        };
        sc2.bound.push(x.clone());
        Ok((x, sc2))
    }

    fn project(&self, sc: &mut Scope, p: &Pat, t: DmTerm, ty: &DmType, pos: Pos) -> R<()> {
        match (p, ty) {
            (Pat::Var(x), _) => {
                sc.vars.push((x.clone(), t, ty.clone()));
                Ok(())
            }
            (Pat::Wild, _) => Ok(()),
            (Pat::Unit, DmType::Base(Base::Unit)) => Ok(()),
            (Pat::Pair(a, b), DmType::Prod(ta, tb)) => {
                self.project(sc, a, DmTerm::fst(t.clone()), ta, pos)?;
                self.project(sc, b, DmTerm::snd(t), tb, pos)
            }
            _ => fail(pos, format!("pattern does not match type {ty}")),
        }
    }

    fn finish(&self, acc: Acc, t: DmTerm, ty: &DmType, eff: Eff, pos: Pos) -> R<(DmTerm, Eff)> {
        if acc.is_empty() {
            return Ok((t, eff));
        }
        let mut body = match eff {
            Eff::Tau => t,
            Eff::N => {
                if self.sort(ty, pos)? == Sort::C {
                    return fail(pos, format!("cannot sequence a computation into a value of type {ty}"));
                }
                DmTerm::ret(t)
            }
        };
        for (z, e) in acc.into_iter().rev() {
            body = DmTerm::Bind(Box::new(e), z, Box::new(body));
        }
        Ok((body, Eff::Tau))
    }

    fn operand(&self, sc: &Scope, e: &Ex, want: Option<&DmType>, acc: &mut Acc) -> R<(DmTerm, DmType)> {
        let (t, ty, eff) = match want {
            Some(w) => {
                let (t, eff) = self.check(sc, e, w)?;
                (t, w.clone(), eff)
            }
            None => self.synth(sc, e)?,
        };
        if eff == Eff::N {
            return Ok((t, ty));
        }
        let mut sc2 = sc.clone();
        for (z, _) in acc.iter() {
            sc2.bound.push(z.clone());
        }
        let z = self.temp(&sc2, "v");
        acc.push((z.clone(), t));
        Ok((DmTerm::Var(z), ty))
    }

    fn to_tau(&self, t: DmTerm, eff: Eff, ty: &DmType, pos: Pos) -> R<DmTerm> {
        match eff {
            Eff::Tau => Ok(t),
            Eff::N => {
                if self.sort(ty, pos)? == Sort::C {
                    return fail(pos, format!("expected a tau computation, found a value of type {ty}"));
                }
                Ok(DmTerm::ret(t))
            }
        }
    }

    /// Scope with the hoisted temporaries treated as bound.
    fn with_acc(sc: &Scope, acc: &Acc) -> Scope {
        let mut s = sc.clone();
        for (z, _) in acc {
            s.bound.push(z.clone());
        }
        s
    }

    pub fn synth(&self, sc: &Scope, e: &Ex) -> R<(DmTerm, DmType, Eff)> {
        let pos = e.pos;
        match &e.kind {
            ExKind::Var(x) => match sc.lookup(x) {
                Some((t, ty)) => Ok((t.clone(), ty.clone(), Eff::N)),
                None => match self.globals.get(x) {
                    Some((t, ty)) => {
                        let mut gen = |y: &Name| self.temp(sc, y);
                        Ok((t.refresh_binders(&mut gen), ty.clone(), Eff::N))
                    }
                    None => fail(pos, format!("unbound variable `{x}`")),
                },
            },
            ExKind::Int(n) => Ok((DmTerm::Lit(Lit::Int(*n)), DmType::int(), Eff::N)),
            ExKind::Bool(b) => Ok((DmTerm::Lit(Lit::Bool(*b)), DmType::bool(), Eff::N)),
            ExKind::Unit => Ok((DmTerm::Lit(Lit::Unit), DmType::unit(), Eff::N)),
            ExKind::Op(op, args) => {
                let (doms, res) = op.signature();
                let mut acc = Acc::new();
                let mut ts = Vec::new();
                for (a, b) in args.iter().zip(doms) {
                    let s = Self::with_acc(sc, &acc);
                    ts.push(self.operand(&s, a, Some(&DmType::Base(*b)), &mut acc)?.0);
                }
                let ty = DmType::Base(res);
                let (t, eff) = self.finish(acc, DmTerm::Op(*op, ts), &ty, Eff::N, pos)?;
                Ok((t, ty, eff))
            }
            ExKind::Fun(params, body) => {
                let mut sc2 = sc.clone();
                let mut binders = Vec::new();
                for p in params {
                    let Some(te) = &p.ty else {
                        if p.pat == Pat::Unit {
                            let (x, s) = self.bind_pat(&sc2, &p.pat, &DmType::unit(), pos)?;
                            binders.push((x, DmType::unit()));
                            sc2 = s;
                            continue;
                        }
                        return fail(pos, "cannot infer the type of an unannotated parameter");
                    };
                    let ty = self.resolve(te)?;
                    let (x, s) = self.bind_pat(&sc2, &p.pat, &ty, pos)?;
                    binders.push((x, ty));
                    sc2 = s;
                }
                let (mut t, mut ty, eff) = self.synth(&sc2, body)?;
                let mut eff = eff;
                for (x, h) in binders.into_iter().rev() {
                    t = DmTerm::Lam(x, h.clone(), Box::new(t));
                    ty = DmType::Arrow(Box::new(h), eff, Box::new(ty));
                    self.sort(&ty, pos)?;
                    eff = Eff::N;
                }
                Ok((t, ty, Eff::N))
            }
            ExKind::App(..) => {
                let mut spine = Vec::new();
                let mut head = e;
                while let ExKind::App(f, a) = &head.kind {
                    spine.push(&**a);
                    head = f;
                }
                spine.reverse();
                let mut acc = Acc::new();
                let (mut t, mut ty) = self.operand(sc, head, None, &mut acc)?;
                let mut eff = Eff::N;
                for a in spine {
                    if eff == Eff::Tau {
                        let z = self.temp(&Self::with_acc(sc, &acc), "v");
                        acc.push((z.clone(), t));
                        t = DmTerm::Var(z);
                    }
                    let DmType::Arrow(dom, e2, cod) = ty else {
                        return fail(pos, format!("applying a non-function of type {ty}"));
                    };
                    let s = Self::with_acc(sc, &acc);
                    let (ta, _) = self.operand(&s, a, Some(&dom), &mut acc)?;
                    t = DmTerm::app(t, ta);
                    ty = *cod;
                    eff = e2;
                }
                let (t, eff) = self.finish(acc, t, &ty, eff, pos)?;
                Ok((t, ty, eff))
            }
            ExKind::Tuple(a, b) => {
                let mut acc = Acc::new();
                let (ta, tya) = self.operand(sc, a, None, &mut acc)?;
                let s = Self::with_acc(sc, &acc);
                let (tb, tyb) = self.operand(&s, b, None, &mut acc)?;
                let ty = DmType::prod(tya, tyb);
                self.sort(&ty, pos)?;
                let (t, eff) = self.finish(acc, DmTerm::pair(ta, tb), &ty, Eff::N, pos)?;
                Ok((t, ty, eff))
            }
            ExKind::Fst(p) | ExKind::Snd(p) => {
                let first = matches!(e.kind, ExKind::Fst(_));
                let mut acc = Acc::new();
                let (tp, ty) = self.operand(sc, p, None, &mut acc)?;
                let DmType::Prod(l, r) = ty else {
                    return fail(pos, format!("projection from a value of type {ty}"));
                };
                let (t, ty) = if first {
                    (DmTerm::fst(tp), *l)
                } else {
                    (DmTerm::snd(tp), *r)
                };
                let (t, eff) = self.finish(acc, t, &ty, Eff::N, pos)?;
                Ok((t, ty, eff))
            }
            ExKind::Inl(_) | ExKind::Inr(_) => fail(pos, "cannot infer the type of an injection; add an annotation"),
            ExKind::If(c, a, b) => self.conditional(sc, c, a, b, None, pos),
            ExKind::Match(s, arms) => self.matching(sc, s, arms, None, pos),
            ExKind::Let(p, ann, e1, e2) => self.let_in(sc, p, ann.as_ref(), e1, e2, None, false, pos),
            ExKind::Bind(p, e1, e2) => self.let_in(sc, p, None, e1, e2, None, true, pos),
            ExKind::Return(v) => {
                let mut acc = Acc::new();
                let (t, ty) = self.operand(sc, v, None, &mut acc)?;
                if self.sort(&ty, pos)? != Sort::A {
                    return fail(pos, format!("cannot return a computation of type {ty}"));
                }
                let (t, eff) = self.finish(acc, DmTerm::ret(t), &ty, Eff::Tau, pos)?;
                Ok((t, ty, eff))
            }
            ExKind::Annot(inner, te) => {
                let ty = self.resolve(te)?;
                let (t, eff) = self.check(sc, inner, &ty)?;
                Ok((t, ty, eff))
            }
        }
    }

    /// Checks `e` against `ty`, returning its natural effect.
    pub fn check(&self, sc: &Scope, e: &Ex, ty: &DmType) -> R<(DmTerm, Eff)> {
        let pos = e.pos;
        match (&e.kind, ty) {
            (ExKind::Fun(params, body), _) => self.check_fun(sc, params, body, ty, pos),
            (ExKind::Tuple(a, b), DmType::Prod(ta, tb)) => {
                let mut acc = Acc::new();
                let (xa, _) = self.operand(sc, a, Some(ta), &mut acc)?;
                let s = Self::with_acc(sc, &acc);
                let (xb, _) = self.operand(&s, b, Some(tb), &mut acc)?;
                self.finish(acc, DmTerm::pair(xa, xb), ty, Eff::N, pos)
            }
            (ExKind::Inl(v), DmType::Sum(l, r)) => {
                let mut acc = Acc::new();
                let (t, _) = self.operand(sc, v, Some(l), &mut acc)?;
                self.finish(acc, DmTerm::Inl(Box::new(t), (**r).clone()), ty, Eff::N, pos)
            }
            (ExKind::Inr(v), DmType::Sum(l, r)) => {
                let mut acc = Acc::new();
                let (t, _) = self.operand(sc, v, Some(r), &mut acc)?;
                self.finish(acc, DmTerm::Inr((**l).clone(), Box::new(t)), ty, Eff::N, pos)
            }
            (ExKind::If(c, a, b), _) => {
                let (t, _, eff) = self.conditional(sc, c, a, b, Some(ty), pos)?;
                Ok((t, eff))
            }
            (ExKind::Match(s, arms), _) => {
                let (t, _, eff) = self.matching(sc, s, arms, Some(ty), pos)?;
                Ok((t, eff))
            }
            (ExKind::Let(p, ann, e1, e2), _) => {
                let (t, _, eff) = self.let_in(sc, p, ann.as_ref(), e1, e2, Some(ty), false, pos)?;
                Ok((t, eff))
            }
            (ExKind::Bind(p, e1, e2), _) => {
                let (t, _, eff) = self.let_in(sc, p, None, e1, e2, Some(ty), true, pos)?;
                Ok((t, eff))
            }
            (ExKind::Return(v), _) => {
                let mut acc = Acc::new();
                let (t, _) = self.operand(sc, v, Some(ty), &mut acc)?;
                self.finish(acc, DmTerm::ret(t), ty, Eff::Tau, pos)
            }
            _ => {
                let (t, got, eff) = self.synth(sc, e)?;
                if got != *ty {
                    return fail(pos, format!("expected type {ty}, found {got}"));
                }
                Ok((t, eff))
            }
        }
    }

    fn check_fun(&self, sc: &Scope, params: &[Param], body: &Ex, ty: &DmType, pos: Pos) -> R<(DmTerm, Eff)> {
        let Some((p, rest)) = params.split_first() else {
            unreachable!("functions have parameters")
        };
        let DmType::Arrow(dom, eff, cod) = ty else {
            return fail(pos, format!("a function cannot have type {ty}"));
        };
        if let Some(te) = &p.ty {
            let ann = self.resolve(te)?;
            if ann != **dom {
                return fail(pos, format!("parameter annotated {ann} but expected {dom}"));
            }
        }
        let (x, sc2) = self.bind_pat(sc, &p.pat, dom, pos)?;
        let t = if rest.is_empty() {
            let (tb, eb) = self.check(&sc2, body, cod)?;
            match (eff, eb) {
                (Eff::Tau, _) => self.to_tau(tb, eb, cod, body.pos)?,
                (Eff::N, Eff::N) => tb,
                (Eff::N, Eff::Tau) => {
                    return fail(body.pos, format!("body is a tau computation but the arrow {ty} is not"));
                }
            }
        } else {
            if *eff != Eff::N {
                return fail(pos, format!("a curried function cannot have type {ty}"));
            }
            self.check_fun(&sc2, rest, body, cod, pos)?.0
        };
        Ok((DmTerm::Lam(x, (**dom).clone(), Box::new(t)), Eff::N))
    }

    /// Desugars two branches at a common type, joining their effects.
    fn branches(
        &self,
        sa: &Scope,
        a: &Ex,
        sb: &Scope,
        b: &Ex,
        want: Option<&DmType>,
        pos: Pos,
    ) -> R<(DmTerm, DmTerm, DmType, Eff)> {
        let ((ta, ea), (tb, eb), ty) = match want {
            Some(ty) => (self.check(sa, a, ty)?, self.check(sb, b, ty)?, ty.clone()),
            None => match self.synth(sa, a) {
                Ok((ta, ty, ea)) => {
                    let rb = self.check(sb, b, &ty)?;
                    ((ta, ea), rb, ty)
                }
                Err(first) => {
                    let (tb, ty, eb) = self.synth(sb, b).map_err(|_| first)?;
                    let ra = self.check(sa, a, &ty)?;
                    (ra, (tb, eb), ty)
                }
            },
        };
        if ea == eb {
            return Ok((ta, tb, ty, ea));
        }
        let ta = self.to_tau(ta, ea, &ty, pos)?;
        let tb = self.to_tau(tb, eb, &ty, pos)?;
        Ok((ta, tb, ty, Eff::Tau))
    }

    fn conditional(&self, sc: &Scope, c: &Ex, a: &Ex, b: &Ex, want: Option<&DmType>, pos: Pos) -> R<(DmTerm, DmType, Eff)> {
        let mut acc = Acc::new();
        let (tc, _) = self.operand(sc, c, Some(&DmType::bool()), &mut acc)?;
        let s = Self::with_acc(sc, &acc);
        let (ta, tb, ty, eff) = self.branches(&s, a, &s, b, want, pos)?;
        let node = DmTerm::If(Box::new(tc), Box::new(ta), Box::new(tb));
        let (t, eff) = self.finish(acc, node, &ty, eff, pos)?;
        Ok((t, ty, eff))
    }

    fn matching(&self, sc: &Scope, s: &Ex, arms: &[Arm], want: Option<&DmType>, pos: Pos) -> R<(DmTerm, DmType, Eff)> {
        let mut acc = Acc::new();
        let (ts, sty) = self.operand(sc, s, None, &mut acc)?;
        let DmType::Sum(l, r) = sty else {
            return fail(pos, format!("matching on a value of type {sty}"));
        };
        let left = arms.iter().find(|a| a.side == Side::Left).expect("parser checks arms");
        let right = arms.iter().find(|a| a.side == Side::Right).expect("parser checks arms");
        let s0 = Self::with_acc(sc, &acc);
        let (x, sl) = self.bind_pat(&s0, &left.pat, &l, left.body.pos)?;
        let (y, sr) = self.bind_pat(&s0, &right.pat, &r, right.body.pos)?;
        let (tl, tr, ty, eff) = self.branches(&sl, &left.body, &sr, &right.body, want, pos)?;
        let node = DmTerm::Case(Box::new(ts), x, Box::new(tl), y, Box::new(tr));
        let (t, eff) = self.finish(acc, node, &ty, eff, pos)?;
        Ok((t, ty, eff))
    }

    #[allow(clippy::too_many_arguments)]
    fn let_in(
        &self,
        sc: &Scope,
        p: &Pat,
        ann: Option<&TyExpr>,
        e1: &Ex,
        e2: &Ex,
        want: Option<&DmType>,
        monadic: bool,
        pos: Pos,
    ) -> R<(DmTerm, DmType, Eff)> {
        let (t1, ty1, eff1) = match ann {
            Some(te) => {
                let ty = self.resolve(te)?;
                let (t, eff) = self.check(sc, e1, &ty)?;
                (t, ty, eff)
            }
            None => self.synth(sc, e1)?,
        };
        let body = |s: &Scope| -> R<(DmTerm, DmType, Eff)> {
            match want {
                Some(ty) => {
                    let (t, eff) = self.check(s, e2, ty)?;
                    Ok((t, ty.clone(), eff))
                }
                None => self.synth(s, e2),
            }
        };
        if eff1 == Eff::N && !monadic {
            let mut s = sc.clone();
            self.project(&mut s, p, t1, &ty1, pos)?;
            return body(&s);
        }
        let t1 = self.to_tau(t1, eff1, &ty1, e1.pos)?;
        let (x, s) = self.bind_pat(sc, p, &ty1, pos)?;
        let (t2, ty2, eff2) = body(&s)?;
        let t2 = self.to_tau(t2, eff2, &ty2, e2.pos)?;
        Ok((DmTerm::Bind(Box::new(t1), x, Box::new(t2)), ty2, Eff::Tau))
    }
}

/// Desugars a closed expression against an expected type.
pub fn desugar_direct(
    aliases: &Aliases,
    globals: &Globals,
    delta: &[Name],
    e: &Ex,
    ty: &DmType,
) -> Result<(DmTerm, Eff), DesugarError> {
    let d = Desugarer::new(aliases, globals, delta.to_vec());
    d.check(&Scope::default(), e, ty)
}

/// Desugars a closed expression whose type is inferred.
pub fn desugar_synth(
    aliases: &Aliases,
    globals: &Globals,
    delta: &[Name],
    e: &Ex,
) -> Result<(DmTerm, DmType, Eff), DesugarError> {
    let d = Desugarer::new(aliases, globals, delta.to_vec());
    d.synth(&Scope::default(), e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dm::parse::{parse_expr, parse_type};
    use crate::dm::typing::{typecheck_dm, DmCtx};

    fn aliases() -> Aliases {
        let mut a = Aliases::default();
        a.insert(name("st"), vec![name("a")], parse_type("int -> tau (a * int)").unwrap());
        a
    }

    fn run(src: &str, ty: &str, delta: &[&str]) -> DmTerm {
        let al = aliases();
        let delta: Vec<Name> = delta.iter().map(|d| name(d)).collect();
        let ty = al.resolve(&parse_type(ty).unwrap()).unwrap();
        let (t, _) = desugar_direct(&al, &Globals::new(), &delta, &parse_expr(src).unwrap(), &ty).unwrap();
        let d = typecheck_dm(&DmCtx::new(delta), &t).unwrap();
        assert_eq!(d.ty, ty);
        t
    }

    #[test]
    fn return_wrapping() {
        let t = run("fun (x:a) -> fun s0 -> x, s0", "a -> st a", &["a"]);
        assert_eq!(t.to_string(), "fun (x:a) -> fun (s0:int) -> return (x, s0)");
    }

    #[test]
    fn let_of_monadic_pair() {
        let t = run(
            "fun (f:st a) (g:a -> st b) -> fun s0 -> let x,s1 = f s0 in g x s1",
            "st a -> (a -> st b) -> st b",
            &["a", "b"],
        );
        assert_eq!(
            t.to_string(),
            "fun (f:int -> tau (a * int)) -> fun (g:a -> int -> tau (b * int)) -> fun (s0:int) -> bind p = f s0 in g (fst p) (snd p)"
        );
    }

    #[test]
    fn operand_hoisting() {
        let t = run("fun (f:st a) -> fun s0 -> Some (f s0)", "st a -> int -> tau (option (a * int))", &["a"]);
        assert_eq!(
            t.to_string(),
            "fun (f:int -> tau (a * int)) -> fun (s0:int) -> bind v = f s0 in return (inr v)"
        );
    }

    #[test]
    fn explicit_terms_are_unchanged() {
        let src = "fun (x:int) -> bind y = return x in return (y + 1)";
        let t = run(src, "int -> tau int", &[]);
        assert_eq!(t.to_string(), "fun (x:int) -> bind y = return x in return (y + 1)");
    }

    #[test]
    fn ambiguity_is_reported() {
        let al = aliases();
        let e = parse_expr("inl 3").unwrap();
        assert!(desugar_synth(&al, &Globals::new(), &[], &e).is_err());
    }

    #[test]
    fn shadowing_is_renamed() {
        let t = run("fun (x:int) -> fun (x:int) -> x", "int -> int -> int", &[]);
        assert_eq!(t.to_string(), "fun (x:int) -> fun (x1:int) -> x1");
    }
}
