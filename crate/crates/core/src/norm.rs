//! Big-step strong normalizer used for conversion checking and validity.
//!
//! Beyond the reduction rules it unfolds signature constants, contracts
//! pairs, sums and conditionals, commutes eliminations into `case`/`if`,
//! η-contracts functions and pairs, puts integer arithmetic into a canonical
//! polynomial form and simplifies the squashed connectives. Case annotations
//! are erased because they carry no computational content.

use std::cell::Cell;
use std::collections::{BTreeMap, HashMap, HashSet};

use crate::signature::Signature;
use crate::syntax::{fresh, name, Base, Field, Kind, Lit, Name, PrimOp, Term, PURE};

pub const DEFAULT_BUDGET: u64 = 200_000;

pub struct Norm<'s> {
    sig: &'s Signature,
    budget: Cell<u64>,
    exhausted: Cell<bool>,
}

/// Normalizes with the default budget.
pub fn nf(sig: &Signature, t: &Term) -> Term {
    Norm::new(sig).nf(t)
}

fn erased_ret() -> Term {
    Term::tot(Term::unit_ty())
}

impl<'s> Norm<'s> {
    pub fn new(sig: &'s Signature) -> Norm<'s> {
        Norm::with_budget(sig, DEFAULT_BUDGET)
    }

    pub fn with_budget(sig: &'s Signature, budget: u64) -> Norm<'s> {
        Norm {
            sig,
            budget: Cell::new(budget),
            exhausted: Cell::new(false),
        }
    }

    /// True once the step budget ran out; results are then only partially normal.
    pub fn exhausted(&self) -> bool {
        self.exhausted.get()
    }

    fn tick(&self) -> bool {
        let b = self.budget.get();
        if b == 0 {
            self.exhausted.set(true);
            return false;
        }
        self.budget.set(b - 1);
        true
    }

    pub fn nf(&self, t: &Term) -> Term {
        use Kind::*;
        match t.kind() {
            Var(_) | Univ(_) | Base(_) | Lit(_) | True | False => t.clone(),
            Const(e, f) => match self.sig.lookup(e, f) {
                Ok(v) if self.tick() => self.nf(&v),
                _ => t.clone(),
            },
            App(f, a) => {
                let f = self.nf(f);
                let a = self.nf(a);
                self.apply(f, a)
            }
            Lam(x, ty, b) => {
                let ty = self.nf(ty);
                let b = self.nf(b);
                if let App(g, v) = b.kind() {
                    if v.as_var() == Some(x) && !g.has_free(x) {
                        return g.clone();
                    }
                }
                Term::new(Lam(x.clone(), ty, b))
            }
            Pair(a, b) => {
                let a = self.nf(a);
                let b = self.nf(b);
                if let (Fst(p), Snd(q)) = (a.kind(), b.kind()) {
                    if p.alpha_eq(q) {
                        return p.clone();
                    }
                }
                Term::pair(a, b)
            }
            Fst(e) => {
                let e = self.nf(e);
                self.proj(e, true)
            }
            Snd(e) => {
                let e = self.nf(e);
                self.proj(e, false)
            }
            Case {
                scrut,
                lx,
                left,
                rx,
                right,
                ..
            } => {
                let s = self.nf(scrut);
                self.case(s, lx, left, rx, right)
            }
            If(c, a, b) => {
                let c = self.nf(c);
                match c.kind() {
                    Lit(crate::syntax::Lit::Bool(true)) => self.nf(a),
                    Lit(crate::syntax::Lit::Bool(false)) => self.nf(b),
                    _ => {
                        let a = self.nf(a);
                        let b = self.nf(b);
                        mk_if(c, a, b)
                    }
                }
            }
            Prim(op, args) => {
                let args: Vec<Term> = args.iter().map(|a| self.nf(a)).collect();
                prim(*op, args)
            }
            Run(e) => {
                let e = self.nf(e);
                match e.kind() {
                    Return(m, _, v) if &**m == PURE => v.clone(),
                    _ => Term::run(e),
                }
            }
            Reify(e) => {
                let e = self.nf(e);
                self.reify(e)
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
            } if &**eff == PURE => {
                let e1 = self.nf(e1);
                if let Return(m, _, v) = e1.kind() {
                    if &**m == PURE && self.tick() {
                        return self.nf(&e2.subst(x, v));
                    }
                }
                Term::new(Bind {
                    eff: eff.clone(),
                    t1: self.nf(t1),
                    t2: self.nf(t2),
                    wp1: self.nf(wp1),
                    e1,
                    wp2: self.nf(wp2),
                    x: x.clone(),
                    e2: self.nf(e2),
                })
            }
            Eq(ty, a, b) => {
                let ty = self.nf(ty);
                let a = self.nf(a);
                let b = self.nf(b);
                self.eq(ty, a, b)
            }
            Implies(a, b) => {
                let a = self.nf(a);
                match a.kind() {
                    True => return self.nf(b),
                    False => return Term::tt(),
                    _ => {}
                }
                let b = self.nf(b);
                mk_implies(a, b)
            }
            And(a, b) => {
                let a = self.nf(a);
                if matches!(a.kind(), False) {
                    return a;
                }
                let b = self.nf(b);
                mk_and(a, b)
            }
            Forall(x, ty, body) => {
                let ty = self.nf(ty);
                self.forall(x, ty, body)
            }
            _ => t.map_children(|c| self.nf(c)),
        }
    }

    /// Applies two normal forms.
    pub fn apply(&self, f: Term, a: Term) -> Term {
        match f.kind() {
            Kind::Lam(x, _, b) => {
                if self.tick() {
                    self.nf(&b.subst(x, &a))
                } else {
                    Term::app(f, a)
                }
            }
            Kind::Case {
                scrut,
                lx,
                left,
                rx,
                right,
                ..
            } => {
                let (lx, left) = avoid(lx, left, &a);
                let (rx, right) = avoid(rx, right, &a);
                let l = self.apply(left, a.clone());
                let r = self.apply(right, a);
                mk_case(scrut.clone(), lx, l, rx, r)
            }
            Kind::If(c, x, y) => {
                let l = self.apply(x.clone(), a.clone());
                let r = self.apply(y.clone(), a);
                mk_if(c.clone(), l, r)
            }
            _ => Term::app(f, a),
        }
    }

    fn proj(&self, e: Term, first: bool) -> Term {
        match e.kind() {
            Kind::Pair(a, b) => {
                if first {
                    a.clone()
                } else {
                    b.clone()
                }
            }
            Kind::Case {
                scrut,
                lx,
                left,
                rx,
                right,
                ..
            } => {
                let l = self.proj(left.clone(), first);
                let r = self.proj(right.clone(), first);
                mk_case(scrut.clone(), lx.clone(), l, rx.clone(), r)
            }
            Kind::If(c, x, y) => {
                let l = self.proj(x.clone(), first);
                let r = self.proj(y.clone(), first);
                mk_if(c.clone(), l, r)
            }
            _ => {
                if first {
                    Term::fst(e)
                } else {
                    Term::snd(e)
                }
            }
        }
    }

    fn case(&self, s: Term, lx: &Name, left: &Term, rx: &Name, right: &Term) -> Term {
        match s.kind() {
            Kind::Inl(v, _) if self.tick() => self.nf(&left.subst(lx, v)),
            Kind::Inr(_, v) if self.tick() => self.nf(&right.subst(rx, v)),
            _ => {
                let l = self.nf(left);
                let r = self.nf(right);
                mk_case(s, lx.clone(), l, rx.clone(), r)
            }
        }
    }

    fn reify(&self, e: Term) -> Term {
        let sig = self.sig;
        let out = match e.kind() {
            Kind::Return(m, t, v) if &**m != PURE => sig
                .lookup(m, &Field::UnReturn)
                .ok()
                .map(|u| Term::apps(u, [t.clone(), v.clone()])),
            Kind::Reflect(_, x) => Some(x.clone()),
            Kind::Bind {
                eff,
                t1,
                t2,
                wp1,
                e1,
                wp2,
                x,
                e2,
            } if &**eff != PURE => sig.lookup(eff, &Field::UnBind).ok().map(|u| {
                Term::apps(
                    u,
                    [
                        t1.clone(),
                        t2.clone(),
                        wp1.clone(),
                        Term::reify(e1.clone()),
                        wp2.clone(),
                        Term::new(Kind::Lam(x.clone(), t1.clone(), Term::reify(e2.clone()))),
                    ],
                )
            }),
            Kind::Act { eff, act, args } => sig
                .lookup(eff, &Field::UnAct(act.clone()))
                .ok()
                .map(|u| Term::apps(u, args.iter().cloned())),
            Kind::Lift { from, to, ty, wp, e } => sig
                .lookup(from, &Field::UnLift(to.clone()))
                .ok()
                .map(|u| Term::apps(u, [ty.clone(), wp.clone(), Term::reify(e.clone())])),
            _ => None,
        };
        match out {
            Some(r) if self.tick() => self.nf(&r),
            _ => Term::reify(e),
        }
    }

    fn eq(&self, ty: Term, a: Term, b: Term) -> Term {
        if a.alpha_eq(&b) || matches!(ty.kind(), Kind::Base(Base::Unit)) {
            return Term::tt();
        }
        match (a.kind(), b.kind()) {
            (Kind::Lit(x), Kind::Lit(y)) => return if x == y { Term::tt() } else { Term::ff() },
            (Kind::Inl(..), Kind::Inr(..)) | (Kind::Inr(..), Kind::Inl(..)) => return Term::ff(),
            (Kind::Inl(x, _), Kind::Inl(y, _)) => {
                if let Kind::Sum(l, _) = ty.kind() {
                    return self.eq(l.clone(), x.clone(), y.clone());
                }
            }
            (Kind::Inr(_, x), Kind::Inr(_, y)) => {
                if let Kind::Sum(_, r) = ty.kind() {
                    return self.eq(r.clone(), x.clone(), y.clone());
                }
            }
            (Kind::Pair(a1, a2), Kind::Pair(b1, b2)) => {
                if let Kind::Prod(l, r) = ty.kind() {
                    let e1 = self.eq(l.clone(), a1.clone(), b1.clone());
                    let e2 = self.eq(r.clone(), a2.clone(), b2.clone());
                    return mk_and(e1, e2);
                }
            }
            _ => {}
        }
        if matches!(ty.kind(), Kind::Base(Base::Int)) {
            let d = int_diff(&a, &b);
            if let Some(c) = poly_const(&d) {
                return if c == 0 { Term::tt() } else { Term::ff() };
            }
        }
        Term::eq(ty, a, b)
    }

    fn forall(&self, x: &Name, ty: Term, body: &Term) -> Term {
        match ty.kind() {
            Kind::Base(Base::Unit) => return self.nf(&body.subst(x, &Term::unit())),
            Kind::Prod(l, r) => {
                let used = names_of(&[body]);
                let x1 = fresh(x, &|n| used.contains(n) || n == &**x);
                let x2 = fresh(x, &|n| used.contains(n) || n == &**x || n == &*x1);
                let pair = Term::pair(Term::var_n(&x1), Term::var_n(&x2));
                let inner = Term::new(Kind::Forall(
                    x1,
                    l.clone(),
                    Term::new(Kind::Forall(x2, r.clone(), body.subst(x, &pair))),
                ));
                return self.nf(&inner);
            }
            _ => {}
        }
        let body = self.nf(body);
        if matches!(body.kind(), Kind::True) {
            return body;
        }
        if !body.has_free(x) && matches!(ty.kind(), Kind::Base(_)) {
            return body;
        }
        if let Some(r) = self.one_point(x, &body) {
            return r;
        }
        Term::new(Kind::Forall(x.clone(), ty, body))
    }

    /// `∀x. ∀ȳ. (x == e ∧ H) ⇒ C` becomes `∀ȳ. H[e/x] ⇒ C[e/x]` when `e`
    /// mentions neither `x` nor `ȳ`.
    fn one_point(&self, x: &Name, body: &Term) -> Option<Term> {
        let mut binders = Vec::new();
        let mut cur = body.clone();
        while let Kind::Forall(y, ty, b) = cur.kind() {
            binders.push((y.clone(), ty.clone()));
            let b = b.clone();
            cur = b;
        }
        let Kind::Implies(h, c) = cur.kind() else {
            return None;
        };
        let conj = conjuncts(h);
        let pick = conj.iter().enumerate().find_map(|(i, f)| {
            let Kind::Eq(_, a, b) = f.kind() else { return None };
            let e = if a.as_var() == Some(x) {
                b
            } else if b.as_var() == Some(x) {
                a
            } else {
                return None;
            };
            let fv = e.free_vars();
            if fv.contains(x) || binders.iter().any(|(y, _)| fv.contains(y)) {
                return None;
            }
            Some((i, e.clone()))
        })?;
        let (i, e) = pick;
        let rest: Vec<Term> = conj
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, f)| f.clone())
            .collect();
        let mut out = Term::implies(Term::ands(rest), c.clone());
        for (y, ty) in binders.into_iter().rev() {
            out = Term::new(Kind::Forall(y, ty, out));
        }
        Some(self.nf(&out.subst(x, &e)))
    }
}

fn names_of(ts: &[&Term]) -> HashSet<Name> {
    let mut s = HashSet::new();
    for t in ts {
        t.all_names(&mut s);
    }
    s
}

/// Renames binder `x` of `body` if it would capture a free variable of `a`.
fn avoid(x: &Name, body: &Term, a: &Term) -> (Name, Term) {
    if a.has_free(x) {
        let used = names_of(&[body, a]);
        let y = fresh(x, &|n| used.contains(n));
        (y.clone(), body.rename(x, &y))
    } else {
        (x.clone(), body.clone())
    }
}

fn mk_case(s: Term, lx: Name, l: Term, rx: Name, r: Term) -> Term {
    if !l.has_free(&lx) && !r.has_free(&rx) && l.alpha_eq(&r) {
        return l;
    }
    Term::new(Kind::Case {
        scrut: s,
        as_name: name("_"),
        ret: erased_ret(),
        lx,
        left: l,
        rx,
        right: r,
    })
}

fn mk_if(c: Term, a: Term, b: Term) -> Term {
    if a.alpha_eq(&b) {
        return a;
    }
    if let (Kind::Lit(Lit::Bool(true)), Kind::Lit(Lit::Bool(false))) = (a.kind(), b.kind()) {
        return c;
    }
    Term::ite(c, a, b)
}

pub fn conjuncts(t: &Term) -> Vec<Term> {
    match t.kind() {
        Kind::And(a, b) => {
            let mut v = conjuncts(a);
            v.extend(conjuncts(b));
            v
        }
        Kind::True => vec![],
        _ => vec![t.clone()],
    }
}

pub fn mk_and(a: Term, b: Term) -> Term {
    match (a.kind(), b.kind()) {
        (Kind::True, _) => b,
        (_, Kind::True) => a,
        (Kind::False, _) => a,
        (_, Kind::False) => b,
        _ if a.alpha_eq(&b) => a,
        _ => Term::and(a, b),
    }
}

pub fn mk_implies(a: Term, b: Term) -> Term {
    match (a.kind(), b.kind()) {
        (Kind::True, _) => b,
        (Kind::False, _) | (_, Kind::True) => Term::tt(),
        _ if a.alpha_eq(&b) => Term::tt(),
        _ if conjuncts(&a).iter().any(|h| h.alpha_eq(&b)) => Term::tt(),
        _ => Term::implies(a, b),
    }
}

// Primitive operators and integer polynomials.

fn prim(op: PrimOp, args: Vec<Term>) -> Term {
    let lits: Option<Vec<Lit>> = args.iter().map(|a| a.as_lit()).collect();
    if let Some(ls) = &lits {
        if let Some(v) = eval_prim(op, ls) {
            return Term::lit(v);
        }
    }
    match op {
        PrimOp::Add | PrimOp::Sub | PrimOp::Mul => {
            let mut atoms = Atoms::new();
            let p = to_poly(&Term::prim(op, args), &mut atoms);
            from_poly(&p, &atoms)
        }
        PrimOp::Eq | PrimOp::Lt => {
            let d = int_diff(&args[0], &args[1]);
            if let Some(c) = poly_const(&d) {
                return Term::bool(if op == PrimOp::Eq { c == 0 } else { c < 0 });
            }
            if op == PrimOp::Eq && args[0].alpha_eq(&args[1]) {
                return Term::bool(true);
            }
            Term::prim(op, args)
        }
        PrimOp::And | PrimOp::Or => {
            let (a, b) = (&args[0], &args[1]);
            let unit = op == PrimOp::And;
            match (a.as_lit(), b.as_lit()) {
                (Some(Lit::Bool(x)), _) => {
                    if x == unit {
                        b.clone()
                    } else {
                        a.clone()
                    }
                }
                (_, Some(Lit::Bool(y))) => {
                    if y == unit {
                        a.clone()
                    } else {
                        b.clone()
                    }
                }
                _ if a.alpha_eq(b) => a.clone(),
                _ => Term::prim(op, args),
            }
        }
        PrimOp::Not => match args[0].kind() {
            Kind::Prim(PrimOp::Not, inner) => inner[0].clone(),
            _ => Term::prim(op, args),
        },
    }
}

/// Evaluates an operator on literal arguments (wrapping integer arithmetic).
pub fn eval_prim(op: PrimOp, args: &[Lit]) -> Option<Lit> {
    use Lit::*;
    Some(match (op, args) {
        (PrimOp::Add, [Int(a), Int(b)]) => Int(a.wrapping_add(*b)),
        (PrimOp::Sub, [Int(a), Int(b)]) => Int(a.wrapping_sub(*b)),
        (PrimOp::Mul, [Int(a), Int(b)]) => Int(a.wrapping_mul(*b)),
        (PrimOp::Eq, [Int(a), Int(b)]) => Bool(a == b),
        (PrimOp::Lt, [Int(a), Int(b)]) => Bool(a < b),
        (PrimOp::And, [Bool(a), Bool(b)]) => Bool(*a && *b),
        (PrimOp::Or, [Bool(a), Bool(b)]) => Bool(*a || *b),
        (PrimOp::Not, [Bool(a)]) => Bool(!*a),
        _ => return None,
    })
}

/// Monomial (sorted atom keys) to coefficient.
type Poly = BTreeMap<Vec<String>, i64>;

type Atoms = HashMap<String, Term>;

fn to_poly(t: &Term, atoms: &mut Atoms) -> Poly {
    let mut p = Poly::new();
    match t.kind() {
        Kind::Lit(Lit::Int(n)) => {
            if *n != 0 {
                p.insert(vec![], *n);
            }
        }
        Kind::Prim(PrimOp::Add, a) => return poly_add(&to_poly(&a[0], atoms), &to_poly(&a[1], atoms)),
        Kind::Prim(PrimOp::Sub, a) => return poly_sub(&to_poly(&a[0], atoms), &to_poly(&a[1], atoms)),
        Kind::Prim(PrimOp::Mul, a) => return poly_mul(&to_poly(&a[0], atoms), &to_poly(&a[1], atoms)),
        _ => {
            let k = crate::print::sexp(t);
            atoms.entry(k.clone()).or_insert_with(|| t.clone());
            p.insert(vec![k], 1);
        }
    }
    p
}

/// Difference of two integer terms as a polynomial.
fn int_diff(a: &Term, b: &Term) -> Poly {
    let mut atoms = Atoms::new();
    poly_sub(&to_poly(a, &mut atoms), &to_poly(b, &mut atoms))
}

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    for (m, c) in b {
        let e = r.entry(m.clone()).or_insert(0);
        *e = e.wrapping_add(*c);
        if *e == 0 {
            r.remove(m);
        }
    }
    r
}

fn poly_sub(a: &Poly, b: &Poly) -> Poly {
    let neg: Poly = b.iter().map(|(m, c)| (m.clone(), c.wrapping_neg())).collect();
    poly_add(a, &neg)
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut r = Poly::new();
    for (m1, c1) in a {
        for (m2, c2) in b {
            let mut m: Vec<String> = m1.iter().chain(m2.iter()).cloned().collect();
            m.sort();
            let single: Poly = [(m, c1.wrapping_mul(*c2))].into_iter().collect();
            r = poly_add(&r, &single);
        }
    }
    r
}

fn poly_const(p: &Poly) -> Option<i64> {
    match p.len() {
        0 => Some(0),
        1 => p.get(&vec![]).copied(),
        _ => None,
    }
}

fn from_poly(p: &Poly, atoms: &Atoms) -> Term {
    if let Some(c) = poly_const(p) {
        return Term::int(c);
    }
    let mut monos: Vec<(&Vec<String>, i64)> = p.iter().map(|(m, c)| (m, *c)).collect();
    monos.sort_by_key(|(m, c)| (m.is_empty(), *c < 0, std::cmp::Reverse(m.len()), (*m).clone()));
    let mono = |m: &Vec<String>, c: i64| -> Term {
        if m.is_empty() {
            return Term::int(c);
        }
        let prod = m
            .iter()
            .map(|k| atoms[k].clone())
            .reduce(|a, b| Term::binop(PrimOp::Mul, a, b))
            .unwrap();
        if c == 1 {
            prod
        } else {
            Term::binop(PrimOp::Mul, Term::int(c), prod)
        }
    };
    let mut acc: Option<Term> = None;
    for (m, c) in monos {
        acc = Some(match acc {
            None => mono(m, c),
            Some(a) if c < 0 => Term::binop(PrimOp::Sub, a, mono(m, c.wrapping_neg())),
            Some(a) => Term::binop(PrimOp::Add, a, mono(m, c)),
        });
    }
    acc.unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::parse_term;

    fn n(src: &str) -> Term {
        nf(&Signature::new(), &parse_term(src).unwrap())
    }

    #[test]
    fn ground_arithmetic() {
        assert_eq!(n("(prim + 2 3)"), Term::int(5));
    }

    #[test]
    fn ring_normal_form_is_canonical() {
        let a = n("(prim + (prim + c1 0) (prim * 2 x))");
        let b = n("(prim + (prim * x 2) c1)");
        assert!(a.alpha_eq(&b), "{a} vs {b}");
        assert!(n("(prim - (prim + x 1) x)").alpha_eq(&Term::int(1)));
    }

    #[test]
    fn pure_combinators_unfold() {
        let t = n("(app (const Pure return*) int 1)");
        let expect = parse_term("(lam p (pi _ int (Tot (Type 0))) (app p 1))").unwrap();
        assert!(t.alpha_eq(&expect), "{t}");
    }

    #[test]
    fn one_point_rule() {
        let t = n("(forall x int (forall y int (implies (eq int y x) (app p y))))");
        let expect = parse_term("(forall x int (app p x))").unwrap();
        assert!(t.alpha_eq(&expect), "{t}");
    }

    #[test]
    fn product_binders_split() {
        let t = n("(forall z (prod int bool) (app q (fst z)))");
        let expect = parse_term("(forall a int (forall b bool (app q a)))").unwrap();
        assert!(!t.alpha_eq(&expect), "b is unused and bool is inhabited, so it is dropped");
        assert!(t.alpha_eq(&parse_term("(forall a int (app q a))").unwrap()), "{t}");
    }

    #[test]
    fn commuting_conversion_into_case() {
        let t = n("(app (case s z (Tot int) x f y g) 3)");
        let expect = parse_term("(case s _ (Tot unit) x (app f 3) y (app g 3))").unwrap();
        assert!(t.alpha_eq(&expect), "{t:?}");
    }

    #[test]
    fn budget_stops_divergence() {
        let omega = "(app (lam x int (app x x)) (lam x int (app x x)))";
        let sig = Signature::new();
        let nm = Norm::with_budget(&sig, 50);
        nm.nf(&parse_term(omega).unwrap());
        assert!(nm.exhausted());
    }
}
