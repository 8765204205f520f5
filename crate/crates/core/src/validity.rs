//! Validity of squashed formulas.
//!
//! A goal is first normalized, then searched for small countermodels over
//! base-typed variables, then handed to a goal-directed prover that works
//! with introductions, substitution of equations, extensionality,
//! congruence, rewriting with equational hypotheses, case splits and
//! backward chaining through universally quantified hypotheses.
//!
//! The prover is sound but incomplete: a goal it can neither prove nor
//! refute is reported as [`Verdict::Unknown`].

use std::cell::Cell;
use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::matching::{instantiate, Matcher};
use crate::norm::{conjuncts, nf};
use crate::signature::Signature;
use crate::syntax::{fresh, name, Base, Kind, Lit, Name, Term};

#[derive(Clone, Debug)]
pub enum Verdict {
    Valid,
    /// An assignment to free base-typed variables falsifying the formula.
    Invalid(Vec<(Name, Lit)>),
    /// The residual goal after normalization.
    Unknown(Term),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Valid => write!(f, "valid"),
            Verdict::Invalid(m) => {
                write!(f, "invalid; countermodel:")?;
                for (x, v) in m {
                    write!(f, " {x}={}", Term::lit(*v))?;
                }
                Ok(())
            }
            Verdict::Unknown(r) => write!(f, "unknown; residual goal: {r}"),
        }
    }
}

const MAX_DEPTH: usize = 8;
const MAX_STEPS: usize = 40_000;
const INT_RANGE: std::ops::RangeInclusive<i64> = -2..=2;
const MAX_MODELS: usize = 4096;
const MAX_INSTANCES: usize = 16;

/// Decides `vars ⊨ φ` where `vars` types the free variables of `φ`.
pub fn validity(sig: &Signature, vars: &[(Name, Term)], phi: &Term) -> Verdict {
    let goal = nf(sig, phi);
    if matches!(goal.kind(), Kind::True) {
        return Verdict::Valid;
    }
    let prover = Prover::new(sig);
    let mut st = State::default();
    for (x, ty) in vars {
        st.add_var(sig, x.clone(), ty);
    }
    if let Some(m) = countermodel(sig, &st, &goal) {
        return Verdict::Invalid(m);
    }
    if prover.prove(&st, &goal, MAX_DEPTH) {
        Verdict::Valid
    } else {
        Verdict::Unknown(goal)
    }
}

#[derive(Clone, Default, Debug)]
struct State {
    vars: Vec<(Name, Term)>,
    hyps: Vec<Term>,
    contra: bool,
}

impl State {
    fn add_var(&mut self, sig: &Signature, x: Name, ty: &Term) {
        let ty = nf(sig, ty);
        if let Kind::Refine(y, base, phi) = ty.kind() {
            self.vars.push((x.clone(), base.clone()));
            let h = nf(sig, &phi.subst(y, &Term::var_n(&x)));
            self.add_hyp(h);
        } else {
            self.vars.push((x, ty));
        }
    }

    fn add_hyp(&mut self, h: Term) {
        for c in conjuncts(&h) {
            match c.kind() {
                Kind::False => self.contra = true,
                Kind::True => {}
                _ => {
                    if !self.hyps.iter().any(|k| k.alpha_eq(&c)) {
                        self.hyps.push(c)
                    }
                }
            }
        }
    }

    fn taken(&self, goal: &Term) -> HashSet<Name> {
        let mut s = HashSet::new();
        for (x, t) in &self.vars {
            s.insert(x.clone());
            t.all_names(&mut s);
        }
        for h in &self.hyps {
            h.all_names(&mut s);
        }
        goal.all_names(&mut s);
        s
    }

    fn type_of_var(&self, x: &str) -> Option<&Term> {
        self.vars.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }
}

struct Prover<'s> {
    sig: &'s Signature,
    steps: Cell<usize>,
    metas: Cell<usize>,
}

impl<'s> Prover<'s> {
    fn new(sig: &'s Signature) -> Prover<'s> {
        Prover {
            sig,
            steps: Cell::new(0),
            metas: Cell::new(0),
        }
    }

    fn nf(&self, t: &Term) -> Term {
        nf(self.sig, t)
    }

    fn tick(&self) -> bool {
        let s = self.steps.get() + 1;
        self.steps.set(s);
        s <= MAX_STEPS
    }

    fn prove(&self, st: &State, goal: &Term, depth: usize) -> bool {
        if st.contra {
            return true;
        }
        if !self.tick() {
            return false;
        }
        match goal.kind() {
            Kind::True => true,
            Kind::And(a, b) => self.prove(st, a, depth) && self.prove(st, b, depth),
            Kind::Implies(a, b) => {
                let (st2, b2) = self.assume(st, a, b);
                self.prove(&st2, &b2, depth)
            }
            Kind::Forall(x, ty, body) => {
                let used = st.taken(goal);
                let y = fresh(x, &|n| used.contains(n));
                let mut st2 = st.clone();
                st2.add_var(self.sig, y.clone(), ty);
                let body = self.nf(&body.subst(x, &Term::var_n(&y)));
                self.prove(&st2, &body, depth)
            }
            Kind::Eq(ty, a, b) => {
                self.lookup(st, goal)
                    || self.prove_eq(st, ty, a, b, depth)
                    || self.prove_atom(st, goal, depth)
            }
            _ => self.lookup(st, goal) || self.prove_atom(st, goal, depth),
        }
    }

    /// Adds `a` to the hypotheses, substituting away equations on variables.
    fn assume(&self, st: &State, a: &Term, goal: &Term) -> (State, Term) {
        let mut st = st.clone();
        let mut goal = goal.clone();
        let mut pending: Vec<Term> = conjuncts(a);
        while let Some(h) = pending.pop() {
            if let Some((x, e)) = var_equation(&h, &st) {
                let s = |t: &Term| t.subst(&x, &e);
                let old = std::mem::take(&mut st.hyps);
                st.hyps = vec![];
                for o in old {
                    let n = self.nf(&s(&o));
                    pending.extend(conjuncts(&n));
                }
                pending = pending.iter().map(|p| self.nf(&s(p))).collect();
                goal = self.nf(&s(&goal));
                continue;
            }
            st.add_hyp(h);
        }
        (st, goal)
    }

    fn lookup(&self, st: &State, goal: &Term) -> bool {
        st.hyps.iter().any(|h| h.alpha_eq(goal))
            || match goal.kind() {
                Kind::Eq(ty, a, b) => {
                    let sym = Term::eq(ty.clone(), b.clone(), a.clone());
                    st.hyps.iter().any(|h| h.alpha_eq(&sym))
                }
                _ => false,
            }
    }

    fn prove_eq(&self, st: &State, ty: &Term, a: &Term, b: &Term, depth: usize) -> bool {
        if a.alpha_eq(b) {
            return true;
        }
        let ty = self.nf(ty);
        match ty.kind() {
            Kind::Pi(x, dom, cod) => {
                if let Kind::Tot(r) = cod.kind() {
                    return self.funext(st, x, dom, r, a, b, depth);
                }
            }
            Kind::Prod(l, r) if matches!(a.kind(), Kind::Pair(..)) || matches!(b.kind(), Kind::Pair(..)) => {
                let g = Term::and(
                    Term::eq(l.clone(), Term::fst(a.clone()), Term::fst(b.clone())),
                    Term::eq(r.clone(), Term::snd(a.clone()), Term::snd(b.clone())),
                );
                return self.prove(st, &self.nf(&g), depth);
            }
            _ => {}
        }
        if depth == 0 {
            return false;
        }
        // Rewriting with equational hypotheses.
        for (l, r, metas) in self.equations(st) {
            for (x, y) in [(a, b), (b, a)] {
                if let Some(x2) = rewrite_first(x, &l, &r, &metas) {
                    let g = self.nf(&Term::eq(ty.clone(), x2, y.clone()));
                    if self.prove(st, &g, depth - 1) {
                        return true;
                    }
                }
            }
        }
        if self.congruence(st, a, b, depth - 1) {
            return true;
        }
        if let (Kind::Lam(x, dom, _), _) | (_, Kind::Lam(x, dom, _)) = (a.kind(), b.kind()) {
            let used = st.taken(&Term::and(a.clone(), b.clone()));
            let y = fresh(x, &|n| used.contains(n));
            let mut st2 = st.clone();
            st2.add_var(self.sig, y.clone(), dom);
            let v = Term::var_n(&y);
            let ga = self.nf(&Term::app(a.clone(), v.clone()));
            let gb = self.nf(&Term::app(b.clone(), v));
            let rty = infer(&st2, &ga).unwrap_or_else(unknown_ty);
            return self.prove(&st2, &self.nf(&Term::eq(rty, ga, gb)), depth - 1);
        }
        if let Kind::Univ(0) = ty.kind() {
            let g = Term::and(
                Term::implies(a.clone(), b.clone()),
                Term::implies(b.clone(), a.clone()),
            );
            return self.prove(st, &self.nf(&g), depth - 1);
        }
        false
    }

    #[allow(clippy::too_many_arguments)]
    fn funext(&self, st: &State, x: &Name, dom: &Term, r: &Term, a: &Term, b: &Term, depth: usize) -> bool {
        let used = st.taken(&Term::and(a.clone(), b.clone()));
        let mut st2 = st.clone();
        let dom_n = self.nf(dom);
        // Product arguments are introduced as pairs of fresh variables.
        let arg = match dom_n.kind() {
            Kind::Base(Base::Unit) => Term::unit(),
            Kind::Prod(l, rr) => {
                let y1 = fresh(x, &|n| used.contains(n));
                let y2 = fresh(x, &|n| used.contains(n) || n == &*y1);
                st2.add_var(self.sig, y1.clone(), l);
                st2.add_var(self.sig, y2.clone(), rr);
                Term::pair(Term::var_n(&y1), Term::var_n(&y2))
            }
            _ => {
                let y = fresh(x, &|n| used.contains(n));
                st2.add_var(self.sig, y.clone(), &dom_n);
                Term::var_n(&y)
            }
        };
        let g = Term::eq(
            r.subst(x, &arg),
            Term::app(a.clone(), arg.clone()),
            Term::app(b.clone(), arg),
        );
        self.prove(&st2, &self.nf(&g), depth)
    }

    fn congruence(&self, st: &State, a: &Term, b: &Term, depth: usize) -> bool {
        let (ha, xs) = a.spine();
        let (hb, ys) = b.spine();
        if xs.is_empty() || xs.len() != ys.len() || !ha.alpha_eq(&hb) {
            return match (a.kind(), b.kind()) {
                (Kind::Pair(a1, a2), Kind::Pair(b1, b2)) => {
                    let t1 = infer(st, a1).unwrap_or_else(unknown_ty);
                    let t2 = infer(st, a2).unwrap_or_else(unknown_ty);
                    self.prove(st, &self.nf(&Term::eq(t1, a1.clone(), b1.clone())), depth)
                        && self.prove(st, &self.nf(&Term::eq(t2, a2.clone(), b2.clone())), depth)
                }
                (Kind::Fst(x), Kind::Fst(y))
                | (Kind::Snd(x), Kind::Snd(y))
                | (Kind::Inl(x, _), Kind::Inl(y, _))
                | (Kind::Inr(_, x), Kind::Inr(_, y)) => {
                    let t = infer(st, x).unwrap_or_else(unknown_ty);
                    self.prove(st, &self.nf(&Term::eq(t, x.clone(), y.clone())), depth)
                }
                _ => false,
            };
        }
        let mut fty = infer(st, &ha).map(|t| self.nf(&t));
        for (x, y) in xs.iter().zip(ys.iter()) {
            let dom = match fty.as_ref().map(|t| t.kind()) {
                Some(Kind::Pi(v, d, c)) => {
                    let d = d.clone();
                    fty = match c.kind() {
                        Kind::Tot(r) => Some(self.nf(&r.subst(v, x))),
                        _ => None,
                    };
                    d
                }
                _ => {
                    fty = None;
                    unknown_ty()
                }
            };
            if x.alpha_eq(y) {
                continue;
            }
            let g = self.nf(&Term::eq(dom, x.clone(), y.clone()));
            if !self.prove(st, &g, depth) {
                return false;
            }
        }
        true
    }

    fn prove_atom(&self, st: &State, goal: &Term, depth: usize) -> bool {
        if depth == 0 {
            return false;
        }
        for h in &st.hyps {
            if matches!(h.kind(), Kind::Forall(..) | Kind::Implies(..)) && self.chain(st, h, goal, depth - 1) {
                return true;
            }
        }
        // A hypothesis with the same head and provably equal arguments.
        let (hg, xs) = goal.spine();
        if !xs.is_empty() {
            for h in &st.hyps {
                let (hh, ys) = h.spine();
                if ys.len() == xs.len() && hh.alpha_eq(&hg) && self.congruence(st, h, goal, depth - 1) {
                    return true;
                }
            }
        }
        if !matches!(goal.kind(), Kind::Eq(..)) {
            for (l, r, metas) in self.equations(st) {
                if let Some(g2) = rewrite_first(goal, &l, &r, &metas) {
                    if self.prove(st, &self.nf(&g2), depth - 1) {
                        return true;
                    }
                }
            }
        }
        self.split(st, goal, depth - 1)
    }

    fn fresh_meta(&self, x: &str) -> Name {
        let n = self.metas.get();
        self.metas.set(n + 1);
        name(&format!("?{x}#{n}"))
    }

    /// Opens a lemma into metavariables, premises and conclusion.
    fn open(&self, lemma: &Term) -> (HashSet<Name>, Vec<Term>, Term) {
        let mut metas = HashSet::new();
        let mut prem = Vec::new();
        let mut cur = lemma.clone();
        loop {
            match cur.kind() {
                Kind::Forall(x, _, b) => {
                    let m = self.fresh_meta(x);
                    let b = b.subst(x, &Term::var_n(&m));
                    metas.insert(m);
                    cur = b;
                }
                Kind::Implies(p, c) => {
                    prem.extend(conjuncts(p));
                    let c = c.clone();
                    cur = c;
                }
                _ => break,
            }
        }
        (metas, prem, cur)
    }

    /// Equational hypotheses usable as left-to-right rewrite rules.
    fn equations(&self, st: &State) -> Vec<(Term, Term, HashSet<Name>)> {
        let mut out = Vec::new();
        for h in &st.hyps {
            let (metas, prem, concl) = self.open(h);
            if !prem.is_empty() {
                continue;
            }
            for c in conjuncts(&concl) {
                if let Kind::Eq(_, l, r) = c.kind() {
                    let lv: HashSet<Name> = l.free_vars();
                    // A rule must bind all its metavariables on the left.
                    if metas.iter().all(|m| lv.contains(m) || !r.has_free(m)) && l.as_var().map_or(true, |v| !metas.contains(v)) {
                        out.push((l.clone(), r.clone(), metas.clone()));
                    }
                }
            }
        }
        out
    }

    fn chain(&self, st: &State, lemma: &Term, goal: &Term, depth: usize) -> bool {
        let (metas, prem, concl) = self.open(lemma);
        for c in conjuncts(&concl) {
            let mut cands = vec![c.clone()];
            if let Kind::Eq(t, l, r) = c.kind() {
                cands.push(Term::eq(t.clone(), r.clone(), l.clone()));
            }
            for cand in cands {
                let mut m = Matcher::new(&metas);
                if m.matches(&cand, goal) && self.solve(st, &metas, &prem, m.solution, depth) {
                    return true;
                }
            }
        }
        false
    }

    /// Discharges premises: those with open metavariables are matched against
    /// hypotheses (with backtracking), the rest are proved.
    fn solve(
        &self,
        st: &State,
        metas: &HashSet<Name>,
        prem: &[Term],
        sol: HashMap<Name, Term>,
        depth: usize,
    ) -> bool {
        if !self.tick() {
            return false;
        }
        let is_open = |p: &Term| instantiate(p, &sol).free_vars().iter().any(|v| metas.contains(v));
        // Atomic premises can be matched against hypotheses; prefer them.
        let open_ix = prem
            .iter()
            .position(|p| !matches!(p.kind(), Kind::Forall(..) | Kind::Implies(..)) && is_open(p))
            .or_else(|| prem.iter().position(is_open));
        match open_ix {
            Some(i) => {
                let p = self.nf(&instantiate(&prem[i], &sol));
                let rest: Vec<Term> = prem.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, t)| t.clone()).collect();
                for h in &st.hyps {
                    let mut m = Matcher::with_solution(metas, sol.clone());
                    if m.matches(&p, h) && self.solve(st, metas, &rest, m.solution, depth) {
                        return true;
                    }
                }
                false
            }
            None => prem.iter().all(|p| {
                let g = self.nf(&instantiate(p, &sol));
                self.prove(st, &g, depth)
            }),
        }
    }

    /// Instances of universally quantified hypotheses whose bodies branch,
    /// taken at variables of the goal with the same type.
    fn instances(&self, st: &State, goal: &Term) -> Vec<Term> {
        let bound = HashSet::new();
        let goal_vars = goal.free_vars();
        let mut out = Vec::new();
        for h in &st.hyps {
            let mut binders = Vec::new();
            let mut body = h.clone();
            while let Kind::Forall(x, ty, b) = body.kind() {
                binders.push((x.clone(), ty.clone()));
                let b = b.clone();
                body = b;
            }
            if binders.is_empty() || !has_branch(&body) {
                continue;
            }
            let mut insts: Vec<Vec<(Name, Term)>> = vec![vec![]];
            for (x, ty) in &binders {
                let cands: Vec<Term> = st
                    .vars
                    .iter()
                    .filter(|(v, t)| goal_vars.contains(v) && t.alpha_eq(ty))
                    .map(|(v, _)| Term::var_n(v))
                    .collect();
                insts = insts
                    .into_iter()
                    .flat_map(|i| {
                        cands.iter().map(move |c| {
                            let mut j = i.clone();
                            j.push((x.clone(), c.clone()));
                            j
                        })
                    })
                    .take(MAX_INSTANCES)
                    .collect();
            }
            for i in insts {
                let inst = self.nf(&body.subst_many(&i));
                if find_split(&inst, &bound).is_some() {
                    out.push(inst);
                }
            }
        }
        out
    }

    fn split(&self, st: &State, goal: &Term, depth: usize) -> bool {
        let bound = HashSet::new();
        let mut st = st.clone();
        for i in self.instances(&st, goal) {
            st.add_hyp(i);
        }
        let st = &st;
        // Variables first: their cases substitute through everything.
        let var_target = || {
            std::iter::once(goal)
                .chain(st.hyps.iter())
                .find_map(|t| find_var_split(t, &bound))
        };
        let target = var_target()
            .or_else(|| find_split(goal, &bound))
            .or_else(|| st.hyps.iter().find_map(|h| find_split(h, &bound)));
        let Some(target) = target else { return false };
        let fv = target.free_vars();
        if fv.iter().any(|v| st.type_of_var(v).is_none()) {
            return false;
        }
        // Other scrutinees with the same head that are provably equal to the
        // target are split together with it.
        let mut goal = goal.clone();
        if target.as_var().is_none() {
            let (head, args) = target.spine();
            let mut others = Vec::new();
            find_all_splits(&goal, &bound, &mut others);
            for o in others {
                let (h2, args2) = o.spine();
                if !o.alpha_eq(&target)
                    && h2.alpha_eq(&head)
                    && args2.len() == args.len()
                    && depth > 0
                    && self.congruence(st, &target, &o, depth - 1)
                {
                    goal = self.nf(&replace(&goal, &o, &target));
                }
            }
        }
        let goal = &goal;
        let cases: Vec<(Term, Vec<(Name, Term)>)> = match infer(st, &target).map(|t| self.nf(&t)) {
            Some(ty) => match ty.kind() {
                Kind::Base(Base::Bool) => vec![(Term::bool(true), vec![]), (Term::bool(false), vec![])],
                Kind::Sum(l, r) => {
                    let used = st.taken(goal);
                    let x = fresh("v", &|n| used.contains(n));
                    let side = |t: &Term| match t.kind() {
                        Kind::Base(Base::Unit) => (Term::unit(), vec![]),
                        _ => (Term::var_n(&x), vec![(x.clone(), t.clone())]),
                    };
                    let ((lv, lvars), (rv, rvars)) = (side(l), side(r));
                    vec![(Term::inl(lv, r.clone()), lvars), (Term::inr(l.clone(), rv), rvars)]
                }
                _ => return false,
            },
            None => return false,
        };
        for (v, new_vars) in cases {
            let rep = |t: &Term| replace(t, &target, &v);
            let mut st2 = State {
                vars: st.vars.clone(),
                hyps: vec![],
                contra: st.contra,
            };
            for (x, ty) in new_vars {
                st2.add_var(self.sig, x, &ty);
            }
            let mut facts: Vec<Term> = st.hyps.iter().map(|h| self.nf(&rep(h))).collect();
            // Keep the case as a fact about the scrutinee.
            if let Some(ty) = infer(st, &target) {
                if !matches!(target.kind(), Kind::Var(_)) {
                    facts.push(Term::eq(ty, target.clone(), v.clone()));
                }
            }
            let (st2, g) = self.assume(&st2, &Term::ands(facts), &self.nf(&rep(goal)));
            if !self.prove(&st2, &g, depth) {
                return false;
            }
        }
        true
    }
}

fn unknown_ty() -> Term {
    Term::var("?type")
}

/// `x == e` or `e == x` for a variable `x` typed in the state, with `x ∉ e`.
fn var_equation(h: &Term, st: &State) -> Option<(Name, Term)> {
    let Kind::Eq(_, a, b) = h.kind() else { return None };
    for (x, e) in [(a, b), (b, a)] {
        if let Some(v) = x.as_var() {
            if st.type_of_var(v).is_some() && !e.has_free(v) {
                return Some((v.clone(), e.clone()));
            }
        }
    }
    None
}

/// First stuck case scrutinee or conditional without bound variables.
fn find_split(t: &Term, bound: &HashSet<Name>) -> Option<Term> {
    let candidate = match t.kind() {
        Kind::Case { scrut, .. } => Some(scrut),
        Kind::If(c, ..) => Some(c),
        _ => None,
    };
    if let Some(s) = candidate {
        if !matches!(s.kind(), Kind::Inl(..) | Kind::Inr(..) | Kind::Lit(_))
            && !s.free_vars().iter().any(|v| bound.contains(v))
        {
            return Some(s.clone());
        }
    }
    for (b, c) in t.slots() {
        let r = match b {
            Some(x) => {
                let mut inner = bound.clone();
                inner.insert(x);
                find_split(&c, &inner)
            }
            None => find_split(&c, bound),
        };
        if r.is_some() {
            return r;
        }
    }
    None
}

fn find_all_splits(t: &Term, bound: &HashSet<Name>, out: &mut Vec<Term>) {
    if let Kind::Case { scrut, .. } | Kind::If(scrut, ..) = t.kind() {
        if !scrut.free_vars().iter().any(|v| bound.contains(v)) && !out.iter().any(|o: &Term| o.alpha_eq(scrut)) {
            out.push(scrut.clone());
        }
    }
    for (b, c) in t.slots() {
        match b {
            Some(x) => {
                let mut inner = bound.clone();
                inner.insert(x);
                find_all_splits(&c, &inner, out);
            }
            None => find_all_splits(&c, bound, out),
        }
    }
}

/// First case or conditional on a free variable.
fn find_var_split(t: &Term, bound: &HashSet<Name>) -> Option<Term> {
    if let Kind::Case { scrut, .. } | Kind::If(scrut, ..) = t.kind() {
        if scrut.as_var().is_some_and(|v| !bound.contains(v)) {
            return Some(scrut.clone());
        }
    }
    t.slots().into_iter().find_map(|(b, c)| match b {
        Some(x) => {
            let mut inner = bound.clone();
            inner.insert(x);
            find_var_split(&c, &inner)
        }
        None => find_var_split(&c, bound),
    })
}

fn has_branch(t: &Term) -> bool {
    matches!(t.kind(), Kind::Case { .. } | Kind::If(..)) || t.slots().iter().any(|(_, c)| has_branch(c))
}

/// Replaces occurrences of `target` (closed under the binders it is found
/// beneath) by `with`.
pub fn replace(t: &Term, target: &Term, with: &Term) -> Term {
    if t.alpha_eq(target) {
        return with.clone();
    }
    let fv = target.free_vars();
    let slots = t.slots();
    if slots.is_empty() {
        return t.clone();
    }
    let new: Vec<_> = slots
        .into_iter()
        .map(|(b, c)| match &b {
            Some(x) if fv.contains(x) => (b, c),
            _ => {
                let c2 = replace(&c, target, with);
                (b, c2)
            }
        })
        .collect();
    t.with_slots(new)
}

/// Rewrites the leftmost-outermost instance of `l` in `t` to `r`.
fn rewrite_first(t: &Term, l: &Term, r: &Term, metas: &HashSet<Name>) -> Option<Term> {
    let mut m = Matcher::new(metas);
    if m.matches(l, t) {
        let out = instantiate(r, &m.solution);
        if !out.alpha_eq(t) {
            return Some(out);
        }
    }
    let slots = t.slots();
    for (i, (_, c)) in slots.iter().enumerate() {
        if let Some(c2) = rewrite_first(c, l, r, metas) {
            let mut s = slots.clone();
            s[i].1 = c2;
            return Some(t.with_slots(s));
        }
    }
    None
}

/// Best-effort type inference over the prover's variable context.
fn infer(st: &State, t: &Term) -> Option<Term> {
    match t.kind() {
        Kind::Var(x) => st.type_of_var(x).cloned(),
        Kind::Lit(l) => Some(Term::base(l.base())),
        Kind::Prim(op, _) => Some(Term::base(op.signature().1)),
        Kind::App(f, a) => {
            let ft = infer(st, f)?;
            match ft.kind() {
                Kind::Pi(x, _, c) => match c.kind() {
                    Kind::Tot(r) => Some(r.subst(x, a)),
                    _ => None,
                },
                _ => None,
            }
        }
        Kind::Fst(e) => match infer(st, e)?.kind() {
            Kind::Prod(l, _) => Some(l.clone()),
            _ => None,
        },
        Kind::Snd(e) => match infer(st, e)?.kind() {
            Kind::Prod(_, r) => Some(r.clone()),
            _ => None,
        },
        Kind::Pair(a, b) => Some(Term::prod(infer(st, a)?, infer(st, b)?)),
        Kind::Inl(v, r) => Some(Term::sum(infer(st, v)?, r.clone())),
        Kind::Inr(l, v) => Some(Term::sum(l.clone(), infer(st, v)?)),
        Kind::Lam(x, ty, b) => {
            let mut st2 = st.clone();
            st2.vars.push((x.clone(), ty.clone()));
            Some(Term::pi_tot(x, ty.clone(), infer(&st2, b)?))
        }
        Kind::True | Kind::False | Kind::Eq(..) | Kind::Implies(..) | Kind::And(..) | Kind::Forall(..) => {
            Some(Term::type0())
        }
        Kind::If(_, a, _) => infer(st, a),
        _ => None,
    }
}

/// Three-valued evaluation of a closed (after assignment) formula.
fn eval3(sig: &Signature, t: &Term) -> Option<bool> {
    let t = nf(sig, t);
    match t.kind() {
        Kind::True => Some(true),
        Kind::False => Some(false),
        Kind::And(a, b) => match (eval3(sig, a), eval3(sig, b)) {
            (Some(false), _) | (_, Some(false)) => Some(false),
            (Some(true), Some(true)) => Some(true),
            _ => None,
        },
        Kind::Implies(a, b) => match (eval3(sig, a), eval3(sig, b)) {
            (Some(false), _) | (_, Some(true)) => Some(true),
            (Some(true), Some(false)) => Some(false),
            _ => None,
        },
        Kind::Forall(x, ty, body) => {
            let vals: Vec<Term> = match ty.kind() {
                Kind::Base(Base::Bool) => vec![Term::bool(true), Term::bool(false)],
                Kind::Base(Base::Int) => INT_RANGE.map(Term::int).collect(),
                _ => return None,
            };
            let exhaustive = matches!(ty.kind(), Kind::Base(Base::Bool));
            let mut all = true;
            for v in vals {
                match eval3(sig, &body.subst(x, &v)) {
                    Some(false) => return Some(false),
                    Some(true) => {}
                    None => all = false,
                }
            }
            if all && exhaustive {
                Some(true)
            } else {
                None
            }
        }
        _ => None,
    }
}

fn countermodel(sig: &Signature, st: &State, goal: &Term) -> Option<Vec<(Name, Lit)>> {
    let fv = goal.free_vars();
    let mut domains: Vec<(Name, Vec<Lit>)> = Vec::new();
    for (x, ty) in &st.vars {
        if !fv.contains(x) && !st.hyps.iter().any(|h| h.has_free(x)) {
            continue;
        }
        let d: Vec<Lit> = match ty.kind() {
            Kind::Base(Base::Int) => INT_RANGE.map(Lit::Int).collect(),
            Kind::Base(Base::Bool) => vec![Lit::Bool(true), Lit::Bool(false)],
            Kind::Base(Base::Unit) => vec![Lit::Unit],
            _ => return None,
        };
        domains.push((x.clone(), d));
    }
    let total: usize = domains.iter().map(|(_, d)| d.len()).product();
    if total > MAX_MODELS {
        return None;
    }
    let mut ix = vec![0usize; domains.len()];
    for _ in 0..total {
        let asg: Vec<(Name, Term)> = domains.iter().zip(&ix).map(|((x, d), i)| (x.clone(), Term::lit(d[*i]))).collect();
        let hyps_ok = st.hyps.iter().all(|h| eval3(sig, &h.subst_many(&asg)) == Some(true));
        if hyps_ok && eval3(sig, &goal.subst_many(&asg)) == Some(false) {
            return Some(domains.iter().zip(&ix).map(|((x, d), i)| (x.clone(), d[*i])).collect());
        }
        for k in 0..ix.len() {
            ix[k] += 1;
            if ix[k] < domains[k].1.len() {
                break;
            }
            ix[k] = 0;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::parse_term;

    fn v(src: &str) -> Verdict {
        validity(&Signature::new(), &[], &parse_term(src).unwrap())
    }

    #[test]
    fn trivial() {
        assert!(v("True").is_valid());
        assert!(v("(forall x int (eq int (prim + x 0) x))").is_valid());
    }

    #[test]
    fn countermodel_found() {
        match v("(forall x int (eq int x 0))") {
            Verdict::Invalid(_) | Verdict::Unknown(_) => {}
            Verdict::Valid => panic!("must not be valid"),
        }
        let sig = Signature::new();
        let vars = vec![(name("x"), Term::int_ty())];
        let r = validity(&sig, &vars, &parse_term("(eq int x 1)").unwrap());
        assert!(matches!(r, Verdict::Invalid(_)), "{r}");
    }

    #[test]
    fn weakest_precondition_implication() {
        let f = "(forall p (pi _ int (Tot (Type 0))) (implies (app p 1) (app p (prim + 0 1))))";
        assert!(v(f).is_valid());
    }

    #[test]
    fn backchaining_through_hypothesis() {
        let f = "(forall p (pi _ int (Tot (Type 0))) (forall q (pi _ int (Tot (Type 0))) \
                 (implies (and (forall x int (implies (app p x) (app q x))) (app p 3)) (app q 3))))";
        assert!(v(f).is_valid());
    }

    #[test]
    fn split_on_conditional() {
        let f = "(forall b bool (forall p (pi _ int (Tot (Type 0))) \
                 (implies (and (app p 1) (app p 2)) (app p (if b 1 2)))))";
        assert!(v(f).is_valid());
    }

    #[test]
    fn funext_and_rewrite() {
        let f = "(forall w (pi _ (pi _ int (Tot (Type 0))) (Tot (Type 0))) \
                 (implies (forall q (pi _ int (Tot (Type 0))) (eq (Type 0) (app w q) True)) \
                 (eq (Type 0) (app w (lam x int (app (lam y int True) x))) True)))";
        assert!(v(f).is_valid(), "{}", v(f));
    }

    #[test]
    fn unknown_is_not_valid() {
        let f = "(forall p (pi _ int (Tot (Type 0))) (app p 1))";
        assert!(!v(f).is_valid());
    }
}
