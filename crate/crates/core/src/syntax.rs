//! EMF* abstract syntax: terms, types, WPs and formulae share one representation.
//!
//! Terms are immutable and cheaply clonable. Binders are named; substitution is
//! capture avoiding and renames with a deterministic fresh-name supply, so that
//! printed output is reproducible.

use std::collections::HashSet;
use std::fmt;
use std::rc::Rc;

pub type Name = Rc<str>;

pub fn name(s: &str) -> Name {
    Rc::from(s)
}

/// Name of the primitive identity effect.
pub const PURE: &str = "Pure";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Base {
    Unit,
    Bool,
    Int,
}

impl Base {
    pub fn as_str(self) -> &'static str {
        match self {
            Base::Unit => "unit",
            Base::Bool => "bool",
            Base::Int => "int",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Lit {
    Unit,
    Bool(bool),
    Int(i64),
}

impl Lit {
    pub fn base(self) -> Base {
        match self {
            Lit::Unit => Base::Unit,
            Lit::Bool(_) => Base::Bool,
            Lit::Int(_) => Base::Int,
        }
    }
}

/// Constants over base types. `Eq` and `Lt` compare integers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimOp {
    Add,
    Sub,
    Mul,
    Eq,
    Lt,
    And,
    Or,
    Not,
}

impl PrimOp {
    pub fn symbol(self) -> &'static str {
        match self {
            PrimOp::Add => "+",
            PrimOp::Sub => "-",
            PrimOp::Mul => "*",
            PrimOp::Eq => "=",
            PrimOp::Lt => "<",
            PrimOp::And => "&&",
            PrimOp::Or => "||",
            PrimOp::Not => "not",
        }
    }

    pub fn from_symbol(s: &str) -> Option<PrimOp> {
        Some(match s {
            "+" => PrimOp::Add,
            "-" => PrimOp::Sub,
            "*" => PrimOp::Mul,
            "=" => PrimOp::Eq,
            "<" => PrimOp::Lt,
            "&&" => PrimOp::And,
            "||" => PrimOp::Or,
            "not" => PrimOp::Not,
            _ => return None,
        })
    }

    /// Argument and result base types.
    pub fn signature(self) -> (&'static [Base], Base) {
        use Base::*;
        match self {
            PrimOp::Add | PrimOp::Sub | PrimOp::Mul => (&[Int, Int], Int),
            PrimOp::Eq | PrimOp::Lt => (&[Int, Int], Bool),
            PrimOp::And | PrimOp::Or => (&[Bool, Bool], Bool),
            PrimOp::Not => (&[Bool], Bool),
        }
    }
}

/// A field of a signature entry, referenced as `F.field`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    WpType,
    Repr,
    ReturnStar,
    BindStar,
    UnReturn,
    UnBind,
    ActStar(Name),
    UnAct(Name),
    /// `lift*` from the owning effect to the named target.
    LiftStar(Name),
    UnLift(Name),
}

impl Field {
    pub fn label(&self) -> String {
        match self {
            Field::WpType => "wp_type".into(),
            Field::Repr => "repr".into(),
            Field::ReturnStar => "return*".into(),
            Field::BindStar => "bind*".into(),
            Field::UnReturn => "un_return".into(),
            Field::UnBind => "un_bind".into(),
            Field::ActStar(a) => format!("{a}*"),
            Field::UnAct(a) => format!("un_{a}"),
            Field::LiftStar(t) => format!("lift*[{t}]"),
            Field::UnLift(t) => format!("un_lift[{t}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Var(Name),
    Univ(u32),
    Base(Base),
    Lit(Lit),
    Prim(PrimOp, Vec<Term>),
    Const(Name, Field),
    Prod(Term, Term),
    Sum(Term, Term),
    Pair(Term, Term),
    Fst(Term),
    Snd(Term),
    /// `inl v` annotated with the right-hand type.
    Inl(Term, Term),
    /// `inr v` annotated with the left-hand type.
    Inr(Term, Term),
    /// `case_ret (scrut as z) (lx. left) (rx. right)`; `z` is bound in `ret`.
    Case {
        scrut: Term,
        as_name: Name,
        ret: Term,
        lx: Name,
        left: Term,
        rx: Name,
        right: Term,
    },
    If(Term, Term, Term),
    Refine(Name, Term, Term),
    Lam(Name, Term, Term),
    /// Dependent product; the codomain is a computation type (`Tot` or `CompTy`).
    Pi(Name, Term, Term),
    App(Term, Term),
    Run(Term),
    Reify(Term),
    Reflect(Name, Term),
    Return(Name, Term, Term),
    Bind {
        eff: Name,
        t1: Term,
        t2: Term,
        wp1: Term,
        e1: Term,
        wp2: Term,
        x: Name,
        e2: Term,
    },
    Lift {
        from: Name,
        to: Name,
        ty: Term,
        wp: Term,
        e: Term,
    },
    Act {
        eff: Name,
        act: Name,
        args: Vec<Term>,
    },
    Tot(Term),
    CompTy(Name, Term, Term),
    True,
    False,
    /// Squashed equality at the given type.
    Eq(Term, Term, Term),
    Implies(Term, Term),
    And(Term, Term),
    Forall(Name, Term, Term),
}

#[derive(Clone, PartialEq, Eq)]
pub struct Term(Rc<Kind>);

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::sexp(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::print::pretty(self))
    }
}

/// Computation types `Tot t | M t wp`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Comp {
    Tot(Term),
    M(Name, Term, Term),
}

impl Comp {
    pub fn to_term(&self) -> Term {
        match self {
            Comp::Tot(t) => Term::tot(t.clone()),
            Comp::M(m, t, wp) => Term::comp(m, t.clone(), wp.clone()),
        }
    }

    pub fn from_term(t: &Term) -> Option<Comp> {
        match t.kind() {
            Kind::Tot(t) => Some(Comp::Tot(t.clone())),
            Kind::CompTy(m, t, wp) => Some(Comp::M(m.clone(), t.clone(), wp.clone())),
            _ => None,
        }
    }

    pub fn result(&self) -> &Term {
        match self {
            Comp::Tot(t) | Comp::M(_, t, _) => t,
        }
    }

    pub fn is_tot(&self) -> bool {
        matches!(self, Comp::Tot(_))
    }

    pub fn subst(&self, x: &str, v: &Term) -> Comp {
        Comp::from_term(&self.to_term().subst(x, v)).expect("substitution preserves computation types")
    }
}

impl fmt::Display for Comp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_term())
    }
}

// Constructors.
impl Term {
    pub fn new(k: Kind) -> Term {
        Term(Rc::new(k))
    }
    pub fn kind(&self) -> &Kind {
        &self.0
    }
    pub fn ptr_eq(&self, other: &Term) -> bool {
        Rc::ptr_eq(&self.0, &other.0)
    }
    pub fn var(x: &str) -> Term {
        Term::new(Kind::Var(name(x)))
    }
    pub fn var_n(x: &Name) -> Term {
        Term::new(Kind::Var(x.clone()))
    }
    pub fn univ(i: u32) -> Term {
        Term::new(Kind::Univ(i))
    }
    pub fn type0() -> Term {
        Term::univ(0)
    }
    pub fn base(b: Base) -> Term {
        Term::new(Kind::Base(b))
    }
    pub fn int_ty() -> Term {
        Term::base(Base::Int)
    }
    pub fn bool_ty() -> Term {
        Term::base(Base::Bool)
    }
    pub fn unit_ty() -> Term {
        Term::base(Base::Unit)
    }
    pub fn lit(l: Lit) -> Term {
        Term::new(Kind::Lit(l))
    }
    pub fn int(n: i64) -> Term {
        Term::lit(Lit::Int(n))
    }
    pub fn bool(b: bool) -> Term {
        Term::lit(Lit::Bool(b))
    }
    pub fn unit() -> Term {
        Term::lit(Lit::Unit)
    }
    pub fn prim(op: PrimOp, args: Vec<Term>) -> Term {
        Term::new(Kind::Prim(op, args))
    }
    pub fn binop(op: PrimOp, a: Term, b: Term) -> Term {
        Term::prim(op, vec![a, b])
    }
    pub fn cnst(eff: &str, f: Field) -> Term {
        Term::new(Kind::Const(name(eff), f))
    }
    pub fn prod(a: Term, b: Term) -> Term {
        Term::new(Kind::Prod(a, b))
    }
    pub fn sum(a: Term, b: Term) -> Term {
        Term::new(Kind::Sum(a, b))
    }
    pub fn pair(a: Term, b: Term) -> Term {
        Term::new(Kind::Pair(a, b))
    }
    pub fn fst(e: Term) -> Term {
        Term::new(Kind::Fst(e))
    }
    pub fn snd(e: Term) -> Term {
        Term::new(Kind::Snd(e))
    }
    pub fn inl(v: Term, right: Term) -> Term {
        Term::new(Kind::Inl(v, right))
    }
    pub fn inr(left: Term, v: Term) -> Term {
        Term::new(Kind::Inr(left, v))
    }
    #[allow(clippy::too_many_arguments)]
    pub fn case(scrut: Term, as_name: &str, ret: Term, lx: &str, left: Term, rx: &str, right: Term) -> Term {
        Term::new(Kind::Case {
            scrut,
            as_name: name(as_name),
            ret,
            lx: name(lx),
            left,
            rx: name(rx),
            right,
        })
    }
    pub fn ite(c: Term, a: Term, b: Term) -> Term {
        Term::new(Kind::If(c, a, b))
    }
    pub fn refine(x: &str, t: Term, phi: Term) -> Term {
        Term::new(Kind::Refine(name(x), t, phi))
    }
    pub fn lam(x: &str, t: Term, body: Term) -> Term {
        Term::new(Kind::Lam(name(x), t, body))
    }
    /// Dependent product; `cod` must be a computation type term.
    pub fn pi(x: &str, t: Term, cod: Term) -> Term {
        debug_assert!(matches!(cod.kind(), Kind::Tot(_) | Kind::CompTy(..)));
        Term::new(Kind::Pi(name(x), t, cod))
    }
    /// `x:t -> Tot u`.
    pub fn pi_tot(x: &str, t: Term, u: Term) -> Term {
        Term::pi(x, t, Term::tot(u))
    }
    /// Non-dependent total arrow.
    pub fn arrow(t: Term, u: Term) -> Term {
        let x = fresh("_", &|n| u.has_free(n));
        Term::new(Kind::Pi(x, t, Term::tot(u)))
    }
    pub fn app(f: Term, a: Term) -> Term {
        Term::new(Kind::App(f, a))
    }
    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }
    pub fn run(e: Term) -> Term {
        Term::new(Kind::Run(e))
    }
    pub fn reify(e: Term) -> Term {
        Term::new(Kind::Reify(e))
    }
    pub fn reflect(eff: &str, e: Term) -> Term {
        Term::new(Kind::Reflect(name(eff), e))
    }
    pub fn ret(eff: &str, t: Term, e: Term) -> Term {
        Term::new(Kind::Return(name(eff), t, e))
    }
    #[allow(clippy::too_many_arguments)]
    pub fn bind(eff: &str, t1: Term, t2: Term, wp1: Term, e1: Term, wp2: Term, x: &str, e2: Term) -> Term {
        Term::new(Kind::Bind {
            eff: name(eff),
            t1,
            t2,
            wp1,
            e1,
            wp2,
            x: name(x),
            e2,
        })
    }
    pub fn lift(from: &str, to: &str, ty: Term, wp: Term, e: Term) -> Term {
        Term::new(Kind::Lift {
            from: name(from),
            to: name(to),
            ty,
            wp,
            e,
        })
    }
    pub fn act(eff: &str, act: &str, args: Vec<Term>) -> Term {
        Term::new(Kind::Act {
            eff: name(eff),
            act: name(act),
            args,
        })
    }
    pub fn tot(t: Term) -> Term {
        Term::new(Kind::Tot(t))
    }
    pub fn comp(eff: &str, t: Term, wp: Term) -> Term {
        Term::new(Kind::CompTy(name(eff), t, wp))
    }
    pub fn tt() -> Term {
        Term::new(Kind::True)
    }
    pub fn ff() -> Term {
        Term::new(Kind::False)
    }
    pub fn eq(ty: Term, a: Term, b: Term) -> Term {
        Term::new(Kind::Eq(ty, a, b))
    }
    pub fn implies(a: Term, b: Term) -> Term {
        Term::new(Kind::Implies(a, b))
    }
    pub fn and(a: Term, b: Term) -> Term {
        Term::new(Kind::And(a, b))
    }
    /// Right-nested conjunction; `True` when empty.
    pub fn ands(items: Vec<Term>) -> Term {
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Term::tt(),
            Some(last) => it.fold(last, |acc, t| Term::and(t, acc)),
        }
    }
    pub fn forall(x: &str, t: Term, body: Term) -> Term {
        Term::new(Kind::Forall(name(x), t, body))
    }
}

// Queries.
impl Term {
    pub fn as_var(&self) -> Option<&Name> {
        match self.kind() {
            Kind::Var(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_lit(&self) -> Option<Lit> {
        match self.kind() {
            Kind::Lit(l) => Some(*l),
            _ => None,
        }
    }

    /// Splits an application spine into head and arguments.
    pub fn spine(&self) -> (Term, Vec<Term>) {
        let mut args = Vec::new();
        let mut head = self.clone();
        while let Kind::App(f, a) = head.kind() {
            args.push(a.clone());
            let f = f.clone();
            head = f;
        }
        args.reverse();
        (head, args)
    }

    pub fn size(&self) -> usize {
        1 + self.slots().iter().map(|(_, t)| t.size()).sum::<usize>()
    }
}

/// A child of a node together with the binder that scopes over it.
pub type Slot = (Option<Name>, Term);

impl Term {
    /// Children in left-to-right order, each with the binder (if any) in scope.
    pub fn slots(&self) -> Vec<Slot> {
        use Kind::*;
        let n = |t: &Term| (None, t.clone());
        let b = |x: &Name, t: &Term| (Some(x.clone()), t.clone());
        match self.kind() {
            Var(_) | Univ(_) | Base(_) | Lit(_) | Const(..) | True | False => vec![],
            Prim(_, args) => args.iter().map(n).collect(),
            Prod(a, c) | Sum(a, c) | Pair(a, c) | Inl(a, c) | Inr(a, c) | App(a, c) | Implies(a, c) | And(a, c) => {
                vec![n(a), n(c)]
            }
            Fst(e) | Snd(e) | Run(e) | Reify(e) | Reflect(_, e) | Tot(e) => vec![n(e)],
            Case {
                scrut,
                as_name,
                ret,
                lx,
                left,
                rx,
                right,
            } => vec![n(scrut), b(as_name, ret), b(lx, left), b(rx, right)],
            If(c, a, e) => vec![n(c), n(a), n(e)],
            Refine(x, t, p) | Lam(x, t, p) | Pi(x, t, p) | Forall(x, t, p) => vec![n(t), b(x, p)],
            Return(_, t, e) => vec![n(t), n(e)],
            Bind {
                t1,
                t2,
                wp1,
                e1,
                wp2,
                x,
                e2,
                ..
            } => vec![n(t1), n(t2), n(wp1), n(e1), n(wp2), b(x, e2)],
            Lift { ty, wp, e, .. } => vec![n(ty), n(wp), n(e)],
            Act { args, .. } => args.iter().map(n).collect(),
            CompTy(_, t, wp) => vec![n(t), n(wp)],
            Eq(t, a, c) => vec![n(t), n(a), n(c)],
        }
    }

    /// Rebuilds this node from new slots, in the order returned by [`Term::slots`].
    pub fn with_slots(&self, slots: Vec<Slot>) -> Term {
        use Kind::*;
        let mut it = slots.into_iter();
        let mut next = || it.next().expect("slot count mismatch");
        let k = match self.kind() {
            Var(_) | Univ(_) | Base(_) | Lit(_) | Const(..) | True | False => return self.clone(),
            Prim(op, args) => Prim(*op, args.iter().map(|_| next().1).collect()),
            Prod(..) => Prod(next().1, next().1),
            Sum(..) => Sum(next().1, next().1),
            Pair(..) => Pair(next().1, next().1),
            Inl(..) => Inl(next().1, next().1),
            Inr(..) => Inr(next().1, next().1),
            App(..) => App(next().1, next().1),
            Implies(..) => Implies(next().1, next().1),
            And(..) => And(next().1, next().1),
            Fst(_) => Fst(next().1),
            Snd(_) => Snd(next().1),
            Run(_) => Run(next().1),
            Reify(_) => Reify(next().1),
            Reflect(f, _) => Reflect(f.clone(), next().1),
            Tot(_) => Tot(next().1),
            Case { .. } => {
                let scrut = next().1;
                let (z, ret) = next();
                let (lx, left) = next();
                let (rx, right) = next();
                Case {
                    scrut,
                    as_name: z.unwrap(),
                    ret,
                    lx: lx.unwrap(),
                    left,
                    rx: rx.unwrap(),
                    right,
                }
            }
            If(..) => If(next().1, next().1, next().1),
            Refine(..) | Lam(..) | Pi(..) | Forall(..) => {
                let t = next().1;
                let (x, body) = next();
                let x = x.unwrap();
                match self.kind() {
                    Refine(..) => Refine(x, t, body),
                    Lam(..) => Lam(x, t, body),
                    Pi(..) => Pi(x, t, body),
                    _ => Forall(x, t, body),
                }
            }
            Return(m, _, _) => Return(m.clone(), next().1, next().1),
            Bind { eff, .. } => {
                let t1 = next().1;
                let t2 = next().1;
                let wp1 = next().1;
                let e1 = next().1;
                let wp2 = next().1;
                let (x, e2) = next();
                Bind {
                    eff: eff.clone(),
                    t1,
                    t2,
                    wp1,
                    e1,
                    wp2,
                    x: x.unwrap(),
                    e2,
                }
            }
            Lift { from, to, .. } => Lift {
                from: from.clone(),
                to: to.clone(),
                ty: next().1,
                wp: next().1,
                e: next().1,
            },
            Act { eff, act, args } => Act {
                eff: eff.clone(),
                act: act.clone(),
                args: args.iter().map(|_| next().1).collect(),
            },
            CompTy(m, _, _) => CompTy(m.clone(), next().1, next().1),
            Eq(..) => Eq(next().1, next().1, next().1),
        };
        Term::new(k)
    }

    /// Applies `f` to every child, keeping binders.
    pub fn map_children(&self, mut f: impl FnMut(&Term) -> Term) -> Term {
        let slots = self.slots();
        if slots.is_empty() {
            return self.clone();
        }
        let new: Vec<Slot> = slots.into_iter().map(|(b, t)| (b, f(&t))).collect();
        self.with_slots(new)
    }
}

// Binding structure.
impl Term {
    pub fn free_vars(&self) -> HashSet<Name> {
        let mut out = HashSet::new();
        let mut bound = Vec::new();
        collect_fv(self, &mut bound, &mut out);
        out
    }

    pub fn has_free(&self, x: &str) -> bool {
        match self.kind() {
            Kind::Var(y) => &**y == x,
            _ => self.slots().iter().any(|(b, t)| b.as_deref() != Some(x) && t.has_free(x)),
        }
    }

    /// Every name occurring in the term, bound or free.
    pub fn all_names(&self, out: &mut HashSet<Name>) {
        match self.kind() {
            Kind::Var(y) => {
                out.insert(y.clone());
            }
            _ => {
                for (b, t) in self.slots() {
                    if let Some(b) = b {
                        out.insert(b);
                    }
                    t.all_names(out);
                }
            }
        }
    }

    /// Capture-avoiding substitution `self[v/x]`.
    pub fn subst(&self, x: &str, v: &Term) -> Term {
        if !self.has_free(x) {
            return self.clone();
        }
        let fv = v.free_vars();
        subst_go(self, &[(name(x), v.clone())], &fv)
    }

    /// Simultaneous capture-avoiding substitution.
    pub fn subst_many(&self, pairs: &[(Name, Term)]) -> Term {
        if pairs.is_empty() {
            return self.clone();
        }
        let mut fv = HashSet::new();
        for (_, v) in pairs {
            fv.extend(v.free_vars());
        }
        subst_go(self, pairs, &fv)
    }

    /// Renames the free occurrences of `x` to `y`.
    pub fn rename(&self, x: &str, y: &str) -> Term {
        self.subst(x, &Term::var(y))
    }

    pub fn alpha_eq(&self, other: &Term) -> bool {
        alpha_go(self, other, &mut Vec::new())
    }
}

fn collect_fv(t: &Term, bound: &mut Vec<Name>, out: &mut HashSet<Name>) {
    match t.kind() {
        Kind::Var(x) => {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
        }
        _ => {
            for (b, c) in t.slots() {
                match b {
                    Some(b) => {
                        bound.push(b);
                        collect_fv(&c, bound, out);
                        bound.pop();
                    }
                    None => collect_fv(&c, bound, out),
                }
            }
        }
    }
}

fn subst_go(t: &Term, pairs: &[(Name, Term)], fv: &HashSet<Name>) -> Term {
    match t.kind() {
        Kind::Var(y) => {
            for (x, v) in pairs {
                if x == y {
                    return v.clone();
                }
            }
            t.clone()
        }
        _ => {
            let slots = t.slots();
            let mut new = Vec::with_capacity(slots.len());
            for (b, c) in slots {
                match b {
                    None => new.push((None, subst_go(&c, pairs, fv))),
                    Some(b) => {
                        let live: Vec<(Name, Term)> = pairs.iter().filter(|(x, _)| *x != b).cloned().collect();
                        if live.is_empty() {
                            new.push((Some(b), c));
                            continue;
                        }
                        if fv.contains(&b) && live.iter().any(|(x, _)| c.has_free(x)) {
                            let body_fv = c.free_vars();
                            let b2 = fresh(&b, &|n| {
                                fv.contains(n) || body_fv.contains(n) || live.iter().any(|(x, _)| &**x == n)
                            });
                            let c2 = subst_go(&c, &[(b.clone(), Term::var_n(&b2))], &HashSet::from([b2.clone()]));
                            new.push((Some(b2), subst_go(&c2, &live, fv)));
                        } else {
                            new.push((Some(b), subst_go(&c, &live, fv)));
                        }
                    }
                }
            }
            t.with_slots(new)
        }
    }
}

fn alpha_go(a: &Term, b: &Term, env: &mut Vec<(Name, Name)>) -> bool {
    if env.is_empty() && a.ptr_eq(b) {
        return true;
    }
    use Kind::*;
    match (a.kind(), b.kind()) {
        (Var(x), Var(y)) => {
            for (l, r) in env.iter().rev() {
                if l == x || r == y {
                    return l == x && r == y;
                }
            }
            x == y
        }
        (Univ(i), Univ(j)) => i == j,
        (Base(p), Base(q)) => p == q,
        (Lit(p), Lit(q)) => p == q,
        (Const(e1, f1), Const(e2, f2)) => e1 == e2 && f1 == f2,
        (True, True) | (False, False) => true,
        (Prim(o1, a1), Prim(o2, a2)) if o1 != o2 || a1.len() != a2.len() => false,
        (Reflect(f1, _), Reflect(f2, _)) if f1 != f2 => false,
        (Return(m1, ..), Return(m2, ..)) if m1 != m2 => false,
        (Bind { eff: m1, .. }, Bind { eff: m2, .. }) if m1 != m2 => false,
        (Lift { from: f1, to: t1, .. }, Lift { from: f2, to: t2, .. }) if f1 != f2 || t1 != t2 => false,
        (Act { eff: e1, act: a1, args: x1 }, Act { eff: e2, act: a2, args: x2 })
            if e1 != e2 || a1 != a2 || x1.len() != x2.len() =>
        {
            false
        }
        (CompTy(m1, ..), CompTy(m2, ..)) if m1 != m2 => false,
        _ => {
            if std::mem::discriminant(a.kind()) != std::mem::discriminant(b.kind()) {
                return false;
            }
            let sa = a.slots();
            let sb = b.slots();
            if sa.len() != sb.len() {
                return false;
            }
            for ((ba, ca), (bb, cb)) in sa.iter().zip(sb.iter()) {
                let ok = match (ba, bb) {
                    (Some(x), Some(y)) => {
                        env.push((x.clone(), y.clone()));
                        let r = alpha_go(ca, cb, env);
                        env.pop();
                        r
                    }
                    (None, None) => alpha_go(ca, cb, env),
                    _ => false,
                };
                if !ok {
                    return false;
                }
            }
            true
        }
    }
}

/// Deterministic fresh-name supply: `base`, `base1`, `base2`, ... skipping
/// every name for which `taken` holds. Trailing digits of `base` are dropped
/// first so that repeated freshening does not grow names.
pub fn fresh(base: &str, taken: &dyn Fn(&str) -> bool) -> Name {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { "x" } else { stem };
    if !taken(base) {
        return name(base);
    }
    if stem != base && !taken(stem) {
        return name(stem);
    }
    let mut i = 1usize;
    loop {
        let cand = format!("{stem}{i}");
        if !taken(&cand) {
            return name(&cand);
        }
        i += 1;
    }
}

/// Fresh name avoiding all names of the given terms.
pub fn fresh_for(base: &str, terms: &[&Term]) -> Name {
    let mut used = HashSet::new();
    for t in terms {
        t.all_names(&mut used);
    }
    fresh(base, &|n| used.contains(n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(x: &str, b: Term) -> Term {
        Term::lam(x, Term::int_ty(), b)
    }

    #[test]
    fn subst_under_unrelated_binder() {
        let t = lam("y", Term::var("x"));
        assert!(t.subst("x", &Term::int(1)).alpha_eq(&lam("y", Term::int(1))));
    }

    #[test]
    fn subst_respects_shadowing() {
        let t = lam("x", Term::var("x"));
        assert_eq!(t.subst("x", &Term::int(1)), t);
    }

    #[test]
    fn subst_avoids_capture() {
        let t = lam("y", Term::app(Term::var("x"), Term::var("y")));
        let r = t.subst("x", &Term::var("y"));
        let expect = lam("y1", Term::app(Term::var("y"), Term::var("y1")));
        assert!(r.alpha_eq(&expect));
        assert_eq!(r, expect, "fresh name is deterministic");
    }

    #[test]
    fn alpha_basics() {
        assert!(lam("x", Term::var("x")).alpha_eq(&lam("y", Term::var("y"))));
        let k1 = lam("x", lam("y", Term::var("x")));
        let k2 = lam("a", lam("b", Term::var("b")));
        assert!(!k1.alpha_eq(&k2));
        let r = Term::ret(PURE, Term::int_ty(), Term::int(3));
        assert!(r.alpha_eq(&r.clone()));
    }

    #[test]
    fn alpha_distinguishes_free_from_bound() {
        let a = lam("x", Term::var("y"));
        let b = lam("y", Term::var("y"));
        assert!(!a.alpha_eq(&b));
    }

    #[test]
    fn case_binders_scope_over_their_branch_only() {
        let t = Term::case(
            Term::var("s"),
            "z",
            Term::tot(Term::int_ty()),
            "x",
            Term::var("x"),
            "y",
            Term::var("x"),
        );
        let fv = t.free_vars();
        assert!(fv.contains("s") && fv.contains("x"));
        assert!(!fv.contains("y"));
    }

    #[test]
    fn fresh_is_deterministic() {
        let taken = |n: &str| n == "x" || n == "x1";
        assert_eq!(&*fresh("x", &taken), "x2");
        assert_eq!(&*fresh("x1", &|n| n == "x1"), "x");
    }
}
