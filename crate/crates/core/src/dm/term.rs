//! DM terms in explicit form.

use std::collections::HashSet;
use std::fmt;

use super::types::DmType;
use crate::syntax::{fresh, Lit, Name, PrimOp};

#[derive(Clone, Debug, PartialEq)]
pub enum DmTerm {
    Var(Name),
    Lit(Lit),
    Op(PrimOp, Vec<DmTerm>),
    If(Box<DmTerm>, Box<DmTerm>, Box<DmTerm>),
    Lam(Name, DmType, Box<DmTerm>),
    App(Box<DmTerm>, Box<DmTerm>),
    Pair(Box<DmTerm>, Box<DmTerm>),
    Fst(Box<DmTerm>),
    Snd(Box<DmTerm>),
    /// Left injection with the type of the right summand.
    Inl(Box<DmTerm>, DmType),
    /// Right injection with the type of the left summand.
    Inr(DmType, Box<DmTerm>),
    Case(Box<DmTerm>, Name, Box<DmTerm>, Name, Box<DmTerm>),
    Return(Box<DmTerm>),
    Bind(Box<DmTerm>, Name, Box<DmTerm>),
}

use DmTerm::*;

impl DmTerm {
    pub fn var(x: &str) -> DmTerm {
        Var(crate::syntax::name(x))
    }
    pub fn lam(x: &str, t: DmType, b: DmTerm) -> DmTerm {
        Lam(crate::syntax::name(x), t, Box::new(b))
    }
    pub fn app(f: DmTerm, a: DmTerm) -> DmTerm {
        App(Box::new(f), Box::new(a))
    }
    pub fn apps(f: DmTerm, args: impl IntoIterator<Item = DmTerm>) -> DmTerm {
        args.into_iter().fold(f, DmTerm::app)
    }
    pub fn pair(a: DmTerm, b: DmTerm) -> DmTerm {
        Pair(Box::new(a), Box::new(b))
    }
    pub fn fst(e: DmTerm) -> DmTerm {
        Fst(Box::new(e))
    }
    pub fn snd(e: DmTerm) -> DmTerm {
        Snd(Box::new(e))
    }
    pub fn ret(e: DmTerm) -> DmTerm {
        Return(Box::new(e))
    }
    pub fn bind(e1: DmTerm, x: &str, e2: DmTerm) -> DmTerm {
        Bind(Box::new(e1), crate::syntax::name(x), Box::new(e2))
    }
    pub fn case(e: DmTerm, x: &str, l: DmTerm, y: &str, r: DmTerm) -> DmTerm {
        Case(
            Box::new(e),
            crate::syntax::name(x),
            Box::new(l),
            crate::syntax::name(y),
            Box::new(r),
        )
    }
    pub fn int(n: i64) -> DmTerm {
        Lit(crate::syntax::Lit::Int(n))
    }
    pub fn unit() -> DmTerm {
        Lit(crate::syntax::Lit::Unit)
    }

    /// Children with the variable each one binds, if any.
    pub fn children(&self) -> Vec<(Option<&Name>, &DmTerm)> {
        match self {
            Var(_) | Lit(_) => vec![],
            Op(_, args) => args.iter().map(|a| (None, a)).collect(),
            If(c, a, b) => vec![(None, &**c), (None, &**a), (None, &**b)],
            Lam(x, _, b) => vec![(Some(x), &**b)],
            App(a, b) | Pair(a, b) => vec![(None, &**a), (None, &**b)],
            Fst(e) | Snd(e) | Inl(e, _) | Inr(_, e) | Return(e) => vec![(None, &**e)],
            Case(e, x, l, y, r) => vec![(None, &**e), (Some(x), &**l), (Some(y), &**r)],
            Bind(e1, x, e2) => vec![(None, &**e1), (Some(x), &**e2)],
        }
    }

    pub fn free_vars(&self) -> HashSet<Name> {
        let mut out = HashSet::new();
        self.fv(&mut Vec::new(), &mut out);
        out
    }

    fn fv(&self, bound: &mut Vec<Name>, out: &mut HashSet<Name>) {
        if let Var(x) = self {
            if !bound.contains(x) {
                out.insert(x.clone());
            }
            return;
        }
        for (b, c) in self.children() {
            if let Some(x) = b {
                bound.push(x.clone());
                c.fv(bound, out);
                bound.pop();
            } else {
                c.fv(bound, out);
            }
        }
    }

    pub fn all_names(&self, out: &mut HashSet<Name>) {
        if let Var(x) = self {
            out.insert(x.clone());
        }
        for (b, c) in self.children() {
            if let Some(x) = b {
                out.insert(x.clone());
            }
            c.all_names(out);
        }
    }

    /// Capture-avoiding substitution.
    pub fn subst(&self, x: &str, v: &DmTerm) -> DmTerm {
        let fv = v.free_vars();
        self.subst_fv(x, v, &fv)
    }

    fn subst_fv(&self, x: &str, v: &DmTerm, fv: &HashSet<Name>) -> DmTerm {
        let under = |y: &Name, body: &DmTerm| -> (Name, DmTerm) {
            if &**y == x {
                return (y.clone(), body.clone());
            }
            if fv.contains(y) {
                let mut used = fv.clone();
                body.all_names(&mut used);
                used.insert(crate::syntax::name(x));
                let z = fresh(y, &|n| used.contains(n));
                let body = body.subst(y, &Var(z.clone()));
                (z, body.subst_fv(x, v, fv))
            } else {
                (y.clone(), body.subst_fv(x, v, fv))
            }
        };
        let go = |e: &DmTerm| Box::new(e.subst_fv(x, v, fv));
        match self {
            Var(y) if &**y == x => v.clone(),
            Var(_) | Lit(_) => self.clone(),
            Op(op, args) => Op(*op, args.iter().map(|a| a.subst_fv(x, v, fv)).collect()),
            If(c, a, b) => If(go(c), go(a), go(b)),
            Lam(y, t, b) => {
                let (y2, b2) = under(y, b);
                Lam(y2, t.clone(), Box::new(b2))
            }
            App(a, b) => App(go(a), go(b)),
            Pair(a, b) => Pair(go(a), go(b)),
            Fst(e) => Fst(go(e)),
            Snd(e) => Snd(go(e)),
            Inl(e, t) => Inl(go(e), t.clone()),
            Inr(t, e) => Inr(t.clone(), go(e)),
            Return(e) => Return(go(e)),
            Case(e, y, l, z, r) => {
                let (y2, l2) = under(y, l);
                let (z2, r2) = under(z, r);
                Case(go(e), y2, Box::new(l2), z2, Box::new(r2))
            }
            Bind(e1, y, e2) => {
                let (y2, e22) = under(y, e2);
                Bind(go(e1), y2, Box::new(e22))
            }
        }
    }

    /// Renames every binder through `gen`.
    pub fn refresh_binders(&self, gen: &mut dyn FnMut(&Name) -> Name) -> DmTerm {
        let under = |y: &Name, body: &DmTerm, gen: &mut dyn FnMut(&Name) -> Name| {
            let z = gen(y);
            (z.clone(), body.subst(y, &Var(z)).refresh_binders(gen))
        };
        match self {
            Var(_) | Lit(_) => self.clone(),
            Op(op, args) => Op(*op, args.iter().map(|a| a.refresh_binders(gen)).collect()),
            If(c, a, b) => If(
                Box::new(c.refresh_binders(gen)),
                Box::new(a.refresh_binders(gen)),
                Box::new(b.refresh_binders(gen)),
            ),
            Lam(y, t, b) => {
                let (z, b) = under(y, b, gen);
                Lam(z, t.clone(), Box::new(b))
            }
            App(a, b) => DmTerm::app(a.refresh_binders(gen), b.refresh_binders(gen)),
            Pair(a, b) => DmTerm::pair(a.refresh_binders(gen), b.refresh_binders(gen)),
            Fst(e) => DmTerm::fst(e.refresh_binders(gen)),
            Snd(e) => DmTerm::snd(e.refresh_binders(gen)),
            Inl(e, t) => Inl(Box::new(e.refresh_binders(gen)), t.clone()),
            Inr(t, e) => Inr(t.clone(), Box::new(e.refresh_binders(gen))),
            Return(e) => DmTerm::ret(e.refresh_binders(gen)),
            Case(e, x, l, y, r) => {
                let e = e.refresh_binders(gen);
                let (x, l) = under(x, l, gen);
                let (y, r) = under(y, r, gen);
                Case(Box::new(e), x, Box::new(l), y, Box::new(r))
            }
            Bind(e1, x, e2) => {
                let e1 = e1.refresh_binders(gen);
                let (x, e2) = under(x, e2, gen);
                Bind(Box::new(e1), x, Box::new(e2))
            }
        }
    }

    /// Contains no `return` or `bind`.
    pub fn is_tau_free(&self) -> bool {
        !matches!(self, Return(_) | Bind(..)) && self.children().iter().all(|(_, c)| c.is_tau_free())
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|(_, c)| c.size()).sum::<usize>()
    }

    /// Fully parenthesized dump.
    pub fn sexp(&self) -> String {
        match self {
            Var(x) => x.to_string(),
            Lit(l) => crate::print::sexp(&crate::syntax::Term::lit(*l)),
            Op(op, args) => {
                let a: Vec<String> = args.iter().map(|a| a.sexp()).collect();
                format!("({} {})", op.symbol(), a.join(" "))
            }
            If(c, a, b) => format!("(if {} {} {})", c.sexp(), a.sexp(), b.sexp()),
            Lam(x, t, b) => format!("(fun {x} \"{t}\" {})", b.sexp()),
            App(a, b) => format!("(app {} {})", a.sexp(), b.sexp()),
            Pair(a, b) => format!("(pair {} {})", a.sexp(), b.sexp()),
            Fst(e) => format!("(fst {})", e.sexp()),
            Snd(e) => format!("(snd {})", e.sexp()),
            Inl(e, t) => format!("(inl {} \"{t}\")", e.sexp()),
            Inr(t, e) => format!("(inr \"{t}\" {})", e.sexp()),
            Case(e, x, l, y, r) => format!("(case {} ({x} {}) ({y} {}))", e.sexp(), l.sexp(), r.sexp()),
            Return(e) => format!("(return {})", e.sexp()),
            Bind(e1, x, e2) => format!("(bind {} {x} {})", e1.sexp(), e2.sexp()),
        }
    }
}

impl fmt::Display for DmTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atom(e: &DmTerm) -> bool {
            matches!(e, Var(_) | Lit(_) | Pair(..))
        }
        fn arg(e: &DmTerm, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if atom(e) {
                write!(f, "{e}")
            } else {
                write!(f, "({e})")
            }
        }
        match self {
            Var(x) => write!(f, "{x}"),
            Lit(l) => write!(f, "{}", crate::syntax::Term::lit(*l)),
            Op(op, args) if args.len() == 2 => {
                arg(&args[0], f)?;
                write!(f, " {} ", op.symbol())?;
                arg(&args[1], f)
            }
            Op(op, args) => {
                write!(f, "{}", op.symbol())?;
                for a in args {
                    f.write_str(" ")?;
                    arg(a, f)?;
                }
                Ok(())
            }
            If(c, a, b) => write!(f, "if {c} then {a} else {b}"),
            Lam(x, t, b) => write!(f, "fun ({x}:{t}) -> {b}"),
            App(a, b) => {
                if matches!(**a, App(..)) || atom(a) {
                    write!(f, "{a}")?;
                } else {
                    write!(f, "({a})")?;
                }
                f.write_str(" ")?;
                arg(b, f)
            }
            Pair(a, b) => write!(f, "({a}, {b})"),
            Fst(e) => {
                f.write_str("fst ")?;
                arg(e, f)
            }
            Snd(e) => {
                f.write_str("snd ")?;
                arg(e, f)
            }
            Inl(e, _) => {
                f.write_str("inl ")?;
                arg(e, f)
            }
            Inr(_, e) => {
                f.write_str("inr ")?;
                arg(e, f)
            }
            Case(e, x, l, y, r) => write!(f, "match {e} with | inl {x} -> {l} | inr {y} -> {r}"),
            Return(e) => {
                f.write_str("return ")?;
                arg(e, f)
            }
            Bind(e1, x, e2) => write!(f, "bind {x} = {e1} in {e2}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_avoids_capture() {
        let e = DmTerm::lam("y", DmType::int(), DmTerm::app(DmTerm::var("x"), DmTerm::var("y")));
        let r = e.subst("x", &DmTerm::var("y"));
        match &r {
            Lam(z, _, b) => {
                assert_ne!(&**z, "y");
                assert_eq!(**b, DmTerm::app(DmTerm::var("y"), Var(z.clone())));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn shadowing_blocks_substitution() {
        let e = DmTerm::bind(DmTerm::var("x"), "x", DmTerm::var("x"));
        assert_eq!(e.subst("x", &DmTerm::int(1)), DmTerm::bind(DmTerm::int(1), "x", DmTerm::var("x")));
    }

    #[test]
    fn printing() {
        let e = DmTerm::lam(
            "s0",
            DmType::int(),
            DmTerm::ret(DmTerm::pair(DmTerm::var("x"), DmTerm::var("s0"))),
        );
        assert_eq!(e.to_string(), "fun (s0:int) -> return (x, s0)");
    }
}
