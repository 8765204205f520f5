//! Small-step strong reduction with explicit evaluation contexts.
//!
//! The default strategy contracts the leftmost-outermost redex. Annotations
//! (types, WPs, bind continuations) are never reduction positions.

use rand::Rng;
use thiserror::Error;

use crate::print::sexp;
use crate::signature::Signature;
use crate::syntax::{Field, Kind, Name, PrimOp, Term, PURE};

pub const DEFAULT_FUEL: u64 = 100_000;

/// One frame of an evaluation context; the hole is the missing child.
#[derive(Clone, Debug, PartialEq)]
pub enum Frame {
    LamBody { x: Name, ty: Term },
    AppFun { arg: Term },
    AppArg { fun: Term },
    Run,
    Reify,
    Reflect { eff: Name },
    BindArg { eff: Name, t1: Term, t2: Term, wp1: Term, wp2: Term, x: Name, e2: Term },
    ReturnArg { eff: Name, ty: Term },
    LiftArg { from: Name, to: Name, ty: Term, wp: Term },
    ActArg { eff: Name, act: Name, before: Vec<Term>, after: Vec<Term> },
    CaseScrut { as_name: Name, ret: Term, lx: Name, left: Term, rx: Name, right: Term },
    CaseLeft { scrut: Term, as_name: Name, ret: Term, lx: Name, rx: Name, right: Term },
    CaseRight { scrut: Term, as_name: Name, ret: Term, lx: Name, left: Term, rx: Name },
    // Positions below are reconstructed: the calculus leaves them implicit.
    PairL { right: Term },
    PairR { left: Term },
    Fst,
    Snd,
    InlArg { right_ty: Term },
    InrArg { left_ty: Term },
    IfCond { then: Term, els: Term },
    IfThen { cond: Term, els: Term },
    IfElse { cond: Term, then: Term },
    PrimArg { op: PrimOp, before: Vec<Term>, after: Vec<Term> },
}

/// Outermost frame first.
pub type EvalContext = Vec<Frame>;

impl Frame {
    pub fn plug(&self, t: Term) -> Term {
        use Frame::*;
        match self {
            LamBody { x, ty } => Term::new(Kind::Lam(x.clone(), ty.clone(), t)),
            AppFun { arg } => Term::app(t, arg.clone()),
            AppArg { fun } => Term::app(fun.clone(), t),
            Run => Term::run(t),
            Reify => Term::reify(t),
            Reflect { eff } => Term::new(Kind::Reflect(eff.clone(), t)),
            BindArg { eff, t1, t2, wp1, wp2, x, e2 } => Term::new(Kind::Bind {
                eff: eff.clone(),
                t1: t1.clone(),
                t2: t2.clone(),
                wp1: wp1.clone(),
                e1: t,
                wp2: wp2.clone(),
                x: x.clone(),
                e2: e2.clone(),
            }),
            ReturnArg { eff, ty } => Term::new(Kind::Return(eff.clone(), ty.clone(), t)),
            LiftArg { from, to, ty, wp } => Term::new(Kind::Lift {
                from: from.clone(),
                to: to.clone(),
                ty: ty.clone(),
                wp: wp.clone(),
                e: t,
            }),
            ActArg { eff, act, before, after } => {
                let mut args = before.clone();
                args.push(t);
                args.extend(after.iter().cloned());
                Term::new(Kind::Act {
                    eff: eff.clone(),
                    act: act.clone(),
                    args,
                })
            }
            CaseScrut { as_name, ret, lx, left, rx, right } => Term::new(Kind::Case {
                scrut: t,
                as_name: as_name.clone(),
                ret: ret.clone(),
                lx: lx.clone(),
                left: left.clone(),
                rx: rx.clone(),
                right: right.clone(),
            }),
            CaseLeft { scrut, as_name, ret, lx, rx, right } => Term::new(Kind::Case {
                scrut: scrut.clone(),
                as_name: as_name.clone(),
                ret: ret.clone(),
                lx: lx.clone(),
                left: t,
                rx: rx.clone(),
                right: right.clone(),
            }),
            CaseRight { scrut, as_name, ret, lx, left, rx } => Term::new(Kind::Case {
                scrut: scrut.clone(),
                as_name: as_name.clone(),
                ret: ret.clone(),
                lx: lx.clone(),
                left: left.clone(),
                rx: rx.clone(),
                right: t,
            }),
            PairL { right } => Term::pair(t, right.clone()),
            PairR { left } => Term::pair(left.clone(), t),
            Fst => Term::fst(t),
            Snd => Term::snd(t),
            InlArg { right_ty } => Term::inl(t, right_ty.clone()),
            InrArg { left_ty } => Term::inr(left_ty.clone(), t),
            IfCond { then, els } => Term::ite(t, then.clone(), els.clone()),
            IfThen { cond, els } => Term::ite(cond.clone(), t, els.clone()),
            IfElse { cond, then } => Term::ite(cond.clone(), then.clone(), t),
            PrimArg { op, before, after } => {
                let mut args = before.clone();
                args.push(t);
                args.extend(after.iter().cloned());
                Term::prim(*op, args)
            }
        }
    }

    /// True for frames the calculus itself defines.
    pub fn is_reconstructed(&self) -> bool {
        use Frame::*;
        matches!(
            self,
            PairL { .. } | PairR { .. } | Fst | Snd | InlArg { .. } | InrArg { .. } | IfCond { .. } | IfThen { .. } | IfElse { .. } | PrimArg { .. }
        )
    }
}

pub fn plug(ctx: &[Frame], t: Term) -> Term {
    ctx.iter().rev().fold(t, |acc, f| f.plug(acc))
}

/// Immediate reduction positions of `t`, left to right.
pub fn children(t: &Term) -> Vec<(Frame, Term)> {
    use Kind::*;
    match t.kind() {
        Lam(x, ty, b) => vec![(Frame::LamBody { x: x.clone(), ty: ty.clone() }, b.clone())],
        App(f, a) => vec![
            (Frame::AppFun { arg: a.clone() }, f.clone()),
            (Frame::AppArg { fun: f.clone() }, a.clone()),
        ],
        Run(e) => vec![(Frame::Run, e.clone())],
        Reify(e) => vec![(Frame::Reify, e.clone())],
        Reflect(m, e) => vec![(Frame::Reflect { eff: m.clone() }, e.clone())],
        Bind { eff, t1, t2, wp1, e1, wp2, x, e2 } => vec![(
            Frame::BindArg {
                eff: eff.clone(),
                t1: t1.clone(),
                t2: t2.clone(),
                wp1: wp1.clone(),
                wp2: wp2.clone(),
                x: x.clone(),
                e2: e2.clone(),
            },
            e1.clone(),
        )],
        Return(m, ty, e) => vec![(Frame::ReturnArg { eff: m.clone(), ty: ty.clone() }, e.clone())],
        Lift { from, to, ty, wp, e } => vec![(
            Frame::LiftArg {
                from: from.clone(),
                to: to.clone(),
                ty: ty.clone(),
                wp: wp.clone(),
            },
            e.clone(),
        )],
        Act { eff, act, args } => (0..args.len())
            .map(|i| {
                (
                    Frame::ActArg {
                        eff: eff.clone(),
                        act: act.clone(),
                        before: args[..i].to_vec(),
                        after: args[i + 1..].to_vec(),
                    },
                    args[i].clone(),
                )
            })
            .collect(),
        Case { scrut, as_name, ret, lx, left, rx, right } => vec![
            (
                Frame::CaseScrut {
                    as_name: as_name.clone(),
                    ret: ret.clone(),
                    lx: lx.clone(),
                    left: left.clone(),
                    rx: rx.clone(),
                    right: right.clone(),
                },
                scrut.clone(),
            ),
            (
                Frame::CaseLeft {
                    scrut: scrut.clone(),
                    as_name: as_name.clone(),
                    ret: ret.clone(),
                    lx: lx.clone(),
                    rx: rx.clone(),
                    right: right.clone(),
                },
                left.clone(),
            ),
            (
                Frame::CaseRight {
                    scrut: scrut.clone(),
                    as_name: as_name.clone(),
                    ret: ret.clone(),
                    lx: lx.clone(),
                    left: left.clone(),
                    rx: rx.clone(),
                },
                right.clone(),
            ),
        ],
        Pair(a, b) => vec![
            (Frame::PairL { right: b.clone() }, a.clone()),
            (Frame::PairR { left: a.clone() }, b.clone()),
        ],
        Fst(e) => vec![(Frame::Fst, e.clone())],
        Snd(e) => vec![(Frame::Snd, e.clone())],
        Inl(v, r) => vec![(Frame::InlArg { right_ty: r.clone() }, v.clone())],
        Inr(l, v) => vec![(Frame::InrArg { left_ty: l.clone() }, v.clone())],
        If(c, a, b) => vec![
            (Frame::IfCond { then: a.clone(), els: b.clone() }, c.clone()),
            (Frame::IfThen { cond: c.clone(), els: b.clone() }, a.clone()),
            (Frame::IfElse { cond: c.clone(), then: a.clone() }, b.clone()),
        ],
        Prim(op, args) => (0..args.len())
            .map(|i| {
                (
                    Frame::PrimArg {
                        op: *op,
                        before: args[..i].to_vec(),
                        after: args[i + 1..].to_vec(),
                    },
                    args[i].clone(),
                )
            })
            .collect(),
        _ => vec![],
    }
}

/// Every reduction position of `t` in leftmost-outermost order, with its context.
pub fn positions(t: &Term) -> Vec<(EvalContext, Term)> {
    let mut out = Vec::new();
    let mut stack: Vec<(EvalContext, Term)> = vec![(vec![], t.clone())];
    while let Some((ctx, sub)) = stack.pop() {
        let kids = children(&sub);
        out.push((ctx.clone(), sub));
        for (f, c) in kids.into_iter().rev() {
            let mut k = ctx.clone();
            k.push(f);
            stack.push((k, c));
        }
    }
    out
}

/// Contracts `t` if it is a redex; returns the contractum and rule label.
pub fn contract(sig: &Signature, t: &Term) -> Option<(Term, &'static str)> {
    use Kind::*;
    match t.kind() {
        App(f, a) => match f.kind() {
            Lam(x, _, b) => Some((b.subst(x, a), "R-App")),
            _ => None,
        },
        Const(m, f) => sig.lookup(m, f).ok().map(|v| (v, "R-Delta*")),
        Run(e) => match e.kind() {
            Return(m, _, v) if &**m == PURE => Some((v.clone(), "R-Run")),
            _ => None,
        },
        Bind { eff, e1, x, e2, .. } if &**eff == PURE => match e1.kind() {
            Return(m, _, v) if &**m == PURE => Some((e2.subst(x, v), "R-PureBind")),
            _ => None,
        },
        Reify(e) => reify_redex(sig, e),
        Fst(p) => match p.kind() {
            Pair(a, _) => Some((a.clone(), "R-Fst*")),
            _ => None,
        },
        Snd(p) => match p.kind() {
            Pair(_, b) => Some((b.clone(), "R-Snd*")),
            _ => None,
        },
        Case { scrut, lx, left, rx, right, .. } => match scrut.kind() {
            Inl(v, _) => Some((left.subst(lx, v), "R-Case*")),
            Inr(_, v) => Some((right.subst(rx, v), "R-Case*")),
            _ => None,
        },
        If(c, a, b) => match c.kind() {
            Lit(crate::syntax::Lit::Bool(true)) => Some((a.clone(), "R-If*")),
            Lit(crate::syntax::Lit::Bool(false)) => Some((b.clone(), "R-If*")),
            _ => None,
        },
        Prim(op, args) => {
            let lits: Option<Vec<_>> = args.iter().map(|a| a.as_lit()).collect();
            let v = crate::norm::eval_prim(*op, &lits?)?;
            Some((Term::lit(v), "R-Prim*"))
        }
        _ => None,
    }
}

fn reify_redex(sig: &Signature, e: &Term) -> Option<(Term, &'static str)> {
    use Kind::*;
    match e.kind() {
        Return(m, t, v) if &**m != PURE => Some((
            Term::apps(Term::cnst(m, Field::UnReturn), [t.clone(), v.clone()]),
            "R-ReifyRet",
        )),
        Reflect(_, x) => Some((x.clone(), "R-ReifyReflect")),
        Bind { eff, t1, t2, wp1, e1, wp2, x, e2 } if &**eff != PURE => Some((
            Term::apps(
                Term::cnst(eff, Field::UnBind),
                [
                    t1.clone(),
                    t2.clone(),
                    wp1.clone(),
                    Term::reify(e1.clone()),
                    wp2.clone(),
                    Term::new(Kind::Lam(x.clone(), t1.clone(), Term::reify(e2.clone()))),
                ],
            ),
            "R-ReifyBind",
        )),
        Act { eff, act, args } => {
            sig.action(eff, act).ok()?;
            Some((
                Term::apps(Term::cnst(eff, Field::UnAct(act.clone())), args.iter().cloned()),
                "R-ReifyAct",
            ))
        }
        Lift { from, to, ty, wp, e } => Some((
            Term::apps(
                Term::cnst(from, Field::UnLift(to.clone())),
                [ty.clone(), wp.clone(), Term::reify(e.clone())],
            ),
            "R-ReifyLift",
        )),
        _ => None,
    }
}

/// Result of a single step.
#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Next(Term, &'static str),
    Stuck,
}

/// One leftmost-outermost step.
pub fn step(sig: &Signature, e: &Term) -> Step {
    match step_lo(sig, e) {
        Some((t, r)) => Step::Next(t, r),
        None => Step::Stuck,
    }
}

fn step_lo(sig: &Signature, e: &Term) -> Option<(Term, &'static str)> {
    if let Some(r) = contract(sig, e) {
        return Some(r);
    }
    for (frame, child) in children(e) {
        if let Some((c2, rule)) = step_lo(sig, &child) {
            return Some((frame.plug(c2), rule));
        }
    }
    None
}

/// One step at a uniformly chosen redex position.
pub fn step_random<R: Rng>(sig: &Signature, e: &Term, rng: &mut R) -> Step {
    let redexes: Vec<(EvalContext, Term, &'static str)> = positions(e)
        .into_iter()
        .filter_map(|(ctx, sub)| contract(sig, &sub).map(|(c, r)| (ctx, c, r)))
        .collect();
    if redexes.is_empty() {
        return Step::Stuck;
    }
    let (ctx, c, r) = &redexes[rng.gen_range(0..redexes.len())];
    Step::Next(plug(ctx, c.clone()), r)
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("fuel exhausted after {steps} steps")]
pub struct FuelExhausted {
    pub steps: u64,
    pub last: Term,
}

/// Iterates `step` to a normal form.
pub fn normalize(sig: &Signature, e: &Term, fuel: u64) -> Result<Term, FuelExhausted> {
    normalize_traced(sig, e, fuel, |_, _| {})
}

/// Like [`normalize`], calling `on_step` with each rule label and contractum.
pub fn normalize_traced(
    sig: &Signature,
    e: &Term,
    fuel: u64,
    mut on_step: impl FnMut(&'static str, &Term),
) -> Result<Term, FuelExhausted> {
    let mut cur = e.clone();
    for _ in 0..fuel {
        match step(sig, &cur) {
            Step::Next(t, rule) => {
                on_step(rule, &t);
                cur = t;
            }
            Step::Stuck => return Ok(cur),
        }
    }
    match step(sig, &cur) {
        Step::Stuck => Ok(cur),
        Step::Next(..) => Err(FuelExhausted { steps: fuel, last: cur }),
    }
}

/// The trace as one s-expression per step.
pub fn trace_sexp(sig: &Signature, e: &Term, fuel: u64) -> (Vec<String>, Result<Term, FuelExhausted>) {
    let mut lines = Vec::new();
    let r = normalize_traced(sig, e, fuel, |rule, t| {
        lines.push(format!("(step {rule} {})", sexp(t)));
    });
    (lines, r)
}

/// Values: closed normal forms of the value grammar.
pub fn is_value(sig: &Signature, t: &Term) -> bool {
    use Kind::*;
    if !t.free_vars().is_empty() {
        return false;
    }
    match t.kind() {
        Lit(_) | Lam(..) | Univ(_) | Base(_) | Pi(..) | Prod(..) | Sum(..) | Refine(..) => true,
        Pair(a, b) => is_value(sig, a) && is_value(sig, b),
        Inl(v, _) | Inr(_, v) => is_value(sig, v),
        Return(_, _, v) => is_value(sig, v),
        Bind { eff, .. } | Act { eff, .. } | Reflect(eff, _) => &**eff != PURE,
        Lift { from, .. } => &**from != PURE,
        True | False | Eq(..) | Implies(..) | And(..) | Forall(..) => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::parse_term;

    fn sig() -> Signature {
        Signature::new()
    }

    #[test]
    fn beta_step() {
        let e = parse_term("(app (lam x int (prim + x 1)) 2)").unwrap();
        assert_eq!(step(&sig(), &e), Step::Next(parse_term("(prim + 2 1)").unwrap(), "R-App"));
    }

    #[test]
    fn pure_bind_step() {
        let e = parse_term("(bind Pure int int w1 (return Pure int 5) w2 x (prim * x x))").unwrap();
        assert_eq!(step(&sig(), &e), Step::Next(parse_term("(prim * 5 5)").unwrap(), "R-PureBind"));
    }

    #[test]
    fn arithmetic_normalizes() {
        let e = parse_term("(prim + 2 3)").unwrap();
        assert_eq!(normalize(&sig(), &e, 10).unwrap(), Term::int(5));
    }

    #[test]
    fn annotations_do_not_reduce() {
        let e = parse_term("(return Pure (app (lam a (Type 0) a) int) 1)").unwrap();
        assert_eq!(step(&sig(), &e), Step::Stuck);
    }

    #[test]
    fn bind_continuation_is_not_a_position() {
        let e = parse_term("(bind Pure int int w1 e1 w2 x (app (lam y int y) x))").unwrap();
        assert_eq!(step(&sig(), &e), Step::Stuck);
    }

    #[test]
    fn fuel_exhaustion_reports_last_term() {
        let w = "(lam x int (app x x))";
        let e = parse_term(&format!("(app {w} {w})")).unwrap();
        assert!(normalize(&sig(), &e, 50).is_err());
    }

    #[test]
    fn plug_after_decompose_is_identity() {
        let e = parse_term("(app (lam x int (pair x (prim + x 1))) (fst (pair 1 2)))").unwrap();
        for (ctx, sub) in positions(&e) {
            assert_eq!(plug(&ctx, sub), e);
        }
    }
}
