//! Printers for EMF* terms: a readable ML-style form and a fully parenthesized
//! s-expression dump that [`crate::sexp::parse_term`] reads back.

use crate::syntax::{Field, Kind, Term};

/// One-line s-expression with explicit universe levels.
pub fn sexp(t: &Term) -> String {
    let mut out = String::new();
    write_sexp(t, &mut out);
    out
}

fn field_sexp(f: &Field) -> String {
    match f {
        Field::WpType => "wp_type".into(),
        Field::Repr => "repr".into(),
        Field::ReturnStar => "return*".into(),
        Field::BindStar => "bind*".into(),
        Field::UnReturn => "un_return".into(),
        Field::UnBind => "un_bind".into(),
        Field::ActStar(a) => format!("(act* {a})"),
        Field::UnAct(a) => format!("(un_act {a})"),
        Field::LiftStar(t) => format!("(lift* {t})"),
        Field::UnLift(t) => format!("(un_lift {t})"),
    }
}

fn write_sexp(t: &Term, out: &mut String) {
    use Kind::*;
    let list = |head: &str, items: &[&Term], out: &mut String| {
        out.push('(');
        out.push_str(head);
        for i in items {
            out.push(' ');
            write_sexp(i, out);
        }
        out.push(')');
    };
    match t.kind() {
        Var(x) => out.push_str(x),
        Univ(i) => out.push_str(&format!("(Type {i})")),
        Base(b) => out.push_str(b.as_str()),
        Lit(crate::syntax::Lit::Unit) => out.push_str("tt"),
        Lit(crate::syntax::Lit::Bool(b)) => out.push_str(if *b { "true" } else { "false" }),
        Lit(crate::syntax::Lit::Int(n)) => out.push_str(&n.to_string()),
        Prim(op, args) => {
            let items: Vec<&Term> = args.iter().collect();
            list(&format!("prim {}", op.symbol()), &items, out)
        }
        Const(e, f) => out.push_str(&format!("(const {e} {})", field_sexp(f))),
        Prod(a, b) => list("prod", &[a, b], out),
        Sum(a, b) => list("sum", &[a, b], out),
        Pair(a, b) => list("pair", &[a, b], out),
        Fst(e) => list("fst", &[e], out),
        Snd(e) => list("snd", &[e], out),
        Inl(v, r) => list("inl", &[v, r], out),
        Inr(l, v) => list("inr", &[l, v], out),
        Case {
            scrut,
            as_name,
            ret,
            lx,
            left,
            rx,
            right,
        } => {
            out.push_str("(case ");
            write_sexp(scrut, out);
            out.push_str(&format!(" {as_name} "));
            write_sexp(ret, out);
            out.push_str(&format!(" {lx} "));
            write_sexp(left, out);
            out.push_str(&format!(" {rx} "));
            write_sexp(right, out);
            out.push(')');
        }
        If(c, a, b) => list("if", &[c, a, b], out),
        Refine(x, ty, p) => list(&format!("refine {x}"), &[ty, p], out),
        Lam(x, ty, b) => list(&format!("lam {x}"), &[ty, b], out),
        Pi(x, ty, c) => list(&format!("pi {x}"), &[ty, c], out),
        App(f, a) => list("app", &[f, a], out),
        Run(e) => list("run", &[e], out),
        Reify(e) => list("reify", &[e], out),
        Reflect(m, e) => list(&format!("reflect {m}"), &[e], out),
        Return(m, ty, e) => list(&format!("return {m}"), &[ty, e], out),
        Bind {
            eff,
            t1,
            t2,
            wp1,
            e1,
            wp2,
            x,
            e2,
        } => {
            out.push_str(&format!("(bind {eff}"));
            for i in [t1, t2, wp1, e1, wp2] {
                out.push(' ');
                write_sexp(i, out);
            }
            out.push_str(&format!(" {x} "));
            write_sexp(e2, out);
            out.push(')');
        }
        Lift { from, to, ty, wp, e } => list(&format!("lift {from} {to}"), &[ty, wp, e], out),
        Act { eff, act, args } => {
            let items: Vec<&Term> = args.iter().collect();
            list(&format!("act {eff} {act}"), &items, out)
        }
        Tot(ty) => list("Tot", &[ty], out),
        CompTy(m, ty, wp) => list(&format!("M {m}"), &[ty, wp], out),
        True => out.push_str("True"),
        False => out.push_str("False"),
        Eq(ty, a, b) => list("eq", &[ty, a, b], out),
        Implies(a, b) => list("implies", &[a, b], out),
        And(a, b) => list("and", &[a, b], out),
        Forall(x, ty, b) => list(&format!("forall {x}"), &[ty, b], out),
    }
}

/// Readable single-line rendering in an ML-like notation.
pub fn pretty(t: &Term) -> String {
    let mut out = String::new();
    pp(t, Prec::Top, &mut out);
    out
}

#[derive(Clone, Copy, PartialEq, PartialOrd)]
enum Prec {
    Top,
    Arrow,
    Or,
    Cmp,
    Sum,
    Prod,
    Add,
    Mul,
    App,
    Atom,
}

fn paren(out: &mut String, need: bool, f: impl FnOnce(&mut String)) {
    if need {
        out.push('(');
    }
    f(out);
    if need {
        out.push(')');
    }
}

fn pp(t: &Term, ctx: Prec, out: &mut String) {
    use Kind::*;
    match t.kind() {
        Var(x) => out.push_str(x),
        Univ(i) => out.push_str(&format!("Type{i}")),
        Base(b) => out.push_str(b.as_str()),
        Lit(crate::syntax::Lit::Unit) => out.push_str("()"),
        Lit(crate::syntax::Lit::Bool(b)) => out.push_str(if *b { "true" } else { "false" }),
        Lit(crate::syntax::Lit::Int(n)) => {
            paren(out, *n < 0 && ctx >= Prec::App, |o| o.push_str(&n.to_string()));
        }
        Prim(op, args) if args.len() == 2 => {
            let p = match op {
                crate::syntax::PrimOp::Add | crate::syntax::PrimOp::Sub => Prec::Add,
                crate::syntax::PrimOp::Mul => Prec::Mul,
                crate::syntax::PrimOp::And | crate::syntax::PrimOp::Or => Prec::Or,
                _ => Prec::Cmp,
            };
            paren(out, ctx >= p, |o| {
                pp(&args[0], p, o);
                o.push_str(&format!(" {} ", op.symbol()));
                pp(&args[1], p, o);
            });
        }
        Prim(op, args) => paren(out, ctx >= Prec::App, |o| {
            o.push_str(op.symbol());
            for a in args {
                o.push(' ');
                pp(a, Prec::App, o);
            }
        }),
        Const(e, f) => out.push_str(&format!("{e}.{}", f.label())),
        Prod(a, b) => paren(out, ctx >= Prec::Prod, |o| {
            pp(a, Prec::Prod, o);
            o.push_str(" * ");
            pp(b, Prec::Sum, o);
        }),
        Sum(a, b) => paren(out, ctx >= Prec::Sum, |o| {
            pp(a, Prec::Sum, o);
            o.push_str(" + ");
            pp(b, Prec::Cmp, o);
        }),
        Pair(a, b) => {
            out.push('(');
            pp(a, Prec::Top, out);
            out.push_str(", ");
            pp(b, Prec::Top, out);
            out.push(')');
        }
        Fst(e) => unary(out, ctx, "fst", e),
        Snd(e) => unary(out, ctx, "snd", e),
        Inl(v, _) => unary(out, ctx, "inl", v),
        Inr(_, v) => unary(out, ctx, "inr", v),
        Case {
            scrut,
            lx,
            left,
            rx,
            right,
            ..
        } => paren(out, ctx > Prec::Top, |o| {
            o.push_str("match ");
            pp(scrut, Prec::Top, o);
            o.push_str(&format!(" with | inl {lx} -> "));
            pp(left, Prec::Arrow, o);
            o.push_str(&format!(" | inr {rx} -> "));
            pp(right, Prec::Arrow, o);
        }),
        If(c, a, b) => paren(out, ctx > Prec::Top, |o| {
            o.push_str("if ");
            pp(c, Prec::Top, o);
            o.push_str(" then ");
            pp(a, Prec::Top, o);
            o.push_str(" else ");
            pp(b, Prec::Top, o);
        }),
        Refine(x, ty, p) => {
            out.push_str(&format!("{x}:"));
            pp(ty, Prec::Atom, out);
            out.push('{');
            pp(p, Prec::Top, out);
            out.push('}');
        }
        Lam(..) => paren(out, ctx > Prec::Top, |o| {
            o.push_str("fun");
            let mut cur = t.clone();
            while let Lam(x, ty, b) = cur.kind() {
                o.push_str(&format!(" ({x}:"));
                pp(ty, Prec::Top, o);
                o.push(')');
                let b = b.clone();
                cur = b;
            }
            o.push_str(" -> ");
            pp(&cur, Prec::Top, o);
        }),
        Pi(x, ty, c) => paren(out, ctx > Prec::Arrow, |o| {
            if c.has_free(x) {
                o.push_str(&format!("{x}:"));
                pp(ty, Prec::Prod, o);
            } else {
                pp(ty, Prec::Or, o);
            }
            o.push_str(" -> ");
            match c.kind() {
                Tot(r) => pp(r, Prec::Arrow, o),
                _ => pp(c, Prec::Arrow, o),
            }
        }),
        App(..) => paren(out, ctx >= Prec::App, |o| {
            let (h, args) = t.spine();
            pp(&h, Prec::App, o);
            for a in &args {
                o.push(' ');
                pp(a, Prec::App, o);
            }
        }),
        Run(e) => unary(out, ctx, "run", e),
        Reify(e) => unary(out, ctx, "reify", e),
        Reflect(m, e) => unary(out, ctx, &format!("{m}.reflect"), e),
        Return(m, ty, e) => nary(out, ctx, &format!("{m}.return"), &[ty, e]),
        Bind {
            eff,
            t1,
            t2,
            wp1,
            e1,
            wp2,
            x,
            e2,
        } => paren(out, ctx >= Prec::App, |o| {
            o.push_str(&format!("{eff}.bind"));
            for a in [t1, t2, wp1, e1, wp2] {
                o.push(' ');
                pp(a, Prec::App, o);
            }
            o.push_str(&format!(" ({x}. "));
            pp(e2, Prec::Top, o);
            o.push(')');
        }),
        Lift { from, to, ty, wp, e } => nary(out, ctx, &format!("{from}.lift[{to}]"), &[ty, wp, e]),
        Act { eff, act, args } => {
            let items: Vec<&Term> = args.iter().collect();
            nary(out, ctx, &format!("{eff}.{act}"), &items)
        }
        Tot(ty) => unary(out, ctx, "Tot", ty),
        CompTy(m, ty, wp) => nary(out, ctx, m, &[ty, wp]),
        True => out.push_str("True"),
        False => out.push_str("False"),
        Eq(_, a, b) => paren(out, ctx >= Prec::Cmp, |o| {
            pp(a, Prec::Cmp, o);
            o.push_str(" == ");
            pp(b, Prec::Cmp, o);
        }),
        Implies(a, b) => paren(out, ctx >= Prec::Arrow, |o| {
            pp(a, Prec::Arrow, o);
            o.push_str(" ==> ");
            pp(b, Prec::Top, o);
        }),
        And(a, b) => paren(out, ctx >= Prec::Or, |o| {
            pp(a, Prec::Or, o);
            o.push_str(" /\\ ");
            pp(b, Prec::Arrow, o);
        }),
        Forall(..) => paren(out, ctx > Prec::Top, |o| {
            o.push_str("forall");
            let mut cur = t.clone();
            while let Forall(x, ty, b) = cur.kind() {
                o.push_str(&format!(" ({x}:"));
                pp(ty, Prec::Top, o);
                o.push(')');
                let b = b.clone();
                cur = b;
            }
            o.push_str(". ");
            pp(&cur, Prec::Top, o);
        }),
    }
}

fn unary(out: &mut String, ctx: Prec, head: &str, e: &Term) {
    paren(out, ctx >= Prec::App, |o| {
        o.push_str(head);
        o.push(' ');
        pp(e, Prec::App, o);
    });
}

fn nary(out: &mut String, ctx: Prec, head: &str, items: &[&Term]) {
    paren(out, ctx >= Prec::App, |o| {
        o.push_str(head);
        for a in items {
            o.push(' ');
            pp(a, Prec::App, o);
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{PrimOp, Term};

    #[test]
    fn pretty_arrow_and_app() {
        let t = Term::lam(
            "x",
            Term::int_ty(),
            Term::binop(PrimOp::Mul, Term::var("x"), Term::var("x")),
        );
        assert_eq!(pretty(&t), "fun (x:int) -> x * x");
        let ty = Term::arrow(Term::int_ty(), Term::int_ty());
        assert_eq!(pretty(&ty), "int -> int");
    }

    #[test]
    fn sexp_levels_are_explicit() {
        assert_eq!(sexp(&Term::univ(1)), "(Type 1)");
        let t = Term::ret("Pure", Term::int_ty(), Term::int(3));
        assert_eq!(sexp(&t), "(return Pure int 3)");
    }
}
