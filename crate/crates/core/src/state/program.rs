//! A source grammar for stateful test programs, its EMF* image, a seeded
//! generator and a direct state-passing interpreter used as oracle.

use std::fmt;

use rand::Rng;

use crate::signature::pure_return_star;
use crate::syntax::{Field, PrimOp, Term, PURE};

use super::{StTerm, ST};

/// Integer and boolean expressions over bound variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Int(i64),
    Var(String),
    Op(PrimOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ret {
    Int,
    Unit,
}

impl Ret {
    fn ty(self) -> Term {
        match self {
            Ret::Int => Term::int_ty(),
            Ret::Unit => Term::unit_ty(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Prog {
    Return(Expr),
    Get,
    Put(Expr),
    Bind(Box<Prog>, String, Box<Prog>),
    /// The condition is a comparison expression.
    If(Expr, Box<Prog>, Box<Prog>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Unit,
    Bool(bool),
}

impl Value {
    pub fn to_st(self) -> StTerm {
        match self {
            Value::Int(n) => StTerm::int(n),
            Value::Unit => StTerm::unit(),
            Value::Bool(b) => StTerm::Lit(crate::syntax::Lit::Bool(b)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Var(x) => write!(f, "{x}"),
            Expr::Op(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

impl fmt::Display for Prog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prog::Return(e) => write!(f, "return {e}"),
            Prog::Get => write!(f, "get ()"),
            Prog::Put(e) => write!(f, "put {e}"),
            Prog::Bind(a, x, b) => write!(f, "(let {x} = {a} in {b})"),
            Prog::If(c, a, b) => write!(f, "(if {c} then {a} else {b})"),
        }
    }
}

impl Prog {
    pub fn depth(&self) -> usize {
        match self {
            Prog::Return(_) | Prog::Get | Prog::Put(_) => 1,
            Prog::Bind(a, _, b) | Prog::If(_, a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    pub fn ret(&self) -> Ret {
        match self {
            Prog::Return(_) | Prog::Get => Ret::Int,
            Prog::Put(_) => Ret::Unit,
            Prog::Bind(_, _, b) | Prog::If(_, b, _) => b.ret(),
        }
    }
}

/// `let x = get () in put (x + 1)`.
pub fn incr() -> Prog {
    let x = Expr::Var("x".into());
    Prog::Bind(
        Box::new(Prog::Get),
        "x".into(),
        Box::new(Prog::Put(Expr::Op(PrimOp::Add, Box::new(x), Box::new(Expr::Int(1))))),
    )
}

fn expr_term(e: &Expr) -> Term {
    match e {
        Expr::Int(n) => Term::int(*n),
        Expr::Var(x) => Term::var(x),
        Expr::Op(op, a, b) => Term::binop(*op, expr_term(a), expr_term(b)),
    }
}

/// The program as an `ST` computation, annotated with its WP.
pub fn to_emf(p: &Prog) -> Term {
    annotate(p).0
}

fn annotate(p: &Prog) -> (Term, Term) {
    let star = |f: Field| Term::cnst(ST, f);
    match p {
        Prog::Return(e) => {
            let v = expr_term(e);
            (
                Term::ret(ST, Term::int_ty(), v.clone()),
                Term::apps(star(Field::ReturnStar), [Term::int_ty(), v]),
            )
        }
        Prog::Get => (
            Term::act(ST, "get", vec![Term::unit()]),
            Term::app(star(Field::ActStar("get".into())), Term::unit()),
        ),
        Prog::Put(e) => {
            let v = expr_term(e);
            (
                Term::act(ST, "put", vec![v.clone()]),
                Term::app(star(Field::ActStar("put".into())), v),
            )
        }
        Prog::Bind(a, x, b) => {
            let (t1, t2) = (a.ret().ty(), b.ret().ty());
            let (e1, wp1) = annotate(a);
            let (e2, wp2) = annotate(b);
            let wp2 = Term::lam(x, t1.clone(), wp2);
            let wp = Term::apps(star(Field::BindStar), [t1.clone(), t2.clone(), wp1.clone(), wp2.clone()]);
            (Term::bind(ST, t1, t2, wp1, e1, wp2, x, e2), wp)
        }
        Prog::If(c, a, b) => {
            let c = expr_term(c);
            let (ea, wa) = annotate(a);
            let (eb, wb) = annotate(b);
            (Term::ite(c.clone(), ea, eb), Term::ite(c, wa, wb))
        }
    }
}

fn eval_expr(e: &Expr, env: &[(String, i64)]) -> Value {
    match e {
        Expr::Int(n) => Value::Int(*n),
        Expr::Var(x) => Value::Int(env.iter().rev().find(|(y, _)| y == x).map(|(_, v)| *v).unwrap_or(0)),
        Expr::Op(op, a, b) => match (op, eval_expr(a, env), eval_expr(b, env)) {
            (PrimOp::Add, Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_add(b)),
            (PrimOp::Sub, Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_sub(b)),
            (PrimOp::Mul, Value::Int(a), Value::Int(b)) => Value::Int(a.wrapping_mul(b)),
            (PrimOp::Lt, Value::Int(a), Value::Int(b)) => Value::Bool(a < b),
            (PrimOp::Eq, Value::Int(a), Value::Int(b)) => Value::Bool(a == b),
            _ => Value::Unit,
        },
    }
}

/// Direct state-passing interpretation: the result and the final state.
pub fn oracle(p: &Prog, s0: i64) -> (Value, i64) {
    fn go(p: &Prog, env: &mut Vec<(String, i64)>, s: i64) -> (Value, i64) {
        match p {
            Prog::Return(e) => (eval_expr(e, env), s),
            Prog::Get => (Value::Int(s), s),
            Prog::Put(e) => match eval_expr(e, env) {
                Value::Int(n) => (Value::Unit, n),
                _ => (Value::Unit, s),
            },
            Prog::Bind(a, x, b) => {
                let (v, s1) = go(a, env, s);
                let n = match v {
                    Value::Int(n) => n,
                    _ => 0,
                };
                env.push((x.clone(), n));
                let r = go(b, env, s1);
                env.pop();
                r
            }
            Prog::If(c, a, b) => match eval_expr(c, env) {
                Value::Bool(true) => go(a, env, s),
                _ => go(b, env, s),
            },
        }
    }
    go(p, &mut Vec::new(), s0)
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    next: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn expr(&mut self, vars: &[String], depth: usize) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.5) {
            if !vars.is_empty() && self.rng.gen_bool(0.6) {
                return Expr::Var(vars[self.rng.gen_range(0..vars.len())].clone());
            }
            return Expr::Int(self.rng.gen_range(-3..=3));
        }
        let op = [PrimOp::Add, PrimOp::Sub, PrimOp::Mul][self.rng.gen_range(0..3)];
        Expr::Op(op, Box::new(self.expr(vars, depth - 1)), Box::new(self.expr(vars, depth - 1)))
    }

    fn cond(&mut self, vars: &[String]) -> Expr {
        let op = if self.rng.gen_bool(0.5) { PrimOp::Lt } else { PrimOp::Eq };
        Expr::Op(op, Box::new(self.expr(vars, 1)), Box::new(self.expr(vars, 1)))
    }

    fn leaf(&mut self, ret: Ret, vars: &[String]) -> Prog {
        match ret {
            Ret::Int if self.rng.gen_bool(0.5) => Prog::Get,
            Ret::Int => Prog::Return(self.expr(vars, 2)),
            Ret::Unit => Prog::Put(self.expr(vars, 2)),
        }
    }

    fn prog(&mut self, depth: usize, ret: Ret, vars: &mut Vec<String>) -> Prog {
        if depth <= 1 || self.rng.gen_bool(0.2) {
            return self.leaf(ret, vars);
        }
        if self.rng.gen_bool(0.7) {
            let r1 = if self.rng.gen_bool(0.6) { Ret::Int } else { Ret::Unit };
            let a = self.prog(depth - 1, r1, vars);
            let x = format!("x{}", self.next);
            self.next += 1;
            let bound = r1 == Ret::Int;
            if bound {
                vars.push(x.clone());
            }
            let b = self.prog(depth - 1, ret, vars);
            if bound {
                vars.pop();
            }
            Prog::Bind(Box::new(a), x, Box::new(b))
        } else {
            let c = self.cond(vars);
            let a = self.prog(depth - 1, ret, vars);
            let b = self.prog(depth - 1, ret, vars);
            Prog::If(c, Box::new(a), Box::new(b))
        }
    }
}

/// A random stateful program of nesting depth at most `depth`.
pub fn gen_stateful<R: Rng>(rng: &mut R, depth: usize) -> Prog {
    let ret = if rng.gen_bool(0.5) { Ret::Int } else { Ret::Unit };
    let mut g = Gen { rng, next: 0 };
    g.prog(depth.max(1), ret, &mut Vec::new())
}

/// A closed `Tot` arithmetic term or a `Pure` computation, with its value.
pub fn gen_pure_program<R: Rng>(rng: &mut R) -> (Term, Value) {
    let mut g = Gen { rng, next: 0 };
    let a = g.expr(&[], 3);
    let Value::Int(va) = eval_expr(&a, &[]) else { unreachable!() };
    if g.rng.gen_bool(0.5) {
        return (expr_term(&a), Value::Int(va));
    }
    let x = "y".to_string();
    let b = g.expr(std::slice::from_ref(&x), 3);
    let vb = eval_expr(&b, &[(x.clone(), va)]);
    let int = Term::int_ty();
    let ret = |e: Term| Term::ret(PURE, Term::int_ty(), e);
    let wp = |e: Term| Term::apps(pure_return_star(), [Term::int_ty(), e]);
    let (ta, tb) = (expr_term(&a), expr_term(&b));
    let term = Term::bind(
        PURE,
        int.clone(),
        int.clone(),
        wp(ta.clone()),
        ret(ta),
        Term::lam(&x, int, wp(tb.clone())),
        &x,
        ret(tb),
    );
    (term, vb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn oracle_on_incr() {
        for s0 in -5..=5 {
            assert_eq!(oracle(&incr(), s0), (Value::Unit, s0 + 1));
        }
    }

    #[test]
    fn generated_programs_respect_depth() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            assert!(gen_stateful(&mut rng, 6).depth() <= 6);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = gen_stateful(&mut ChaCha8Rng::seed_from_u64(3), 6);
        let b = gen_stateful(&mut ChaCha8Rng::seed_from_u64(3), 6);
        assert_eq!(a, b);
    }
}
