//! SMT-LIB v2 export of undecided obligations.
//!
//! The export is best effort. Type variables become uninterpreted sorts,
//! products, sums and unit become datatypes, and every function type becomes
//! an uninterpreted sort with an application symbol and an extensionality
//! axiom. Lambdas are lifted to named functions defined by a quantified
//! equation. Integers are exported as mathematical integers, whereas the
//! kernel uses wrapping 64-bit arithmetic. The leading universal prefix is
//! skolemized and the goal negated, so `unsat` means the obligation holds.

use std::collections::HashSet;

use crate::syntax::{fresh, Base, Kind, Lit, Name, PrimOp, Term};

/// Renders `phi` as an SMT-LIB script for the obligation `label`.
pub fn to_smtlib(label: &str, phi: &Term) -> String {
    let mut s = Smt::default();
    let body = s.top(phi);
    let mut out = String::new();
    out.push_str(&format!("; obligation {label}\n"));
    out.push_str("; exported for an external solver; this file is not a proof and `unsat` is authoritative only modulo the encoding\n");
    out.push_str("; integers are unbounded here but wrap at 64 bits in the kernel\n");
    out.push_str(&format!("(set-logic {})\n", s.logic()));
    for u in &s.unsupported {
        out.push_str(&format!("; opaque: {u}\n"));
    }
    for d in &s.decls {
        out.push_str(d);
        out.push('\n');
    }
    for a in &body {
        out.push_str(a);
        out.push('\n');
    }
    out.push_str("(check-sat)\n");
    out
}

#[derive(Clone)]
enum SortInfo {
    Named,
    Prod { mk: String, fst: String, snd: String },
    Sum { inl: String, inr: String, l: String, r: String },
    Fun { app: String },
}

#[derive(Default)]
struct Smt {
    sorts: Vec<(Term, String, SortInfo)>,
    decls: Vec<String>,
    counter: usize,
    ints: bool,
    nonlinear: bool,
    datatypes: bool,
    unsupported: Vec<String>,
}

#[derive(Clone)]
struct Binding {
    name: Name,
    ty: Term,
    local: bool,
}

fn sym(x: &str) -> String {
    let clean: String = x.chars().map(|c| if c == '|' || c == '\\' { '_' } else { c }).collect();
    format!("|{clean}|")
}

impl Smt {
    fn logic(&self) -> String {
        let mut l = String::from("UF");
        if self.datatypes {
            l.push_str("DT");
        }
        if self.ints {
            l.push_str(if self.nonlinear { "NIA" } else { "LIA" });
        }
        l
    }

    fn next(&mut self, stem: &str) -> String {
        self.counter += 1;
        format!("{stem}{}", self.counter)
    }

    fn find(&self, ty: &Term) -> Option<(String, SortInfo)> {
        self.sorts
            .iter()
            .find(|(t, _, _)| t.alpha_eq(ty))
            .map(|(_, n, i)| (n.clone(), i.clone()))
    }

    fn opaque(&mut self, what: String) -> String {
        self.unsupported.push(what);
        let n = self.next("Opaque");
        self.decls.push(format!("(declare-sort {n} 0)"));
        n
    }

    fn sort(&mut self, ty: &Term) -> String {
        match ty.kind() {
            Kind::Univ(0) => return "Bool".into(),
            Kind::Base(Base::Int) => {
                self.ints = true;
                return "Int".into();
            }
            Kind::Base(Base::Bool) => return "Bool".into(),
            Kind::Refine(_, t, _) => return self.sort(t),
            _ => {}
        }
        if let Some((n, _)) = self.find(ty) {
            return n;
        }
        let (n, info) = match ty.kind() {
            Kind::Base(Base::Unit) => {
                self.datatypes = true;
                self.decls.push("(declare-datatypes ((Unit 0)) (((unit))))".into());
                ("Unit".to_string(), SortInfo::Named)
            }
            Kind::Var(x) => {
                let n = sym(x);
                self.decls.push(format!("(declare-sort {n} 0)"));
                (n, SortInfo::Named)
            }
            Kind::Prod(a, b) => {
                let (sa, sb) = (self.sort(a), self.sort(b));
                let n = self.next("Prod");
                self.datatypes = true;
                let (mk, fst, snd) = (format!("mk_{n}"), format!("{n}_fst"), format!("{n}_snd"));
                self.decls.push(format!(
                    "(declare-datatypes (({n} 0)) ((({mk} ({fst} {sa}) ({snd} {sb})))))"
                ));
                (n, SortInfo::Prod { mk, fst, snd })
            }
            Kind::Sum(a, b) => {
                let (sa, sb) = (self.sort(a), self.sort(b));
                let n = self.next("Sum");
                self.datatypes = true;
                let (inl, inr, l, r) = (format!("{n}_inl"), format!("{n}_inr"), format!("{n}_l"), format!("{n}_r"));
                self.decls.push(format!(
                    "(declare-datatypes (({n} 0)) ((({inl} ({l} {sa})) ({inr} ({r} {sb})))))"
                ));
                (n, SortInfo::Sum { inl, inr, l, r })
            }
            Kind::Pi(_, d, c) => match c.kind() {
                Kind::Tot(r) => {
                    let (sd, sr) = (self.sort(d), self.sort(r));
                    let n = self.next("Fun");
                    let app = format!("{n}_app");
                    self.decls.push(format!("(declare-sort {n} 0)"));
                    self.decls.push(format!("(declare-fun {app} ({n} {sd}) {sr})"));
                    self.decls.push(format!(
                        "(assert (forall ((f {n}) (g {n})) (=> (forall ((x {sd})) (= ({app} f x) ({app} g x))) (= f g))))"
                    ));
                    (n, SortInfo::Fun { app })
                }
                _ => (self.opaque(ty.to_string()), SortInfo::Named),
            },
            _ => (self.opaque(ty.to_string()), SortInfo::Named),
        };
        self.sorts.push((ty.clone(), n.clone(), info.clone()));
        n
    }

    fn info(&mut self, ty: &Term) -> SortInfo {
        self.sort(ty);
        self.find(ty).map(|(_, i)| i).unwrap_or(SortInfo::Named)
    }

    /// Skolemizes the universal prefix and returns the assertions.
    fn top(&mut self, phi: &Term) -> Vec<String> {
        let mut env: Vec<Binding> = Vec::new();
        let mut asserts = Vec::new();
        let mut taken: HashSet<Name> = HashSet::new();
        let mut cur = phi.clone();
        loop {
            match cur.kind() {
                Kind::Forall(x, ty, body) => {
                    let y = fresh(x, &|n| taken.contains(n));
                    taken.insert(y.clone());
                    let body = if y != *x { body.subst(x, &Term::var_n(&y)) } else { body.clone() };
                    if matches!(ty.kind(), Kind::Univ(0)) && occurs_as_type(&y, &body) {
                        self.sort(&Term::var_n(&y));
                    } else {
                        let s = self.sort(ty);
                        self.decls.push(format!("(declare-const {} {s})", sym(&y)));
                    }
                    env.push(Binding {
                        name: y,
                        ty: ty.clone(),
                        local: false,
                    });
                    cur = body;
                }
                Kind::Implies(h, c) => {
                    let e = self.expr(h, &mut env);
                    asserts.push(format!("(assert {e})"));
                    cur = c.clone();
                }
                _ => {
                    let e = self.expr(&cur, &mut env);
                    asserts.push(format!("(assert (not {e}))"));
                    return asserts;
                }
            }
        }
    }

    fn expr(&mut self, t: &Term, env: &mut Vec<Binding>) -> String {
        match t.kind() {
            Kind::Var(x) => {
                if env.iter().any(|b| &b.name == x) {
                    sym(x)
                } else {
                    self.opaque_term(t, env)
                }
            }
            Kind::Lit(Lit::Int(n)) => {
                self.ints = true;
                if *n < 0 {
                    format!("(- {})", n.unsigned_abs())
                } else {
                    n.to_string()
                }
            }
            Kind::Lit(Lit::Bool(b)) => b.to_string(),
            Kind::Lit(Lit::Unit) => {
                self.sort(&Term::unit_ty());
                "unit".into()
            }
            Kind::Prim(op, args) => {
                let xs: Vec<String> = args.iter().map(|a| self.expr(a, env)).collect();
                if *op == PrimOp::Mul && args.iter().all(|a| a.as_lit().is_none()) {
                    self.nonlinear = true;
                }
                let head = match op {
                    PrimOp::And => "and",
                    PrimOp::Or => "or",
                    other => other.symbol(),
                };
                format!("({head} {})", xs.join(" "))
            }
            Kind::If(c, a, b) => {
                let (c, a, b) = (self.expr(c, env), self.expr(a, env), self.expr(b, env));
                format!("(ite {c} {a} {b})")
            }
            Kind::True => "true".into(),
            Kind::False => "false".into(),
            Kind::And(a, b) => {
                let (a, b) = (self.expr(a, env), self.expr(b, env));
                format!("(and {a} {b})")
            }
            Kind::Implies(a, b) => {
                let (a, b) = (self.expr(a, env), self.expr(b, env));
                format!("(=> {a} {b})")
            }
            Kind::Eq(_, a, b) => {
                let (a, b) = (self.expr(a, env), self.expr(b, env));
                format!("(= {a} {b})")
            }
            Kind::Forall(x, ty, body) => {
                let s = self.sort(ty);
                env.push(Binding {
                    name: x.clone(),
                    ty: ty.clone(),
                    local: true,
                });
                let b = self.expr(body, env);
                env.pop();
                format!("(forall (({} {s})) {b})", sym(x))
            }
            Kind::Pair(a, b) => match self.infer(t, env).map(|ty| self.info(&ty)) {
                Some(SortInfo::Prod { mk, .. }) => {
                    let (a, b) = (self.expr(a, env), self.expr(b, env));
                    format!("({mk} {a} {b})")
                }
                _ => self.opaque_term(t, env),
            },
            Kind::Fst(e) | Kind::Snd(e) => match self.infer(e, env).map(|ty| self.info(&ty)) {
                Some(SortInfo::Prod { fst, snd, .. }) => {
                    let f = if matches!(t.kind(), Kind::Fst(_)) { fst } else { snd };
                    format!("({f} {})", self.expr(e, env))
                }
                _ => self.opaque_term(t, env),
            },
            Kind::Inl(v, _) | Kind::Inr(_, v) => match self.infer(t, env).map(|ty| self.info(&ty)) {
                Some(SortInfo::Sum { inl, inr, .. }) => {
                    let c = if matches!(t.kind(), Kind::Inl(..)) { inl } else { inr };
                    format!("({c} {})", self.expr(v, env))
                }
                _ => self.opaque_term(t, env),
            },
            Kind::Case {
                scrut,
                lx,
                left,
                rx,
                right,
                ..
            } => {
                let sty = self.infer(scrut, env);
                match (sty.clone().map(|ty| self.info(&ty)), sty.as_ref().map(|t| t.kind())) {
                    (Some(SortInfo::Sum { inl, l, r, .. }), Some(Kind::Sum(lt, rt))) => {
                        let s = self.expr(scrut, env);
                        let mut branch = |x: &Name, ty: &Term, body: &Term, sel: &str, env: &mut Vec<Binding>| {
                            env.push(Binding {
                                name: x.clone(),
                                ty: ty.clone(),
                                local: true,
                            });
                            let b = self.expr(body, env);
                            env.pop();
                            format!("(let (({} ({sel} {s}))) {b})", sym(x))
                        };
                        let lb = branch(lx, lt, left, &l, env);
                        let rb = branch(rx, rt, right, &r, env);
                        format!("(ite ((_ is {inl}) {s}) {lb} {rb})")
                    }
                    _ => self.opaque_term(t, env),
                }
            }
            Kind::App(f, a) => match self.infer(f, env).map(|ty| self.info(&ty)) {
                Some(SortInfo::Fun { app }) => {
                    let (f, a) = (self.expr(f, env), self.expr(a, env));
                    format!("({app} {f} {a})")
                }
                _ => self.opaque_term(t, env),
            },
            Kind::Lam(x, ty, body) => self.lift_lambda(t, x, ty, body, env),
            _ => self.opaque_term(t, env),
        }
    }

    fn lift_lambda(&mut self, t: &Term, x: &Name, ty: &Term, body: &Term, env: &mut Vec<Binding>) -> String {
        let Some(fty) = self.infer(t, env) else {
            return self.opaque_term(t, env);
        };
        let fsort = self.sort(&fty);
        let Some(SortInfo::Fun { app }) = self.find(&fty).map(|(_, i)| i) else {
            return self.opaque_term(t, env);
        };
        let fv = t.free_vars();
        let mut captured: Vec<Binding> = Vec::new();
        for b in env.iter().rev() {
            if b.local && fv.contains(&b.name) && !captured.iter().any(|c| c.name == b.name) {
                captured.push(b.clone());
            }
        }
        captured.reverse();
        let n = self.next("lam");
        let params: Vec<String> = captured.iter().map(|b| format!("({} {})", sym(&b.name), self.sort(&b.ty))).collect();
        let dom: Vec<String> = captured.iter().map(|b| self.sort(&b.ty)).collect();
        self.decls.push(format!("(declare-fun {n} ({}) {fsort})", dom.join(" ")));
        let head = if captured.is_empty() {
            n.clone()
        } else {
            let args: Vec<String> = captured.iter().map(|b| sym(&b.name)).collect();
            format!("({n} {})", args.join(" "))
        };
        let xs = self.sort(ty);
        let mut inner_env = env.clone();
        inner_env.push(Binding {
            name: x.clone(),
            ty: ty.clone(),
            local: true,
        });
        let b = self.expr(body, &mut inner_env);
        let mut binders = params;
        binders.push(format!("({} {xs})", sym(x)));
        self.decls
            .push(format!("(assert (forall ({}) (= ({app} {head} {}) {b})))", binders.join(" "), sym(x)));
        head
    }

    fn opaque_term(&mut self, t: &Term, env: &[Binding]) -> String {
        let s = match self.infer(t, env) {
            Some(ty) => self.sort(&ty),
            None => "Bool".into(),
        };
        self.unsupported.push(t.to_string());
        let n = self.next("opaque");
        self.decls.push(format!("(declare-const {n} {s})"));
        n
    }

    fn infer(&self, t: &Term, env: &[Binding]) -> Option<Term> {
        Some(match t.kind() {
            Kind::Var(x) => env.iter().rev().find(|b| &b.name == x)?.ty.clone(),
            Kind::Lit(l) => Term::base(l.base()),
            Kind::Prim(op, _) => Term::base(op.signature().1),
            Kind::If(_, a, _) => self.infer(a, env)?,
            Kind::Pair(a, b) => Term::prod(self.infer(a, env)?, self.infer(b, env)?),
            Kind::Fst(e) | Kind::Snd(e) => match self.infer(e, env)?.kind() {
                Kind::Prod(a, b) => {
                    if matches!(t.kind(), Kind::Fst(_)) {
                        a.clone()
                    } else {
                        b.clone()
                    }
                }
                _ => return None,
            },
            Kind::Inl(v, r) => Term::sum(self.infer(v, env)?, r.clone()),
            Kind::Inr(l, v) => Term::sum(l.clone(), self.infer(v, env)?),
            // Annotations may be erased by normalization, so branches come first.
            Kind::Case {
                scrut,
                as_name,
                ret,
                lx,
                left,
                rx,
                right,
            } => {
                let branch = |x: &Name, ty: Term, body: &Term| {
                    let mut e = env.to_vec();
                    e.push(Binding {
                        name: x.clone(),
                        ty,
                        local: true,
                    });
                    self.infer(body, &e)
                };
                let from_branches = match self.infer(scrut, env).as_ref().map(|t| t.kind()) {
                    Some(Kind::Sum(l, r)) => branch(lx, l.clone(), left).or_else(|| branch(rx, r.clone(), right)),
                    _ => None,
                };
                match (from_branches, ret.kind()) {
                    (Some(t), _) => t,
                    (None, Kind::Tot(r)) if !r.has_free(as_name) => r.clone(),
                    _ => return None,
                }
            }
            Kind::App(f, a) => match self.infer(f, env)?.kind() {
                Kind::Pi(x, _, c) => match c.kind() {
                    Kind::Tot(r) => r.subst(x, a),
                    _ => return None,
                },
                _ => return None,
            },
            Kind::Lam(x, ty, b) => {
                let mut e = env.to_vec();
                e.push(Binding {
                    name: x.clone(),
                    ty: ty.clone(),
                    local: true,
                });
                Term::arrow(ty.clone(), self.infer(b, &e)?)
            }
            Kind::Eq(..) | Kind::Implies(..) | Kind::And(..) | Kind::Forall(..) | Kind::True | Kind::False => {
                Term::type0()
            }
            _ => return None,
        })
    }
}

fn occurs_as_type(x: &Name, body: &Term) -> bool {
    fn go(x: &Name, t: &Term, in_type: bool) -> bool {
        match t.kind() {
            Kind::Var(y) => in_type && y == x,
            Kind::Forall(y, ty, b) | Kind::Lam(y, ty, b) => go(x, ty, true) || (y != x && go(x, b, in_type)),
            Kind::Inl(v, ty) | Kind::Inr(ty, v) => go(x, ty, true) || go(x, v, in_type),
            Kind::Eq(ty, a, b) => go(x, ty, true) || go(x, a, in_type) || go(x, b, in_type),
            Kind::Pi(..) | Kind::Prod(..) | Kind::Sum(..) | Kind::Refine(..) => t.has_free(x),
            _ => {
                let mut found = false;
                t.map_children(|c| {
                    found = found || go(x, c, in_type);
                    c.clone()
                });
                found
            }
        }
    }
    go(x, body, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::parse_term;

    #[test]
    fn skolemizes_and_negates() {
        let phi = parse_term("(forall a (Type 0) (forall x a (forall p (arrow a (Type 0)) (implies (app p x) (app p x)))))").unwrap();
        let s = to_smtlib("t", &phi);
        assert!(s.contains("(declare-sort |a| 0)"), "{s}");
        assert!(s.contains("(declare-const |x| |a|)"), "{s}");
        assert!(s.contains("(assert (not (Fun1_app |p| |x|)))"), "{s}");
        assert!(s.trim_end().ends_with("(check-sat)"));
        assert!(s.contains("(set-logic UF)"));
    }

    #[test]
    fn integers_and_products() {
        let phi = parse_term(
            "(forall s int (forall p (arrow (prod int int) (Type 0)) (implies (app p (pair s (prim + s 1))) (app p (pair s s)))))",
        )
        .unwrap();
        let s = to_smtlib("t", &phi);
        assert!(s.contains("(set-logic UFDTLIA)"), "{s}");
        assert!(s.contains("(mk_Prod1 |s| (+ |s| 1))"), "{s}");
    }

    #[test]
    fn lambdas_are_lifted() {
        let phi = parse_term(
            "(forall w (arrow (arrow int (Type 0)) (Type 0)) (forall q (arrow int (Type 0)) (eq (Type 0) (app w (lam y int (app q y))) (app w q))))",
        )
        .unwrap();
        let s = to_smtlib("t", &phi);
        assert!(s.contains("(declare-fun lam"), "{s}");
        assert!(!s.contains("opaque"), "{s}");
    }

    #[test]
    fn sums_become_datatypes() {
        let phi = parse_term("(forall v (sum unit int) (eq int (case v _ (Tot int) x 0 y y) 0))").unwrap();
        let s = to_smtlib("t", &phi);
        assert!(s.contains("(_ is Sum"), "{s}");
        assert!(s.contains("(declare-datatypes ((Unit 0))"), "{s}");
    }
}
