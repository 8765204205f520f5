//! Matching of patterns with metavariables against terms.
//!
//! A metavariable either stands alone or is applied to distinct variables
//! bound inside the pattern (a higher-order pattern); in the latter case the
//! solution is a λ-abstraction over those variables.

use std::collections::{HashMap, HashSet};

use crate::syntax::{Kind, Name, Term};

pub struct Matcher<'a> {
    metas: &'a HashSet<Name>,
    pub solution: HashMap<Name, Term>,
}

/// A binder entered on both sides: pattern name, term name, binder type.
type Env = Vec<(Name, Name, Term)>;

impl<'a> Matcher<'a> {
    pub fn new(metas: &'a HashSet<Name>) -> Matcher<'a> {
        Matcher {
            metas,
            solution: HashMap::new(),
        }
    }

    pub fn with_solution(metas: &'a HashSet<Name>, solution: HashMap<Name, Term>) -> Matcher<'a> {
        Matcher { metas, solution }
    }

    /// Extends the current solution so that `pat` instantiated equals `t`
    /// up to α. On failure the solution may be partially extended; callers
    /// that backtrack should clone it first.
    pub fn matches(&mut self, pat: &Term, t: &Term) -> bool {
        self.go(pat, t, &mut Vec::new())
    }

    fn is_meta(&self, x: &Name, env: &Env) -> bool {
        self.metas.contains(x) && !env.iter().any(|(p, _, _)| p == x)
    }

    fn mentions_env(t: &Term, env: &Env, allowed: &[Name]) -> bool {
        let fv = t.free_vars();
        env.iter().any(|(_, tn, _)| fv.contains(tn) && !allowed.contains(tn))
    }

    fn go(&mut self, p: &Term, t: &Term, env: &mut Env) -> bool {
        if let Kind::Var(x) = p.kind() {
            if self.is_meta(x, env) {
                return self.assign(x, &[], t, env);
            }
        }
        if let Kind::App(..) = p.kind() {
            let (h, args) = p.spine();
            if let Kind::Var(m) = h.kind() {
                if self.is_meta(m, env) {
                    if let Some(vars) = pattern_args(&args, env) {
                        return self.assign(m, &vars, t, env);
                    }
                }
            }
        }
        use Kind::*;
        match (p.kind(), t.kind()) {
            (Var(x), Var(y)) => {
                for (pn, tn, _) in env.iter().rev() {
                    if pn == x || tn == y {
                        return pn == x && tn == y;
                    }
                }
                x == y
            }
            (Univ(i), Univ(j)) => i == j,
            (Base(a), Base(b)) => a == b,
            (Lit(a), Lit(b)) => a == b,
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
                if std::mem::discriminant(p.kind()) != std::mem::discriminant(t.kind()) {
                    return false;
                }
                let sp = p.slots();
                let st = t.slots();
                if sp.len() != st.len() {
                    return false;
                }
                let binder_ty = binder_type(t);
                for ((bp, cp), (bt, ct)) in sp.iter().zip(st.iter()) {
                    let ok = match (bp, bt) {
                        (Some(x), Some(y)) => {
                            env.push((x.clone(), y.clone(), binder_ty.clone()));
                            let r = self.go(cp, ct, env);
                            env.pop();
                            r
                        }
                        (None, None) => self.go(cp, ct, env),
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

    /// Solves `m x̄ = t` where `x̄` are term-side bound names.
    fn assign(&mut self, m: &Name, vars: &[(Name, Term)], t: &Term, env: &Env) -> bool {
        let names: Vec<Name> = vars.iter().map(|(n, _)| n.clone()).collect();
        if Self::mentions_env(t, env, &names) {
            return false;
        }
        let mut sol = t.clone();
        for (n, ty) in vars.iter().rev() {
            sol = Term::new(Kind::Lam(n.clone(), ty.clone(), sol));
        }
        match self.solution.get(m) {
            Some(prev) => {
                if vars.is_empty() {
                    prev.alpha_eq(t)
                } else {
                    prev.alpha_eq(&sol) || beta_apply(prev, &names).alpha_eq(t)
                }
            }
            None => {
                self.solution.insert(m.clone(), sol);
                true
            }
        }
    }
}

/// Type of the binders introduced by `t`, used to annotate pattern solutions.
fn binder_type(t: &Term) -> Term {
    match t.kind() {
        Kind::Lam(_, ty, _) | Kind::Pi(_, ty, _) | Kind::Forall(_, ty, _) | Kind::Refine(_, ty, _) => ty.clone(),
        Kind::Bind { t1, .. } => t1.clone(),
        _ => Term::unit_ty(),
    }
}

fn pattern_args(args: &[Term], env: &Env) -> Option<Vec<(Name, Term)>> {
    let mut out: Vec<(Name, Term)> = Vec::new();
    for a in args {
        let x = a.as_var()?;
        let (_, tn, ty) = env.iter().rev().find(|(pn, _, _)| pn == x)?;
        if out.iter().any(|(n, _)| n == tn) {
            return None;
        }
        out.push((tn.clone(), ty.clone()));
    }
    Some(out)
}

fn beta_apply(f: &Term, args: &[Name]) -> Term {
    let mut cur = f.clone();
    for a in args {
        cur = match cur.kind() {
            Kind::Lam(x, _, b) => b.rename(x, a),
            _ => Term::app(cur.clone(), Term::var_n(a)),
        };
    }
    cur
}

/// Instantiates metavariables in `t`.
pub fn instantiate(t: &Term, solution: &HashMap<Name, Term>) -> Term {
    let pairs: Vec<(Name, Term)> = solution.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    t.subst_many(&pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sexp::parse_term;
    use crate::syntax::name;

    fn metas(ns: &[&str]) -> HashSet<Name> {
        ns.iter().map(|n| name(n)).collect()
    }

    #[test]
    fn first_order() {
        let ms = metas(&["?a"]);
        let mut m = Matcher::new(&ms);
        assert!(m.matches(&parse_term("(app f ?a)").unwrap(), &parse_term("(app f 3)").unwrap()));
        assert_eq!(m.solution[&name("?a")], Term::int(3));
    }

    #[test]
    fn nonlinear_needs_equal_instances() {
        let ms = metas(&["?a"]);
        let p = parse_term("(pair ?a ?a)").unwrap();
        assert!(!Matcher::new(&ms).matches(&p, &parse_term("(pair 1 2)").unwrap()));
        assert!(Matcher::new(&ms).matches(&p, &parse_term("(pair 1 1)").unwrap()));
    }

    #[test]
    fn higher_order_pattern() {
        let ms = metas(&["?w"]);
        let p = parse_term("(pi s int (Tot (app ?w s)))").unwrap();
        let t = parse_term("(pi s0 int (Tot (app (app q s0) 1)))").unwrap();
        let mut m = Matcher::new(&ms);
        assert!(m.matches(&p, &t));
        let sol = &m.solution[&name("?w")];
        assert!(sol.alpha_eq(&parse_term("(lam s int (app (app q s) 1))").unwrap()), "{sol}");
    }

    #[test]
    fn no_escape_of_bound_variables() {
        let ms = metas(&["?a"]);
        let p = parse_term("(lam x int ?a)").unwrap();
        let t = parse_term("(lam y int y)").unwrap();
        assert!(!Matcher::new(&ms).matches(&p, &t));
    }
}
