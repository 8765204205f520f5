//! The DM typing judgment `Δ | Γ ⊢ e : H ! ε`, producing derivations.

use thiserror::Error;

use super::term::DmTerm;
use super::types::{classify, DmType, Eff, IllFormed, Sort};
use crate::syntax::{Base, Name};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DmError {
    #[error("[{rule}] {msg} in `{term}`")]
    Rule { rule: &'static str, msg: String, term: String },
    #[error("[WF] {0}")]
    IllFormed(#[from] IllFormed),
}

impl DmError {
    pub fn rule(&self) -> &'static str {
        match self {
            DmError::Rule { rule, .. } => rule,
            DmError::IllFormed(_) => "WF",
        }
    }
}

type R<T> = Result<T, DmError>;

fn err<T>(rule: &'static str, e: &DmTerm, msg: impl Into<String>) -> R<T> {
    Err(DmError::Rule {
        rule,
        msg: msg.into(),
        term: e.to_string(),
    })
}

/// `Δ | Γ`
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DmCtx {
    pub delta: Vec<Name>,
    pub gamma: Vec<(Name, DmType)>,
}

impl DmCtx {
    pub fn new(delta: Vec<Name>) -> DmCtx {
        DmCtx { delta, gamma: vec![] }
    }

    pub fn lookup(&self, x: &str) -> Option<&DmType> {
        self.gamma.iter().rev().find(|(y, _)| &**y == x).map(|(_, t)| t)
    }

    pub fn bound(&self, x: &str) -> bool {
        self.lookup(x).is_some() || self.delta.iter().any(|a| &**a == x)
    }

    /// Extends Γ; names may not be repeated.
    pub fn push(&self, x: &Name, t: DmType, at: &DmTerm) -> R<DmCtx> {
        if self.bound(x) {
            return err("Ctx", at, format!("variable `{x}` is already bound"));
        }
        classify(&self.delta, &t)?;
        let mut c = self.clone();
        c.gamma.push((x.clone(), t));
        Ok(c)
    }

    pub fn sort(&self, t: &DmType) -> R<Sort> {
        Ok(classify(&self.delta, t)?)
    }
}

/// A typing derivation: the rule used, the judgment's subject and result,
/// and the premises.
#[derive(Clone, Debug, PartialEq)]
pub struct Deriv {
    pub rule: &'static str,
    pub term: DmTerm,
    pub ty: DmType,
    pub eff: Eff,
    pub kids: Vec<Deriv>,
}

impl Deriv {
    /// Number of rule applications.
    pub fn size(&self) -> usize {
        1 + self.kids.iter().map(Deriv::size).sum::<usize>()
    }

    /// Rule names in pre-order.
    pub fn rules(&self) -> Vec<&'static str> {
        let mut out = vec![self.rule];
        for k in &self.kids {
            out.extend(k.rules());
        }
        out
    }
}

/// Type checks `e`, returning its derivation.
pub fn typecheck_dm(ctx: &DmCtx, e: &DmTerm) -> R<Deriv> {
    use DmTerm::*;
    let node = |rule, ty, eff, kids| {
        Ok(Deriv {
            rule,
            term: e.clone(),
            ty,
            eff,
            kids,
        })
    };
    let pure = |d: &Deriv, rule: &'static str| -> R<()> {
        if d.eff == Eff::N {
            Ok(())
        } else {
            err(rule, &d.term, "expected a non-monadic (n) term")
        }
    };
    match e {
        Var(x) => match ctx.lookup(x) {
            Some(t) => node("ST-Var", t.clone(), Eff::N, vec![]),
            None => err("ST-Var", e, format!("unbound variable `{x}`")),
        },
        Lit(l) => node("ST-Const", DmType::Base(l.base()), Eff::N, vec![]),
        Op(op, args) => {
            let (doms, res) = op.signature();
            if doms.len() != args.len() {
                return err("ST-Const", e, "wrong number of operands");
            }
            let mut kids = Vec::new();
            for (a, b) in args.iter().zip(doms) {
                let d = typecheck_dm(ctx, a)?;
                pure(&d, "ST-Const")?;
                if d.ty != DmType::Base(*b) {
                    return err("ST-Const", a, format!("expected {}, found {}", b.as_str(), d.ty));
                }
                kids.push(d);
            }
            node("ST-Const", DmType::Base(res), Eff::N, kids)
        }
        If(c, a, b) => {
            let dc = typecheck_dm(ctx, c)?;
            pure(&dc, "ST-If*")?;
            if dc.ty != DmType::Base(Base::Bool) {
                return err("ST-If*", c, format!("condition has type {}", dc.ty));
            }
            let da = typecheck_dm(ctx, a)?;
            let db = typecheck_dm(ctx, b)?;
            if da.ty != db.ty || da.eff != db.eff {
                return err(
                    "ST-If*",
                    e,
                    format!("branches have {} ! {} and {} ! {}", da.ty, da.eff, db.ty, db.eff),
                );
            }
            let (ty, eff) = (da.ty.clone(), da.eff);
            node("ST-If*", ty, eff, vec![dc, da, db])
        }
        Lam(x, t, b) => {
            let ctx2 = ctx.push(x, t.clone(), e)?;
            let db = typecheck_dm(&ctx2, b)?;
            let ty = DmType::Arrow(Box::new(t.clone()), db.eff, Box::new(db.ty.clone()));
            ctx.sort(&ty)?;
            node("ST-Abs", ty, Eff::N, vec![db])
        }
        App(f, a) => {
            let df = typecheck_dm(ctx, f)?;
            pure(&df, "ST-App")?;
            let DmType::Arrow(dom, eff, cod) = &df.ty else {
                return err("ST-App", e, format!("applying a non-function of type {}", df.ty));
            };
            let da = typecheck_dm(ctx, a)?;
            pure(&da, "ST-App")?;
            if da.ty != **dom {
                return err("ST-App", a, format!("expected argument of type {dom}, found {}", da.ty));
            }
            let (ty, eff) = ((**cod).clone(), *eff);
            node("ST-App", ty, eff, vec![df, da])
        }
        Pair(a, b) => {
            let da = typecheck_dm(ctx, a)?;
            let db = typecheck_dm(ctx, b)?;
            pure(&da, "ST-Pair")?;
            pure(&db, "ST-Pair")?;
            let ty = DmType::prod(da.ty.clone(), db.ty.clone());
            ctx.sort(&ty)?;
            node("ST-Pair", ty, Eff::N, vec![da, db])
        }
        Fst(p) | Snd(p) => {
            let rule = if matches!(e, Fst(_)) { "ST-Fst" } else { "ST-Snd" };
            let dp = typecheck_dm(ctx, p)?;
            pure(&dp, rule)?;
            let DmType::Prod(l, r) = &dp.ty else {
                return err(rule, e, format!("projection from {}", dp.ty));
            };
            let ty = if matches!(e, Fst(_)) { (**l).clone() } else { (**r).clone() };
            node(rule, ty, Eff::N, vec![dp])
        }
        Inl(v, r) | Inr(r, v) => {
            let left = matches!(e, Inl(..));
            let rule = if left { "ST-Inl" } else { "ST-Inr" };
            let dv = typecheck_dm(ctx, v)?;
            pure(&dv, rule)?;
            let ty = if left {
                DmType::sum(dv.ty.clone(), r.clone())
            } else {
                DmType::sum(r.clone(), dv.ty.clone())
            };
            ctx.sort(&ty)?;
            node(rule, ty, Eff::N, vec![dv])
        }
        Case(s, x, l, y, r) => {
            let ds = typecheck_dm(ctx, s)?;
            pure(&ds, "ST-Case")?;
            let DmType::Sum(a1, a2) = &ds.ty else {
                return err("ST-Case", e, format!("scrutinee has type {}", ds.ty));
            };
            let dl = typecheck_dm(&ctx.push(x, (**a1).clone(), e)?, l)?;
            let dr = typecheck_dm(&ctx.push(y, (**a2).clone(), e)?, r)?;
            if dl.ty != dr.ty || dl.eff != dr.eff {
                return err(
                    "ST-Case",
                    e,
                    format!("branches have {} ! {} and {} ! {}", dl.ty, dl.eff, dr.ty, dr.eff),
                );
            }
            let (ty, eff) = (dl.ty.clone(), dl.eff);
            node("ST-Case", ty, eff, vec![ds, dl, dr])
        }
        Return(v) => {
            let dv = typecheck_dm(ctx, v)?;
            pure(&dv, "ST-Ret")?;
            if ctx.sort(&dv.ty)? != Sort::A {
                return err("ST-Ret", e, format!("returning a computation of type {}", dv.ty));
            }
            let ty = dv.ty.clone();
            node("ST-Ret", ty, Eff::Tau, vec![dv])
        }
        Bind(e1, x, e2) => {
            let d1 = typecheck_dm(ctx, e1)?;
            if d1.eff != Eff::Tau {
                return err("ST-Bind", e1, "the bound term must be a tau computation");
            }
            let d2 = typecheck_dm(&ctx.push(x, d1.ty.clone(), e)?, e2)?;
            if d2.eff != Eff::Tau {
                return err("ST-Bind", e2, "the continuation must be a tau computation");
            }
            let ty = d2.ty.clone();
            node("ST-Bind", ty, Eff::Tau, vec![d1, d2])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::name;

    fn st(x: DmType) -> DmType {
        DmType::tau_arrow(DmType::var("S"), DmType::prod(x, DmType::var("S")))
    }

    #[test]
    fn state_return() {
        let ctx = DmCtx::new(vec![name("X"), name("S")]);
        let e = DmTerm::lam(
            "x",
            DmType::var("X"),
            DmTerm::lam(
                "s",
                DmType::var("S"),
                DmTerm::ret(DmTerm::pair(DmTerm::var("x"), DmTerm::var("s"))),
            ),
        );
        let d = typecheck_dm(&ctx, &e).unwrap();
        assert_eq!(d.ty, DmType::arrow(DmType::var("X"), st(DmType::var("X"))));
        assert_eq!(d.eff, Eff::N);
        assert_eq!(d.rules(), vec!["ST-Abs", "ST-Abs", "ST-Ret", "ST-Pair", "ST-Var", "ST-Var"]);
    }

    #[test]
    fn return_and_bind() {
        let ctx = DmCtx::new(vec![name("X")]);
        let ctx = ctx.push(&name("x"), DmType::var("X"), &DmTerm::unit()).unwrap();
        let r = typecheck_dm(&ctx, &DmTerm::ret(DmTerm::var("x"))).unwrap();
        assert_eq!((r.ty, r.eff), (DmType::var("X"), Eff::Tau));
        let b = DmTerm::bind(DmTerm::ret(DmTerm::var("x")), "y", DmTerm::ret(DmTerm::var("y")));
        let d = typecheck_dm(&ctx, &b).unwrap();
        assert_eq!((d.ty, d.eff), (DmType::var("X"), Eff::Tau));
    }

    #[test]
    fn tau_under_pair_is_rejected() {
        let e = DmTerm::pair(DmTerm::ret(DmTerm::int(1)), DmTerm::int(2));
        assert_eq!(typecheck_dm(&DmCtx::default(), &e).unwrap_err().rule(), "ST-Pair");
    }

    #[test]
    fn repeated_names_rejected() {
        let e = DmTerm::lam("x", DmType::int(), DmTerm::lam("x", DmType::int(), DmTerm::var("x")));
        assert_eq!(typecheck_dm(&DmCtx::default(), &e).unwrap_err().rule(), "Ctx");
    }

    #[test]
    fn computation_to_value_rejected() {
        let c = DmType::tau_arrow(DmType::unit(), DmType::int());
        let e = DmTerm::lam("f", c, DmTerm::int(3));
        assert_eq!(typecheck_dm(&DmCtx::default(), &e).unwrap_err().rule(), "WF");
    }
}
