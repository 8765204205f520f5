//! Effect signatures: the fixed partial `Pure` entry, user effect definitions
//! and lifts, plus the well-formedness check over all fields.

use crate::syntax::{name, Field, Name, Term, PURE};
use crate::typing::{Checker, Ctx};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SigError {
    #[error("unknown effect `{0}`")]
    UnknownEffect(String),
    #[error("Pure is partial: it has no `{0}` field")]
    PartialPure(String),
    #[error("effect `{0}` has no field `{1}`")]
    UnknownField(String, String),
    #[error("`{0}` is already defined")]
    Clash(String),
    #[error("no lift from `{0}` to `{1}`")]
    NoLift(String, String),
}

#[derive(Clone, Debug)]
pub struct ActionDef {
    pub name: Name,
    /// Type parameters, abstracted first.
    pub tparams: Vec<Name>,
    pub params: Vec<(Name, Term)>,
    /// Result type `t` of `F t (act* ā x̄)`.
    pub result: Term,
    pub star: Term,
    pub un: Term,
}

#[derive(Clone, Debug)]
pub struct EffectDef {
    pub name: Name,
    pub wp_type: Term,
    pub repr: Term,
    pub return_star: Term,
    pub bind_star: Term,
    pub un_return: Term,
    pub un_bind: Term,
    pub actions: Vec<ActionDef>,
    /// Universe of `wp_type a`.
    pub wp_level: u32,
    /// Universe of `repr a w`.
    pub repr_level: u32,
}

#[derive(Clone, Debug)]
pub struct LiftDef {
    pub from: Name,
    pub to: Name,
    pub star: Term,
    pub un: Term,
}

/// An ordered signature. The `Pure` entry is implicit and fixed.
#[derive(Clone, Debug, Default)]
pub struct Signature {
    effects: Vec<EffectDef>,
    lifts: Vec<LiftDef>,
}

fn ty0() -> Term {
    Term::type0()
}

/// `λa:Type0. (a -> Type0) -> Type0`
pub fn pure_wp_type() -> Term {
    Term::lam("a", ty0(), pure_wp_of(Term::var("a")))
}

/// `(t -> Type0) -> Type0`
pub fn pure_wp_of(t: Term) -> Term {
    Term::arrow(Term::arrow(t, ty0()), ty0())
}

/// `λa:Type0. λx:a. λp:(a -> Type0). p x`
pub fn pure_return_star() -> Term {
    let a = Term::var("a");
    Term::lam(
        "a",
        ty0(),
        Term::lam(
            "x",
            a.clone(),
            Term::lam("p", Term::arrow(a, ty0()), Term::app(Term::var("p"), Term::var("x"))),
        ),
    )
}

/// `λa b. λw1. λw2. λp. w1 (λx. (w2 x) p)`
pub fn pure_bind_star() -> Term {
    let a = Term::var("a");
    let b = Term::var("b");
    let body = Term::app(
        Term::var("w1"),
        Term::lam(
            "x",
            a.clone(),
            Term::app(Term::app(Term::var("w2"), Term::var("x")), Term::var("p")),
        ),
    );
    Term::lam(
        "a",
        ty0(),
        Term::lam(
            "b",
            ty0(),
            Term::lam(
                "w1",
                pure_wp_of(a.clone()),
                Term::lam(
                    "w2",
                    Term::arrow(a, pure_wp_of(b.clone())),
                    Term::lam("p", Term::arrow(b, ty0()), body),
                ),
            ),
        ),
    )
}

impl Signature {
    /// The signature holding only the fixed `Pure` entry.
    pub fn new() -> Signature {
        Signature::default()
    }

    pub fn effects(&self) -> &[EffectDef] {
        &self.effects
    }

    pub fn lifts(&self) -> &[LiftDef] {
        &self.lifts
    }

    pub fn effect(&self, eff: &str) -> Result<&EffectDef, SigError> {
        self.effects
            .iter()
            .find(|d| &*d.name == eff)
            .ok_or_else(|| SigError::UnknownEffect(eff.to_string()))
    }

    pub fn has_effect(&self, eff: &str) -> bool {
        eff == PURE || self.effects.iter().any(|d| &*d.name == eff)
    }

    pub fn lift(&self, from: &str, to: &str) -> Result<&LiftDef, SigError> {
        self.lifts
            .iter()
            .find(|l| &*l.from == from && &*l.to == to)
            .ok_or_else(|| SigError::NoLift(from.to_string(), to.to_string()))
    }

    pub fn action(&self, eff: &str, act: &str) -> Result<&ActionDef, SigError> {
        self.effect(eff)?
            .actions
            .iter()
            .find(|a| &*a.name == act)
            .ok_or_else(|| SigError::UnknownField(eff.to_string(), act.to_string()))
    }

    /// Appends an effect definition; names must be unique.
    pub fn add_effect(&self, def: EffectDef) -> Result<Signature, SigError> {
        if self.has_effect(&def.name) {
            return Err(SigError::Clash(def.name.to_string()));
        }
        let mut s = self.clone();
        s.effects.push(def);
        Ok(s)
    }

    pub fn add_lift(&self, lift: LiftDef) -> Result<Signature, SigError> {
        self.effect(&lift.from)?;
        self.effect(&lift.to)?;
        if self.lift(&lift.from, &lift.to).is_ok() {
            return Err(SigError::Clash(format!("lift {} -> {}", lift.from, lift.to)));
        }
        let mut s = self.clone();
        s.lifts.push(lift);
        Ok(s)
    }

    /// Value of a field, `S.F.field`.
    pub fn lookup(&self, eff: &str, field: &Field) -> Result<Term, SigError> {
        if eff == PURE {
            return match field {
                Field::WpType => Ok(pure_wp_type()),
                Field::ReturnStar => Ok(pure_return_star()),
                Field::BindStar => Ok(pure_bind_star()),
                other => Err(SigError::PartialPure(other.label())),
            };
        }
        let d = self.effect(eff)?;
        Ok(match field {
            Field::WpType => d.wp_type.clone(),
            Field::Repr => d.repr.clone(),
            Field::ReturnStar => d.return_star.clone(),
            Field::BindStar => d.bind_star.clone(),
            Field::UnReturn => d.un_return.clone(),
            Field::UnBind => d.un_bind.clone(),
            Field::ActStar(a) => self.action(eff, a)?.star.clone(),
            Field::UnAct(a) => self.action(eff, a)?.un.clone(),
            Field::LiftStar(to) => self.lift(eff, to)?.star.clone(),
            Field::UnLift(to) => self.lift(eff, to)?.un.clone(),
        })
    }

    /// Declared type of a field.
    pub fn field_type(&self, eff: &str, field: &Field) -> Result<Term, SigError> {
        let c = |f: Field| Term::cnst(eff, f);
        let a = || Term::var("a");
        let b = || Term::var("b");
        let wp_of = |t: Term| -> Term {
            if eff == PURE {
                pure_wp_of(t)
            } else {
                Term::app(c(Field::WpType), t)
            }
        };
        let repr = |t: Term, w: Term| Term::apps(c(Field::Repr), [t, w]);
        let tyabs = |body: Term| Term::pi_tot("a", ty0(), body);
        if eff == PURE && !matches!(field, Field::WpType | Field::ReturnStar | Field::BindStar) {
            return Err(SigError::PartialPure(field.label()));
        }
        let wp_level = if eff == PURE { 1 } else { self.effect(eff)?.wp_level };
        Ok(match field {
            Field::WpType => tyabs(Term::univ(wp_level)),
            Field::Repr => {
                let d = self.effect(eff)?;
                tyabs(Term::pi_tot("w", wp_of(a()), Term::univ(d.repr_level)))
            }
            Field::ReturnStar => tyabs(Term::pi_tot("x", a(), wp_of(a()))),
            Field::BindStar => tyabs(Term::pi_tot(
                "b",
                ty0(),
                Term::pi_tot(
                    "w1",
                    wp_of(a()),
                    Term::pi_tot("w2", Term::pi_tot("x", a(), wp_of(b())), wp_of(b())),
                ),
            )),
            Field::UnReturn => tyabs(Term::pi_tot(
                "x",
                a(),
                repr(a(), Term::apps(c(Field::ReturnStar), [a(), Term::var("x")])),
            )),
            Field::UnBind => {
                let result = repr(
                    b(),
                    Term::apps(c(Field::BindStar), [a(), b(), Term::var("wp1"), Term::var("wp2")]),
                );
                tyabs(Term::pi_tot(
                    "b",
                    ty0(),
                    Term::pi_tot(
                        "wp1",
                        wp_of(a()),
                        Term::pi_tot(
                            "e1",
                            repr(a(), Term::var("wp1")),
                            Term::pi_tot(
                                "wp2",
                                Term::pi_tot("x", a(), wp_of(b())),
                                Term::pi_tot(
                                    "e2",
                                    Term::pi_tot("x", a(), repr(b(), Term::app(Term::var("wp2"), Term::var("x")))),
                                    result,
                                ),
                            ),
                        ),
                    ),
                ))
            }
            Field::ActStar(act) => {
                let d = self.action(eff, act)?;
                action_telescope(d, wp_of(d.result.clone()))
            }
            Field::UnAct(act) => {
                let d = self.action(eff, act)?;
                let star = Term::apps(c(Field::ActStar(act.clone())), action_args(d));
                action_telescope(d, repr(d.result.clone(), star))
            }
            Field::LiftStar(to) => {
                self.lift(eff, to)?;
                let wp_to = Term::app(Term::cnst(to, Field::WpType), a());
                tyabs(Term::pi_tot("w", wp_of(a()), wp_to))
            }
            Field::UnLift(to) => {
                self.lift(eff, to)?;
                let star = Term::apps(c(Field::LiftStar(to.clone())), [a(), Term::var("wp")]);
                let target = Term::apps(Term::cnst(to, Field::Repr), [a(), star]);
                tyabs(Term::pi_tot(
                    "wp",
                    wp_of(a()),
                    Term::pi_tot("e", repr(a(), Term::var("wp")), target),
                ))
            }
        })
    }

    /// Type of a fully applied action for T-Act: `ā:Type0 -> x̄:t̄ -> F t (act* ā x̄)`.
    pub fn action_type(&self, eff: &str, act: &str) -> Result<Term, SigError> {
        let d = self.action(eff, act)?;
        let star = Term::apps(Term::cnst(eff, Field::ActStar(name(act))), action_args(d));
        let mut ty = Term::comp(eff, d.result.clone(), star);
        for (x, t) in d.params.iter().rev() {
            ty = Term::pi(x, t.clone(), ty);
        }
        for a in d.tparams.iter().rev() {
            ty = Term::pi(a, ty0(), ty);
        }
        Ok(ty)
    }
}

fn action_args(d: &ActionDef) -> Vec<Term> {
    d.tparams
        .iter()
        .chain(d.params.iter().map(|(x, _)| x))
        .map(Term::var_n)
        .collect()
}

fn action_telescope(d: &ActionDef, result: Term) -> Term {
    let mut ty = result;
    for (x, t) in d.params.iter().rev() {
        ty = Term::pi_tot(x, t.clone(), ty);
    }
    for a in d.tparams.iter().rev() {
        ty = Term::pi_tot(a, ty0(), ty);
    }
    ty
}

/// One checked field in a well-formedness report.
#[derive(Clone, Debug)]
pub struct FieldCheck {
    pub effect: String,
    pub field: String,
    pub result: Result<(), String>,
}

#[derive(Clone, Debug, Default)]
pub struct WfReport {
    pub checks: Vec<FieldCheck>,
}

impl WfReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.result.is_ok())
    }

    pub fn failures(&self) -> Vec<&FieldCheck> {
        self.checks.iter().filter(|c| c.result.is_err()).collect()
    }
}

/// Checks every field of every definition against its declared type, and the
/// layering discipline: a definition only mentions earlier effects.
pub fn wf_signature(sig: &Signature) -> WfReport {
    let mut report = WfReport::default();
    for (i, d) in sig.effects.iter().enumerate() {
        // Each prefix of the signature is what the definition may see.
        let prefix = Signature {
            effects: sig.effects[..=i].to_vec(),
            lifts: vec![],
        };
        let allowed: Vec<&str> = sig.effects[..=i].iter().map(|d| &*d.name).collect();
        let mut fields = vec![
            (Field::WpType, d.wp_type.clone()),
            (Field::Repr, d.repr.clone()),
            (Field::ReturnStar, d.return_star.clone()),
            (Field::BindStar, d.bind_star.clone()),
            (Field::UnReturn, d.un_return.clone()),
            (Field::UnBind, d.un_bind.clone()),
        ];
        for a in &d.actions {
            fields.push((Field::ActStar(a.name.clone()), a.star.clone()));
            fields.push((Field::UnAct(a.name.clone()), a.un.clone()));
        }
        for (f, value) in fields {
            let result = check_field(&prefix, &d.name, &f, &value, &allowed);
            report.checks.push(FieldCheck {
                effect: d.name.to_string(),
                field: f.label(),
                result,
            });
        }
    }
    for l in &sig.lifts {
        let from_ix = sig.effects.iter().position(|d| d.name == l.from);
        let to_ix = sig.effects.iter().position(|d| d.name == l.to);
        let allowed: Vec<&str> = vec![&l.from, &l.to];
        for f in [Field::LiftStar(l.to.clone()), Field::UnLift(l.to.clone())] {
            let value = if matches!(f, Field::LiftStar(_)) {
                l.star.clone()
            } else {
                l.un.clone()
            };
            let result = match (from_ix, to_ix) {
                (Some(_), Some(_)) => check_field(sig, &l.from, &f, &value, &allowed),
                _ => Err(format!("lift {} -> {} names an undefined effect", l.from, l.to)),
            };
            report.checks.push(FieldCheck {
                effect: l.from.to_string(),
                field: f.label(),
                result,
            });
        }
    }
    report
}

fn check_field(sig: &Signature, eff: &str, f: &Field, value: &Term, allowed: &[&str]) -> Result<(), String> {
    if let Some(bad) = mentions_outside(value, allowed) {
        return Err(format!("{}: refers to `{bad}`, which is not defined earlier", f.label()));
    }
    let ty = sig.field_type(eff, f).map_err(|e| e.to_string())?;
    let ck = Checker::new(sig);
    ck.check_type_of(&Ctx::new(), value, &ty)
        .map_err(|e| format!("{}: {e}", f.label()))
}

fn mentions_outside(t: &Term, allowed: &[&str]) -> Option<String> {
    use crate::syntax::Kind;
    let own = |m: &Name| &**m == PURE || allowed.contains(&&**m);
    match t.kind() {
        Kind::Const(m, _) | Kind::Reflect(m, _) | Kind::Return(m, ..) | Kind::CompTy(m, ..) if !own(m) => {
            return Some(m.to_string())
        }
        Kind::Bind { eff, .. } | Kind::Act { eff, .. } if !own(eff) => return Some(eff.to_string()),
        _ => {}
    }
    t.slots().iter().find_map(|(_, c)| mentions_outside(c, allowed))
}
