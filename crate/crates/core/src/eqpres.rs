//! Equality preservation: pairs of equal DM terms translate to terms the
//! validity checker proves equal at the translated type.

use thiserror::Error;

use crate::cps::{cps_checked, cps_type};
use crate::dm::{load, DmDef, FileError, Registry};
use crate::signature::Signature;
use crate::syntax::{Name, Term};
use crate::validity::{validity, Verdict};

pub const SOURCE: &str = include_str!("../../../corpus/equalities.dm");

#[derive(Debug, Error)]
pub enum EqError {
    #[error(transparent)]
    File(#[from] FileError),
    #[error("`{0}_l` has no matching `{0}_r`")]
    Unpaired(String),
    #[error("`{0}`: the two sides have different types")]
    TypeMismatch(String),
}

/// One equality `lhs = rhs : ty`, both closed over `delta`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub delta: Vec<Name>,
    pub lhs: DmDef,
    pub rhs: DmDef,
}

impl Instance {
    /// `lhs* == rhs*` at `ty*`.
    pub fn goal(&self) -> Term {
        Term::eq(
            cps_type(&self.lhs.ty),
            crate::cps::cps_term(&self.lhs.deriv),
            crate::cps::cps_term(&self.rhs.deriv),
        )
    }

    /// Both translations typecheck, then the equation is decided with the
    /// type variables universally quantified.
    pub fn check(&self, sig: &Signature) -> Result<Verdict, String> {
        for d in [&self.lhs, &self.rhs] {
            cps_checked(sig, &self.delta, &[], &d.deriv).map_err(|e| format!("{}: {e}", d.name))?;
        }
        let vars: Vec<(Name, Term)> = self.delta.iter().map(|x| (x.clone(), Term::type0())).collect();
        Ok(validity(sig, &vars, &self.goal()))
    }
}

/// Pairs the `<n>_l` and `<n>_r` definitions of a file.
pub fn instances(src: &str, reg: &Registry) -> Result<Vec<Instance>, EqError> {
    let f = load(src, reg)?;
    let mut out = Vec::new();
    for l in &f.defs {
        let Some(n) = l.name.strip_suffix("_l") else { continue };
        let r = f.def(&format!("{n}_r")).ok_or_else(|| EqError::Unpaired(n.into()))?;
        if l.ty != r.ty {
            return Err(EqError::TypeMismatch(n.into()));
        }
        let mut delta = l.delta.clone();
        for x in &r.delta {
            if !delta.contains(x) {
                delta.push(x.clone());
            }
        }
        out.push(Instance {
            name: n.into(),
            delta,
            lhs: l.clone(),
            rhs: r.clone(),
        });
    }
    Ok(out)
}

/// The bundled suite.
pub fn suite() -> Result<Vec<Instance>, EqError> {
    instances(SOURCE, &Registry::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundled_instance_is_proved() {
        let sig = Signature::new();
        let suite = suite().unwrap();
        assert!(suite.len() >= 20);
        for i in &suite {
            let v = i.check(&sig).unwrap();
            assert!(v.is_valid(), "{}: {v}", i.name);
        }
    }

    #[test]
    fn unequal_sides_are_not_proved() {
        let src = "\
            let swap_l (m:unit -> tau a) (n:unit -> tau b) : tau (a * b) =\n\
              bind x = m () in bind y = n () in return (x, y)\n\
            let swap_r (m:unit -> tau a) (n:unit -> tau b) : tau (a * b) =\n\
              bind y = n () in bind x = m () in return (x, y)\n\
            let off_l (x:int) : int = x + 1\n\
            let off_r (x:int) : int = x + 2\n";
        let sig = Signature::new();
        for i in instances(src, &Registry::default()).unwrap() {
            let v = i.check(&sig).unwrap();
            assert!(!v.is_valid(), "{} was proved", i.name);
        }
    }

    #[test]
    fn unpaired_definitions_are_rejected() {
        let src = "let lone_l (x:int) : int = x\n";
        assert!(matches!(instances(src, &Registry::default()), Err(EqError::Unpaired(_))));
    }
}
