//! DM types and their A/C classification.

use std::fmt;

use thiserror::Error;

use crate::syntax::{Base, Name};

/// Effect marker on arrows and judgments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Eff {
    N,
    Tau,
}

impl fmt::Display for Eff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eff::N => "n",
            Eff::Tau => "tau",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DmType {
    Var(Name),
    Base(Base),
    Arrow(Box<DmType>, Eff, Box<DmType>),
    Sum(Box<DmType>, Box<DmType>),
    Prod(Box<DmType>, Box<DmType>),
}

/// The two well-formed sorts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sort {
    A,
    C,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum IllFormed {
    #[error("unbound type variable `{0}`")]
    Unbound(String),
    #[error("function from a computation to a value type: `{0}`")]
    CompToValue(String),
    #[error("the codomain of a tau-arrow must be a value type: `{0}`")]
    TauCodomain(String),
    #[error("sums of computation types are not allowed: `{0}`")]
    CompSum(String),
    #[error("mixed pair of a value and a computation type: `{0}`")]
    MixedPair(String),
}

impl DmType {
    pub fn var(x: &str) -> DmType {
        DmType::Var(crate::syntax::name(x))
    }
    pub fn int() -> DmType {
        DmType::Base(Base::Int)
    }
    pub fn bool() -> DmType {
        DmType::Base(Base::Bool)
    }
    pub fn unit() -> DmType {
        DmType::Base(Base::Unit)
    }
    pub fn arrow(a: DmType, b: DmType) -> DmType {
        DmType::Arrow(Box::new(a), Eff::N, Box::new(b))
    }
    pub fn tau_arrow(a: DmType, b: DmType) -> DmType {
        DmType::Arrow(Box::new(a), Eff::Tau, Box::new(b))
    }
    pub fn sum(a: DmType, b: DmType) -> DmType {
        DmType::Sum(Box::new(a), Box::new(b))
    }
    pub fn prod(a: DmType, b: DmType) -> DmType {
        DmType::Prod(Box::new(a), Box::new(b))
    }
    pub fn option(a: DmType) -> DmType {
        DmType::sum(DmType::unit(), a)
    }

    /// Type variables in order of first occurrence.
    pub fn type_vars(&self, out: &mut Vec<Name>) {
        match self {
            DmType::Var(x) => {
                if !out.contains(x) {
                    out.push(x.clone())
                }
            }
            DmType::Base(_) => {}
            DmType::Arrow(a, _, b) | DmType::Sum(a, b) | DmType::Prod(a, b) => {
                a.type_vars(out);
                b.type_vars(out);
            }
        }
    }

    pub fn subst(&self, x: &str, t: &DmType) -> DmType {
        match self {
            DmType::Var(y) if &**y == x => t.clone(),
            DmType::Var(_) | DmType::Base(_) => self.clone(),
            DmType::Arrow(a, e, b) => DmType::Arrow(Box::new(a.subst(x, t)), *e, Box::new(b.subst(x, t))),
            DmType::Sum(a, b) => DmType::sum(a.subst(x, t), b.subst(x, t)),
            DmType::Prod(a, b) => DmType::prod(a.subst(x, t), b.subst(x, t)),
        }
    }

    /// First-order matching where the variables in `metas` are holes.
    pub fn match_with(&self, t: &DmType, metas: &[Name], sol: &mut Vec<(Name, DmType)>) -> bool {
        match (self, t) {
            (DmType::Var(x), _) if metas.contains(x) => match sol.iter().find(|(y, _)| y == x) {
                Some((_, prev)) => prev == t,
                None => {
                    sol.push((x.clone(), t.clone()));
                    true
                }
            },
            (DmType::Var(x), DmType::Var(y)) => x == y,
            (DmType::Base(a), DmType::Base(b)) => a == b,
            (DmType::Arrow(a1, e1, b1), DmType::Arrow(a2, e2, b2)) => {
                e1 == e2 && a1.match_with(a2, metas, sol) && b1.match_with(b2, metas, sol)
            }
            (DmType::Sum(a1, b1), DmType::Sum(a2, b2)) | (DmType::Prod(a1, b1), DmType::Prod(a2, b2)) => {
                a1.match_with(a2, metas, sol) && b1.match_with(b2, metas, sol)
            }
            _ => false,
        }
    }
}

/// Classifies `t` in the type-variable context `delta`.
pub fn classify(delta: &[Name], t: &DmType) -> Result<Sort, IllFormed> {
    match t {
        DmType::Var(x) => {
            if delta.contains(x) {
                Ok(Sort::A)
            } else {
                Err(IllFormed::Unbound(x.to_string()))
            }
        }
        DmType::Base(_) => Ok(Sort::A),
        DmType::Arrow(h, Eff::N, h2) => {
            let s1 = classify(delta, h)?;
            match (s1, classify(delta, h2)?) {
                (Sort::A, Sort::A) => Ok(Sort::A),
                (_, Sort::C) => Ok(Sort::C),
                (Sort::C, Sort::A) => Err(IllFormed::CompToValue(t.to_string())),
            }
        }
        DmType::Arrow(h, Eff::Tau, a) => {
            classify(delta, h)?;
            match classify(delta, a)? {
                Sort::A => Ok(Sort::C),
                Sort::C => Err(IllFormed::TauCodomain(t.to_string())),
            }
        }
        DmType::Sum(a, b) => match (classify(delta, a)?, classify(delta, b)?) {
            (Sort::A, Sort::A) => Ok(Sort::A),
            _ => Err(IllFormed::CompSum(t.to_string())),
        },
        DmType::Prod(a, b) => match (classify(delta, a)?, classify(delta, b)?) {
            (Sort::A, Sort::A) => Ok(Sort::A),
            (Sort::C, Sort::C) => Ok(Sort::C),
            _ => Err(IllFormed::MixedPair(t.to_string())),
        },
    }
}

impl fmt::Display for DmType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &DmType, prec: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            // 0: arrow, 1: sum, 2: product, 3: atom
            let paren = match t {
                DmType::Arrow(..) => prec > 0,
                DmType::Sum(..) => prec > 1,
                DmType::Prod(..) => prec > 2,
                _ => false,
            };
            if paren {
                f.write_str("(")?;
            }
            match t {
                DmType::Var(x) => write!(f, "{x}")?,
                DmType::Base(b) => write!(f, "{}", b.as_str())?,
                DmType::Arrow(a, e, b) => {
                    go(a, 1, f)?;
                    f.write_str(" -> ")?;
                    if *e == Eff::Tau {
                        f.write_str("tau ")?;
                        go(b, 3, f)?;
                    } else {
                        go(b, 0, f)?;
                    }
                }
                DmType::Sum(a, b) => {
                    go(a, 2, f)?;
                    f.write_str(" + ")?;
                    go(b, 1, f)?;
                }
                DmType::Prod(a, b) => {
                    go(a, 3, f)?;
                    f.write_str(" * ")?;
                    go(b, 2, f)?;
                }
            }
            if paren {
                f.write_str(")")?;
            }
            Ok(())
        }
        go(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::name;

    fn st(x: DmType) -> DmType {
        DmType::tau_arrow(DmType::int(), DmType::prod(x, DmType::int()))
    }

    #[test]
    fn state_type_is_computational() {
        let delta = [name("X")];
        assert_eq!(classify(&delta, &st(DmType::var("X"))), Ok(Sort::C));
    }

    #[test]
    fn value_arrow() {
        let delta = [name("X")];
        assert_eq!(classify(&delta, &DmType::arrow(DmType::var("X"), DmType::var("X"))), Ok(Sort::A));
    }

    #[test]
    fn comp_to_value_rejected() {
        let t = DmType::arrow(DmType::tau_arrow(DmType::int(), DmType::int()), DmType::int());
        assert!(matches!(classify(&[], &t), Err(IllFormed::CompToValue(_))));
    }

    #[test]
    fn other_violations() {
        let c = DmType::tau_arrow(DmType::unit(), DmType::int());
        assert!(matches!(classify(&[], &DmType::prod(DmType::int(), c.clone())), Err(IllFormed::MixedPair(_))));
        assert!(matches!(classify(&[], &DmType::sum(c.clone(), c.clone())), Err(IllFormed::CompSum(_))));
        assert!(matches!(classify(&[], &DmType::tau_arrow(DmType::int(), c)), Err(IllFormed::TauCodomain(_))));
        assert!(matches!(classify(&[], &DmType::var("Y")), Err(IllFormed::Unbound(_))));
    }

    #[test]
    fn printing() {
        assert_eq!(st(DmType::var("a")).to_string(), "int -> tau (a * int)");
        let cont = DmType::tau_arrow(DmType::tau_arrow(DmType::var("a"), DmType::int()), DmType::int());
        assert_eq!(cont.to_string(), "(a -> tau int) -> tau int");
    }
}
