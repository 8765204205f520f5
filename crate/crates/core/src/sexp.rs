//! Reader for the s-expression dump produced by [`crate::print::sexp`].

use crate::syntax::{name, Base, Field, Kind, Lit, PrimOp, Term};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SexpError {
    #[error("unexpected end of input")]
    Eof,
    #[error("unexpected `{0}` at offset {1}")]
    Unexpected(String, usize),
    #[error("malformed form `{0}`")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Sx {
    Atom(String),
    List(Vec<Sx>),
}

impl Sx {
    fn atom(&self) -> Option<&str> {
        match self {
            Sx::Atom(a) => Some(a),
            Sx::List(_) => None,
        }
    }
}

fn tokenize(src: &str) -> Vec<(String, usize)> {
    let mut toks = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == ';' {
            while i < bytes.len() && bytes[i] != '\n' {
                i += 1;
            }
        } else if c == '(' || c == ')' {
            toks.push((c.to_string(), i));
            i += 1;
        } else {
            let start = i;
            while i < bytes.len() && !bytes[i].is_whitespace() && bytes[i] != '(' && bytes[i] != ')' {
                i += 1;
            }
            toks.push((bytes[start..i].iter().collect(), start));
        }
    }
    toks
}

pub fn read(src: &str) -> Result<Sx, SexpError> {
    let toks = tokenize(src);
    let mut pos = 0;
    let sx = read_one(&toks, &mut pos)?;
    if pos < toks.len() {
        return Err(SexpError::Unexpected(toks[pos].0.clone(), toks[pos].1));
    }
    Ok(sx)
}

fn read_one(toks: &[(String, usize)], pos: &mut usize) -> Result<Sx, SexpError> {
    let (tok, off) = toks.get(*pos).ok_or(SexpError::Eof)?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match toks.get(*pos) {
                    None => return Err(SexpError::Eof),
                    Some((t, _)) if t == ")" => {
                        *pos += 1;
                        return Ok(Sx::List(items));
                    }
                    _ => items.push(read_one(toks, pos)?),
                }
            }
        }
        ")" => Err(SexpError::Unexpected(")".into(), *off)),
        a => Ok(Sx::Atom(a.to_string())),
    }
}

/// Parses a term from its s-expression form.
pub fn parse_term(src: &str) -> Result<Term, SexpError> {
    to_term(&read(src)?)
}

fn bad(sx: &Sx) -> SexpError {
    SexpError::Malformed(format!("{sx:?}"))
}

fn field(sx: &Sx) -> Result<Field, SexpError> {
    match sx {
        Sx::Atom(a) => Ok(match a.as_str() {
            "wp_type" => Field::WpType,
            "repr" => Field::Repr,
            "return*" => Field::ReturnStar,
            "bind*" => Field::BindStar,
            "un_return" => Field::UnReturn,
            "un_bind" => Field::UnBind,
            _ => return Err(bad(sx)),
        }),
        Sx::List(items) if items.len() == 2 => {
            let arg = name(items[1].atom().ok_or_else(|| bad(sx))?);
            Ok(match items[0].atom() {
                Some("act*") => Field::ActStar(arg),
                Some("un_act") => Field::UnAct(arg),
                Some("lift*") => Field::LiftStar(arg),
                Some("un_lift") => Field::UnLift(arg),
                _ => return Err(bad(sx)),
            })
        }
        _ => Err(bad(sx)),
    }
}

pub fn to_term(sx: &Sx) -> Result<Term, SexpError> {
    match sx {
        Sx::Atom(a) => Ok(match a.as_str() {
            "int" => Term::base(Base::Int),
            "bool" => Term::base(Base::Bool),
            "unit" => Term::base(Base::Unit),
            "tt" => Term::lit(Lit::Unit),
            "true" => Term::bool(true),
            "false" => Term::bool(false),
            "True" => Term::tt(),
            "False" => Term::ff(),
            _ => match a.parse::<i64>() {
                Ok(n) => Term::int(n),
                Err(_) => Term::var(a),
            },
        }),
        Sx::List(items) => {
            let head = items.first().and_then(Sx::atom).ok_or_else(|| bad(sx))?;
            let rest = &items[1..];
            let t = |i: usize| -> Result<Term, SexpError> { to_term(rest.get(i).ok_or_else(|| bad(sx))?) };
            let a = |i: usize| -> Result<String, SexpError> {
                rest.get(i).and_then(Sx::atom).map(str::to_string).ok_or_else(|| bad(sx))
            };
            let arity = |n: usize| if rest.len() == n { Ok(()) } else { Err(bad(sx)) };
            Ok(match head {
                "Type" => {
                    arity(1)?;
                    Term::univ(a(0)?.parse().map_err(|_| bad(sx))?)
                }
                "prim" => {
                    let op = PrimOp::from_symbol(&a(0)?).ok_or_else(|| bad(sx))?;
                    let args = rest[1..].iter().map(to_term).collect::<Result<Vec<_>, _>>()?;
                    Term::prim(op, args)
                }
                "const" => {
                    arity(2)?;
                    Term::new(Kind::Const(name(&a(0)?), field(&rest[1])?))
                }
                "prod" => Term::prod(t(0)?, t(1)?),
                "sum" => Term::sum(t(0)?, t(1)?),
                "pair" => Term::pair(t(0)?, t(1)?),
                "fst" => Term::fst(t(0)?),
                "snd" => Term::snd(t(0)?),
                "inl" => Term::inl(t(0)?, t(1)?),
                "inr" => Term::inr(t(0)?, t(1)?),
                "case" => {
                    arity(7)?;
                    Term::case(t(0)?, &a(1)?, t(2)?, &a(3)?, t(4)?, &a(5)?, t(6)?)
                }
                "if" => Term::ite(t(0)?, t(1)?, t(2)?),
                "refine" => Term::refine(&a(0)?, t(1)?, t(2)?),
                "lam" => Term::lam(&a(0)?, t(1)?, t(2)?),
                "pi" => {
                    let c = t(2)?;
                    if !matches!(c.kind(), Kind::Tot(_) | Kind::CompTy(..)) {
                        return Err(bad(sx));
                    }
                    Term::pi(&a(0)?, t(1)?, c)
                }
                "app" => {
                    if rest.len() < 2 {
                        return Err(bad(sx));
                    }
                    let mut f = t(0)?;
                    for i in 1..rest.len() {
                        f = Term::app(f, t(i)?);
                    }
                    f
                }
                "run" => Term::run(t(0)?),
                "reify" => Term::reify(t(0)?),
                "reflect" => Term::reflect(&a(0)?, t(1)?),
                "return" => Term::ret(&a(0)?, t(1)?, t(2)?),
                "bind" => {
                    arity(8)?;
                    Term::bind(&a(0)?, t(1)?, t(2)?, t(3)?, t(4)?, t(5)?, &a(6)?, t(7)?)
                }
                "lift" => {
                    arity(5)?;
                    Term::lift(&a(0)?, &a(1)?, t(2)?, t(3)?, t(4)?)
                }
                "act" => {
                    let args = rest[2..].iter().map(to_term).collect::<Result<Vec<_>, _>>()?;
                    Term::act(&a(0)?, &a(1)?, args)
                }
                "Tot" => Term::tot(t(0)?),
                "M" => Term::comp(&a(0)?, t(1)?, t(2)?),
                "eq" => Term::eq(t(0)?, t(1)?, t(2)?),
                "implies" => Term::implies(t(0)?, t(1)?),
                "and" => Term::and(t(0)?, t(1)?),
                "forall" => Term::forall(&a(0)?, t(1)?, t(2)?),
                "arrow" => {
                    arity(2)?;
                    Term::arrow(t(0)?, t(1)?)
                }
                _ => return Err(bad(sx)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::print::sexp;

    #[test]
    fn roundtrip_simple() {
        for src in [
            "(lam x int (prim + x 1))",
            "(pi a (Type 0) (Tot (pi x a (M Pure a (lam p (pi _ a (Tot (Type 0))) (app p x))))))",
            "(case s z (Tot int) x x y 0)",
            "(bind Pure int int w1 e1 w2 x (return Pure int x))",
            "(const ST (act* get))",
            "(forall p (pi _ int (Tot (Type 0))) (implies (app p 1) True))",
        ] {
            let t = parse_term(src).unwrap();
            assert_eq!(sexp(&t), src);
        }
    }

    #[test]
    fn app_sugar_is_left_nested() {
        let t = parse_term("(app f a b)").unwrap();
        assert_eq!(sexp(&t), "(app (app f a) b)");
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_term("(lam x)").is_err());
        assert!(parse_term("(lam x int x").is_err());
    }
}
