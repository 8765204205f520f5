//! `.dm` files: an optional effect header, type abbreviations and
//! top-level definitions.
//!
//! ```text
//! effect ST { carrier = st; actions = [get; put]; }
//! type st a = int -> tau (a * int)
//! let return (x:a) : st a = fun s0 -> x, s0
//! ```

use std::collections::HashMap;

use thiserror::Error;

use super::desugar::{desugar_direct, Aliases, DesugarError, Globals};
use super::parse::{parse_items, Item, ParseError, Pat, Pos, TyExpr};
use super::term::DmTerm;
use super::types::{classify, DmType, Eff, Sort};
use super::typing::{typecheck_dm, Deriv, DmCtx, DmError};
use crate::syntax::{name, Name};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum FileError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Desugar(#[from] DesugarError),
    #[error("`{def}`: {err}")]
    Typing { def: String, err: DmError },
    #[error("{pos}: {msg}")]
    Header { pos: Pos, msg: String },
    #[error("`{def}`: {msg}")]
    Shape { def: String, msg: String },
}

fn header<T>(pos: Pos, msg: impl Into<String>) -> Result<T, FileError> {
    Err(FileError::Header { pos, msg: msg.into() })
}

fn shape<T>(def: &str, msg: impl Into<String>) -> Result<T, FileError> {
    Err(FileError::Shape {
        def: def.to_string(),
        msg: msg.into(),
    })
}

/// A checked top-level definition.
#[derive(Clone, Debug, PartialEq)]
pub struct DmDef {
    pub name: Name,
    pub delta: Vec<Name>,
    pub ty: DmType,
    pub term: DmTerm,
    pub deriv: Deriv,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DmLift {
    pub from: Name,
    pub def: DmDef,
}

/// A monad definition: `C(a)` is `carrier` with `param` free.
#[derive(Clone, Debug, PartialEq)]
pub struct DmEffect {
    pub name: Name,
    pub param: Name,
    pub carrier: DmType,
    pub ret: DmDef,
    pub bind: DmDef,
    pub actions: Vec<DmDef>,
    pub lifts: Vec<DmLift>,
}

impl DmEffect {
    /// `C(t)`
    pub fn carrier_at(&self, t: &DmType) -> DmType {
        self.carrier.subst(&self.param, t)
    }

    pub fn defs(&self) -> Vec<&DmDef> {
        let mut out = vec![&self.ret, &self.bind];
        out.extend(self.actions.iter());
        out.extend(self.lifts.iter().map(|l| &l.def));
        out
    }
}

/// Aliases and effect carriers visible to later files.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    pub aliases: Aliases,
    pub effects: HashMap<Name, DmEffect>,
}

impl Registry {
    pub fn add(&mut self, f: &DmFile) {
        self.aliases.extend(&f.aliases);
        if let Some(e) = &f.effect {
            self.effects.insert(e.name.clone(), e.clone());
        }
    }
}

#[derive(Clone, Debug)]
pub struct DmFile {
    pub aliases: Aliases,
    pub effect: Option<DmEffect>,
    /// Definitions that are not part of an effect, in order.
    pub defs: Vec<DmDef>,
}

impl DmFile {
    pub fn def(&self, n: &str) -> Option<&DmDef> {
        self.defs
            .iter()
            .chain(self.effect.iter().flat_map(|e| e.defs()))
            .find(|d| &*d.name == n)
    }
}

struct Header {
    name: Name,
    carrier: Name,
    actions: Vec<Name>,
    lifts: Vec<Name>,
    pos: Pos,
}

fn read_header(name: &Name, fields: &[(Name, Vec<Name>)], pos: Pos) -> Result<Header, FileError> {
    let mut h = Header {
        name: name.clone(),
        carrier: name.clone(),
        actions: vec![],
        lifts: vec![],
        pos,
    };
    let mut seen_carrier = false;
    for (k, vs) in fields {
        match &**k {
            "carrier" => {
                if vs.len() != 1 {
                    return header(pos, "`carrier` takes one type name");
                }
                h.carrier = vs[0].clone();
                seen_carrier = true;
            }
            "actions" => h.actions = vs.clone(),
            "lifts" => h.lifts = vs.clone(),
            _ => return header(pos, format!("unknown header field `{k}`")),
        }
    }
    if !seen_carrier {
        return header(pos, "missing `carrier`");
    }
    Ok(h)
}

/// Declared type of `let f (x1:t1) ... : r = body`.
fn declared(aliases: &Aliases, params: &[super::parse::Param], ret: &TyExpr) -> Result<DmType, DesugarError> {
    let (mut out, tau) = match ret {
        TyExpr::Con(c, args, _) if &**c == "tau" => (aliases.resolve(&args[0])?, true),
        t => (aliases.resolve(t)?, false),
    };
    if tau && params.is_empty() {
        let pos = match ret {
            TyExpr::Con(_, _, p) => *p,
            _ => Pos::default(),
        };
        return Err(DesugarError {
            pos,
            msg: "`tau` result needs a parameter".into(),
        });
    }
    for (i, p) in params.iter().enumerate().rev() {
        let dom = match (&p.ty, &p.pat) {
            (Some(t), _) => aliases.resolve(t)?,
            (None, Pat::Unit) => DmType::unit(),
            (None, _) => {
                return Err(DesugarError {
                    pos: Pos::default(),
                    msg: "top-level parameters need type annotations".into(),
                })
            }
        };
        let eff = if tau && i + 1 == params.len() { Eff::Tau } else { Eff::N };
        out = DmType::Arrow(Box::new(dom), eff, Box::new(out));
    }
    Ok(out)
}

fn check_def(
    aliases: &Aliases,
    globals: &Globals,
    n: &Name,
    params: &[super::parse::Param],
    ret: &Option<TyExpr>,
    body: &super::parse::Ex,
    pos: Pos,
) -> Result<DmDef, FileError> {
    let Some(ret) = ret else {
        return Err(DesugarError {
            pos,
            msg: format!("`{n}` needs a result type annotation"),
        }
        .into());
    };
    let ty = declared(aliases, params, ret)?;
    let mut delta = Vec::new();
    ty.type_vars(&mut delta);
    if let Err(e) = classify(&delta, &ty) {
        return Err(DesugarError { pos, msg: e.to_string() }.into());
    }
    let e = if params.is_empty() {
        body.clone()
    } else {
        super::parse::Ex {
            kind: super::parse::ExKind::Fun(params.to_vec(), Box::new(body.clone())),
            pos,
        }
    };
    let (term, _) = desugar_direct(aliases, globals, &delta, &e, &ty)?;
    let deriv = typecheck_dm(&DmCtx::new(delta.clone()), &term).map_err(|err| FileError::Typing {
        def: n.to_string(),
        err,
    })?;
    if deriv.ty != ty || deriv.eff != Eff::N {
        return shape(n, format!("desugared to {} ! {}, declared {ty}", deriv.ty, deriv.eff));
    }
    Ok(DmDef {
        name: n.clone(),
        delta,
        ty,
        term,
        deriv,
    })
}

/// Checks `d.ty` is an instance of `pattern` whose holes are exactly Δ,
/// each mapped to a distinct type variable.
fn expect_shape(d: &DmDef, pattern: &DmType, holes: &[Name], what: &str) -> Result<(), FileError> {
    let mut sol = Vec::new();
    let ok = pattern.match_with(&d.ty, holes, &mut sol)
        && sol.len() == holes.len()
        && sol.iter().all(|(_, t)| matches!(t, DmType::Var(_)))
        && {
            let mut vs: Vec<&DmType> = sol.iter().map(|(_, t)| t).collect();
            vs.dedup();
            vs.len() == sol.len()
        };
    if ok {
        Ok(())
    } else {
        shape(&d.name, format!("expected {what} of shape {pattern}, found {}", d.ty))
    }
}

/// Loads a file; earlier effects and aliases come from `reg`.
pub fn load(src: &str, reg: &Registry) -> Result<DmFile, FileError> {
    let items = parse_items(src)?;
    let mut aliases = reg.aliases.clone();
    let mut own_aliases = Aliases::default();
    let mut globals = Globals::new();
    let mut hdr = None;
    let mut defs: Vec<DmDef> = Vec::new();
    for it in &items {
        match it {
            Item::Header { name, fields, pos } => {
                if hdr.is_some() {
                    return header(*pos, "one effect per file");
                }
                hdr = Some(read_header(name, fields, *pos)?);
            }
            Item::Type { name, params, body, .. } => {
                aliases.insert(name.clone(), params.clone(), body.clone());
                own_aliases.insert(name.clone(), params.clone(), body.clone());
            }
            Item::Let {
                name,
                params,
                ret,
                body,
                pos,
            } => {
                let d = check_def(&aliases, &globals, name, params, ret, body, *pos)?;
                if defs.iter().any(|e| e.name == d.name) {
                    return shape(name, "defined twice");
                }
                if d.delta.is_empty() {
                    globals.insert(d.name.clone(), (d.term.clone(), d.ty.clone()));
                }
                defs.push(d);
            }
        }
    }
    let effect = match hdr {
        None => None,
        Some(h) => Some(assemble(h, &aliases, reg, &mut defs)?),
    };
    Ok(DmFile {
        aliases: own_aliases,
        effect,
        defs,
    })
}

fn take(defs: &mut Vec<DmDef>, n: &str, pos: Pos) -> Result<DmDef, FileError> {
    match defs.iter().position(|d| &*d.name == n) {
        Some(i) => Ok(defs.remove(i)),
        None => header(pos, format!("missing definition `{n}`")),
    }
}

fn assemble(h: Header, aliases: &Aliases, reg: &Registry, defs: &mut Vec<DmDef>) -> Result<DmEffect, FileError> {
    let Some((params, body)) = aliases.get(&h.carrier).cloned() else {
        return header(h.pos, format!("unknown carrier type `{}`", h.carrier));
    };
    if params.len() != 1 {
        return header(h.pos, "the carrier must take exactly one type parameter");
    }
    if reg.effects.contains_key(&h.name) {
        return header(h.pos, format!("effect `{}` is already defined", h.name));
    }
    let param = params[0].clone();
    let carrier = aliases.resolve(&body)?;
    if classify(std::slice::from_ref(&param), &carrier) != Ok(Sort::C) {
        return header(h.pos, format!("carrier {carrier} is not a computation type"));
    }
    let c = |t: DmType| carrier.subst(&param, &t);
    let (a, b) = (name("?a"), name("?b"));
    let (va, vb) = (DmType::Var(a.clone()), DmType::Var(b.clone()));

    let ret = take(defs, "return", h.pos)?;
    expect_shape(&ret, &DmType::arrow(va.clone(), c(va.clone())), &[a.clone()], "return")?;
    let bind = take(defs, "bind", h.pos)?;
    let bind_shape = DmType::arrow(
        c(va.clone()),
        DmType::arrow(DmType::arrow(va.clone(), c(vb.clone())), c(vb.clone())),
    );
    expect_shape(&bind, &bind_shape, &[a.clone(), b.clone()], "bind")?;

    let mut actions = Vec::new();
    for an in &h.actions {
        let d = take(defs, an, h.pos)?;
        let mut t = &d.ty;
        while let DmType::Arrow(dom, Eff::N, cod) = t {
            if classify(&d.delta, dom) != Ok(Sort::A) {
                break;
            }
            t = cod;
        }
        let mut sol = Vec::new();
        if !carrier.match_with(t, std::slice::from_ref(&param), &mut sol) {
            return shape(an, format!("action result {t} is not an instance of {carrier}"));
        }
        actions.push(d);
    }

    let mut lifts = Vec::new();
    for from in &h.lifts {
        let Some(src) = reg.effects.get(from) else {
            return header(h.pos, format!("lift from unknown effect `{from}`"));
        };
        let n = if h.lifts.len() == 1 {
            "lift".to_string()
        } else {
            format!("lift_{from}")
        };
        let d = take(defs, &n, h.pos)?;
        let pat = DmType::arrow(src.carrier_at(&va), c(va.clone()));
        expect_shape(&d, &pat, std::slice::from_ref(&a), "lift")?;
        lifts.push(DmLift { from: from.clone(), def: d });
    }
    Ok(DmEffect {
        name: h.name,
        param,
        carrier,
        ret,
        bind,
        actions,
        lifts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const ST: &str = "
effect ST { carrier = st; actions = [get; put]; }
type st a = int -> tau (a * int)
let return (x:a) : st a = fun s0 -> x, s0
let bind (f:st a) (g:a -> st b) : st b =
  fun s0 -> let x, s1 = f s0 in g x s1
let get () : st int = fun s0 -> s0, s0
let put (x:int) : st unit = fun _ -> (), x
";

    #[test]
    fn loads_state() {
        let f = load(ST, &Registry::default()).unwrap();
        let e = f.effect.unwrap();
        assert_eq!(e.carrier.to_string(), "int -> tau (a * int)");
        assert_eq!(e.actions.len(), 2);
        assert_eq!(e.ret.delta, vec![name("a")]);
        assert_eq!(e.bind.delta, vec![name("a"), name("b")]);
        assert_eq!(e.actions[0].ty.to_string(), "unit -> int -> tau (int * int)");
    }

    #[test]
    fn lift_needs_known_effect() {
        let src = "effect E { carrier = st; lifts = [ST]; }\ntype st a = int -> tau (a * int)";
        assert!(matches!(load(src, &Registry::default()), Err(FileError::Header { .. })));
    }

    #[test]
    fn wrong_return_shape() {
        let src = ST.replace("let return (x:a) : st a = fun s0 -> x, s0", "let return (x:int) : st int = fun s0 -> x, s0");
        assert!(matches!(load(&src, &Registry::default()), Err(FileError::Shape { .. })));
    }

    #[test]
    fn helpers_are_inlined() {
        let src = "let inc (x:int) : int = x + 1\nlet main () : int = inc (inc 1)";
        let f = load(src, &Registry::default()).unwrap();
        let m = f.def("main").unwrap();
        assert_eq!(m.term.to_string(), "fun (_u:unit) -> (fun (x:int) -> x + 1) ((fun (x1:int) -> x1 + 1) 1)");
    }
}
