//! Lexer and parser for the ML-style surface syntax of DM.

use std::fmt;

use thiserror::Error;

use crate::syntax::{name, Name, PrimOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{pos}: {msg}")]
pub struct ParseError {
    pub pos: Pos,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "{s}"),
            Tok::Int(n) => write!(f, "{n}"),
            Tok::Sym(s) => write!(f, "{s}"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const SYMS: &[&str] = &[
    "->", "&&", "||", "(", ")", ",", ":", "=", "|", "+", "-", "*", "<", ";", "[", "]", "{", "}",
];

pub fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let adv = |i: &mut usize, line: &mut u32, col: &mut u32, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c.is_whitespace() {
            adv(&mut i, &mut line, &mut col, c);
        } else if c == '(' && chars.get(i + 1) == Some(&'*') {
            let mut depth = 0;
            loop {
                if i >= chars.len() {
                    return Err(ParseError {
                        pos,
                        msg: "unterminated comment".into(),
                    });
                }
                if chars[i] == '(' && chars.get(i + 1) == Some(&'*') {
                    depth += 1;
                    adv(&mut i, &mut line, &mut col, '(');
                    adv(&mut i, &mut line, &mut col, '*');
                } else if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    depth -= 1;
                    adv(&mut i, &mut line, &mut col, '*');
                    adv(&mut i, &mut line, &mut col, ')');
                    if depth == 0 {
                        break;
                    }
                } else {
                    let ch = chars[i];
                    adv(&mut i, &mut line, &mut col, ch);
                }
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                adv(&mut i, &mut line, &mut col, 'x');
            }
            let s: String = chars[start..i].iter().collect();
            let n = s.parse().map_err(|_| ParseError {
                pos,
                msg: format!("integer literal `{s}` out of range"),
            })?;
            out.push((Tok::Int(n), pos));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                adv(&mut i, &mut line, &mut col, 'x');
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), pos));
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let sym = SYMS.iter().find(|s| rest.starts_with(**s)).ok_or_else(|| ParseError {
                pos,
                msg: format!("unexpected character `{c}`"),
            })?;
            for _ in 0..sym.len() {
                adv(&mut i, &mut line, &mut col, 'x');
            }
            out.push((Tok::Sym(sym), pos));
        }
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "let", "in", "fun", "match", "with", "if", "then", "else", "bind", "return", "true", "false", "type", "effect",
    "not", "fst", "snd", "inl", "inr", "Some", "None", "tau",
];

/// Surface types, resolved against aliases during desugaring.
#[derive(Clone, Debug, PartialEq)]
pub enum TyExpr {
    Con(Name, Vec<TyExpr>, Pos),
    Arrow(Box<TyExpr>, bool, Box<TyExpr>),
    Sum(Box<TyExpr>, Box<TyExpr>),
    Prod(Box<TyExpr>, Box<TyExpr>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Pat {
    Var(Name),
    Wild,
    Unit,
    Pair(Box<Pat>, Box<Pat>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub pat: Pat,
    pub ty: Option<TyExpr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Arm {
    pub side: Side,
    pub pat: Pat,
    pub body: Ex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ex {
    pub kind: ExKind,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExKind {
    Var(Name),
    Int(i64),
    Bool(bool),
    Unit,
    Op(PrimOp, Vec<Ex>),
    If(Box<Ex>, Box<Ex>, Box<Ex>),
    Fun(Vec<Param>, Box<Ex>),
    App(Box<Ex>, Box<Ex>),
    Tuple(Box<Ex>, Box<Ex>),
    Fst(Box<Ex>),
    Snd(Box<Ex>),
    Inl(Box<Ex>),
    Inr(Box<Ex>),
    Match(Box<Ex>, Vec<Arm>),
    Let(Pat, Option<TyExpr>, Box<Ex>, Box<Ex>),
    Bind(Pat, Box<Ex>, Box<Ex>),
    Return(Box<Ex>),
    Annot(Box<Ex>, TyExpr),
}

/// A top-level item.
#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Header {
        name: Name,
        fields: Vec<(Name, Vec<Name>)>,
        pos: Pos,
    },
    Type {
        name: Name,
        params: Vec<Name>,
        body: TyExpr,
        pos: Pos,
    },
    Let {
        name: Name,
        params: Vec<Param>,
        ret: Option<TyExpr>,
        body: Ex,
        pos: Pos,
    },
}

pub struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

type R<T> = Result<T, ParseError>;

impl Parser {
    pub fn new(src: &str) -> R<Parser> {
        Ok(Parser { toks: lex(src)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].0
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn fail<T>(&self, msg: impl Into<String>) -> R<T> {
        Err(ParseError {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> R<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.fail(format!("expected `{s}`, found `{}`", self.peek()))
        }
    }

    fn expect_kw(&mut self, s: &str) -> R<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.fail(format!("expected `{s}`, found `{}`", self.peek()))
        }
    }

    fn ident(&mut self) -> R<Name> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(name(&s))
            }
            t => self.fail(format!("expected an identifier, found `{t}`")),
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Tok::Eof
    }

    // ---- types

    pub fn ty(&mut self) -> R<TyExpr> {
        let lhs = self.ty_sum()?;
        if self.eat_sym("->") {
            if self.eat_kw("tau") {
                let cod = self.ty_app()?;
                return Ok(TyExpr::Arrow(Box::new(lhs), true, Box::new(cod)));
            }
            let cod = self.ty()?;
            return Ok(TyExpr::Arrow(Box::new(lhs), false, Box::new(cod)));
        }
        Ok(lhs)
    }

    fn ty_sum(&mut self) -> R<TyExpr> {
        let l = self.ty_prod()?;
        if self.eat_sym("+") {
            let r = self.ty_sum()?;
            return Ok(TyExpr::Sum(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn ty_prod(&mut self) -> R<TyExpr> {
        let l = self.ty_app()?;
        if self.eat_sym("*") {
            let r = self.ty_prod()?;
            return Ok(TyExpr::Prod(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn ty_app(&mut self) -> R<TyExpr> {
        if self.is_sym("(") {
            return self.ty_atom();
        }
        let pos = self.pos();
        let head = self.ident()?;
        let mut args = Vec::new();
        while self.is_sym("(") || matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str())) {
            args.push(self.ty_atom()?);
        }
        Ok(TyExpr::Con(head, args, pos))
    }

    fn ty_atom(&mut self) -> R<TyExpr> {
        if self.eat_sym("(") {
            let t = self.ty()?;
            self.expect_sym(")")?;
            return Ok(t);
        }
        let pos = self.pos();
        Ok(TyExpr::Con(self.ident()?, vec![], pos))
    }

    // ---- patterns and parameters

    fn pat(&mut self) -> R<Pat> {
        let p = self.pat_atom()?;
        if self.eat_sym(",") {
            let q = self.pat()?;
            return Ok(Pat::Pair(Box::new(p), Box::new(q)));
        }
        Ok(p)
    }

    fn pat_atom(&mut self) -> R<Pat> {
        if self.eat_sym("(") {
            if self.eat_sym(")") {
                return Ok(Pat::Unit);
            }
            let p = self.pat()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        if self.eat_kw("_") {
            return Ok(Pat::Wild);
        }
        Ok(Pat::Var(self.ident()?))
    }

    fn param(&mut self) -> R<Param> {
        if self.is_sym("(") {
            let save = self.i;
            self.bump();
            if self.eat_sym(")") {
                return Ok(Param { pat: Pat::Unit, ty: None });
            }
            let pat = self.pat()?;
            if self.eat_sym(":") {
                let ty = self.ty()?;
                self.expect_sym(")")?;
                return Ok(Param { pat, ty: Some(ty) });
            }
            if self.eat_sym(")") {
                return Ok(Param { pat, ty: None });
            }
            self.i = save;
            return self.fail("malformed parameter");
        }
        Ok(Param {
            pat: self.pat_atom()?,
            ty: None,
        })
    }

    fn starts_param(&self) -> bool {
        self.is_sym("(") || matches!(self.peek(), Tok::Ident(s) if s == "_" || !KEYWORDS.contains(&s.as_str()))
    }

    // ---- expressions

    pub fn expr(&mut self) -> R<Ex> {
        let pos = self.pos();
        let mk = |kind| Ok(Ex { kind, pos });
        if self.eat_kw("fun") {
            let mut params = Vec::new();
            while !self.is_sym("->") {
                params.push(self.param()?);
            }
            if params.is_empty() {
                return self.fail("`fun` needs at least one parameter");
            }
            self.expect_sym("->")?;
            let body = self.expr()?;
            return mk(ExKind::Fun(params, Box::new(body)));
        }
        if self.eat_kw("let") {
            let pat = self.pat()?;
            let ty = if self.eat_sym(":") { Some(self.ty()?) } else { None };
            self.expect_sym("=")?;
            let e1 = self.expr()?;
            self.expect_kw("in")?;
            let e2 = self.expr()?;
            return mk(ExKind::Let(pat, ty, Box::new(e1), Box::new(e2)));
        }
        if self.eat_kw("bind") {
            let pat = self.pat()?;
            self.expect_sym("=")?;
            let e1 = self.expr()?;
            self.expect_kw("in")?;
            let e2 = self.expr()?;
            return mk(ExKind::Bind(pat, Box::new(e1), Box::new(e2)));
        }
        if self.eat_kw("if") {
            let c = self.expr()?;
            self.expect_kw("then")?;
            let a = self.expr()?;
            self.expect_kw("else")?;
            let b = self.expr()?;
            return mk(ExKind::If(Box::new(c), Box::new(a), Box::new(b)));
        }
        if self.eat_kw("match") {
            let scrut = self.expr()?;
            self.expect_kw("with")?;
            let mut arms = Vec::new();
            while self.eat_sym("|") {
                arms.push(self.arm()?);
            }
            if arms.len() != 2 || arms[0].side == arms[1].side {
                return Err(ParseError {
                    pos,
                    msg: "a match needs exactly one left and one right arm".into(),
                });
            }
            return mk(ExKind::Match(Box::new(scrut), arms));
        }
        self.tuple()
    }

    fn arm(&mut self) -> R<Arm> {
        let (side, pat) = if self.eat_kw("inl") {
            (Side::Left, self.pat_atom()?)
        } else if self.eat_kw("inr") {
            (Side::Right, self.pat_atom()?)
        } else if self.eat_kw("None") {
            (Side::Left, Pat::Wild)
        } else if self.eat_kw("Some") {
            (Side::Right, self.pat_atom()?)
        } else {
            return self.fail(format!("expected a constructor pattern, found `{}`", self.peek()));
        };
        self.expect_sym("->")?;
        Ok(Arm {
            side,
            pat,
            body: self.expr()?,
        })
    }

    fn tuple(&mut self) -> R<Ex> {
        let pos = self.pos();
        let a = self.binary(0)?;
        if self.eat_sym(",") {
            let b = self.expr()?;
            return Ok(Ex {
                kind: ExKind::Tuple(Box::new(a), Box::new(b)),
                pos,
            });
        }
        Ok(a)
    }

    fn binary(&mut self, level: usize) -> R<Ex> {
        const LEVELS: &[&[&str]] = &[&["||"], &["&&"], &["=", "<"], &["+", "-"], &["*"]];
        if level == LEVELS.len() {
            return self.app();
        }
        let pos = self.pos();
        let mut lhs = self.binary(level + 1)?;
        loop {
            let op = match self.peek() {
                Tok::Sym(s) if LEVELS[level].contains(s) => *s,
                _ => break,
            };
            self.bump();
            let rhs = self.binary(level + 1)?;
            let prim = PrimOp::from_symbol(op).expect("operator");
            lhs = Ex {
                kind: ExKind::Op(prim, vec![lhs, rhs]),
                pos,
            };
            if level == 2 {
                break;
            }
        }
        Ok(lhs)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::Int(_) => true,
            Tok::Sym(s) => *s == "(",
            Tok::Ident(s) => !KEYWORDS.contains(&s.as_str()) || matches!(s.as_str(), "true" | "false" | "None"),
            Tok::Eof => false,
        }
    }

    fn app(&mut self) -> R<Ex> {
        let pos = self.pos();
        type Unary = fn(Box<Ex>) -> ExKind;
        let unary: Option<Unary> = match self.peek() {
            Tok::Ident(s) => match s.as_str() {
                "not" => Some(|e| ExKind::Op(PrimOp::Not, vec![*e])),
                "fst" => Some(ExKind::Fst),
                "snd" => Some(ExKind::Snd),
                "inl" => Some(ExKind::Inl),
                "inr" | "Some" => Some(ExKind::Inr),
                "return" => Some(ExKind::Return),
                _ => None,
            },
            _ => None,
        };
        if let Some(k) = unary {
            self.bump();
            let arg = self.atom()?;
            return Ok(Ex { kind: k(Box::new(arg)), pos });
        }
        let mut f = self.atom()?;
        while self.starts_atom() {
            let a = self.atom()?;
            f = Ex {
                kind: ExKind::App(Box::new(f), Box::new(a)),
                pos,
            };
        }
        Ok(f)
    }

    fn atom(&mut self) -> R<Ex> {
        let pos = self.pos();
        let mk = |kind| Ok(Ex { kind, pos });
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                mk(ExKind::Int(n))
            }
            Tok::Sym("-") if matches!(self.peek_at(1), Tok::Int(_)) => {
                self.bump();
                let Tok::Int(n) = self.bump() else { unreachable!() };
                mk(ExKind::Int(-n))
            }
            Tok::Sym("(") => {
                self.bump();
                if self.eat_sym(")") {
                    return mk(ExKind::Unit);
                }
                let e = self.expr()?;
                if self.eat_sym(":") {
                    let t = self.ty()?;
                    self.expect_sym(")")?;
                    return mk(ExKind::Annot(Box::new(e), t));
                }
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                mk(ExKind::Bool(s == "true"))
            }
            Tok::Ident(s) if s == "None" => {
                self.bump();
                mk(ExKind::Inl(Box::new(Ex { kind: ExKind::Unit, pos })))
            }
            Tok::Ident(s) if s == "fst" || s == "snd" || s == "inl" || s == "inr" || s == "Some" || s == "not" || s == "return" => {
                self.app()
            }
            Tok::Ident(_) => mk(ExKind::Var(self.ident()?)),
            t => self.fail(format!("unexpected `{t}`")),
        }
    }

    // ---- items

    pub fn item(&mut self) -> R<Item> {
        let pos = self.pos();
        if self.eat_kw("effect") {
            let name = self.ident()?;
            self.expect_sym("{")?;
            let mut fields = Vec::new();
            while !self.eat_sym("}") {
                let key = self.ident()?;
                self.expect_sym("=")?;
                let mut vals = Vec::new();
                if self.eat_sym("[") {
                    while !self.eat_sym("]") {
                        vals.push(self.ident()?);
                        if !self.eat_sym(";") && !self.is_sym("]") {
                            return self.fail("expected `;` or `]`");
                        }
                    }
                } else {
                    vals.push(self.ident()?);
                }
                self.expect_sym(";")?;
                fields.push((key, vals));
            }
            return Ok(Item::Header { name, fields, pos });
        }
        if self.eat_kw("type") {
            let name = self.ident()?;
            let mut params = Vec::new();
            while !self.is_sym("=") {
                params.push(self.ident()?);
            }
            self.expect_sym("=")?;
            let body = self.ty()?;
            return Ok(Item::Type { name, params, body, pos });
        }
        self.expect_kw("let")?;
        let name = match self.peek().clone() {
            Tok::Ident(s) if s == "return" || s == "bind" => {
                self.bump();
                crate::syntax::name(&s)
            }
            _ => self.ident()?,
        };
        let mut params = Vec::new();
        while self.starts_param() && !self.is_sym(":") {
            params.push(self.param()?);
        }
        let ret = if self.eat_sym(":") {
            if self.eat_kw("tau") {
                let t = self.ty_app()?;
                Some(TyExpr::Con(crate::syntax::name("tau"), vec![t], pos))
            } else {
                Some(self.ty()?)
            }
        } else {
            None
        };
        self.expect_sym("=")?;
        let body = self.expr()?;
        Ok(Item::Let {
            name,
            params,
            ret,
            body,
            pos,
        })
    }

    pub fn items(&mut self) -> R<Vec<Item>> {
        let mut out = Vec::new();
        while !self.at_eof() {
            out.push(self.item()?);
        }
        Ok(out)
    }
}

pub fn parse_expr(src: &str) -> R<Ex> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if !p.at_eof() {
        return p.fail(format!("unexpected `{}` after expression", p.peek()));
    }
    Ok(e)
}

pub fn parse_type(src: &str) -> R<TyExpr> {
    let mut p = Parser::new(src)?;
    let t = p.ty()?;
    if !p.at_eof() {
        return p.fail(format!("unexpected `{}` after type", p.peek()));
    }
    Ok(t)
}

pub fn parse_items(src: &str) -> R<Vec<Item>> {
    Parser::new(src)?.items()
}

impl Pat {
    pub fn sexp(&self) -> String {
        match self {
            Pat::Var(x) => x.to_string(),
            Pat::Wild => "_".into(),
            Pat::Unit => "()".into(),
            Pat::Pair(a, b) => format!("(pair {} {})", a.sexp(), b.sexp()),
        }
    }
}

impl TyExpr {
    pub fn sexp(&self) -> String {
        match self {
            TyExpr::Con(c, args, _) if args.is_empty() => c.to_string(),
            TyExpr::Con(c, args, _) => {
                let a: Vec<String> = args.iter().map(|a| a.sexp()).collect();
                format!("({c} {})", a.join(" "))
            }
            TyExpr::Arrow(a, tau, b) => format!("({} {} {})", if *tau { "~>" } else { "->" }, a.sexp(), b.sexp()),
            TyExpr::Sum(a, b) => format!("(+ {} {})", a.sexp(), b.sexp()),
            TyExpr::Prod(a, b) => format!("(* {} {})", a.sexp(), b.sexp()),
        }
    }
}

impl Ex {
    /// Parsed-AST dump.
    pub fn sexp(&self) -> String {
        let s = |e: &Ex| e.sexp();
        match &self.kind {
            ExKind::Var(x) => x.to_string(),
            ExKind::Int(n) => n.to_string(),
            ExKind::Bool(b) => b.to_string(),
            ExKind::Unit => "()".into(),
            ExKind::Op(op, args) => {
                let a: Vec<String> = args.iter().map(s).collect();
                format!("({} {})", op.symbol(), a.join(" "))
            }
            ExKind::If(c, a, b) => format!("(if {} {} {})", s(c), s(a), s(b)),
            ExKind::Fun(ps, b) => {
                let p: Vec<String> = ps
                    .iter()
                    .map(|p| match &p.ty {
                        Some(t) => format!("({} {})", p.pat.sexp(), t.sexp()),
                        None => p.pat.sexp(),
                    })
                    .collect();
                format!("(fun ({}) {})", p.join(" "), s(b))
            }
            ExKind::App(f, a) => format!("(app {} {})", s(f), s(a)),
            ExKind::Tuple(a, b) => format!("(tuple {} {})", s(a), s(b)),
            ExKind::Fst(e) => format!("(fst {})", s(e)),
            ExKind::Snd(e) => format!("(snd {})", s(e)),
            ExKind::Inl(e) => format!("(inl {})", s(e)),
            ExKind::Inr(e) => format!("(inr {})", s(e)),
            ExKind::Match(e, arms) => {
                let a: Vec<String> = arms
                    .iter()
                    .map(|a| {
                        let side = if a.side == Side::Left { "inl" } else { "inr" };
                        format!("({side} {} {})", a.pat.sexp(), s(&a.body))
                    })
                    .collect();
                format!("(match {} {})", s(e), a.join(" "))
            }
            ExKind::Let(p, t, a, b) => match t {
                Some(t) => format!("(let {} {} {} {})", p.sexp(), t.sexp(), s(a), s(b)),
                None => format!("(let {} {} {})", p.sexp(), s(a), s(b)),
            },
            ExKind::Bind(p, a, b) => format!("(bind {} {} {})", p.sexp(), s(a), s(b)),
            ExKind::Return(e) => format!("(return {})", s(e)),
            ExKind::Annot(e, t) => format!("(: {} {})", s(e), t.sexp()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn st_bind_body() {
        let e = parse_expr("fun s0 -> let x,s1 = f s0 in g x s1").unwrap();
        assert_eq!(e.sexp(), "(fun (s0) (let (pair x s1) (app f s0) (app (app g x) s1)))");
    }

    #[test]
    fn operators_and_tuples() {
        let e = parse_expr("x + 1 * y, s < 3 && true").unwrap();
        assert_eq!(e.sexp(), "(tuple (+ x (* 1 y)) (&& (< s 3) true))");
    }

    #[test]
    fn matches() {
        let e = parse_expr("match r with | None -> 0 | Some (x, y) -> x").unwrap();
        assert_eq!(e.sexp(), "(match r (inl _ 0) (inr (pair x y) x))");
    }

    #[test]
    fn types() {
        assert_eq!(parse_type("int -> tau (a * int)").unwrap().sexp(), "(~> int (* a int))");
        assert_eq!(parse_type("(a -> tau ans) -> tau ans").unwrap().sexp(), "(~> (~> a ans) ans)");
        assert_eq!(parse_type("option a * int + unit").unwrap().sexp(), "(+ (* (option a) int) unit)");
    }

    #[test]
    fn items() {
        let items = parse_items(
            "effect ST { carrier = st; actions = [get; put]; }\n\
             type st a = int -> tau (a * int)\n\
             let return (x:a) : st a = fun s0 -> x, s0\n\
             let get () : st int = fun s0 -> s0, s0",
        )
        .unwrap();
        assert_eq!(items.len(), 4);
        match &items[0] {
            Item::Header { fields, .. } => assert_eq!(fields[1].1.len(), 2),
            _ => panic!(),
        }
    }

    #[test]
    fn error_positions() {
        let e = parse_expr("fun x -> (x").unwrap_err();
        assert_eq!(e.pos, Pos { line: 1, col: 12 });
    }

    #[test]
    fn comments() {
        assert!(parse_expr("(* a (* nested *) comment *) 1").is_ok());
    }
}
