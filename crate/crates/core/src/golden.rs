//! Derived combinators of a `.dm` file as labelled terms, their rendering,
//! and comparison against stored outputs.
//!
//! Stored outputs use one `(golden "label" term)` form per line. Loose
//! comparison normalizes both sides and compares up to renaming of bound
//! variables; strict comparison is byte-exact on the rendering.

use thiserror::Error;

use crate::cps::{cps_term, cps_type};
use crate::dm::{DmDef, DmFile};
use crate::elab::{elab_checked, ElabError};
use crate::norm::nf;
use crate::print::sexp;
use crate::sexp::{parse_term, SexpError};
use crate::signature::Signature;
use crate::syntax::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Pretty,
    Sexp,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub label: String,
    pub term: Term,
}

impl Entry {
    fn new(label: impl Into<String>, term: Term) -> Entry {
        Entry {
            label: label.into(),
            term,
        }
    }
}

fn all_defs(f: &DmFile) -> Vec<&DmDef> {
    let mut out: Vec<&DmDef> = f.effect.iter().flat_map(|e| e.defs()).collect();
    out.extend(f.defs.iter());
    out
}

/// The carrier's `*`-translation and every definition's starred form, with
/// the type parameters left free.
pub fn translate_file(f: &DmFile) -> Vec<Entry> {
    let mut out = Vec::new();
    if let Some(e) = &f.effect {
        out.push(Entry::new(format!("({} {})*", e.name.to_lowercase(), e.param), cps_type(&e.carrier)));
    }
    for d in all_defs(f) {
        out.push(Entry::new(format!("{}*", d.name), cps_term(&d.deriv)));
    }
    out
}

/// The elaboration of every definition and the type it is checked against.
pub fn elaborate_file(sig: &Signature, f: &DmFile) -> Result<Vec<Entry>, (String, ElabError)> {
    let mut out = Vec::new();
    for d in all_defs(f) {
        let o = elab_checked(sig, &d.delta, &[], &d.deriv).map_err(|e| (d.name.to_string(), e))?;
        out.push(Entry::new(format!("un-{} : type", d.name), o.comp.to_term()));
        out.push(Entry::new(format!("un-{}", d.name), o.term));
    }
    Ok(out)
}

/// The installed WP type and representation type of `eff`.
pub fn signature_entries(sig: &Signature, eff: &str) -> Vec<Entry> {
    match sig.effect(eff) {
        Ok(d) => vec![
            Entry::new(format!("{eff}.wp_type"), d.wp_type.clone()),
            Entry::new(format!("{eff}.repr"), d.repr.clone()),
        ],
        Err(_) => Vec::new(),
    }
}

pub fn render(entries: &[Entry], format: Format) -> String {
    let mut s = String::new();
    for e in entries {
        match format {
            Format::Pretty => s.push_str(&format!("{} = {}\n", e.label, e.term)),
            Format::Sexp => s.push_str(&format!("(golden {:?} {})\n", e.label, sexp(&e.term))),
        }
    }
    s
}

#[derive(Debug, Error, PartialEq)]
pub enum GoldenError {
    #[error("line {line}: {err}")]
    Syntax { line: usize, err: SexpError },
    #[error("line {0}: expected (golden \"label\" term)")]
    Shape(usize),
}

/// Reads the sexp rendering back.
pub fn parse_golden(src: &str) -> Result<Vec<Entry>, GoldenError> {
    let mut out = Vec::new();
    for (i, line) in src.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        let rest = line
            .strip_prefix("(golden \"")
            .ok_or(GoldenError::Shape(i + 1))?;
        let close = rest.find('"').ok_or(GoldenError::Shape(i + 1))?;
        let label = &rest[..close];
        let body = rest[close + 1..]
            .trim()
            .strip_suffix(')')
            .ok_or(GoldenError::Shape(i + 1))?;
        let term = parse_term(body).map_err(|err| GoldenError::Syntax { line: i + 1, err })?;
        out.push(Entry::new(label, term));
    }
    Ok(out)
}

/// Equal after normalization, up to renaming of bound variables.
pub fn same_up_to_nf(sig: &Signature, a: &Term, b: &Term) -> bool {
    a.alpha_eq(b) || nf(sig, a).alpha_eq(&nf(sig, b))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Diff {
    Missing(String),
    Unexpected(String),
    Differs { label: String, got: Term, want: Term },
}

impl std::fmt::Display for Diff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Diff::Missing(l) => write!(f, "{l}: missing from the output"),
            Diff::Unexpected(l) => write!(f, "{l}: not in the golden file"),
            Diff::Differs { label, got, want } => write!(f, "{label}:\n  got  {got}\n  want {want}"),
        }
    }
}

pub fn compare(sig: &Signature, got: &[Entry], want: &[Entry]) -> Vec<Diff> {
    let mut diffs = Vec::new();
    for w in want {
        match got.iter().find(|g| g.label == w.label) {
            None => diffs.push(Diff::Missing(w.label.clone())),
            Some(g) if !same_up_to_nf(sig, &g.term, &w.term) => diffs.push(Diff::Differs {
                label: w.label.clone(),
                got: g.term.clone(),
                want: w.term.clone(),
            }),
            Some(_) => {}
        }
    }
    for g in got {
        if !want.iter().any(|w| w.label == g.label) {
            diffs.push(Diff::Unexpected(g.label.clone()));
        }
    }
    diffs
}

/// Labels under which a printed form is stored although the derived
/// combinator carries another name.
const ALIASES: &[(&str, &str)] = &[("return_ST", "return*")];

/// Checks only the entries of `want`. With `verbatim`, terms must agree up
/// to renaming of bound variables without normalizing.
pub fn compare_printed(sig: &Signature, got: &[Entry], want: &[Entry], verbatim: bool) -> Vec<Diff> {
    let mut diffs = Vec::new();
    for w in want {
        let label = ALIASES
            .iter()
            .find(|(a, _)| *a == w.label)
            .map_or(w.label.as_str(), |(_, b)| b);
        match got.iter().find(|g| g.label == label) {
            None => diffs.push(Diff::Missing(w.label.clone())),
            Some(g) => {
                let same = if verbatim { g.term.alpha_eq(&w.term) } else { same_up_to_nf(sig, &g.term, &w.term) };
                if !same {
                    diffs.push(Diff::Differs {
                        label: w.label.clone(),
                        got: g.term.clone(),
                        want: w.term.clone(),
                    });
                }
            }
        }
    }
    diffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_corpus;

    #[test]
    fn sexp_rendering_round_trips() {
        let (_, files) = load_corpus().unwrap();
        let sig = Signature::new();
        for (_, f) in &files {
            let got = translate_file(f);
            let back = parse_golden(&render(&got, Format::Sexp)).unwrap();
            assert_eq!(back.len(), got.len());
            assert!(compare(&sig, &got, &back).is_empty());
        }
    }

    #[test]
    fn changed_terms_are_reported() {
        let a = vec![Entry::new("x*", Term::int(1))];
        let b = vec![Entry::new("x*", Term::int(2)), Entry::new("y*", Term::int(2))];
        let d = compare(&Signature::new(), &a, &b);
        assert_eq!(d.len(), 2);
        assert!(matches!(&d[1], Diff::Missing(l) if l == "y*"));
    }
}
