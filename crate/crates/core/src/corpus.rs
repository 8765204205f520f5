//! The bundled effect definitions, in dependency order.

use crate::dm::{load, DmFile, FileError, Registry};
use crate::elab::install_effect;
use crate::signature::Signature;

pub const FILES: &[(&str, &str)] = &[
    ("st", include_str!("../../../corpus/st.dm")),
    ("exn", include_str!("../../../corpus/exn.dm")),
    ("exnst", include_str!("../../../corpus/exnst.dm")),
    ("stexnC", include_str!("../../../corpus/stexnC.dm")),
    ("cont", include_str!("../../../corpus/cont.dm")),
    ("difc", include_str!("../../../corpus/difc.dm")),
    ("id", include_str!("../../../corpus/id.dm")),
];

/// Loads every corpus file, each seeing the ones before it.
pub fn load_corpus() -> Result<(Registry, Vec<(&'static str, DmFile)>), (&'static str, FileError)> {
    let mut reg = Registry::default();
    let mut out = Vec::new();
    for (n, src) in FILES {
        let f = load(src, &reg).map_err(|e| (*n, e))?;
        reg.add(&f);
        out.push((*n, f));
    }
    Ok((reg, out))
}

pub fn source(n: &str) -> Option<&'static str> {
    FILES.iter().find(|(m, _)| *m == n).map(|(_, s)| *s)
}

/// The signature with every corpus effect and lift installed.
pub fn corpus_signature() -> Result<Signature, String> {
    let (_, files) = load_corpus().map_err(|(n, e)| format!("{n}: {e}"))?;
    let mut sig = Signature::new();
    for (n, f) in &files {
        if let Some(e) = &f.effect {
            sig = install_effect(&sig, e).map_err(|err| format!("{n}: {err}"))?;
        }
    }
    Ok(sig)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cps::cps_checked;
    use crate::elab::elab_checked;

    #[test]
    fn well_typing_instances() {
        let (_, files) = load_corpus().unwrap();
        let sig = Signature::new();
        for (n, f) in &files {
            for d in f.effect.as_ref().unwrap().defs() {
                if let Err(e) = cps_checked(&sig, &d.delta, &[], &d.deriv) {
                    panic!("{n}.{}: {e}", d.name);
                }
                if let Err(e) = elab_checked(&sig, &d.delta, &[], &d.deriv) {
                    panic!("{n}.{}: {e}", d.name);
                }
            }
        }
    }

    #[test]
    fn installs() {
        let sig = corpus_signature().unwrap();
        assert_eq!(sig.effects().len(), 7);
        assert_eq!(sig.lifts().len(), 2);
    }

    #[test]
    fn corpus_loads() {
        let (reg, files) = load_corpus().unwrap_or_else(|(n, e)| panic!("{n}: {e}"));
        assert_eq!(files.len(), 7);
        assert_eq!(reg.effects.len(), 7);
        for (n, f) in &files {
            let e = f.effect.as_ref().unwrap();
            for d in e.defs() {
                println!("{n}.{} : {}\n  {}", d.name, d.ty, d.term);
            }
        }
    }
}
