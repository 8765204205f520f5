//! The DM language: types, terms, typing, surface syntax and desugaring.

pub mod desugar;
pub mod file;
pub mod parse;
pub mod term;
pub mod types;
pub mod typing;

pub use file::{load, DmDef, DmEffect, DmFile, DmLift, FileError, Registry};
pub use term::DmTerm;
pub use types::{classify, DmType, Eff, Sort};
pub use typing::{typecheck_dm, Deriv, DmCtx, DmError};
