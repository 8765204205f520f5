//! Dijkstra monads from monadic definitions.
//!
//! The crate provides a dependently typed monadic core calculus with a
//! type checker, a normalizer, a reduction semantics and a validity oracle,
//! together with a small simply typed language for writing monads, its
//! continuation-passing translation into weakest-precondition transformers,
//! the elaboration of monad definitions into effect signatures, and the
//! verification conditions for the resulting Dijkstra monads.

pub mod corpus;
pub mod cps;
pub mod dm;
pub mod elab;
pub mod eqpres;
pub mod eval;
pub mod gen;
pub mod golden;
pub mod matching;
pub mod norm;
pub mod print;
pub mod sexp;
pub mod signature;
pub mod state;
pub mod syntax;
pub mod typing;
pub mod validity;
pub mod vc;

pub use signature::{EffectDef, Signature};
pub use syntax::{Comp, Kind, Name, Term};
pub use typing::{Checker, Ctx, TypeError};
pub use validity::{validity, Verdict};
