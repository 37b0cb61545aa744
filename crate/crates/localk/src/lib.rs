//! Exact, certificate-driven computations in the local algebraic K-theory of
//! filtered algebras: filtration-aware matrix calculus, Mayer-Vietoris gluing
//! of idempotents and invertibles, and the connecting homomorphism.

pub mod algebra;
pub mod boundary;
pub mod error;
pub mod identities;
pub mod kclasses;
pub mod matrix;
pub mod mayer_vietoris;
pub mod par;
pub mod sample;
pub mod scalars;

pub use error::{Error, Result};
