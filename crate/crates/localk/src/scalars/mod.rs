//! Exact coefficient arithmetic: rationals, polynomials and quotient rings.

mod dyadic;
mod poly;
mod rational;

pub use dyadic::Dyadic;
pub use poly::{check_modulus, quot_invert, quot_reduce, Poly, QuotElem};
pub use rational::{q, Rational};
