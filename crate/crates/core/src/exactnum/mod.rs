//! Exact arithmetic: rationals, signed product ranges, Laurent polynomials.

pub mod index_set;
pub mod laurent;
pub mod rational;

pub use index_set::{frac_factorial, frac_unit, signed_index_set, SignedIndexSet};
pub use laurent::{LaurentPoly, TExp, MAX_VARS};
pub use rational::{q, Rational};
