//! Exact genus-zero Gromov-Witten invariants of `[C^N / mu_r]`.
//!
//! Two independent pipelines: integration of the Hodge-bundle Euler class in
//! the boundary-divisor ring of `M_{0,n}-bar`, and comb-partition recursions.

pub mod error;
pub mod euler;
pub mod exactnum;
pub mod invariants;
pub mod mzeron;
pub mod orbifold;
pub mod par;
pub mod recursion;
pub mod subset;

pub use error::{HhiError, Result};
pub use exactnum::{LaurentPoly, Rational};
pub use mzeron::{CohClass, Monomial};
pub use orbifold::OrbifoldData;
pub use subset::Subset;
