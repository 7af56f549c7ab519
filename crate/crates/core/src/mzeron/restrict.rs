//! Restriction of boundary monomials to a boundary divisor `D^T`.
//!
//! `D^T` is identified with `M_{0,|T|+1} x M_{0,n-|T|+1}`. On the left factor
//! the markings are `T` (relabeled in increasing order) followed by the node,
//! which becomes the distinguished marking. On the right factor the markings
//! are the complement of `T` in the first `n-1` markings, then the node `t*`,
//! then the old distinguished marking.

use smallvec::SmallVec;

use super::{CohClass, Monomial};
use crate::error::{HhiError, Result};
use crate::exactnum::{LaurentPoly, Rational};
use crate::subset::Subset;

/// One term `coeff * left (x) right` of a restricted monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Restriction {
    pub n_left: usize,
    pub n_right: usize,
    pub left: Monomial,
    pub right: Monomial,
    pub coeff: Rational,
}

impl Restriction {
    pub fn left_class(&self, nvars: usize) -> CohClass {
        CohClass::from_monomial(self.n_left, nvars, self.left.clone(), LaurentPoly::one(nvars))
    }

    pub fn right_class(&self, nvars: usize) -> CohClass {
        CohClass::from_monomial(self.n_right, nvars, self.right.clone(), LaurentPoly::one(nvars))
    }
}

/// Marking maps for the two factors of `D^T`.
pub(crate) struct Split {
    pub n_left: usize,
    pub n_right: usize,
    left_map: [u8; 64],
    right_map: [u8; 64],
    t: Subset,
    node_right: Subset,
}

impl Split {
    pub fn new(n: usize, t: Subset) -> Result<Split> {
        let full = Subset::full(n - 1);
        if t.len() < 2 || t.len() + 2 > n || !t.is_subset_of(full) {
            return Err(HhiError::InvalidSubset(format!(
                "{t:?} does not index a boundary divisor of M_0,{n}"
            )));
        }
        let mut left_map = [0u8; 64];
        let mut right_map = [0u8; 64];
        for (k, i) in t.iter().enumerate() {
            left_map[i] = k as u8;
        }
        for (k, i) in full.minus(t).iter().enumerate() {
            right_map[i] = k as u8;
        }
        let n_right = n - t.len() + 1;
        Ok(Split {
            n_left: t.len() + 1,
            n_right,
            left_map,
            right_map,
            t,
            node_right: Subset::singleton(n_right - 2),
        })
    }

    fn map_with(s: Subset, map: &[u8; 64]) -> Subset {
        Subset::from_indices(s.iter().map(|i| map[i] as usize))
    }

    /// Image of `D^S` for `S != T`: `(left?, symbol)`, or `None` if it vanishes.
    pub fn map_symbol(&self, s: Subset) -> Option<(bool, Subset)> {
        let t = self.t;
        if s.is_proper_subset_of(t) {
            Some((true, Self::map_with(s, &self.left_map)))
        } else if !s.intersects(t) {
            Some((false, Self::map_with(s, &self.right_map)))
        } else if t.is_proper_subset_of(s) {
            Some((false, Self::map_with(s.minus(t), &self.right_map).union(self.node_right)))
        } else {
            None
        }
    }

    /// `-psi` of the node on the left factor, as a symbol.
    pub fn left_node(&self) -> Subset {
        Subset::full(self.n_left - 1)
    }

    /// `-psi` of the node on the right factor, as a symbol.
    pub fn right_node(&self) -> Subset {
        self.node_right
    }

    /// Maps every factor except `exp_t` copies of `D^T`; `None` if some factor
    /// vanishes.
    pub fn map_rest(&self, m: &Monomial) -> Option<(Monomial, Monomial, u8)> {
        let mut left: SmallVec<[(Subset, u8); 8]> = SmallVec::new();
        let mut right: SmallVec<[(Subset, u8); 8]> = SmallVec::new();
        let mut exp_t = 0;
        for &(s, e) in m.factors() {
            if s == self.t {
                exp_t = e;
                continue;
            }
            let (is_left, img) = self.map_symbol(s)?;
            if is_left {
                left.push((img, e));
            } else {
                right.push((img, e));
            }
        }
        Some((Monomial::from_factors(left), Monomial::from_factors(right), exp_t))
    }
}

/// Restricts `m` (which must contain `D^T`) to `D^T`, consuming one factor of
/// `D^T`. The remaining powers of `D^T` become powers of the normal bundle
/// `(-psi_node) (x) 1 + 1 (x) (-psi_node)`, expanded binomially.
pub fn restrict_to_boundary(n: usize, m: &Monomial, t: Subset) -> Result<Vec<Restriction>> {
    let split = Split::new(n, t)?;
    let e = m.exponent(t);
    if e == 0 {
        return Err(HhiError::Precondition(format!("{m:?} has no factor D{t:?}")));
    }
    let Some((left, right, _)) = split.map_rest(m) else {
        return Ok(Vec::new());
    };
    let rest = e - 1;
    let mut out = Vec::with_capacity(rest as usize + 1);
    let mut binom = Rational::one();
    for j in 0..=rest {
        let l = left.mul(&Monomial::power(split.left_node(), j)).expect("full set is compatible");
        let r = right
            .mul(&Monomial::power(split.right_node(), rest - j))
            .expect("node singleton is compatible");
        out.push(Restriction {
            n_left: split.n_left,
            n_right: split.n_right,
            left: l,
            right: r,
            coeff: binom.clone(),
        });
        binom = binom * Rational::new((rest - j) as i64, (j + 1) as i64);
    }
    Ok(out)
}
