//! Fractional parts, signed product ranges and fractional factorials.
//!
//! A product `prod_{p=<x>}^{x} f(p)` runs over `0 < p <= x` with `p = x (mod 1)`
//! when `x > 0`. For `x < 0` it is read as the reciprocal product over
//! `x < p <= 0`, which keeps `prod^{x} = f(x) * prod^{x-1}` valid for every
//! rational `x`.

use serde::{Deserialize, Serialize};

use super::rational::Rational;
use crate::error::{HhiError, Result};

/// `<x> = x - ceil(x) + 1`, the representative of `x` mod 1 in `(0, 1]`.
pub fn frac_unit(x: &Rational) -> Rational {
    x - &Rational::from_bigint(x.ceil()) + Rational::one()
}

/// Index set of a signed product range: factors in `positives` multiply,
/// factors in `negatives` divide. At most one of the two is nonempty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedIndexSet {
    pub positives: Vec<Rational>,
    pub negatives: Vec<Rational>,
}

impl SignedIndexSet {
    pub fn is_empty(&self) -> bool {
        self.positives.is_empty() && self.negatives.is_empty()
    }

    /// Net number of factors (positives count minus negatives count).
    pub fn signed_len(&self) -> i64 {
        self.positives.len() as i64 - self.negatives.len() as i64
    }

    /// Evaluates the signed product of `f` over the index set.
    pub fn product<F>(&self, mut f: F) -> Result<Rational>
    where
        F: FnMut(&Rational) -> Rational,
    {
        let mut acc = Rational::one();
        for p in &self.positives {
            acc *= &f(p);
        }
        for p in &self.negatives {
            acc = acc.checked_div(&f(p))?;
        }
        Ok(acc)
    }
}

/// Index set for `prod_{p=<x>}^{x}`.
pub fn signed_index_set(x: &Rational) -> SignedIndexSet {
    let u = frac_unit(x);
    let one = Rational::one();
    let mut positives = Vec::new();
    let mut negatives = Vec::new();
    if x.is_positive() {
        let mut p = u;
        while &p <= x {
            positives.push(p.clone());
            p += &one;
        }
    } else {
        // x < p <= 0 with p = x mod 1, ascending.
        let mut p = x + &one;
        while !p.is_positive() {
            negatives.push(p.clone());
            p += &one;
        }
    }
    SignedIndexSet { positives, negatives }
}

/// Fractional factorial `x! = prod_{p=<x>}^{x} p`, extended to negative `x`
/// through the signed range. Negative integers hit the factor `p = 0`.
pub fn frac_factorial(x: &Rational) -> Result<Rational> {
    let set = signed_index_set(x);
    if set.negatives.iter().any(Rational::is_zero) {
        return Err(HhiError::NegativeIntegerFactorial(x.to_string()));
    }
    set.product(|p| p.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::q;
    use proptest::prelude::*;

    #[test]
    fn frac_unit_examples() {
        assert_eq!(frac_unit(&q(5, 3)), q(2, 3));
        assert_eq!(frac_unit(&q(2, 1)), q(1, 1));
        assert_eq!(frac_unit(&q(-1, 3)), q(2, 3));
        assert_eq!(frac_unit(&q(0, 1)), q(1, 1));
    }

    #[test]
    fn index_set_examples() {
        let s = signed_index_set(&q(5, 3));
        assert_eq!(s.positives, vec![q(2, 3), q(5, 3)]);
        assert!(s.negatives.is_empty());

        let s = signed_index_set(&q(-1, 1));
        assert!(s.positives.is_empty());
        assert_eq!(s.negatives, vec![q(0, 1)]);

        assert!(signed_index_set(&q(-2, 3)).is_empty());
        assert!(signed_index_set(&q(0, 1)).is_empty());
        assert_eq!(signed_index_set(&q(-5, 3)).negatives, vec![q(-2, 3)]);
        assert_eq!(signed_index_set(&q(2, 1)).positives, vec![q(1, 1), q(2, 1)]);
    }

    #[test]
    fn factorial_examples() {
        assert_eq!(frac_factorial(&q(1, 3)).unwrap(), q(1, 3));
        assert_eq!(frac_factorial(&q(4, 3)).unwrap(), q(4, 9));
        assert_eq!(frac_factorial(&q(-1, 3)).unwrap(), q(1, 1));
        assert_eq!(frac_factorial(&q(0, 1)).unwrap(), q(1, 1));
        assert_eq!(frac_factorial(&q(4, 1)).unwrap(), q(24, 1));
        assert_eq!(frac_factorial(&q(-5, 3)).unwrap(), q(-3, 2));
        assert!(frac_factorial(&q(-1, 1)).is_err());
        assert!(frac_factorial(&q(-3, 1)).is_err());
    }

    fn rat() -> impl Strategy<Value = Rational> {
        (-60i64..60, 1i64..12).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #[test]
        fn frac_unit_is_periodic(x in rat()) {
            let u = frac_unit(&x);
            prop_assert!(u.is_positive() && u <= Rational::one());
            prop_assert!((&x - &u).is_integer());
            prop_assert_eq!(frac_unit(&(&x + &Rational::one())), u);
        }

        #[test]
        fn positive_range_recurrence(x in rat()) {
            prop_assume!(!x.is_negative());
            let next = &x + &Rational::one();
            let mut expect = signed_index_set(&x).positives;
            expect.push(next.clone());
            prop_assert_eq!(signed_index_set(&next).positives, expect);
        }

        #[test]
        fn signed_product_recurrence(x in rat()) {
            // prod^{x} f = f(x) * prod^{x-1} f; f has no zero at denominators <= 12.
            let f = |p: &Rational| p + &q(1, 13);
            let lhs = signed_index_set(&x).product(f).unwrap();
            let rhs = f(&x) * signed_index_set(&(&x - &Rational::one())).product(f).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn factorial_recurrence(n in 1i64..200, d in 1i64..9) {
            let x = q(n, d);
            let next = &x + &Rational::one();
            prop_assert_eq!(
                frac_factorial(&next).unwrap(),
                &next * &frac_factorial(&x).unwrap()
            );
        }
    }
}
