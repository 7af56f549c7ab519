//! Boundary strata and equality in cohomology by pairing against them.
//!
//! Square-free products of pairwise compatible boundary divisors span
//! `H*(M_{0,n}-bar)` and the intersection pairing is perfect, so a class is
//! zero exactly when it pairs to zero with every stratum of complementary
//! degree.

use super::{integrate_monomial, CohClass, Monomial};
use crate::exactnum::LaurentPoly;
use crate::subset::Subset;

/// All boundary strata of codimension `codim`, as square-free monomials.
pub fn strata(n: usize, codim: usize) -> Vec<Monomial> {
    if n < 3 || codim > n - 3 {
        return Vec::new();
    }
    let full = Subset::full(n - 1);
    let divisors: Vec<Subset> = full.nonempty_subsets().filter(|t| t.len() >= 2 && *t != full).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(codim);
    extend(&divisors, 0, codim, &mut chosen, &mut out);
    out
}

fn extend(divisors: &[Subset], from: usize, left: usize, chosen: &mut Vec<Subset>, out: &mut Vec<Monomial>) {
    if left == 0 {
        out.push(Monomial::from_factors(chosen.iter().map(|&s| (s, 1))));
        return;
    }
    for i in from..divisors.len() {
        let s = divisors[i];
        if chosen.iter().all(|&c| c.compatible(s)) {
            chosen.push(s);
            extend(divisors, i + 1, left - 1, chosen, out);
            chosen.pop();
        }
    }
}

/// `int x * s` for a single monomial `s`.
pub fn pair_with(x: &CohClass, s: &Monomial) -> LaurentPoly {
    let n = x.n();
    let mut acc = LaurentPoly::zero(x.nvars());
    for (m, c) in x.terms() {
        if m.degree() + s.degree() != n - 3 {
            continue;
        }
        if let Some(p) = m.mul(s) {
            let v = integrate_monomial(n, &p);
            if !v.is_zero() {
                acc.add_assign_ref(&c.scale(&v));
            }
        }
    }
    acc
}

/// True if `x` pairs to zero with every stratum, i.e. `x = 0` in cohomology.
pub fn vanishes_in_cohomology(x: &CohClass) -> bool {
    let n = x.n();
    if n < 3 {
        return x.is_zero();
    }
    let Some(top) = x.max_degree() else {
        return true;
    };
    (0..=top.min(n - 3)).all(|d| {
        let part = x.degree_part(d);
        part.is_zero() || strata(n, n - 3 - d).iter().all(|s| pair_with(&part, s).is_zero())
    })
}

pub fn equal_in_cohomology(a: &CohClass, b: &CohClass) -> bool {
    vanishes_in_cohomology(&a.sub(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strata_counts() {
        // M_0,5 has 10 boundary divisors and 15 boundary points.
        assert_eq!(strata(5, 1).len(), 10);
        assert_eq!(strata(5, 2).len(), 15);
        assert_eq!(strata(5, 3).len(), 0);
        assert_eq!(strata(4, 0).len(), 1);
        // M_0,6: 25 divisors, 105 points.
        assert_eq!(strata(6, 1).len(), 25);
        assert_eq!(strata(6, 3).len(), 105);
    }

    #[test]
    fn psi_classes_agree_with_keel_form() {
        // psi_i = sum of D^S over S with i on one side and j, k on the other.
        let n = 6;
        let k = n - 1;
        for i in 0..k {
            let (j, l) = if i < k - 1 { (k - 1, n - 1) } else { (0, n - 1) };
            let mut keel = CohClass::zero(n, 0);
            for s in Subset::full(k).nonempty_subsets().filter(|s| s.len() >= 2 && s.len() <= n - 2) {
                // Markings on the S side of the node: S itself; the other side holds the rest and n-1.
                let side_i = s.contains(i);
                let side_j = s.contains(j);
                let side_l = l != n - 1 && s.contains(l);
                if side_i != side_j && side_j == side_l {
                    keel = keel.add(&CohClass::divisor(n, 0, s).unwrap());
                }
            }
            let psi = CohClass::psi_marking(n, 0, i).unwrap();
            assert!(equal_in_cohomology(&psi, &keel), "psi_{i}");
            assert!(!equal_in_cohomology(&psi, &CohClass::zero(n, 0)));
        }
    }
}
