use std::collections::HashMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::exactnum::q;
use crate::invariants::invariant_direct;

fn c3z3(n: usize) -> OrbifoldData {
    OrbifoldData::new(3, &[1, 1, 1], &vec![1; n]).unwrap()
}

fn t123(k: i32, c: Rational) -> LaurentPoly {
    LaurentPoly::monomial(3, TExp([k, k, k, 0, 0, 0, 0, 0]), c)
}

fn first(k: usize) -> Subset {
    Subset::full(k)
}

#[test]
fn size_partitions() {
    let all = SizePartition::all(4);
    let parts: Vec<&[u32]> = all.iter().map(|p| p.parts()).collect();
    assert_eq!(parts, vec![&[4][..], &[3, 1], &[2, 2], &[2, 1, 1], &[1, 1, 1, 1]]);
    let m = SizePartition::new(vec![1, 2, 1, 1]).unwrap();
    assert_eq!(m.parts(), &[2, 1, 1, 1]);
    assert_eq!(m.aut(), BigInt::from(6));
    assert_eq!(m.total(), 5);
    assert!(SizePartition::new(vec![0]).is_err());
    assert_eq!(SizePartition::all(10).len(), 42);
}

#[test]
fn set_partition_counts_are_bell_numbers() {
    let bell = [1, 1, 2, 5, 15, 52, 203, 877];
    for (k, &b) in bell.iter().enumerate() {
        let ps = set_partitions(k);
        assert_eq!(ps.len(), b, "k = {k}");
        for p in &ps {
            let mut union = Subset(0);
            for &blk in p {
                assert!(!blk.intersects(union));
                union = union.union(blk);
            }
            assert_eq!(union, Subset::full(k));
        }
    }
    // Non-trivial: drop the single block and the all-singletons partition.
    assert_eq!(set_partitions(4).iter().filter(|p| is_nontrivial(p)).count(), 13);
    assert_eq!(set_partitions(2).iter().filter(|p| is_nontrivial(p)).count(), 0);
}

#[test]
fn tooth_admissibility() {
    let d = c3z3(9);
    assert!(tooth_admissible(&d, first(4)).unwrap());
    assert!(!tooth_admissible(&d, first(3)).unwrap());
    assert!(!tooth_admissible(&d, first(2)).unwrap());
    assert!(tooth_admissible(&d, first(7)).unwrap());
    let two_dim = OrbifoldData::new(3, &[1, 2], &[1, 1, 1]).unwrap();
    assert!(tooth_admissible(&two_dim, first(2)).is_err());
    assert!(tooth_admissible(&d, first(1)).is_err());
}

#[test]
fn tooth_factor_values() {
    let d = c3z3(9);
    assert_eq!(tooth_factor(&d, first(4)).unwrap(), t123(-1, q(1, 27)));
    assert_eq!(tooth_factor(&d, first(7)).unwrap(), t123(-2, q(-64, 729)));
    assert!(tooth_factor(&d, first(3)).is_err());
}

#[test]
fn tooth_factor_matches_integrated_tooth() {
    // The general tooth integral, before the age-reduction shift.
    let cases = [
        (c3z3(9), first(4)),
        (c3z3(9), first(7)),
        (OrbifoldData::new(5, &[1, 1, 3], &[1, 1, 1, 2, 2, 0]).unwrap(), Subset::from_indices([0, 1])),
        (OrbifoldData::new(4, &[1, 1, 2], &[1, 1, 1, 1, 1, 1, 2]).unwrap(), Subset::from_indices([0, 1, 2, 3, 4])),
    ];
    for (d, t) in cases {
        assert!(tooth_admissible(&d, t).unwrap(), "{t:?}");
        let w = tooth_weights(&d, t, &vec![0; t.len()], 2).unwrap();
        let shift = reduction_shift(&d, t);
        assert_eq!(w[0], tooth_factor(&d, t).unwrap().mul_ref(&shift));
        assert!(w[1].is_zero() && w[2].is_zero());
        // Net comb weight carries no t.
        assert!(w[0].is_constant());
    }
}

#[test]
fn comb_recursion_anchors() {
    assert_eq!(comb_recursion(&InvariantKey::primary(c3z3(3))).unwrap(), LaurentPoly::constant(3, q(1, 3)));
    assert_eq!(comb_recursion(&InvariantKey::primary(c3z3(6))).unwrap(), LaurentPoly::constant(3, q(-1, 27)));
    // n = 4: no admissible tooth, only the weighted term.
    let d = OrbifoldData::new(4, &[1, 1, 2], &[1, 1, 1, 1]).unwrap();
    let key = InvariantKey::primary(d);
    assert!(comb_terms(&key).unwrap().is_empty());
    assert_eq!(comb_recursion(&key).unwrap(), invariant_weighted(&key).unwrap());
}

#[test]
fn six_point_terms() {
    let terms = comb_terms(&InvariantKey::primary(c3z3(6))).unwrap();
    assert_eq!(terms.len(), 5);
    for t in &terms {
        assert_eq!(t.teeth().count(), 1);
        assert_eq!(t.teeth().next().unwrap().len(), 4);
        assert_eq!(t.sign, 1);
        assert_eq!(t.weight, LaurentPoly::constant(3, q(1, 27)));
        assert_eq!(t.elements.len(), 2);
    }
}

#[test]
fn comb_recursion_rejects_bad_keys() {
    let d = OrbifoldData::new(3, &[1, 1, 1], &[2, 2, 2]).unwrap();
    assert!(comb_recursion(&InvariantKey::primary(d)).is_err());
    let key = InvariantKey::new(c3z3(6), vec![1, 0, 0, 0, 0, 0]).unwrap();
    assert!(comb_recursion(&key).is_err());
    let d = OrbifoldData::new(5, &[1, 1, 1], &[1, 1, 1, 2]).unwrap();
    assert!(comb_recursion(&InvariantKey::primary(d)).is_err());
}

#[test]
fn comb_matches_direct_small() {
    let cases: [(u32, [i64; 3], Vec<i64>); 4] = [
        (4, [1, 1, 2], vec![1, 1, 1, 1, 0]),
        (5, [1, 1, 3], vec![1, 1, 2, 2, 4]),
        (5, [1, 2, 2], vec![1, 1, 3, 3, 2]),
        (3, [1, 1, 1], vec![1, 1, 1, 1, 1, 1]),
    ];
    for (r, w, k) in cases {
        let d = OrbifoldData::new(r, &w, &k).unwrap();
        for nu in 0..=2 {
            let key = InvariantKey::with_last_psi(d.clone(), nu);
            assert_eq!(comb_recursion(&key).unwrap(), invariant_direct(&key).unwrap(), "{key}");
        }
    }
}

#[test]
fn grouped_matches_generic() {
    let generic = CombRecursion::new(Enumeration::Generic);
    let grouped = CombRecursion::new(Enumeration::Grouped);
    for n in 3..=9 {
        for (r, w, e) in [(3, [1, 1, 1], 1), (4, [1, 1, 2], 1), (5, [1, 1, 3], 1), (5, [1, 2, 2], 1)] {
            let mut k = vec![e; n - 1];
            k.push(OrbifoldData::completing_element(r, &vec![e as u32; n - 1]) as i64);
            let d = OrbifoldData::new(r, &w, &k).unwrap();
            for nu in 0..=1 {
                let key = InvariantKey::with_last_psi(d.clone(), nu);
                assert_eq!(generic.value(&key).unwrap(), grouped.value(&key).unwrap(), "{key}");
            }
        }
    }
    let mixed = OrbifoldData::new(5, &[1, 1, 3], &[1, 2, 1, 1]).unwrap();
    assert!(grouped.value(&InvariantKey::primary(mixed)).is_err());
}

#[test]
fn c3z3_values() {
    let s = c3z3_series(2).unwrap();
    assert_eq!(s[0], q(1, 3));
    assert_eq!(s[1], q(-1, 27));
    assert_eq!(s[2], q(1, 9));
    assert_eq!(c3z3_direct(0).unwrap(), q(1, 3));
    assert_eq!(c3z3_direct(1).unwrap(), q(-1, 27));
    assert_eq!(c3z3_c(1, 1).unwrap(), q(5, 27));
    assert_eq!(c3z3_c(0, 4).unwrap(), q(1, 1));
    assert_eq!(c3z3_mirror(2).unwrap(), s);
}

#[test]
fn mirror_map_coefficients() {
    let tau = mirror_tau(8).unwrap();
    assert_eq!(tau.coeff(1), Some(&q(1, 1)));
    assert_eq!(tau.coeff(2), Some(&q(0, 1)));
    assert_eq!(tau.coeff(3), Some(&q(0, 1)));
    assert_eq!(tau.coeff(4), Some(&q(-1, 648)));
    assert_eq!(tau.coeff(8), None);
    assert!(mirror_tau(0).is_err());
}

#[test]
fn series_inversion() {
    let tau = mirror_tau(20).unwrap();
    let b = mirror_invert(&tau, &tau).unwrap();
    assert_eq!(b, Series::identity(20));
    let a = Series::new((0..20).map(|k| q(k * k - 3, k + 1)).collect());
    let b = mirror_invert(&a, &tau).unwrap();
    assert_eq!(b.compose(&tau).unwrap(), a);
    let bad = Series::new(vec![q(1, 1), q(1, 1)]);
    assert!(mirror_invert(&a, &bad).is_err());
    assert!(a.compose(&bad).is_err());
    assert!(mirror_invert(&a, &Series::zero(5)).is_err());
}

fn random_key(rng: &mut ChaCha8Rng, n: usize) -> InvariantKey {
    let choices: [(u32, Vec<i64>); 5] =
        [(3, vec![1, 1, 1]), (4, vec![1, 1, 2]), (5, vec![1, 2, 2]), (3, vec![1, 2]), (2, vec![1])];
    let (r, w) = &choices[rng.gen_range(0..choices.len())];
    let mut k: Vec<u32> = (0..n - 1).map(|_| rng.gen_range(0..*r)).collect();
    k.push(OrbifoldData::completing_element(*r, &k));
    let k: Vec<i64> = k.into_iter().map(i64::from).collect();
    let d = OrbifoldData::new(*r, w, &k).unwrap();
    let mut psi = vec![0u32; n];
    let mut budget = rng.gen_range(0..=n - 3);
    while budget > 0 {
        psi[rng.gen_range(0..n)] += 1;
        budget -= 1;
    }
    InvariantKey::new(d, psi).unwrap()
}

#[test]
fn equivariant_expansion_reproduces_direct() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..25 {
        let n = rng.gen_range(3..=6);
        let key = random_key(&mut rng, n);
        let heads = equivariant_comb_expand(&key).unwrap();
        let mut total = base_term(&key, Normalization::Stack).unwrap();
        for h in &heads {
            total.add_assign_ref(&h.weight.mul_ref(&invariant_direct(&h.head).unwrap()));
        }
        assert_eq!(total, invariant_direct(&key).unwrap(), "{key}");
    }
}

#[test]
fn equivariant_expansion_on_c3z3() {
    let key = InvariantKey::primary(c3z3(6));
    let heads = equivariant_comb_expand(&key).unwrap();
    // Only the five 4+1 combs survive, each with weight 1/27 and a 3-point head.
    let live: Vec<&CombHead> = heads.iter().filter(|h| !h.weight.is_zero()).collect();
    assert_eq!(live.len(), 5);
    for h in live {
        assert_eq!(h.weight, LaurentPoly::constant(3, q(1, 27)));
        assert_eq!(h.head.n(), 3);
        assert_eq!(h.head.psi(), &[0, 0, 0]);
    }
    let empty = InvariantKey::primary(OrbifoldData::new(4, &[1, 1, 2], &[1, 1, 1, 1]).unwrap());
    assert!(equivariant_comb_expand(&empty).unwrap().is_empty());
}

#[test]
fn base_term_generalizes_weighted() {
    for nu in 0..=3 {
        let key = InvariantKey::with_last_psi(c3z3(6), nu);
        assert_eq!(base_term(&key, Normalization::Stack).unwrap(), invariant_weighted(&key).unwrap());
    }
}

/// Square-free polynomials in formal nilpotents `x_T`, keyed by the support.
type Poly = HashMap<u64, i64>;

fn pmul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (&ma, &ca) in a {
        for (&mb, &cb) in b {
            if ma & mb == 0 {
                *out.entry(ma | mb).or_default() += ca * cb;
            }
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn one_plus(i: usize) -> Poly {
    Poly::from([(0, 1), (1 << i, 1)])
}

/// `leq[i] & (1 << j)` iff `j <= i`.
fn check_inclusion_exclusion(k: usize, leq: &[u64]) {
    let mut lhs = Poly::from([(0, 1)]);
    for i in 0..k {
        lhs = pmul(&lhs, &one_plus(i));
    }
    let mut rhs = Poly::from([(0, 1)]);
    for set in 1u64..(1 << k) {
        let members: Vec<usize> = (0..k).filter(|&i| set >> i & 1 == 1).collect();
        let antichain = members.iter().all(|&i| members.iter().all(|&j| i == j || leq[i] >> j & 1 == 0));
        if !antichain {
            continue;
        }
        let below = members.iter().fold(0u64, |acc, &i| acc | leq[i]);
        let sign = if members.len() % 2 == 1 { 1 } else { -1 };
        let mut term = Poly::from([(set, sign)]);
        for j in (0..k).filter(|&j| below >> j & 1 == 0) {
            term = pmul(&term, &one_plus(j));
        }
        for (m, c) in term {
            *rhs.entry(m).or_default() += c;
        }
    }
    rhs.retain(|_, c| *c != 0);
    assert_eq!(lhs, rhs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn inclusion_exclusion_on_random_posets(k in 1usize..=12, edges in proptest::collection::vec(any::<u32>(), 66)) {
        // Random DAG on 0..k (edges go from smaller to larger index), then
        // transitive closure; leq[i] holds everything below i, and i itself.
        let mut leq: Vec<u64> = (0..k).map(|i| 1u64 << i).collect();
        let mut e = 0;
        for i in 0..k {
            for j in 0..i {
                if edges[e % edges.len()] % 4 == 0 {
                    leq[i] |= leq[j];
                }
                e += 1;
            }
        }
        for i in 0..k {
            for j in 0..i {
                if leq[i] >> j & 1 == 1 {
                    leq[i] |= leq[j];
                }
            }
        }
        check_inclusion_exclusion(k, &leq);
    }
}

#[test]
fn trivial_direction_teeth() {
    // omega^2 acts as (-1, -1, 1) for weights (1, 1, 2): age 1, trivial in the
    // last direction. A tooth made of such markings has a nonzero integral.
    let d = OrbifoldData::new(4, &[1, 1, 2], &[2, 2, 2, 2, 2, 2]).unwrap();
    let t = Subset::from_indices([0, 1, 2]);
    assert!(!tooth_admissible(&d, t).unwrap());
    assert!(ToothRule::Extended.allows(&d, t).unwrap());
    assert_eq!(ToothRule::Extended.weight(&d, t).unwrap(), LaurentPoly::constant(3, q(-1, 4)));
    let strict = CombRecursion::new(Enumeration::Auto);
    let extended = CombRecursion::with_rule(Enumeration::Auto, ToothRule::Extended);
    let key = InvariantKey::primary(d);
    let direct = invariant_direct(&key).unwrap();
    assert_eq!(extended.value(&key).unwrap(), direct);
    assert_ne!(strict.value(&key).unwrap(), direct);
}
