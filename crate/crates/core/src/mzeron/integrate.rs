//! Exact integration over `M_{0,n}-bar` by recursive restriction to boundary
//! divisors, bottoming out in the multinomial formula for psi-monomials.

use std::hash::{BuildHasherDefault, Hash, Hasher};

use dashmap::DashMap;
use num_bigint::BigInt;
use once_cell::sync::Lazy;
use rustc_hash::FxHasher;

use super::restrict::Split;
use super::{CohClass, Monomial};
use crate::exactnum::{LaurentPoly, Rational};
use crate::par;
use crate::subset::Subset;

/// Which boundary factor to restrict along at each step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PickOrder {
    /// Smallest `|T|`, ties broken by the smaller bitmask.
    SmallestFirst,
    /// Pseudo-random but deterministic in the seed and the monomial.
    Seeded(u64),
}

type Memo = DashMap<(u8, Monomial), Rational, BuildHasherDefault<FxHasher>>;

pub struct Integrator {
    order: PickOrder,
    memo: Memo,
}

static GLOBAL: Lazy<Integrator> = Lazy::new(|| Integrator::new(PickOrder::SmallestFirst));

/// `int psi_1^a_1 ... psi_n^a_n` over `M_{0,n}-bar`.
pub fn psi_integral(n: usize, exponents: &[u32]) -> Rational {
    if n < 3 {
        return Rational::zero();
    }
    let total: u64 = exponents.iter().map(|&a| a as u64).sum();
    if total != (n - 3) as u64 {
        return Rational::zero();
    }
    Rational::from_bigint(multinomial(exponents))
}

pub(crate) fn multinomial(parts: &[u32]) -> BigInt {
    // Product of binomials (a_1 + ... + a_k choose a_k).
    let mut acc = BigInt::from(1);
    let mut run = 0u64;
    for &a in parts {
        for j in 1..=a as u64 {
            run += 1;
            acc *= run;
            acc /= j;
        }
    }
    acc
}

/// Integral of the top-degree part of `x`, using the shared memo.
pub fn integrate(x: &CohClass) -> LaurentPoly {
    GLOBAL.class(x)
}

pub fn integrate_monomial(n: usize, m: &Monomial) -> Rational {
    GLOBAL.monomial(n, m)
}

impl Integrator {
    pub fn new(order: PickOrder) -> Self {
        Integrator { order, memo: Memo::default() }
    }

    /// The process-wide integrator (smallest-first order).
    pub fn global() -> &'static Integrator {
        &GLOBAL
    }

    pub fn order(&self) -> PickOrder {
        self.order
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn clear(&self) {
        self.memo.clear();
    }

    pub fn class(&self, x: &CohClass) -> LaurentPoly {
        let top = x.top_degree();
        let terms: Vec<(&Monomial, &LaurentPoly)> =
            x.terms().filter(|(m, _)| m.degree() == top).collect();
        let n = x.n();
        let parts = par::map(&terms, |&(m, c)| {
            let v = self.monomial(n, m);
            if v.is_zero() {
                LaurentPoly::zero(x.nvars())
            } else {
                c.scale(&v)
            }
        });
        let mut acc = LaurentPoly::zero(x.nvars());
        for p in &parts {
            acc.add_assign_ref(p);
        }
        acc
    }

    pub fn monomial(&self, n: usize, m: &Monomial) -> Rational {
        if n < 3 || m.degree() != n - 3 || !m.is_compatible() {
            return Rational::zero();
        }
        if n == 3 {
            return Rational::one();
        }
        let full = Subset::full(n - 1);
        let is_boundary = |s: Subset| s.len() >= 2 && s != full;
        if !m.factors().iter().any(|&(s, _)| is_boundary(s)) {
            return psi_base(n, m);
        }
        let m = canonical(n, m);
        let key = (n as u8, m);
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let v = self.restrict_and_recurse(n, &key.1);
        self.memo.insert(key, v.clone());
        v
    }

    fn pick(&self, n: usize, m: &Monomial) -> Subset {
        let full = Subset::full(n - 1);
        let cands = m.factors().iter().map(|&(s, _)| s).filter(|&s| s.len() >= 2 && s != full);
        match self.order {
            PickOrder::SmallestFirst => cands.min_by_key(|s| (s.len(), s.0)).expect("boundary factor"),
            PickOrder::Seeded(seed) => {
                let all: Vec<Subset> = cands.collect();
                let mut h = FxHasher::default();
                seed.hash(&mut h);
                m.hash(&mut h);
                all[(h.finish() % all.len() as u64) as usize]
            }
        }
    }

    fn restrict_and_recurse(&self, n: usize, m: &Monomial) -> Rational {
        let t = self.pick(n, m);
        let split = Split::new(n, t).expect("picked a boundary divisor");
        let Some((left, right, e)) = split.map_rest(m) else {
            return Rational::zero();
        };
        // Only one term of the binomial expansion has the right degree split.
        let want_left = split.n_left - 3;
        let rest = e as usize - 1;
        if left.degree() > want_left || want_left - left.degree() > rest {
            return Rational::zero();
        }
        let j = want_left - left.degree();
        let l = left.mul(&Monomial::power(split.left_node(), j as u8)).expect("compatible");
        let lv = self.monomial(split.n_left, &l);
        if lv.is_zero() {
            return lv;
        }
        let r = right
            .mul(&Monomial::power(split.right_node(), (rest - j) as u8))
            .expect("compatible");
        let rv = self.monomial(split.n_right, &r);
        let binom = Rational::from_bigint(multinomial(&[j as u32, (rest - j) as u32]));
        binom * lv * rv
    }
}

/// Only `D^{i} = -psi_i` and `D^{[n-1]} = -psi_n` remain.
fn psi_base(n: usize, m: &Monomial) -> Rational {
    let full = Subset::full(n - 1);
    let mut exps = vec![0u32; n];
    for &(s, e) in m.factors() {
        let i = if s == full { n - 1 } else { s.first().expect("nonempty") };
        exps[i] += e as u32;
    }
    let v = psi_integral(n, &exps);
    if m.degree() % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Relabels markings `0..n-1` by a signature sort so that symmetric repeats
/// share a memo entry. Not a full canonical form, only a valid relabeling.
fn canonical(n: usize, m: &Monomial) -> Monomial {
    let k = n - 1;
    let mut sigs: Vec<(smallvec::SmallVec<[(u8, u8); 6]>, usize)> = (0..k)
        .map(|i| {
            let mut sig: smallvec::SmallVec<[(u8, u8); 6]> = m
                .factors()
                .iter()
                .filter(|(s, _)| s.contains(i))
                .map(|&(s, e)| (s.len() as u8, e))
                .collect();
            sig.sort_unstable();
            (sig, i)
        })
        .collect();
    sigs.sort_unstable();
    let mut map = vec![0usize; k];
    for (new, (_, old)) in sigs.iter().enumerate() {
        map[*old] = new;
    }
    m.relabel(&map)
}
