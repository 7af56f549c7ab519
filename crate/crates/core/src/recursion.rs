//! Comb-partition recursions.
//!
//! Expanding the Euler class over non-trivial partitions of the first `n-1`
//! markings gives one comb curve per partition: a head carrying the last
//! marking, and one tooth per block of size at least two. Teeth integrate to
//! closed factors and heads are invariants with fewer markings.

use std::hash::BuildHasherDefault;

use dashmap::DashMap;
use num_bigint::BigInt;
use num_traits::One;
use once_cell::sync::Lazy;
use rustc_hash::FxHasher;
use serde::{Deserialize, Serialize};

use crate::error::{HhiError, Result};
use crate::euler::weighted_class;
use crate::exactnum::{frac_factorial, signed_index_set, LaurentPoly, Rational, TExp};
use crate::invariants::{invariant_weighted, InvariantKey, Normalization};
use crate::mzeron::psi_integral;
use crate::orbifold::OrbifoldData;
use crate::par;
use crate::subset::Subset;

/// A partition `m = (m_1, ..., m_k)` of an integer, parts sorted descending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SizePartition {
    parts: Vec<u32>,
}

impl SizePartition {
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(HhiError::Precondition("partition parts must be positive".into()));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(SizePartition { parts })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// Product of the factorials of the part multiplicities.
    pub fn aut(&self) -> BigInt {
        let mut acc = BigInt::one();
        let mut run = 0u32;
        for (i, m) in self.parts.iter().enumerate() {
            run = if i > 0 && self.parts[i - 1] == *m { run + 1 } else { 1 };
            acc *= run;
        }
        acc
    }

    /// Every partition of `p`, in reverse lexicographic order.
    pub fn all(p: u32) -> Vec<SizePartition> {
        fn go(left: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<SizePartition>) {
            if left == 0 {
                out.push(SizePartition { parts: cur.clone() });
                return;
            }
            for m in (1..=left.min(max)).rev() {
                cur.push(m);
                go(left - m, m, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        go(p, p, &mut Vec::new(), &mut out);
        out
    }
}

/// `(n; parts..., n - sum parts)`, zero if the parts overflow `n`.
fn multinomial_rest(n: u32, parts: &[u32]) -> BigInt {
    let used: u32 = parts.iter().sum();
    if used > n {
        return BigInt::from(0);
    }
    let mut all = parts.to_vec();
    all.push(n - used);
    crate::mzeron::multinomial_coefficient(&all)
}

/// Calls `f` on every set partition of `0..k` whose blocks of size at least
/// two pass `allow`. Blocks are listed by their smallest element.
pub fn for_each_set_partition(k: usize, allow: &dyn Fn(Subset) -> bool, f: &mut dyn FnMut(&[Subset])) {
    fn go(rest: Subset, blocks: &mut Vec<Subset>, allow: &dyn Fn(Subset) -> bool, f: &mut dyn FnMut(&[Subset])) {
        let Some(first) = rest.first() else {
            f(blocks);
            return;
        };
        let others = rest.minus(Subset::singleton(first));
        // Subsets of `others`, by bit enumeration.
        let mut sub = 0u64;
        loop {
            let block = Subset(sub).with(first);
            if block.len() == 1 || allow(block) {
                blocks.push(block);
                go(rest.minus(block), blocks, allow, f);
                blocks.pop();
            }
            if sub == others.0 {
                break;
            }
            sub = (sub.wrapping_sub(others.0)) & others.0;
        }
    }
    go(Subset::full(k), &mut Vec::new(), allow, f);
}

/// All set partitions of `0..k`.
pub fn set_partitions(k: usize) -> Vec<Vec<Subset>> {
    let mut out = Vec::new();
    for_each_set_partition(k, &|_| true, &mut |b| out.push(b.to_vec()));
    out
}

/// A partition that is neither a single block nor all singletons.
pub fn is_nontrivial(blocks: &[Subset]) -> bool {
    blocks.len() > 1 && blocks.iter().any(|b| b.len() >= 2)
}

/// One summand of the comb expansion for a fixed partition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPartitionTerm {
    /// Blocks in order of their smallest marking.
    pub blocks: Vec<Subset>,
    /// Merged element `e_T` of each block.
    pub elements: Vec<u32>,
    /// `(-1)^{#teeth + 1}`.
    pub sign: i32,
    /// Product over teeth of the tooth integral, times the power of `t`
    /// that reduces the merged ages of the head to `[0, 1)`.
    pub weight: LaurentPoly,
}

impl SetPartitionTerm {
    pub fn teeth(&self) -> impl Iterator<Item = Subset> + '_ {
        self.blocks.iter().copied().filter(|b| b.len() >= 2)
    }
}

fn require_c3(data: &OrbifoldData) -> Result<()> {
    if data.dim() != 3 {
        return Err(HhiError::Precondition(format!("tooth condition needs N = 3, got N = {}", data.dim())));
    }
    Ok(())
}

/// `e_T` acts with age 1 on `C^3` and non-trivially in every direction.
pub fn tooth_admissible(data: &OrbifoldData, t: Subset) -> Result<bool> {
    require_c3(data)?;
    if t.len() < 2 || !t.is_subset_of(Subset::full(data.n().saturating_sub(1))) {
        return Err(HhiError::InvalidSubset(format!("{t:?} is not a tooth")));
    }
    let mut sum = Rational::zero();
    for a in 0..3 {
        let f = data.age_sum(t, a).fract_floor();
        if f.is_zero() {
            return Ok(false);
        }
        sum += &f;
    }
    Ok(sum.is_one())
}

/// Integral over the tooth `M_{0,|T|+1}-bar` of the tooth part of `x_T`:
/// `(-1)^|T| prod_a t_a^{-(ceil(delta_T) - 1)} (delta_T - 1)!`.
pub fn tooth_factor(data: &OrbifoldData, t: Subset) -> Result<LaurentPoly> {
    if !tooth_admissible(data, t)? {
        return Err(HhiError::Precondition(format!("{t:?} is not an admissible tooth")));
    }
    let mut exp = TExp::default();
    let mut c = if t.len().is_multiple_of(2) { Rational::one() } else { -Rational::one() };
    for a in 0..3 {
        let delta = data.age_sum(t, a);
        exp.0[a] = -(delta.ceil() - BigInt::one()).try_into().unwrap_or(i32::MAX);
        c *= &frac_factorial(&(delta - Rational::one()))?;
    }
    Ok(LaurentPoly::monomial(3, exp, c))
}

/// `prod_a t_a^{floor(delta_T)}`: reducing the ages of a merged marking
/// multiplies the head's Euler class by this.
fn reduction_shift(data: &OrbifoldData, t: Subset) -> LaurentPoly {
    let nvars = data.dim();
    let mut exp = TExp::default();
    for a in 0..nvars {
        exp.0[a] = data.age_sum(t, a).floor().try_into().unwrap_or(i32::MAX);
    }
    LaurentPoly::monomial(nvars, exp, Rational::one())
}

/// Which teeth the age-1 recursion keeps.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ToothRule {
    /// `e_T` of age 1 acting non-trivially in every direction.
    #[default]
    Strict,
    /// Also teeth whose markings all act trivially in some direction. Their
    /// tooth integral does not vanish, so weights whose age-1 elements have a
    /// trivial direction need them.
    Extended,
}

impl ToothRule {
    pub fn allows(self, data: &OrbifoldData, t: Subset) -> Result<bool> {
        match self {
            ToothRule::Strict => tooth_admissible(data, t),
            ToothRule::Extended => {
                require_c3(data)?;
                if t.len() < 2 {
                    return Err(HhiError::InvalidSubset(format!("{t:?} is not a tooth")));
                }
                let mut sum = Rational::zero();
                for a in 0..3 {
                    let delta = data.age_sum(t, a);
                    let f = delta.fract_floor();
                    if f.is_zero() && !delta.is_zero() {
                        return Ok(false);
                    }
                    sum += &f;
                }
                Ok(sum.is_one())
            }
        }
    }

    /// Tooth weight times the age-reduction shift of the head.
    pub fn weight(self, data: &OrbifoldData, t: Subset) -> Result<LaurentPoly> {
        match self {
            ToothRule::Strict => Ok(tooth_factor(data, t)?.mul_ref(&reduction_shift(data, t))),
            ToothRule::Extended => {
                let zeros = vec![0; t.len()];
                Ok(tooth_weights(data, t, &zeros, 0)?.swap_remove(0))
            }
        }
    }
}

/// Head of the comb for `blocks`: one marking per block with the merged
/// element, then the last marking. `node_psi[j]` is the descendant at block
/// `j`; singletons normally carry their own.
fn head_key(key: &InvariantKey, blocks: &[Subset], node_psi: &[u32]) -> InvariantKey {
    let data = key.data();
    let n = data.n();
    let mut elements: Vec<u32> = blocks.iter().map(|&b| data.merged_element(b)).collect();
    elements.push(data.elements()[n - 1]);
    let mut psi = node_psi.to_vec();
    psi.push(key.psi()[n - 1]);
    InvariantKey::new(data.with_elements(elements), psi).expect("one exponent per marking")
}

/// How `comb_recursion` enumerates partitions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Enumeration {
    /// Grouped by block sizes when the first `n-1` elements agree, set
    /// partitions otherwise.
    #[default]
    Auto,
    /// Always enumerate set partitions.
    Generic,
    /// Group by block sizes; requires equal elements.
    Grouped,
}

/// Largest `n-1` enumerated partition by partition.
pub const GENERIC_MAX_MARKINGS: usize = 12;

fn check_recursion_key(key: &InvariantKey) -> Result<()> {
    let data = key.data();
    let n = data.n();
    require_c3(data)?;
    if n < 3 {
        return Err(HhiError::Precondition(format!("need at least 3 markings, got {n}")));
    }
    if !data.is_calabi_yau() {
        return Err(HhiError::Precondition("weights must sum to 0 mod r".into()));
    }
    if key.psi()[..n - 1].iter().any(|&v| v != 0) {
        return Err(HhiError::Precondition("descendants are allowed at the last marking only".into()));
    }
    for i in 0..n - 1 {
        if !data.total_age(i).is_one() {
            return Err(HhiError::Precondition(format!("element at marking {} does not have age 1", i + 1)));
        }
    }
    Ok(())
}

/// Summands of the recursion for `key`, one per partition with admissible
/// teeth. The weighted term is not included.
pub fn comb_terms(key: &InvariantKey) -> Result<Vec<SetPartitionTerm>> {
    comb_terms_with(key, ToothRule::Strict)
}

pub fn comb_terms_with(key: &InvariantKey, rule: ToothRule) -> Result<Vec<SetPartitionTerm>> {
    check_recursion_key(key)?;
    let data = key.data();
    let k = data.n() - 1;
    if k > GENERIC_MAX_MARKINGS {
        return Err(HhiError::Precondition(format!(
            "set-partition enumeration is capped at {GENERIC_MAX_MARKINGS} markings"
        )));
    }
    let allow = |b: Subset| rule.allows(data, b).unwrap_or(false);
    let mut out = Vec::new();
    let mut err = None;
    for_each_set_partition(k, &allow, &mut |blocks| {
        if !is_nontrivial(blocks) || err.is_some() {
            return;
        }
        let mut weight = LaurentPoly::one(3);
        for &b in blocks.iter().filter(|b| b.len() >= 2) {
            match rule.weight(data, b) {
                Ok(f) => weight = weight.mul_ref(&f),
                Err(e) => err = Some(e),
            }
        }
        let teeth = blocks.iter().filter(|b| b.len() >= 2).count();
        out.push(SetPartitionTerm {
            blocks: blocks.to_vec(),
            elements: blocks.iter().map(|&b| data.merged_element(b)).collect(),
            sign: if teeth % 2 == 1 { 1 } else { -1 },
            weight,
        });
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

type Memo = DashMap<InvariantKey, LaurentPoly, BuildHasherDefault<FxHasher>>;

/// The age-1 recursion on `[C^3 / mu_r]` with a memo of head invariants.
pub struct CombRecursion {
    enumeration: Enumeration,
    rule: ToothRule,
    memo: Memo,
}

static GLOBAL: Lazy<CombRecursion> = Lazy::new(|| CombRecursion::new(Enumeration::Auto));

/// `<h_{e_1} ... h_{e_{n-1}} psi_n^nu h_{e_n}>` by the comb recursion, with
/// stack normalization.
pub fn comb_recursion(key: &InvariantKey) -> Result<LaurentPoly> {
    GLOBAL.value(key)
}

impl CombRecursion {
    pub fn new(enumeration: Enumeration) -> Self {
        Self::with_rule(enumeration, ToothRule::Strict)
    }

    pub fn with_rule(enumeration: Enumeration, rule: ToothRule) -> Self {
        CombRecursion { enumeration, rule, memo: Memo::default() }
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn value(&self, key: &InvariantKey) -> Result<LaurentPoly> {
        check_recursion_key(key)?;
        if self.enumeration == Enumeration::Grouped {
            let e = key.data().elements();
            if e[..key.n() - 1].iter().any(|&k| k != e[0]) {
                return Err(HhiError::Precondition("grouped enumeration needs equal elements".into()));
            }
        }
        self.value_unchecked(&key.canonical())
    }

    fn value_unchecked(&self, key: &InvariantKey) -> Result<LaurentPoly> {
        if !key.data().admissible() {
            return Ok(LaurentPoly::zero(3));
        }
        if let Some(v) = self.memo.get(key) {
            return Ok(v.clone());
        }
        let n = key.n();
        let first = key.data().elements()[0];
        let all_equal = key.data().elements()[..n - 1].iter().all(|&e| e == first);
        // Heads with merged markings are rarely uniform, so `Grouped` only
        // constrains the key it is called on.
        let grouped = match self.enumeration {
            Enumeration::Auto | Enumeration::Grouped => all_equal,
            Enumeration::Generic => false,
        };
        let mut v = invariant_weighted(key)?;
        let sum = if grouped { self.grouped_sum(key)? } else { self.generic_sum(key)? };
        v.add_assign_ref(&sum);
        self.memo.insert(key.clone(), v.clone());
        Ok(v)
    }

    fn generic_sum(&self, key: &InvariantKey) -> Result<LaurentPoly> {
        let terms = comb_terms_with(key, self.rule)?;
        let parts = par::map(&terms, |term| -> Result<LaurentPoly> {
            let node_psi = vec![0; term.blocks.len()];
            let head = head_key(key, &term.blocks, &node_psi);
            let h = self.value_unchecked(&head.canonical())?;
            Ok(h.mul_ref(&term.weight).scale(&Rational::from_int(term.sign as i64)))
        });
        let mut acc = LaurentPoly::zero(3);
        for p in parts {
            acc.add_assign_ref(&p?);
        }
        Ok(acc)
    }

    /// All first `n-1` elements equal: partitions with the same multiset of
    /// block sizes contribute equally, `(n-1; sizes, rest) / |Aut|` times.
    fn grouped_sum(&self, key: &InvariantKey) -> Result<LaurentPoly> {
        let data = key.data();
        let n = data.n();
        let k = (n - 1) as u32;
        let e = data.elements()[0];
        let size_ok: Vec<bool> = (0..=k)
            .map(|s| s >= 2 && self.rule.allows(data, Subset::full(s as usize)).unwrap_or(false))
            .collect();
        let mut acc = LaurentPoly::zero(3);
        for total in 2..=k {
            for sizes in block_size_multisets(total, &size_ok) {
                let parts = sizes.parts();
                if parts.len() == 1 && parts[0] == k {
                    continue;
                }
                let count = Rational::from_bigint(multinomial_rest(k, parts)) / Rational::from_bigint(sizes.aut());
                let mut weight = LaurentPoly::constant(3, count);
                let mut elements = Vec::with_capacity(n);
                for &s in parts {
                    let t = Subset::full(s as usize);
                    weight = weight.mul_ref(&self.rule.weight(data, t)?);
                    elements.push(data.merged_element(t));
                }
                elements.extend(std::iter::repeat_n(e, (k - total) as usize));
                let nh = elements.len() + 1;
                elements.push(data.elements()[n - 1]);
                let mut psi = vec![0; nh];
                psi[nh - 1] = key.psi()[n - 1];
                let head = InvariantKey::new(data.with_elements(elements), psi)?;
                let h = self.value_unchecked(&head.canonical())?;
                let sign = if parts.len() % 2 == 1 { 1 } else { -1 };
                acc.add_assign_ref(&h.mul_ref(&weight).scale(&Rational::from_int(sign)));
            }
        }
        Ok(acc)
    }
}

/// Multisets of block sizes summing to `total`, every size allowed by `ok`.
fn block_size_multisets(total: u32, ok: &[bool]) -> Vec<SizePartition> {
    SizePartition::all(total)
        .into_iter()
        .filter(|p| p.parts().iter().all(|&s| ok[s as usize]))
        .collect()
}

/// Truncated power series in one variable; `coeffs[k]` multiplies `t^k` and
/// nothing is known from `t^order` on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Series {
    coeffs: Vec<Rational>,
}

impl Series {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        Series { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Series { coeffs: vec![Rational::zero(); order] }
    }

    /// `t`, known through `t^{order-1}`.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order > 1 {
            s.coeffs[1] = Rational::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `None` at or past the truncation order.
    pub fn coeff(&self, k: usize) -> Option<&Rational> {
        self.coeffs.get(k)
    }

    pub fn truncate(&self, order: usize) -> Series {
        Series { coeffs: self.coeffs[..order.min(self.order())].to_vec() }
    }

    pub fn add(&self, other: &Series) -> Series {
        let order = self.order().min(other.order());
        Series { coeffs: (0..order).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect() }
    }

    pub fn mul(&self, other: &Series) -> Series {
        let order = self.order().min(other.order());
        let mut out = vec![Rational::zero(); order];
        for (i, a) in self.coeffs.iter().enumerate().take(order) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(order - i) {
                if !b.is_zero() {
                    out[i + j] += &(a * b);
                }
            }
        }
        Series { coeffs: out }
    }

    /// `self(inner(t))`; `inner` must have no constant term.
    pub fn compose(&self, inner: &Series) -> Result<Series> {
        if inner.coeff(0).is_some_and(|c| !c.is_zero()) {
            return Err(HhiError::Series("inner series has a constant term".into()));
        }
        let order = self.order().min(inner.order());
        let mut acc = Series::zero(order);
        for c in self.coeffs[..order].iter().rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] += c;
        }
        Ok(acc)
    }
}

/// The mirror map of `[C^3 / mu_3]` in the `h_omega` coordinate:
/// `tau(t) = sum_k (-1)^{3k} ((k - 2/3)!)^3 t^{3k+1} / (3k+1)!`.
pub fn mirror_tau(order: usize) -> Result<Series> {
    if order < 1 {
        return Err(HhiError::Series("order must be at least 1".into()));
    }
    let mut s = Series::zero(order);
    let mut k = 0;
    while 3 * k + 1 < order {
        let f = frac_factorial(&(Rational::from_int(k as i64) - Rational::new(2, 3)))?;
        let sign = if k % 2 == 1 { -1 } else { 1 };
        s.coeffs[3 * k + 1] = Rational::from_int(sign) * f.pow(3)? / factorial(3 * k + 1);
        k += 1;
    }
    Ok(s)
}

/// Solves `A = B(tau(t))` for `B` by matching coefficients.
pub fn mirror_invert(a: &Series, tau: &Series) -> Result<Series> {
    if tau.coeff(0).is_some_and(|c| !c.is_zero()) {
        return Err(HhiError::Series("tau has a constant term".into()));
    }
    let lin = match tau.coeff(1) {
        Some(c) if !c.is_zero() => c.clone(),
        _ => return Err(HhiError::Series("tau has no linear term".into())),
    };
    let order = a.order().min(tau.order());
    // powers[j] = tau^j
    let mut powers = Vec::with_capacity(order);
    let mut p = Series::zero(order);
    if order > 0 {
        p.coeffs[0] = Rational::one();
    }
    for _ in 0..order {
        powers.push(p.clone());
        p = p.mul(tau);
    }
    let mut b = vec![Rational::zero(); order];
    for k in 0..order {
        let mut rest = a.coeffs[k].clone();
        for (j, bj) in b.iter().enumerate().take(k) {
            if !bj.is_zero() {
                rest -= &(bj * &powers[j].coeffs[k]);
            }
        }
        b[k] = rest / lin.pow(k as i32)?;
    }
    Ok(Series::new(b))
}

fn factorial(k: usize) -> Rational {
    Rational::from_bigint((1..=k as u64).fold(BigInt::one(), |acc, j| acc * j))
}

fn c3z3_data(n: usize) -> OrbifoldData {
    OrbifoldData::new(3, &[1, 1, 1], &vec![1; n]).expect("valid data")
}

/// `I_l = <h_omega^{3l+3}>` on `[C^3 / mu_3]`.
fn c3z3_weighted(l: usize) -> Result<Rational> {
    let key = InvariantKey::primary(c3z3_data(3 * l + 3));
    let v = invariant_weighted(&key)?;
    v.as_constant().ok_or_else(|| HhiError::Precondition("weighted term is not constant".into()))
}

/// `((x - 2/3)!)^3` for the tooth with `3m + 1` markings.
fn c3z3_tooth(m: u32) -> Result<Rational> {
    frac_factorial(&(Rational::from_int(m as i64) - Rational::new(2, 3)))?.pow(3)
}

/// `I_0, ..., I_lmax` by the recursion over partitions `m` of `p`.
pub fn c3z3_series(lmax: usize) -> Result<Vec<Rational>> {
    let mut out: Vec<Rational> = Vec::with_capacity(lmax + 1);
    for l in 0..=lmax {
        let n = 3 * l as u32 + 3;
        let mut v = c3z3_weighted(l)?;
        for p in 1..=l as u32 {
            for m in SizePartition::all(p) {
                let sizes: Vec<u32> = m.parts().iter().map(|&mj| 3 * mj + 1).collect();
                let count = multinomial_rest(n - 1, &sizes);
                if count == BigInt::from(0) {
                    continue;
                }
                let mut term = Rational::from_bigint(count) / Rational::from_bigint(m.aut());
                for &mj in m.parts() {
                    term *= &c3z3_tooth(mj)?;
                }
                // (-1)^{p+1}
                if p % 2 == 0 {
                    term = -term;
                }
                v += &(term * &out[l - p as usize]);
            }
        }
        out.push(v);
    }
    Ok(out)
}

/// `C_{p,l}`: the partition sum in the triangular system for the `I_l`.
pub fn c3z3_c(p: usize, l: usize) -> Result<Rational> {
    if p == 0 {
        return Ok(Rational::one());
    }
    let mut acc = Rational::zero();
    let top = 3 * l as u32 + 2;
    for m in SizePartition::all(p as u32) {
        if m.len() > 3 * (l - p) + 2 {
            continue;
        }
        let sizes: Vec<u32> = m.parts().iter().map(|&mj| 3 * mj + 1).collect();
        let mut term = Rational::from_bigint(multinomial_rest(top, &sizes)) / Rational::from_bigint(m.aut());
        for &mj in m.parts() {
            term *= &c3z3_tooth(mj)?;
        }
        acc += &term;
    }
    Ok(acc)
}

/// `I_l` from the inverted triangular system, as a sum over subsets of
/// `{0, ..., l-1}`.
pub fn c3z3_direct(l: usize) -> Result<Rational> {
    let third = Rational::new(1, 3);
    let cube_fact = |x: usize| -> Result<Rational> { frac_factorial(&(Rational::from_int(x as i64) - &third))?.pow(3) };
    // d(p, q) = C_{q-p, q}
    let mut d = vec![vec![Rational::zero(); l + 1]; l + 1];
    for q in 0..=l {
        for p in 0..=q {
            d[p][q] = c3z3_c(q - p, q)?;
        }
    }
    let mut sum = cube_fact(l)?;
    for mask in 1u64..(1u64 << l) {
        let xs: Vec<usize> = (0..l).filter(|&i| mask >> i & 1 == 1).collect();
        let mut term = cube_fact(xs[0])?;
        for w in xs.windows(2) {
            term *= &d[w[0]][w[1]];
        }
        term *= &d[*xs.last().expect("nonempty")][l];
        if xs.len() % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
    }
    let v = sum / Rational::from_int(3);
    Ok(if l % 2 == 1 { -v } else { v })
}

/// `A(t) = sum_n W_n t^{n-1} / (n-1)!` with `W_n` the weighted invariants of
/// `[C^3 / mu_3]`, known through `t^{order-1}`.
pub fn c3z3_weighted_series(order: usize) -> Result<Series> {
    let mut s = Series::zero(order);
    let mut l = 0;
    while 3 * l + 2 < order {
        s.coeffs[3 * l + 2] = c3z3_weighted(l)? / factorial(3 * l + 2);
        l += 1;
    }
    Ok(s)
}

/// `I_0, ..., I_lmax` by inverting the mirror map against the weighted series.
pub fn c3z3_mirror(lmax: usize) -> Result<Vec<Rational>> {
    let order = 3 * lmax + 3;
    let b = mirror_invert(&c3z3_weighted_series(order)?, &mirror_tau(order)?)?;
    Ok((0..=lmax).map(|l| &b.coeffs[3 * l + 2] * &factorial(3 * l + 2)).collect())
}

/// The leading summand of the expansion: the weighted class with `H` set to
/// `psi_n`, integrated against the descendants of `key`.
pub fn base_term(key: &InvariantKey, norm: Normalization) -> Result<LaurentPoly> {
    let data = key.data();
    let n = data.n();
    let nvars = data.dim();
    if n < 3 {
        return Err(HhiError::Precondition(format!("need at least 3 markings, got {n}")));
    }
    let deg = key.psi_degree();
    if !data.admissible() || deg > n - 3 {
        return Ok(LaurentPoly::zero(nvars));
    }
    let w = weighted_class(data)?;
    let j = n - 3 - deg;
    let mut exps = key.psi().to_vec();
    exps[n - 1] += j as u32;
    let v = w.coeff(j).scale(&psi_integral(n, &exps));
    Ok(match norm {
        Normalization::Stack => v.scale(&Rational::new(1, data.r() as i64)),
        Normalization::Coarse => v,
    })
}

/// Tooth integrals for a block `t` with the descendants `nu_t` of its
/// markings: entry `j` is the coefficient of `psi_node^j` left on the head,
/// already multiplied by the age-reduction shift. Entries run to `jmax`.
pub fn tooth_weights(data: &OrbifoldData, t: Subset, nu_t: &[u32], jmax: usize) -> Result<Vec<LaurentPoly>> {
    let nvars = data.dim();
    let zero = vec![LaurentPoly::zero(nvars); jmax + 1];
    let nu_sum: usize = nu_t.iter().map(|&v| v as usize).sum();
    if t.len() < 2 || nu_sum + 2 > t.len() {
        return Ok(zero);
    }
    // The node exponent on the tooth is forced by the tooth's dimension.
    let l = t.len() - 2 - nu_sum;
    let mut exps = nu_t.to_vec();
    exps.push(l as u32);
    let mult = psi_integral(t.len() + 1, &exps);
    if mult.is_zero() {
        return Ok(zero);
    }
    // f(z) = prod_a prod_p (1 + p z / t_a)^{+-1}, up to z^{l+1+jmax}.
    let top = l + 1 + jmax;
    let mut f = vec![LaurentPoly::zero(nvars); top + 1];
    f[0] = LaurentPoly::one(nvars);
    for a in 0..nvars {
        let set = signed_index_set(&(data.age_sum(t, a) - Rational::one()));
        let inv_t = LaurentPoly::var_pow(nvars, a, -1);
        for p in &set.positives {
            let c1 = inv_t.scale(p);
            for k in (1..=top).rev() {
                let add = f[k - 1].mul_ref(&c1);
                f[k].add_assign_ref(&add);
            }
        }
        for p in &set.negatives {
            // divide by (1 + c1 z)
            let c1 = inv_t.scale(p);
            for k in 1..=top {
                let sub = f[k - 1].mul_ref(&c1);
                f[k] = f[k].add_ref(&sub.neg_ref());
            }
        }
    }
    let sign = if l % 2 == 1 { -mult } else { mult };
    let shift = reduction_shift(data, t).scale(&sign);
    Ok((0..=jmax).map(|j| f[l + 1 + j].mul_ref(&shift)).collect())
}

/// One comb summand for an arbitrary key: the head invariant and its weight.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombHead {
    pub head: InvariantKey,
    pub weight: LaurentPoly,
}

/// Expands `key` over non-trivial partitions of the first `n-1` markings.
/// With `base_term`, `sum weight * <head>` reproduces the invariant.
pub fn equivariant_comb_expand(key: &InvariantKey) -> Result<Vec<CombHead>> {
    let data = key.data();
    let n = data.n();
    let nvars = data.dim();
    if n < 3 {
        return Err(HhiError::Precondition(format!("need at least 3 markings, got {n}")));
    }
    if n - 1 > GENERIC_MAX_MARKINGS {
        return Err(HhiError::Precondition(format!(
            "set-partition enumeration is capped at {GENERIC_MAX_MARKINGS} markings"
        )));
    }
    if !data.admissible() || key.psi_degree() > n - 3 {
        return Ok(Vec::new());
    }
    let psi = key.psi();
    let mut out: Vec<CombHead> = Vec::new();
    let mut err = None;
    for_each_set_partition(n - 1, &|_| true, &mut |blocks| {
        if !is_nontrivial(blocks) || err.is_some() {
            return;
        }
        let nh = blocks.len() + 1;
        // Head descendants already fixed: singletons and the last marking.
        let fixed: usize = blocks
            .iter()
            .filter(|b| b.len() == 1)
            .map(|b| psi[b.first().expect("nonempty")] as usize)
            .sum::<usize>()
            + psi[n - 1] as usize;
        if fixed > nh - 3 {
            return;
        }
        let jmax = nh - 3 - fixed;
        // Per block: list of (node exponent, weight).
        let mut options: Vec<Vec<(u32, LaurentPoly)>> = Vec::with_capacity(blocks.len());
        for &b in blocks {
            if b.len() == 1 {
                let i = b.first().expect("nonempty");
                options.push(vec![(psi[i], LaurentPoly::one(nvars))]);
                continue;
            }
            let nu_t: Vec<u32> = b.iter().map(|i| psi[i]).collect();
            match tooth_weights(data, b, &nu_t, jmax) {
                Ok(ws) => {
                    let opts: Vec<(u32, LaurentPoly)> =
                        ws.into_iter().enumerate().filter(|(_, w)| !w.is_zero()).map(|(j, w)| (j as u32, w)).collect();
                    if opts.is_empty() {
                        return;
                    }
                    options.push(opts);
                }
                Err(e) => {
                    err = Some(e);
                    return;
                }
            }
        }
        let teeth = blocks.iter().filter(|b| b.len() >= 2).count();
        let sign = Rational::from_int(if teeth % 2 == 1 { 1 } else { -1 });
        let mut choice = vec![0usize; blocks.len()];
        loop {
            let node_psi: Vec<u32> = choice.iter().zip(&options).map(|(&c, o)| o[c].0).collect();
            let total: usize = node_psi.iter().map(|&v| v as usize).sum::<usize>() + psi[n - 1] as usize;
            if total <= nh - 3 {
                let mut w = LaurentPoly::constant(nvars, sign.clone());
                for (&c, o) in choice.iter().zip(&options) {
                    w = w.mul_ref(&o[c].1);
                }
                out.push(CombHead { head: head_key(key, blocks, &node_psi), weight: w });
            }
            // next choice
            let mut i = 0;
            while i < choice.len() {
                choice[i] += 1;
                if choice[i] < options[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == choice.len() {
                break;
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

#[cfg(test)]
mod tests;
