//! The cohomology ring of `M_{0,n}-bar` on boundary-divisor symbols.
//!
//! Markings are `0..n`; the last one (`n-1`, 0-based) is distinguished. A
//! symbol `D^T` is indexed by a nonempty `T` inside the first `n-1` markings:
//!
//! * `2 <= |T| <= n-2`: the boundary divisor separating `T` from its
//!   complement,
//! * `T = {i}`: `-psi_i`,
//! * `T` = all of the first `n-1` markings: `-psi_n`.
//!
//! Products are reduced by the relation `D^S D^T = 0` for incomparable,
//! intersecting `S, T` and truncated above degree `n-3`. That ideal is
//! monomial, so the reduced form of a class is unique.

mod integrate;
mod restrict;
mod strata;

use std::collections::hash_map::Entry;
use std::fmt;

use rustc_hash::FxHashMap;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{HhiError, Result};
use crate::exactnum::{LaurentPoly, Rational};
use crate::par;
use crate::subset::Subset;

pub(crate) use integrate::multinomial as multinomial_coefficient;
pub use integrate::{integrate, integrate_monomial, psi_integral, Integrator, PickOrder};
pub use restrict::{restrict_to_boundary, Restriction};
pub use strata::{equal_in_cohomology, pair_with, strata, vanishes_in_cohomology};

/// A product of symbols `D^T` with positive exponents, sorted by subset.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    factors: SmallVec<[(Subset, u8); 8]>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn symbol(t: Subset) -> Self {
        Self::power(t, 1)
    }

    pub fn power(t: Subset, e: u8) -> Self {
        let mut m = Monomial::default();
        if e > 0 {
            m.factors.push((t, e));
        }
        m
    }

    /// Builds from arbitrary `(subset, exponent)` pairs, merging repeats.
    pub fn from_factors(it: impl IntoIterator<Item = (Subset, u8)>) -> Self {
        let mut v: SmallVec<[(Subset, u8); 8]> = it.into_iter().filter(|&(_, e)| e > 0).collect();
        v.sort_unstable_by_key(|&(s, _)| s);
        let mut out: SmallVec<[(Subset, u8); 8]> = SmallVec::with_capacity(v.len());
        for (s, e) in v {
            match out.last_mut() {
                Some((ls, le)) if *ls == s => *le += e,
                _ => out.push((s, e)),
            }
        }
        Monomial { factors: out }
    }

    pub fn factors(&self) -> &[(Subset, u8)] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        self.factors.iter().map(|&(_, e)| e as usize).sum()
    }

    pub fn exponent(&self, t: Subset) -> u8 {
        self.factors
            .binary_search_by_key(&t, |&(s, _)| s)
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    /// No pair of factors is incomparable and intersecting.
    pub fn is_compatible(&self) -> bool {
        let f = &self.factors;
        (0..f.len()).all(|i| (i + 1..f.len()).all(|j| f[i].0.compatible(f[j].0)))
    }

    /// Product, or `None` when a relation kills it.
    pub fn mul(&self, other: &Monomial) -> Option<Monomial> {
        for &(s, _) in &self.factors {
            for &(t, _) in &other.factors {
                if !s.compatible(t) {
                    return None;
                }
            }
        }
        let mut out: SmallVec<[(Subset, u8); 8]> =
            SmallVec::with_capacity(self.factors.len() + other.factors.len());
        let (a, b) = (&self.factors, &other.factors);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Some(Monomial { factors: out })
    }

    /// Removes one factor of `D^t`; `None` if absent.
    pub fn without_one(&self, t: Subset) -> Option<Monomial> {
        let i = self.factors.binary_search_by_key(&t, |&(s, _)| s).ok()?;
        let mut m = self.clone();
        if m.factors[i].1 == 1 {
            m.factors.remove(i);
        } else {
            m.factors[i].1 -= 1;
        }
        Some(m)
    }

    pub fn relabel(&self, map: &[usize]) -> Monomial {
        Monomial::from_factors(self.factors.iter().map(|&(s, e)| (s.relabel(map), e)))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        for (k, (s, e)) in self.factors.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "D{s:?}")?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// An element of `H*(M_{0,n}-bar)` with Laurent-polynomial coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct CohClass {
    n: usize,
    nvars: usize,
    terms: FxHashMap<Monomial, LaurentPoly>,
}

impl CohClass {
    pub fn zero(n: usize, nvars: usize) -> Self {
        assert!((3..=64).contains(&n), "marking count {n} out of range");
        CohClass { n, nvars, terms: FxHashMap::default() }
    }

    pub fn scalar(n: usize, c: LaurentPoly) -> Self {
        let nvars = c.nvars();
        let mut x = Self::zero(n, nvars);
        if !c.is_zero() {
            x.terms.insert(Monomial::one(), c);
        }
        x
    }

    pub fn one(n: usize, nvars: usize) -> Self {
        Self::scalar(n, LaurentPoly::one(nvars))
    }

    pub fn rational(n: usize, nvars: usize, c: Rational) -> Self {
        Self::scalar(n, LaurentPoly::constant(nvars, c))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Top cohomological degree `n - 3`.
    pub fn top_degree(&self) -> usize {
        self.n - 3
    }

    /// The full index set of the first `n-1` markings.
    pub fn full_set(&self) -> Subset {
        Subset::full(self.n - 1)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &LaurentPoly)> {
        self.terms.iter()
    }

    /// Terms in a deterministic order.
    pub fn sorted_terms(&self) -> Vec<(&Monomial, &LaurentPoly)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn coeff(&self, m: &Monomial) -> LaurentPoly {
        self.terms.get(m).cloned().unwrap_or_else(|| LaurentPoly::zero(self.nvars))
    }

    fn check_symbol(n: usize, t: Subset) -> Result<()> {
        if t.is_empty() || !t.is_subset_of(Subset::full(n - 1)) {
            return Err(HhiError::InvalidSubset(format!(
                "{t:?} is not a nonempty subset of the first {} markings",
                n - 1
            )));
        }
        Ok(())
    }

    /// The symbol `D^T`.
    pub fn divisor(n: usize, nvars: usize, t: Subset) -> Result<Self> {
        Self::check_symbol(n, t)?;
        Ok(Self::from_monomial(n, nvars, Monomial::symbol(t), LaurentPoly::one(nvars)))
    }

    pub fn from_monomial(n: usize, nvars: usize, m: Monomial, c: LaurentPoly) -> Self {
        let mut x = Self::zero(n, nvars);
        if !c.is_zero() && m.is_compatible() && m.degree() <= n - 3 {
            x.terms.insert(m, c);
        }
        x
    }

    /// `psi_i` of marking `i` (0-based; `n-1` is the distinguished one).
    pub fn psi_marking(n: usize, nvars: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(HhiError::IndexOutOfRange(format!("marking {i} of {n}")));
        }
        let t = if i == n - 1 { Subset::full(n - 1) } else { Subset::singleton(i) };
        Ok(Self::divisor(n, nvars, t)?.neg())
    }

    /// `psi_T = sum_{S properly containing T} D^S`, with `psi_[n-1] = 0`.
    pub fn psi_subset(n: usize, nvars: usize, t: Subset) -> Result<Self> {
        Self::check_symbol(n, t)?;
        let full = Subset::full(n - 1);
        let mut x = Self::zero(n, nvars);
        if n == 3 {
            return Ok(x);
        }
        for extra in full.minus(t).nonempty_subsets() {
            x.terms.insert(Monomial::symbol(t.union(extra)), LaurentPoly::one(nvars));
        }
        Ok(x)
    }

    /// `psi_{T^C} = -D^T - psi_T`: the node psi-class on the `T` side of `D^T`.
    pub fn psi_complement(n: usize, nvars: usize, t: Subset) -> Result<Self> {
        let d = Self::divisor(n, nvars, t)?;
        Ok(d.add(&Self::psi_subset(n, nvars, t)?).neg())
    }

    fn insert_term(terms: &mut FxHashMap<Monomial, LaurentPoly>, m: Monomial, c: LaurentPoly) {
        if c.is_zero() {
            return;
        }
        match terms.entry(m) {
            Entry::Occupied(mut e) => {
                e.get_mut().add_assign_ref(&c);
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    fn check_same(&self, other: &CohClass) {
        assert_eq!(self.n, other.n, "classes on different moduli spaces");
    }

    pub fn add(&self, other: &CohClass) -> CohClass {
        self.check_same(other);
        let mut out = self.clone();
        out.nvars = self.nvars.max(other.nvars);
        for (m, c) in &other.terms {
            Self::insert_term(&mut out.terms, m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &CohClass) -> CohClass {
        self.add(&other.neg())
    }

    /// Sum consuming both operands, merging the smaller into the larger.
    pub fn add_owned(self, other: CohClass) -> CohClass {
        self.check_same(&other);
        let (mut big, small) = if self.terms.len() >= other.terms.len() { (self, other) } else { (other, self) };
        big.nvars = big.nvars.max(small.nvars);
        for (m, c) in small.terms {
            Self::insert_term(&mut big.terms, m, c);
        }
        big
    }

    pub fn neg(&self) -> CohClass {
        CohClass {
            n: self.n,
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg_ref())).collect(),
        }
    }

    pub fn scale(&self, c: &LaurentPoly) -> CohClass {
        let mut out = Self::zero(self.n, self.nvars.max(c.nvars()));
        if c.is_zero() {
            return out;
        }
        for (m, x) in &self.terms {
            let y = x.mul_ref(c);
            if !y.is_zero() {
                out.terms.insert(m.clone(), y);
            }
        }
        out
    }

    pub fn scale_rational(&self, c: &Rational) -> CohClass {
        self.scale(&LaurentPoly::constant(self.nvars, c.clone()))
    }

    /// Checked product; errors on mismatched marking counts.
    pub fn try_mul(&self, other: &CohClass) -> Result<CohClass> {
        if self.n != other.n {
            return Err(HhiError::MarkingMismatch(self.n, other.n));
        }
        Ok(self.mul_truncated(other, self.n - 3))
    }

    /// Product reduced by the incomparable-intersection relation.
    pub fn mul(&self, other: &CohClass) -> CohClass {
        self.check_same(other);
        self.mul_truncated(other, self.n - 3)
    }

    /// Product dropping every term of degree above `max_degree`.
    pub fn mul_truncated(&self, other: &CohClass, max_degree: usize) -> CohClass {
        self.check_same(other);
        let nvars = self.nvars.max(other.nvars);
        let (big, small) = if self.terms.len() >= other.terms.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut small_terms: Vec<(&Monomial, &LaurentPoly, usize)> =
            small.terms.iter().map(|(m, c)| (m, c, m.degree())).collect();
        small_terms.sort_by_key(|t| t.2);
        // Symbols shared by every non-unit term: a big term incompatible with
        // one of them only meets the unit term.
        let mut anchor: Option<SmallVec<[Subset; 4]>> = None;
        for (m, _, d) in &small_terms {
            if *d == 0 {
                continue;
            }
            let syms = m.factors().iter().map(|&(s, _)| s);
            anchor = Some(match anchor {
                None => syms.collect(),
                Some(a) => a.into_iter().filter(|s| m.exponent(*s) > 0).collect(),
            });
        }
        let anchor = anchor.unwrap_or_default();
        let unit_len = small_terms.iter().take_while(|t| t.2 == 0).count();
        let big_terms: Vec<(&Monomial, &LaurentPoly)> = big.terms.iter().collect();
        let terms = par::fold_merge(
            &big_terms,
            FxHashMap::default,
            |mut acc, &(m, c)| {
                let d = m.degree();
                let meets_anchor =
                    anchor.iter().all(|&a| m.factors().iter().all(|&(s, _)| s.compatible(a)));
                let candidates = if meets_anchor { &small_terms[..] } else { &small_terms[..unit_len] };
                for &(m2, c2, d2) in candidates {
                    if d + d2 > max_degree {
                        break;
                    }
                    if let Some(p) = m.mul(m2) {
                        match acc.entry(p) {
                            Entry::Occupied(mut e) => {
                                let v: &mut LaurentPoly = e.get_mut();
                                v.add_product(c, c2);
                            }
                            Entry::Vacant(e) => {
                                let v = c.mul_ref(c2);
                                e.insert(v);
                            }
                        }
                    }
                }
                acc
            },
            |mut a, b| {
                if a.len() < b.len() {
                    return merge_into(b, a);
                }
                for (m, c) in b {
                    Self::insert_term(&mut a, m, c);
                }
                a
            },
        );
        let mut terms = terms;
        terms.retain(|_, c| !c.is_zero());
        CohClass { n: self.n, nvars, terms }
    }

    /// `self * D^T^j`, dropping terms above `max_degree`.
    pub fn mul_symbol_power(&self, t: Subset, j: u8, max_degree: usize) -> CohClass {
        let p = Monomial::power(t, j);
        let mut out = Self::zero(self.n, self.nvars);
        for (m, c) in &self.terms {
            if m.degree() + j as usize > max_degree {
                continue;
            }
            if let Some(q) = m.mul(&p) {
                out.terms.insert(q, c.clone());
            }
        }
        out
    }

    /// `self * sum_{j,k} c[j][k] D^T^j y^k`, where `y` is any class (in
    /// practice `psi_T`). Each row is evaluated by Horner's rule so only
    /// products with `y` itself are formed.
    pub fn mul_bivariate(&self, t: Subset, y: &CohClass, c: &[Vec<LaurentPoly>], max_degree: usize) -> CohClass {
        let mut out = Self::zero(self.n, self.nvars);
        for (j, row) in c.iter().enumerate() {
            let Some(top) = row.iter().rposition(|x| !x.is_zero()) else {
                continue;
            };
            let base = if j == 0 { self.clone() } else { self.mul_symbol_power(t, j as u8, max_degree) };
            if base.is_zero() {
                continue;
            }
            let mut z = base.scale(&row[top]);
            for k in (0..top).rev() {
                z = z.mul_truncated(y, max_degree);
                if !row[k].is_zero() {
                    z = z.add_owned(base.scale(&row[k]));
                }
            }
            out = out.add_owned(z);
        }
        out
    }

    pub fn pow(&self, k: usize) -> CohClass {
        let mut acc = Self::one(self.n, self.nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Product of many factors, truncated at the top degree.
    pub fn product<'a>(n: usize, nvars: usize, factors: impl IntoIterator<Item = &'a CohClass>) -> CohClass {
        let mut acc = Self::one(n, nvars);
        for f in factors {
            acc = acc.mul(f);
        }
        acc
    }

    /// Inverse of `u + N` where the degree-0 part `u` is a Laurent monomial
    /// and `N` is nilpotent: `u^-1 sum_k (-u^-1 N)^k`.
    pub fn inverse(&self) -> Result<CohClass> {
        self.inverse_truncated(self.top_degree())
    }

    /// As [`CohClass::inverse`], dropping terms above `max_degree`.
    pub fn inverse_truncated(&self, max_degree: usize) -> Result<CohClass> {
        let u = self.coeff(&Monomial::one());
        let u_inv = u.pow(-1)?;
        let nil = self.sub(&Self::scalar(self.n, u.clone())).scale(&u_inv).neg();
        let mut acc = Self::one(self.n, self.nvars);
        let mut power = Self::one(self.n, self.nvars);
        for _ in 0..max_degree {
            power = power.mul_truncated(&nil, max_degree);
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power);
        }
        Ok(acc.scale(&u_inv))
    }

    /// Drops every term above `max_degree`.
    pub fn truncate(&self, max_degree: usize) -> CohClass {
        CohClass {
            n: self.n,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= max_degree)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Part of cohomological degree exactly `d`.
    pub fn degree_part(&self, d: usize) -> CohClass {
        CohClass {
            n: self.n,
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Highest degree carried by a term, if nonzero.
    pub fn max_degree(&self) -> Option<usize> {
        self.terms.keys().map(Monomial::degree).max()
    }

    /// Maps each coefficient through `f`, dropping zeros.
    pub fn map_coeffs(&self, f: impl Fn(&LaurentPoly) -> LaurentPoly) -> CohClass {
        let mut out = Self::zero(self.n, self.nvars);
        for (m, c) in &self.terms {
            let y = f(c);
            if !y.is_zero() {
                out.terms.insert(m.clone(), y);
            }
        }
        out
    }

    /// The JSON dump used by `euler --emit json`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }
}

fn merge_into(
    mut a: FxHashMap<Monomial, LaurentPoly>,
    b: FxHashMap<Monomial, LaurentPoly>,
) -> FxHashMap<Monomial, LaurentPoly> {
    for (m, c) in b {
        CohClass::insert_term(&mut a, m, c);
    }
    a
}

impl fmt::Debug for CohClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.sorted_terms().into_iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*{m:?}")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct FactorJson {
    #[serde(rename = "T")]
    t: Vec<usize>,
    exp: u8,
}

#[derive(Serialize)]
struct TermJson<'a> {
    monomial: Vec<FactorJson>,
    coeff: &'a LaurentPoly,
}

impl Serialize for CohClass {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms = self.sorted_terms();
        let mut seq = s.serialize_seq(Some(terms.len()))?;
        for (m, c) in terms {
            let monomial = m
                .factors()
                .iter()
                .map(|&(t, e)| FactorJson { t: t.to_labels(), exp: e })
                .collect();
            seq.serialize_element(&TermJson { monomial, coeff: &c.clone().with_nvars(self.nvars) })?;
        }
        seq.end()
    }
}
