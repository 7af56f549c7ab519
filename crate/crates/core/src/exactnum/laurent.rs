//! Sparse Laurent polynomials in the equivariant parameters `t_1..t_N`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::rational::Rational;
use crate::error::{HhiError, Result};

pub const MAX_VARS: usize = 8;

/// Exponent vector of a Laurent monomial; entries past `nvars` are zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TExp(pub [i32; MAX_VARS]);

impl TExp {
    pub fn unit(a: usize, k: i32) -> TExp {
        let mut e = [0; MAX_VARS];
        e[a] = k;
        TExp(e)
    }

    pub fn from_slice(v: &[i32]) -> Result<TExp> {
        if v.len() > MAX_VARS {
            return Err(HhiError::InvalidData(format!(
                "at most {MAX_VARS} equivariant parameters supported"
            )));
        }
        let mut e = [0; MAX_VARS];
        e[..v.len()].copy_from_slice(v);
        Ok(TExp(e))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn total(&self) -> i64 {
        self.0.iter().map(|&x| x as i64).sum()
    }

    fn add(&self, other: &TExp) -> TExp {
        let mut e = self.0;
        for (x, y) in e.iter_mut().zip(other.0.iter()) {
            *x += y;
        }
        TExp(e)
    }
}

/// A Laurent polynomial with exact rational coefficients.
///
/// Terms are kept sorted by exponent with no zero coefficients, so structural
/// equality is mathematical equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    nvars: usize,
    terms: Vec<(TExp, Rational)>,
}

impl LaurentPoly {
    pub fn zero(nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS);
        LaurentPoly { nvars, terms: Vec::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(nvars, TExp::default(), c)
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn monomial(nvars: usize, exp: TExp, c: Rational) -> Self {
        assert!(nvars <= MAX_VARS);
        debug_assert!(exp.0[nvars..].iter().all(|&x| x == 0));
        if c.is_zero() {
            return Self::zero(nvars);
        }
        LaurentPoly { nvars, terms: vec![(exp, c)] }
    }

    /// `t_a^k` (0-based `a`).
    pub fn var_pow(nvars: usize, a: usize, k: i32) -> Self {
        assert!(a < nvars, "variable index {a} out of range for {nvars} variables");
        Self::monomial(nvars, TExp::unit(a, k), Rational::one())
    }

    /// Builds from arbitrary (possibly repeated or zero) terms.
    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (TExp, Rational)>) -> Self {
        let mut v: Vec<(TExp, Rational)> = terms.into_iter().collect();
        v.sort_by_key(|a| a.0);
        let mut out: Vec<(TExp, Rational)> = Vec::with_capacity(v.len());
        for (e, c) in v {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc += &c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        LaurentPoly { nvars, terms: out }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &[(TExp, Rational)] {
        &self.terms
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

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_zero() && self.terms[0].1.is_one()
    }

    /// True if the only term (if any) has all-zero exponents.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(e, _)| e.is_zero())
    }

    pub fn coeff(&self, exp: &TExp) -> Rational {
        self.terms
            .binary_search_by(|(e, _)| e.cmp(exp))
            .map(|i| self.terms[i].1.clone())
            .unwrap_or_else(|_| Rational::zero())
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&TExp::default())
    }

    /// Returns the value if the polynomial is a constant.
    pub fn as_constant(&self) -> Option<Rational> {
        self.is_constant().then(|| self.constant_term())
    }

    /// Total `t`-degrees present, if all terms share one (homogeneous case).
    pub fn homogeneous_degree(&self) -> Option<i64> {
        let mut it = self.terms.iter().map(|(e, _)| e.total());
        let first = it.next()?;
        it.all(|d| d == first).then_some(first)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        LaurentPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, x)| (*e, x * c)).collect(),
        }
    }

    /// Multiplies by the monomial `c * t^exp`.
    pub fn mul_monomial(&self, exp: &TExp, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        LaurentPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, x)| (e.add(exp), x * c)).collect(),
        }
    }

    pub fn add_ref(&self, other: &Self) -> Self {
        let nvars = self.nvars.max(other.nvars);
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            let (ea, ca) = &self.terms[i];
            let (eb, cb) = &other.terms[j];
            match ea.cmp(eb) {
                std::cmp::Ordering::Less => {
                    out.push((*ea, ca.clone()));
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push((*eb, cb.clone()));
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let s = ca + cb;
                    if !s.is_zero() {
                        out.push((*ea, s));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.terms[i..].iter().cloned());
        out.extend(other.terms[j..].iter().cloned());
        LaurentPoly { nvars, terms: out }
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        if other.is_zero() {
            return;
        }
        self.nvars = self.nvars.max(other.nvars);
        if self.is_zero() {
            self.terms = other.terms.clone();
            return;
        }
        if other.terms.len() <= 2 {
            for (e, c) in &other.terms {
                self.add_term(*e, c.clone());
            }
            return;
        }
        *self = self.add_ref(other);
    }

    /// `self += c * t^e`, in place.
    pub fn add_term(&mut self, e: TExp, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.binary_search_by(|(x, _)| x.cmp(&e)) {
            Ok(i) => {
                let s = &self.terms[i].1 + &c;
                if s.is_zero() {
                    self.terms.remove(i);
                } else {
                    self.terms[i].1 = s;
                }
            }
            Err(i) => self.terms.insert(i, (e, c)),
        }
    }

    /// `self += a * b`.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        self.nvars = self.nvars.max(a.nvars).max(b.nvars);
        if a.terms.len() * b.terms.len() <= 4 {
            for (ea, ca) in &a.terms {
                for (eb, cb) in &b.terms {
                    self.add_term(ea.add(eb), ca * cb);
                }
            }
        } else {
            self.add_assign_ref(&a.mul_ref(b));
        }
    }

    pub fn mul_ref(&self, other: &Self) -> Self {
        let nvars = self.nvars.max(other.nvars);
        if self.is_zero() || other.is_zero() {
            return Self::zero(nvars);
        }
        if self.terms.len() == 1 {
            let (e, c) = &self.terms[0];
            let mut r = other.mul_monomial(e, c);
            r.nvars = nvars;
            return r;
        }
        if other.terms.len() == 1 {
            let (e, c) = &other.terms[0];
            let mut r = self.mul_monomial(e, c);
            r.nvars = nvars;
            return r;
        }
        let mut prods = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                prods.push((ea.add(eb), ca * cb));
            }
        }
        Self::from_terms(nvars, prods)
    }

    pub fn neg_ref(&self) -> Self {
        LaurentPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    /// Integer power; negative powers only for single-term polynomials.
    pub fn pow(&self, k: i32) -> Result<Self> {
        if k < 0 {
            if self.terms.len() != 1 {
                return Err(HhiError::Precondition(
                    "only Laurent monomials are invertible".into(),
                ));
            }
            let (e, c) = &self.terms[0];
            let mut inv = TExp::default();
            for (x, y) in inv.0.iter_mut().zip(e.0.iter()) {
                *x = -y * -k;
            }
            return Ok(Self::monomial(self.nvars, inv, c.pow(k)?));
        }
        let mut acc = Self::one(self.nvars);
        for _ in 0..k {
            acc = acc.mul_ref(self);
        }
        Ok(acc)
    }

    /// Substitutes rational values for all variables.
    pub fn evaluate(&self, values: &[Rational]) -> Result<Rational> {
        let mut total = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (a, &k) in e.0.iter().enumerate().take(self.nvars) {
                if k != 0 {
                    term *= &values[a].pow(k)?;
                }
            }
            total += term;
        }
        Ok(total)
    }

    /// Keeps only the terms accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(&TExp) -> bool) -> Self {
        LaurentPoly {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(e, _)| keep(e)).cloned().collect(),
        }
    }

    pub fn with_nvars(mut self, nvars: usize) -> Self {
        assert!(nvars <= MAX_VARS);
        debug_assert!(self.terms.iter().all(|(e, _)| e.0[nvars..].iter().all(|&x| x == 0)));
        self.nvars = nvars;
        self
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.add_ref(rhs)
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.add_ref(&rhs.neg_ref())
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.mul_ref(rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.neg_ref()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if i == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let vars: Vec<String> = (0..self.nvars)
                .filter(|&a| e.0[a] != 0)
                .map(|a| match e.0[a] {
                    1 => format!("t{}", a + 1),
                    k => format!("t{}^{}", a + 1, k),
                })
                .collect();
            if vars.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{mag}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    t_exp: Vec<i32>,
    coeff: Rational,
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<TermJson> = self
            .terms
            .iter()
            .map(|(e, c)| TermJson { t_exp: e.0[..self.nvars].to_vec(), coeff: c.clone() })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    /// The variable count is taken from the exponent vectors; an empty list
    /// deserialises as the zero polynomial in zero variables.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<TermJson>::deserialize(d)?;
        let nvars = v.first().map_or(0, |t| t.t_exp.len());
        let mut terms = Vec::with_capacity(v.len());
        for t in v {
            if t.t_exp.len() != nvars {
                return Err(serde::de::Error::custom("inconsistent t_exp lengths"));
            }
            let e = TExp::from_slice(&t.t_exp).map_err(serde::de::Error::custom)?;
            terms.push((e, t.coeff));
        }
        Ok(LaurentPoly::from_terms(nvars, terms))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::q;
    use proptest::prelude::*;

    fn t(a: usize) -> LaurentPoly {
        LaurentPoly::var_pow(3, a, 1)
    }

    #[test]
    fn arithmetic_basics() {
        let x = &t(0) + &t(1);
        let y = &t(0) - &t(1);
        let prod = &x * &y;
        let expect = &(&t(0) * &t(0)) - &(&t(1) * &t(1));
        assert_eq!(prod, expect);
        let inv = t(2).pow(-2).unwrap();
        assert!((&inv * &(&t(2) * &t(2))).is_one());
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn display_and_json() {
        let p = LaurentPoly::from_terms(
            3,
            [
                (TExp::from_slice(&[1, 1, 1]).unwrap(), q(1, 3)),
                (TExp::from_slice(&[-2, 0, 0]).unwrap(), q(-1, 1)),
            ],
        );
        assert_eq!(p.to_string(), "-t1^-2 + 1/3*t1*t2*t3");
        let js = serde_json::to_string(&p).unwrap();
        assert_eq!(
            js,
            r#"[{"t_exp":[-2,0,0],"coeff":"-1"},{"t_exp":[1,1,1],"coeff":"1/3"}]"#
        );
        let back: LaurentPoly = serde_json::from_str(&js).unwrap();
        assert_eq!(back, p);
    }

    fn poly() -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec(((-2i32..3, -2i32..3), (-9i64..10, 1i64..5)), 0..5).prop_map(|v| {
            LaurentPoly::from_terms(
                2,
                v.into_iter()
                    .map(|((a, b), (n, d))| (TExp::from_slice(&[a, b]).unwrap(), q(n, d))),
            )
        })
    }

    proptest! {
        #[test]
        fn ring_axioms(a in poly(), b in poly(), c in poly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&a - &a).is_zero());
        }
    }
}
