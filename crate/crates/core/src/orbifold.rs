//! Group data for `[C^N / mu_r]`: representation weights, marked group
//! elements and their ages.
//!
//! Group elements are exponents `k` of the generator `omega = exp(2 pi i / r)`.
//! All age arithmetic is rational.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{HhiError, Result};
use crate::exactnum::{Rational, MAX_VARS};
use crate::subset::Subset;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct OrbifoldData {
    r: u32,
    weights: Vec<u32>,
    elements: Vec<u32>,
}

#[derive(Deserialize)]
struct RawData {
    r: u32,
    weights: Vec<i64>,
    elements: Vec<i64>,
}

impl OrbifoldData {
    /// Reduces weights and elements mod `r`.
    pub fn new(r: u32, weights: &[i64], elements: &[i64]) -> Result<Self> {
        if r == 0 {
            return Err(HhiError::InvalidData("group order must be positive".into()));
        }
        if weights.is_empty() || weights.len() > MAX_VARS {
            return Err(HhiError::InvalidData(format!(
                "need between 1 and {MAX_VARS} weights, got {}",
                weights.len()
            )));
        }
        if elements.len() > 63 {
            return Err(HhiError::InvalidData("at most 63 markings supported".into()));
        }
        let red = |x: &i64| x.rem_euclid(r as i64) as u32;
        Ok(OrbifoldData {
            r,
            weights: weights.iter().map(red).collect(),
            elements: elements.iter().map(red).collect(),
        })
    }

    /// Parses `{"r":3,"weights":[1,1,1],"elements":[1,1,1]}`.
    pub fn from_json(s: &str) -> Result<Self> {
        let raw: RawData = serde_json::from_str(s).map_err(|e| HhiError::Parse(e.to_string()))?;
        Self::new(raw.r, &raw.weights, &raw.elements)
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn n(&self) -> usize {
        self.elements.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn elements(&self) -> &[u32] {
        &self.elements
    }

    /// Same weights, new marked elements.
    pub fn with_elements(&self, elements: Vec<u32>) -> Self {
        OrbifoldData {
            r: self.r,
            weights: self.weights.clone(),
            elements: elements.into_iter().map(|k| k % self.r).collect(),
        }
    }

    /// Age of `e_i` in direction `a` (both 0-based): `frac(w_a k_i / r)`.
    pub fn age(&self, i: usize, a: usize) -> Result<Rational> {
        if i >= self.n() {
            return Err(HhiError::IndexOutOfRange(format!("marking {i} of {}", self.n())));
        }
        if a >= self.dim() {
            return Err(HhiError::IndexOutOfRange(format!("direction {a} of {}", self.dim())));
        }
        Ok(self.age_unchecked(i, a))
    }

    fn age_unchecked(&self, i: usize, a: usize) -> Rational {
        let num = (self.weights[a] as u64 * self.elements[i] as u64) % self.r as u64;
        Rational::new(num as i64, self.r as i64)
    }

    /// `delta_T^(a)`: sum of ages over the markings in `t`.
    pub fn age_sum(&self, t: Subset, a: usize) -> Rational {
        let num: u64 = t
            .iter()
            .map(|i| (self.weights[a] as u64 * self.elements[i] as u64) % self.r as u64)
            .sum();
        Rational::new(num as i64, self.r as i64)
    }

    /// Ages of every marking in direction `a`.
    pub fn ages(&self, a: usize) -> Vec<Rational> {
        (0..self.n()).map(|i| self.age_unchecked(i, a)).collect()
    }

    /// Total age of `e_i` on `C^N`.
    pub fn total_age(&self, i: usize) -> Rational {
        (0..self.dim()).map(|a| self.age_unchecked(i, a)).sum()
    }

    /// Exponent of `prod_{i in t} e_i`.
    pub fn merged_element(&self, t: Subset) -> u32 {
        (t.iter().map(|i| self.elements[i] as u64).sum::<u64>() % self.r as u64) as u32
    }

    /// Order `r_T` of `prod_{i in t} e_i`.
    pub fn subset_order(&self, t: Subset) -> u32 {
        let s = self.merged_element(t);
        self.r / self.r.gcd(&s)
    }

    /// The product of all marked elements is the identity (and `n >= 3`).
    pub fn admissible(&self) -> bool {
        self.n() >= 3 && self.merged_element(Subset::full(self.n())) == 0
    }

    /// `w_1 + ... + w_N = 0 mod r`.
    pub fn is_calabi_yau(&self) -> bool {
        self.weights.iter().map(|&w| w as u64).sum::<u64>() % self.r as u64 == 0
    }

    /// Element `k` that completes `elements` to an admissible tuple.
    pub fn completing_element(r: u32, elements: &[u32]) -> u32 {
        let s: u64 = elements.iter().map(|&k| k as u64).sum();
        ((r as u64 - s % r as u64) % r as u64) as u32
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }
}
