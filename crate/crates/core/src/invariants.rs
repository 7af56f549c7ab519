//! Gromov-Witten invariants of `[C^N / mu_r]` by direct integration of the
//! Euler class, and the weighted-projective-space shortcut.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{HhiError, Result};
use crate::euler::{euler_class_compact_truncated, weighted_class};
use crate::exactnum::{LaurentPoly, Rational};
use crate::mzeron::{integrate, CohClass, Monomial};
use crate::orbifold::OrbifoldData;
use crate::subset::Subset;

/// Orbifold data plus descendant exponents `nu_i`, one per marking.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InvariantKey {
    #[serde(flatten)]
    data: OrbifoldData,
    psi: Vec<u32>,
}

impl InvariantKey {
    pub fn new(data: OrbifoldData, psi: Vec<u32>) -> Result<Self> {
        if psi.len() != data.n() {
            return Err(HhiError::MarkingMismatch(psi.len(), data.n()));
        }
        Ok(InvariantKey { data, psi })
    }

    /// No descendants.
    pub fn primary(data: OrbifoldData) -> Self {
        let n = data.n();
        InvariantKey { data, psi: vec![0; n] }
    }

    /// `nu` at the distinguished marking only.
    pub fn with_last_psi(data: OrbifoldData, nu: u32) -> Self {
        let mut key = Self::primary(data);
        if let Some(last) = key.psi.last_mut() {
            *last = nu;
        }
        key
    }

    pub fn data(&self) -> &OrbifoldData {
        &self.data
    }

    pub fn psi(&self) -> &[u32] {
        &self.psi
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn psi_degree(&self) -> usize {
        self.psi.iter().map(|&v| v as usize).sum()
    }

    /// Sorts markings `1..n-1` by `(element, nu)`; the last marking stays put.
    pub fn canonical(&self) -> Self {
        let n = self.n();
        if n == 0 {
            return self.clone();
        }
        let mut pairs: Vec<(u32, u32)> = (0..n - 1)
            .map(|i| (self.data.elements()[i], self.psi[i]))
            .collect();
        pairs.sort_unstable();
        let mut elements: Vec<u32> = pairs.iter().map(|p| p.0).collect();
        let mut psi: Vec<u32> = pairs.iter().map(|p| p.1).collect();
        elements.push(self.data.elements()[n - 1]);
        psi.push(self.psi[n - 1]);
        InvariantKey { data: self.data.with_elements(elements), psi }
    }
}

impl fmt::Display for InvariantKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r={} w={:?} k={:?} psi={:?}",
            self.data.r(),
            self.data.weights(),
            self.data.elements(),
            self.psi
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Comb,
    Series,
    Weighted,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Direct => "direct",
            Method::Comb => "comb",
            Method::Series => "series",
            Method::Weighted => "weighted",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantRecord {
    pub key: InvariantKey,
    pub value: LaurentPoly,
    pub method: Method,
}

/// Whether to include the `1/r` of the `mu_r`-gerbe.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    #[default]
    Stack,
    Coarse,
}

impl Normalization {
    fn apply(self, r: u32, v: LaurentPoly) -> LaurentPoly {
        match self {
            Normalization::Stack => v.scale(&Rational::new(1, r as i64)),
            Normalization::Coarse => v,
        }
    }
}

/// `prod_i psi_i^{nu_i}` as a ring element.
pub fn psi_monomial(n: usize, nvars: usize, psi: &[u32]) -> CohClass {
    let full = Subset::full(n - 1);
    let factors = psi.iter().enumerate().map(|(i, &v)| {
        let s = if i == n - 1 { full } else { Subset::singleton(i) };
        (s, v as u8)
    });
    let m = Monomial::from_factors(factors);
    let sign = if m.degree() % 2 == 1 { -1 } else { 1 };
    CohClass::from_monomial(n, nvars, m, LaurentPoly::constant(nvars, Rational::from_int(sign)))
}

pub fn invariant_direct(key: &InvariantKey) -> Result<LaurentPoly> {
    invariant_direct_with(key, Normalization::Stack)
}

/// `int e(compact) * prod psi_i^{nu_i}`, zero on inadmissible data.
pub fn invariant_direct_with(key: &InvariantKey, norm: Normalization) -> Result<LaurentPoly> {
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
    let e = euler_class_compact_truncated(data, n - 3 - deg)?;
    let x = e.mul(&psi_monomial(n, nvars, key.psi()));
    Ok(norm.apply(data.r(), integrate(&x)))
}

/// `<... psi_n^nu h_{e_n}>` for `nu = 0..=max_nu`, building the Euler class
/// once.
pub fn invariants_direct_last_psi(data: &OrbifoldData, max_nu: usize, norm: Normalization) -> Result<Vec<LaurentPoly>> {
    let n = data.n();
    let nvars = data.dim();
    if n < 3 {
        return Err(HhiError::Precondition(format!("need at least 3 markings, got {n}")));
    }
    if !data.admissible() {
        return Ok(vec![LaurentPoly::zero(nvars); max_nu + 1]);
    }
    let e = euler_class_compact_truncated(data, n - 3)?;
    let mut psi = vec![0; n];
    (0..=max_nu)
        .map(|nu| {
            if nu > n - 3 {
                return Ok(LaurentPoly::zero(nvars));
            }
            psi[n - 1] = nu as u32;
            let x = e.degree_part(n - 3 - nu).mul(&psi_monomial(n, nvars, &psi));
            Ok(norm.apply(data.r(), integrate(&x)))
        })
        .collect()
}

pub fn invariant_weighted(key: &InvariantKey) -> Result<LaurentPoly> {
    invariant_weighted_with(key, Normalization::Stack)
}

/// `(1/r)` times the coefficient of `H^{n-3-nu}` in the weighted class.
pub fn invariant_weighted_with(key: &InvariantKey, norm: Normalization) -> Result<LaurentPoly> {
    let data = key.data();
    let n = data.n();
    let nvars = data.dim();
    if n < 3 {
        return Err(HhiError::Precondition(format!("need at least 3 markings, got {n}")));
    }
    if key.psi()[..n - 1].iter().any(|&v| v != 0) {
        return Err(HhiError::Precondition(
            "weighted invariants take descendants at the last marking only".into(),
        ));
    }
    let nu = key.psi()[n - 1] as usize;
    if !data.admissible() || nu > n - 3 {
        return Ok(LaurentPoly::zero(nvars));
    }
    let w = weighted_class(data)?;
    Ok(norm.apply(data.r(), w.coeff(n - 3 - nu)))
}
