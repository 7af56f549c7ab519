//! Equivariant Euler classes of the obstruction bundle on `M_{0,n}(B mu_r)`.
//!
//! The compact form is the production path. The product form and the
//! wall-crossing reconstruction from the weighted projective space are coded
//! separately and serve as cross-checks.

use crate::error::{HhiError, Result};
use crate::exactnum::{signed_index_set, LaurentPoly, Rational};
use crate::mzeron::CohClass;
use crate::orbifold::OrbifoldData;
use crate::subset::Subset;

fn t_var(nvars: usize, a: usize) -> LaurentPoly {
    LaurentPoly::var_pow(nvars, a, 1)
}

fn t_plus(n: usize, nvars: usize, a: usize, x: &CohClass) -> CohClass {
    CohClass::scalar(n, t_var(nvars, a)).add(x)
}

/// `prod_p (1 + p D^T (t_a + p psi_T)^-1)` over `p` in the signed range of
/// `delta_T - 1`, truncated above `max_degree`.
pub fn wall_factor_truncated(
    n: usize,
    nvars: usize,
    t: Subset,
    delta_t: &Rational,
    a: usize,
    max_degree: usize,
) -> Result<CohClass> {
    if t.len() < 2 || t.len() + 2 > n || !t.is_subset_of(Subset::full(n - 1)) {
        return Err(HhiError::InvalidSubset(format!("{t:?} is not a wall of M_0,{n}")));
    }
    if delta_t.is_negative() {
        return Err(HhiError::Precondition(format!("negative age sum {delta_t}")));
    }
    let set = signed_index_set(&(delta_t - &Rational::one()));
    let mut acc = CohClass::one(n, nvars);
    if set.is_empty() || max_degree == 0 {
        return Ok(acc);
    }
    let d = CohClass::divisor(n, nvars, t)?;
    let psi = CohClass::psi_subset(n, nvars, t)?;
    let factor = |p: &Rational| -> Result<CohClass> {
        let inv = t_plus(n, nvars, a, &psi.scale_rational(p)).inverse_truncated(max_degree - 1)?;
        Ok(CohClass::one(n, nvars).add(&d.scale_rational(p).mul_truncated(&inv, max_degree)))
    };
    for p in &set.positives {
        acc = acc.mul_truncated(&factor(p)?, max_degree);
    }
    for p in &set.negatives {
        acc = acc.mul_truncated(&factor(p)?.inverse_truncated(max_degree)?, max_degree);
    }
    Ok(acc)
}

pub fn wall_factor(n: usize, nvars: usize, t: Subset, delta_t: &Rational, a: usize) -> Result<CohClass> {
    wall_factor_truncated(n, nvars, t, delta_t, a, n - 3)
}

fn require_admissible(data: &OrbifoldData) -> Result<()> {
    if data.n() < 3 || !data.admissible() {
        return Err(HhiError::Inadmissible);
    }
    Ok(())
}

/// Proper subsets `T` of the first `n-1` markings with `|T| >= 2`.
pub fn walls(n: usize) -> impl Iterator<Item = Subset> {
    let full = Subset::full(n - 1);
    full.nonempty_subsets().filter(move |t| t.len() >= 2 && *t != full)
}

/// `prod_p (t_a - p psi_n)^{+-1}` for the signed range of `delta_[n-1] - 1`.
fn psi_n_prefactor(data: &OrbifoldData, a: usize, max_degree: usize) -> Result<CohClass> {
    let n = data.n();
    let nvars = data.dim();
    let full = Subset::full(n - 1);
    let set = signed_index_set(&(data.age_sum(full, a) - Rational::one()));
    // -psi_n is the symbol D^{[n-1]}.
    let d_full = CohClass::divisor(n, nvars, full)?;
    let lin = |p: &Rational| t_plus(n, nvars, a, &d_full.scale_rational(p));
    let mut acc = CohClass::one(n, nvars);
    for p in &set.positives {
        acc = acc.mul_truncated(&lin(p), max_degree);
    }
    for p in &set.negatives {
        acc = acc.mul_truncated(&lin(p).inverse_truncated(max_degree)?, max_degree);
    }
    Ok(acc)
}

/// The product form over walls, truncated above `max_degree`.
pub fn euler_class_mainthm_truncated(data: &OrbifoldData, max_degree: usize) -> Result<CohClass> {
    require_admissible(data)?;
    let n = data.n();
    let nvars = data.dim();
    let max_degree = max_degree.min(n - 3);
    let mut acc = CohClass::one(n, nvars);
    for a in 0..nvars {
        acc = acc.mul_truncated(&psi_n_prefactor(data, a, max_degree)?, max_degree);
        for t in walls(n) {
            let f = wall_factor_truncated(n, nvars, t, &data.age_sum(t, a), a, max_degree)?;
            if !f.is_zero() && f != CohClass::one(n, nvars) {
                acc = acc.mul_truncated(&f, max_degree);
            }
        }
    }
    Ok(acc)
}

pub fn euler_class_mainthm(data: &OrbifoldData) -> Result<CohClass> {
    euler_class_mainthm_truncated(data, data.n().saturating_sub(3))
}

/// Polynomials `sum c[j][k] x^j y^k` truncated at total degree `max`, where
/// `x = D^T` and `y = psi_T` for one fixed `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bivariate {
    max: usize,
    c: Vec<Vec<LaurentPoly>>,
}

impl Bivariate {
    fn one(nvars: usize, max: usize) -> Self {
        let mut c = vec![vec![LaurentPoly::zero(nvars); max + 1]; max + 1];
        c[0][0] = LaurentPoly::one(nvars);
        Bivariate { max, c }
    }

    fn is_one(&self) -> bool {
        self.c.iter().enumerate().all(|(j, row)| {
            row.iter().enumerate().all(|(k, x)| if j + k == 0 { x.is_one() } else { x.is_zero() })
        })
    }

    fn mul(&self, other: &Bivariate) -> Bivariate {
        let nvars = self.c[0][0].nvars().max(other.c[0][0].nvars());
        let mut out = Bivariate { max: self.max, c: vec![vec![LaurentPoly::zero(nvars); self.max + 1]; self.max + 1] };
        for j1 in 0..=self.max {
            for k1 in 0..=self.max - j1 {
                let a = &self.c[j1][k1];
                if a.is_zero() {
                    continue;
                }
                for j2 in 0..=self.max - j1 - k1 {
                    for k2 in 0..=self.max - j1 - k1 - j2 {
                        out.c[j1 + j2][k1 + k2].add_product(a, &other.c[j2][k2]);
                    }
                }
            }
        }
        out
    }

    /// Inverse of `u + N` with `u` a Laurent monomial and `N` nilpotent.
    fn inverse(&self) -> Result<Bivariate> {
        let nvars = self.c[0][0].nvars();
        let u_inv = self.c[0][0].pow(-1)?;
        let mut minus_nil = self.clone();
        minus_nil.c[0][0] = LaurentPoly::zero(nvars);
        let scale = u_inv.neg_ref();
        for row in minus_nil.c.iter_mut() {
            for x in row.iter_mut() {
                *x = x.mul_ref(&scale);
            }
        }
        let mut acc = Bivariate::one(nvars, self.max);
        let mut power = Bivariate::one(nvars, self.max);
        for _ in 0..self.max {
            power = power.mul(&minus_nil);
            for (ra, rp) in acc.c.iter_mut().zip(&power.c) {
                for (x, y) in ra.iter_mut().zip(rp) {
                    x.add_assign_ref(y);
                }
            }
        }
        for row in acc.c.iter_mut() {
            for x in row.iter_mut() {
                *x = x.mul_ref(&u_inv);
            }
        }
        Ok(acc)
    }

    /// `(t_a + p y + p x) / (t_a + p y)`.
    fn ratio(nvars: usize, max: usize, a: usize, p: &Rational) -> Result<Bivariate> {
        let mut den = Bivariate::one(nvars, max);
        den.c[0][0] = t_var(nvars, a);
        if max >= 1 {
            den.c[0][1] = LaurentPoly::constant(nvars, p.clone());
        }
        let mut num = den.clone();
        if max >= 1 {
            num.c[1][0] = LaurentPoly::constant(nvars, p.clone());
        }
        Ok(num.mul(&den.inverse()?))
    }
}

/// The compact form evaluated on arbitrary (not necessarily reduced) ages:
/// `ages[a][i]` for every direction `a` and every marking `i`, including the
/// distinguished one. The total age in each direction must be an integer.
pub fn euler_class_compact_ages(n: usize, ages: &[Vec<Rational>], max_degree: usize) -> Result<CohClass> {
    let nvars = ages.len();
    if n < 3 {
        return Err(HhiError::Inadmissible);
    }
    let max_degree = max_degree.min(n - 3);
    let full = Subset::full(n - 1);
    let mut prefactor = LaurentPoly::one(nvars);
    for (a, row) in ages.iter().enumerate() {
        if row.len() != n {
            return Err(HhiError::MarkingMismatch(row.len(), n));
        }
        let total: Rational = row.iter().sum();
        if !total.is_integer() {
            return Err(HhiError::Inadmissible);
        }
        let shift = (total - Rational::one()).to_i64().expect("small exponent") as i32;
        prefactor = prefactor.mul_ref(&LaurentPoly::var_pow(nvars, a, shift));
    }
    // One factor per subset, all directions combined.
    let mut factors: Vec<(Subset, Bivariate)> = Vec::new();
    for t in full.nonempty_subsets() {
        let mut f = Bivariate::one(nvars, max_degree);
        for (a, row) in ages.iter().enumerate() {
            let delta: Rational = t.iter().map(|i| &row[i]).sum();
            let set = signed_index_set(&(delta - Rational::one()));
            for p in &set.positives {
                f = f.mul(&Bivariate::ratio(nvars, max_degree, a, p)?);
            }
            for p in &set.negatives {
                f = f.mul(&Bivariate::ratio(nvars, max_degree, a, p)?.inverse()?);
            }
        }
        if !f.is_one() {
            factors.push((t, f));
        }
    }
    // Large subsets have short psi_T expansions; applying them first keeps
    // the running product small while the expensive factors are few.
    factors.sort_by_key(|(t, _)| (std::cmp::Reverse(t.len()), t.0));
    let mut acc = CohClass::scalar(n, prefactor);
    for (t, f) in &factors {
        let y = if *t == full { CohClass::zero(n, nvars) } else { CohClass::psi_subset(n, nvars, *t)? };
        acc = acc.mul_bivariate(*t, &y, &f.c, max_degree);
    }
    Ok(acc)
}

pub fn euler_class_compact_truncated(data: &OrbifoldData, max_degree: usize) -> Result<CohClass> {
    require_admissible(data)?;
    let ages: Vec<Vec<Rational>> = (0..data.dim()).map(|a| data.ages(a)).collect();
    euler_class_compact_ages(data.n(), &ages, max_degree)
}

pub fn euler_class_compact(data: &OrbifoldData) -> Result<CohClass> {
    euler_class_compact_truncated(data, data.n().saturating_sub(3))
}

/// A polynomial in the hyperplane class `H` of the weighted projective space
/// `P^{n-3}`, with Laurent coefficients; `coeffs[k]` multiplies `H^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedClass {
    n: usize,
    nvars: usize,
    coeffs: Vec<LaurentPoly>,
}

impl WeightedClass {
    pub fn one(n: usize, nvars: usize) -> Self {
        let mut coeffs = vec![LaurentPoly::zero(nvars); n - 2];
        coeffs[0] = LaurentPoly::one(nvars);
        WeightedClass { n, nvars, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of `H^k` (zero above `n-3`).
    pub fn coeff(&self, k: usize) -> LaurentPoly {
        self.coeffs.get(k).cloned().unwrap_or_else(|| LaurentPoly::zero(self.nvars))
    }

    pub fn coeffs(&self) -> &[LaurentPoly] {
        &self.coeffs
    }

    /// Multiplies by `(c0 + c1 H)`.
    fn mul_linear(&mut self, c0: &LaurentPoly, c1: &LaurentPoly) {
        let mut out = vec![LaurentPoly::zero(self.nvars); self.coeffs.len()];
        for (k, x) in self.coeffs.iter().enumerate() {
            out[k].add_product(x, c0);
            if k + 1 < out.len() {
                out[k + 1].add_product(x, c1);
            }
        }
        self.coeffs = out;
    }

    /// Multiplies by `(c0 + c1 H)^-1` for a Laurent monomial `c0`.
    fn div_linear(&mut self, c0: &LaurentPoly, c1: &LaurentPoly) -> Result<()> {
        let inv = c0.pow(-1)?;
        let ratio = c1.mul_ref(&inv).neg_ref();
        // (c0 + c1 H)^-1 = c0^-1 sum_k (-c1/c0)^k H^k
        let mut series = vec![LaurentPoly::zero(self.nvars); self.coeffs.len()];
        let mut term = inv;
        for s in series.iter_mut() {
            *s = term.clone();
            term = term.mul_ref(&ratio);
        }
        let mut out = vec![LaurentPoly::zero(self.nvars); self.coeffs.len()];
        for (i, x) in self.coeffs.iter().enumerate() {
            for (j, y) in series.iter().enumerate() {
                if i + j < out.len() {
                    out[i + j].add_product(x, y);
                }
            }
        }
        self.coeffs = out;
        Ok(())
    }

    /// The class on `M_{0,n}-bar` obtained by `H -> psi_n`.
    pub fn to_cohclass(&self) -> CohClass {
        let n = self.n;
        let psi_n = CohClass::psi_marking(n, self.nvars, n - 1).expect("valid marking");
        let mut acc = CohClass::zero(n, self.nvars);
        let mut power = CohClass::one(n, self.nvars);
        for c in &self.coeffs {
            acc = acc.add(&power.scale(c));
            power = power.mul(&psi_n);
        }
        acc
    }
}

/// `prod_a prod_p (t_a - p H)` on the weighted `P^{n-3}`.
pub fn weighted_class(data: &OrbifoldData) -> Result<WeightedClass> {
    require_admissible(data)?;
    let n = data.n();
    let nvars = data.dim();
    let full = Subset::full(n - 1);
    let mut w = WeightedClass::one(n, nvars);
    for a in 0..nvars {
        let set = signed_index_set(&(data.age_sum(full, a) - Rational::one()));
        let t = t_var(nvars, a);
        for p in &set.positives {
            w.mul_linear(&t, &LaurentPoly::constant(nvars, -p));
        }
        for p in &set.negatives {
            w.div_linear(&t, &LaurentPoly::constant(nvars, -p))?;
        }
    }
    Ok(w)
}

/// Walls in the order they are crossed when the first `n-1` weights grow
/// together from `1/(n-2)` to `1`: `w_T` is hit at weight `1/|T|`, so larger
/// subsets come first. Ties are split by a generic perturbation, which
/// amounts to a fixed order among subsets of equal size.
pub fn wall_path(n: usize) -> Vec<Subset> {
    let mut v: Vec<Subset> = walls(n).collect();
    v.sort_by_key(|t| (std::cmp::Reverse(t.len()), t.0));
    v
}

/// The weighted class pulled back to `M_{0,n}-bar`, multiplied by the wall
/// factor of every wall crossed along [`wall_path`].
pub fn euler_class_via_walls(data: &OrbifoldData) -> Result<CohClass> {
    let n = data.n();
    let nvars = data.dim();
    let mut acc = weighted_class(data)?.to_cohclass();
    for t in wall_path(n) {
        for a in 0..nvars {
            acc = acc.mul(&wall_factor(n, nvars, t, &data.age_sum(t, a), a)?);
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::q;
    use crate::mzeron::Monomial;

    fn c3z3(n: usize) -> OrbifoldData {
        OrbifoldData::new(3, &[1, 1, 1], &vec![1; n]).unwrap()
    }

    #[test]
    fn wall_factor_examples() {
        let n = 6;
        let t = Subset::from_indices([0, 1]);
        assert_eq!(wall_factor(n, 1, t, &q(1, 2), 0).unwrap(), CohClass::one(n, 1));
        assert_eq!(wall_factor(n, 1, t, &q(1, 1), 0).unwrap(), CohClass::one(n, 1));
        let d = CohClass::divisor(n, 1, t).unwrap();
        let psi = CohClass::psi_subset(n, 1, t).unwrap();
        for (delta, p) in [(q(5, 3), q(2, 3)), (q(2, 1), q(1, 1))] {
            let den = CohClass::scalar(n, t_var(1, 0)).add(&psi.scale_rational(&p));
            let want = CohClass::one(n, 1).add(&d.scale_rational(&p).mul(&den.inverse().unwrap()));
            assert_eq!(wall_factor(n, 1, t, &delta, 0).unwrap(), want);
        }
        assert!(wall_factor(n, 1, Subset::from_indices([0]), &q(2, 1), 0).is_err());
    }

    #[test]
    fn mainthm_examples() {
        let d = OrbifoldData::new(3, &[1], &[1, 1, 1]).unwrap();
        assert_eq!(euler_class_mainthm(&d).unwrap(), CohClass::one(3, 1));
        let d = OrbifoldData::new(3, &[1], &[1, 1, 1, 1, 2]).unwrap();
        let psi5 = CohClass::psi_marking(5, 1, 4).unwrap();
        let want = CohClass::scalar(5, t_var(1, 0)).sub(&psi5.scale_rational(&q(1, 3)));
        assert_eq!(euler_class_mainthm(&d).unwrap(), want);
        // Trivial direction: the prefactor becomes 1/t.
        let d = OrbifoldData::new(3, &[3], &[1, 1, 1, 1, 2]).unwrap();
        let want = CohClass::scalar(5, LaurentPoly::var_pow(1, 0, -1));
        assert_eq!(euler_class_mainthm(&d).unwrap(), want);
        assert!(euler_class_mainthm(&OrbifoldData::new(3, &[1], &[1, 1]).unwrap()).is_err());
    }

    #[test]
    fn compact_examples() {
        assert_eq!(euler_class_compact(&c3z3(3)).unwrap(), CohClass::one(3, 3));
        let d = OrbifoldData::new(3, &[3, 1], &[1, 1, 1, 1, 2]).unwrap();
        let c = euler_class_compact(&d).unwrap();
        assert_eq!(c, euler_class_mainthm(&d).unwrap());
        let m = c.coeff(&Monomial::one());
        assert_eq!(m, LaurentPoly::var_pow(2, 0, -1).mul_ref(&t_var(2, 1)));
    }

    #[test]
    fn weighted_examples() {
        let w = weighted_class(&c3z3(6)).unwrap();
        let mut want = WeightedClass::one(6, 3);
        for a in 0..3 {
            want.mul_linear(&t_var(3, a), &LaurentPoly::constant(3, q(-2, 3)));
        }
        assert_eq!(w, want);
        assert_eq!(w.coeff(3).constant_term(), q(-8, 27));
        assert_eq!(weighted_class(&c3z3(3)).unwrap(), WeightedClass::one(3, 3));
        let d = OrbifoldData::new(3, &[3], &[1, 1, 1]).unwrap();
        assert_eq!(weighted_class(&d).unwrap().coeff(0), LaurentPoly::var_pow(1, 0, -1));
    }

    #[test]
    fn forms_agree_on_c3z3() {
        for n in [6, 7] {
            let d = c3z3(n);
            if !d.admissible() {
                continue;
            }
            let main = euler_class_mainthm(&d).unwrap();
            assert_eq!(euler_class_compact(&d).unwrap(), main);
            assert_eq!(euler_class_via_walls(&d).unwrap(), main);
        }
    }
}
