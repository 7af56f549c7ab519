#![allow(dead_code)]

use hhi_core::{CohClass, Monomial, OrbifoldData, Subset};

/// Multisets of size `k` drawn from `pool`, in nondecreasing order.
pub fn multisets(pool: &[u32], k: usize) -> Vec<Vec<u32>> {
    fn go(pool: &[u32], k: usize, start: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..pool.len() {
            cur.push(pool[i]);
            go(pool, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(pool, k, 0, &mut Vec::new(), &mut out);
    out
}

/// Every admissible `(r, weights, elements)` with the given bounds, up to
/// reordering weights and the first `n-1` elements.
pub fn admissible_data(r: u32, dim: usize, n: usize) -> Vec<OrbifoldData> {
    let pool: Vec<u32> = (0..r).collect();
    let mut out = Vec::new();
    for w in multisets(&pool, dim) {
        let w: Vec<i64> = w.into_iter().map(i64::from).collect();
        for mut k in multisets(&pool, n - 1) {
            k.push(OrbifoldData::completing_element(r, &k));
            let k: Vec<i64> = k.into_iter().map(i64::from).collect();
            out.push(OrbifoldData::new(r, &w, &k).unwrap());
        }
    }
    out
}

/// Age-1 elements of a `C^3` action.
pub fn age_one_elements(r: u32, w: &[i64; 3]) -> Vec<u32> {
    let probe = OrbifoldData::new(r, w, &[0, 0, 0]).unwrap();
    (1..r).filter(|&k| probe.with_elements(vec![k, 0, 0]).total_age(0).is_one()).collect()
}

/// The `[C^3 / mu_r]` actions with an age-1 generator, `r = 3, 4, 5`, up to
/// permuting the weights.
pub const CY3_ACTIONS: [(u32, [i64; 3]); 4] = [(3, [1, 1, 1]), (4, [1, 1, 2]), (5, [1, 1, 3]), (5, [1, 2, 2])];

/// Every monomial of degree `d` in the symbols of `M_{0,n}-bar` that survives
/// the incomparability relation.
pub fn compatible_monomials(n: usize, d: usize) -> Vec<Monomial> {
    let symbols: Vec<Subset> = Subset::full(n - 1).nonempty_subsets().collect();
    fn go(symbols: &[Subset], from: usize, left: usize, cur: &mut Vec<(Subset, u8)>, out: &mut Vec<Monomial>) {
        if left == 0 {
            out.push(Monomial::from_factors(cur.iter().copied()));
            return;
        }
        for i in from..symbols.len() {
            let s = symbols[i];
            if !cur.iter().all(|&(c, _)| c.compatible(s)) {
                continue;
            }
            for e in 1..=left {
                cur.push((s, e as u8));
                go(symbols, i + 1, left - e, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(&symbols, 0, d, &mut Vec::new(), &mut out);
    out
}

pub fn divisor(n: usize, t: Subset) -> CohClass {
    CohClass::divisor(n, 0, t).unwrap()
}
