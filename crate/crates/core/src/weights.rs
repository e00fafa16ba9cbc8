//! Type A_{N-1} weight combinatorics: alcove, pairings, ribbon exponents, fusion rules.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{FusionError, Result};
use crate::scalars::{QContext, QExponent};

/// Dominant weight stored as a partition (λ_1 ≥ … ≥ λ_{N-1} ≥ 0).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Weight {
    pub parts: Vec<i64>,
}

impl Weight {
    pub fn new(parts: Vec<i64>) -> Result<Self> {
        let ok = parts.windows(2).all(|w| w[0] >= w[1]) && parts.iter().all(|&x| x >= 0);
        if !ok {
            return Err(FusionError::Config(format!("{parts:?} is not a dominant weight")));
        }
        Ok(Weight { parts })
    }

    pub fn zero(n: usize) -> Self {
        Weight { parts: vec![0; n - 1] }
    }

    /// The fundamental weight ω_1 = κ.
    pub fn kappa(n: usize) -> Self {
        let mut parts = vec![0; n - 1];
        parts[0] = 1;
        Weight { parts }
    }

    /// Fundamental weight ω_k (k = 0 and k = N give the zero weight).
    pub fn fundamental(n: usize, k: usize) -> Self {
        let parts = (0..n - 1).map(|i| i64::from(i < k && k < n)).collect();
        Weight { parts }
    }

    /// Coordinates in Z^N with last entry 0.
    pub fn to_zn(&self) -> Vec<i64> {
        let mut v = self.parts.clone();
        v.push(0);
        v
    }

    /// Normalize a dominant Z^N vector by subtracting its last entry.
    pub fn from_zn(v: &[i64]) -> Self {
        let last = *v.last().unwrap();
        Weight { parts: v[..v.len() - 1].iter().map(|x| x - last).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|&x| x == 0)
    }

    pub fn first(&self) -> i64 {
        self.parts[0]
    }

    pub fn deg(&self) -> i64 {
        self.parts.iter().sum()
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.parts.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

pub fn is_dominant_zn(v: &[i64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}

pub fn in_open_alcove(ctx: &QContext, w: &Weight) -> bool {
    w.first() <= (ctx.ell - ctx.n) as i64
}

pub fn in_closed_alcove(ctx: &QContext, w: &Weight) -> bool {
    w.first() <= (ctx.ell - ctx.n + 1) as i64
}

/// All dominant weights with λ_1 ≤ bound, lexicographically ordered.
fn partitions_bounded(len: usize, bound: i64) -> Vec<Weight> {
    fn rec(len: usize, max: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == len {
            out.push(prefix.clone());
            return;
        }
        for x in 0..=max {
            prefix.push(x);
            rec(len, x, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(len, bound, &mut Vec::new(), &mut out);
    let mut ws: Vec<Weight> = out.into_iter().map(|parts| Weight { parts }).collect();
    ws.sort();
    ws
}

/// The open alcove Λ_ℓ in lexicographic order.
pub fn enumerate_alcove(ctx: &QContext) -> Vec<Weight> {
    partitions_bounded(ctx.n - 1, (ctx.ell - ctx.n) as i64)
}

/// ⟨a, b⟩ for Z^N vectors under the traceless embedding.
pub fn pairing_zn(ctx: &QContext, a: &[i64], b: &[i64]) -> QExponent {
    let n = ctx.n as i64;
    let dot: i64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let sa: i64 = a.iter().sum();
    let sb: i64 = b.iter().sum();
    ctx.exp(2 * (n * dot - sa * sb))
}

pub fn pairing(ctx: &QContext, a: &Weight, b: &Weight) -> QExponent {
    pairing_zn(ctx, &a.to_zn(), &b.to_zn())
}

/// 2ρ in Z^N coordinates.
pub fn two_rho_zn(n: usize) -> Vec<i64> {
    (0..n).map(|i| 2 * (n - 1 - i) as i64).collect()
}

/// Ribbon exponent ⟨λ, λ+2ρ⟩ of a Z^N vector.
pub fn casimir_zn(ctx: &QContext, v: &[i64]) -> QExponent {
    let shifted: Vec<i64> = v.iter().zip(two_rho_zn(ctx.n)).map(|(x, r)| x + r).collect();
    pairing_zn(ctx, v, &shifted)
}

pub fn casimir_exp(ctx: &QContext, w: &Weight) -> QExponent {
    casimir_zn(ctx, &w.to_zn())
}

/// Fusion successors of λ under ⊗V split into open-alcove and wall weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FusionStep {
    pub kept: Vec<Weight>,
    pub negligible: Vec<Weight>,
}

/// All dominant λ+γ_i, without alcove cut, in lexicographic order.
pub fn classical_successors(w: &Weight) -> Vec<Weight> {
    let z = w.to_zn();
    let mut out = Vec::new();
    for i in 0..z.len() {
        let mut x = z.clone();
        x[i] += 1;
        if is_dominant_zn(&x) {
            out.push(Weight::from_zn(&x));
        }
    }
    out.sort();
    out
}

pub fn fusion_step(ctx: &QContext, w: &Weight) -> Result<FusionStep> {
    if !in_open_alcove(ctx, w) {
        return Err(FusionError::AlcoveViolation(w.parts.clone()));
    }
    let (kept, negligible) = classical_successors(w).into_iter().partition(|m| in_open_alcove(ctx, m));
    Ok(FusionStep { kept, negligible })
}

/// Multiplicities of irreducibles in p_n V^{⊗n}.
pub fn truncated_power_multiplicities(ctx: &QContext, n: usize) -> BTreeMap<Weight, usize> {
    let mut cur = BTreeMap::new();
    cur.insert(Weight::zero(ctx.n), 1usize);
    for _ in 0..n {
        let mut next = BTreeMap::new();
        for (w, m) in &cur {
            for k in fusion_step(ctx, w).expect("weights stay in the alcove").kept {
                *next.entry(k).or_insert(0) += m;
            }
        }
        cur = next;
    }
    cur
}

/// Multiplicities of V_μ in V_{λ0} ⊗ V^{⊗t} for classical sl_N.
pub fn classical_power_multiplicities(lambda0: &Weight, t: usize) -> BTreeMap<Weight, usize> {
    let mut cur = BTreeMap::new();
    cur.insert(lambda0.clone(), 1usize);
    for _ in 0..t {
        let mut next = BTreeMap::new();
        for (w, m) in &cur {
            for k in classical_successors(w) {
                *next.entry(k).or_insert(0) += m;
            }
        }
        cur = next;
    }
    cur
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightInvariants {
    pub deg: i64,
    pub conj: Weight,
}

pub fn conjugate(w: &Weight) -> Weight {
    let l1 = w.first();
    let k = w.parts.len();
    let mut parts = vec![l1];
    for i in (1..k).rev() {
        parts.push(l1 - w.parts[i]);
    }
    parts.truncate(k);
    Weight { parts }
}

pub fn weight_invariants(w: &Weight) -> WeightInvariants {
    WeightInvariants { deg: w.deg(), conj: conjugate(w) }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Thresholds {
    pub m: usize,
    pub m_tilde: usize,
}

pub fn thresholds(ctx: &QContext) -> Thresholds {
    let m = (ctx.n - 1) * (ctx.ell - ctx.n);
    Thresholds { m, m_tilde: m + ctx.ell - 1 }
}

/// Weyl dimension formula.
pub fn dim_classical(w: &Weight) -> usize {
    let z = w.to_zn();
    let n = z.len();
    let mut num: i128 = 1;
    let mut den: i128 = 1;
    for i in 0..n {
        for j in i + 1..n {
            num *= (z[i] - z[j] + (j - i) as i64) as i128;
            den *= (j - i) as i128;
        }
    }
    (num / den) as usize
}

/// Weights (Z^N) of V_λ with multiplicity, from Gelfand–Tsetlin patterns.
pub fn weight_multiset(w: &Weight) -> BTreeMap<Vec<i64>, usize> {
    // `sums` holds the row sums of the rows above `row`, longest first.
    fn rec(row: &[i64], sums: &mut Vec<i64>, out: &mut BTreeMap<Vec<i64>, usize>) {
        if row.len() == 1 {
            let mut row_sums = sums.clone();
            row_sums.push(row[0]);
            row_sums.reverse();
            let mut wt = Vec::with_capacity(row_sums.len());
            let mut prev = 0;
            for s in row_sums.iter() {
                wt.push(s - prev);
                prev = *s;
            }
            *out.entry(wt).or_insert(0) += 1;
            return;
        }
        let m = row.len() - 1;
        let mut next = vec![0i64; m];
        fn fill(i: usize, row: &[i64], next: &mut Vec<i64>, sums: &mut Vec<i64>, out: &mut BTreeMap<Vec<i64>, usize>) {
            if i == next.len() {
                let s: i64 = row.iter().sum();
                sums.push(s);
                let nx = next.clone();
                rec(&nx, sums, out);
                sums.pop();
                return;
            }
            for x in row[i + 1]..=row[i] {
                next[i] = x;
                fill(i + 1, row, next, sums, out);
            }
        }
        fill(0, row, &mut next, sums, out);
    }
    let top = w.to_zn();
    let mut out = BTreeMap::new();
    rec(&top, &mut Vec::new(), &mut out);
    out
}

/// Classical decomposition of V_λ ⊗ V_μ by the Brauer–Klimyk rule.
pub fn classical_tensor(a: &Weight, b: &Weight) -> BTreeMap<Weight, usize> {
    let n = a.parts.len() + 1;
    let rho: Vec<i64> = (0..n).map(|i| (n - 1 - i) as i64).collect();
    let za = a.to_zn();
    let mut acc: BTreeMap<Weight, i64> = BTreeMap::new();
    for (wt, mult) in weight_multiset(b) {
        let mut v: Vec<i64> = (0..n).map(|i| za[i] + wt[i] + rho[i]).collect();
        // sort descending, tracking parity
        let mut sign = 1i64;
        for i in 0..n {
            for j in 0..n - 1 - i {
                if v[j] < v[j + 1] {
                    v.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if v.windows(2).any(|p| p[0] == p[1]) {
            continue;
        }
        let nu: Vec<i64> = (0..n).map(|i| v[i] - rho[i]).collect();
        *acc.entry(Weight::from_zn(&nu)).or_insert(0) += sign * mult as i64;
    }
    acc.into_iter().filter(|(_, m)| *m != 0).map(|(w, m)| (w, m as usize)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(p: &[i64]) -> Weight {
        Weight::new(p.to_vec()).unwrap()
    }

    #[test]
    fn alcove_examples() {
        let c = QContext::new(2, 3).unwrap();
        assert_eq!(enumerate_alcove(&c), vec![w(&[0]), w(&[1])]);
        let c = QContext::new(2, 5).unwrap();
        assert_eq!(enumerate_alcove(&c), vec![w(&[0]), w(&[1]), w(&[2]), w(&[3])]);
        let c = QContext::new(3, 4).unwrap();
        assert_eq!(enumerate_alcove(&c), vec![w(&[0, 0]), w(&[1, 0]), w(&[1, 1])]);
    }

    #[test]
    fn pairing_examples() {
        for n in 2..5 {
            let c = QContext::new(n, n + 2).unwrap();
            let mut alpha = vec![0; n];
            alpha[0] = 1;
            alpha[1] = -1;
            assert_eq!(pairing_zn(&c, &alpha, &alpha).value(), 2.0);
            assert_eq!(pairing(&c, &Weight::kappa(n), &Weight::zero(n)).value(), 0.0);
        }
        let c = QContext::new(2, 3).unwrap();
        assert_eq!(pairing(&c, &w(&[1]), &w(&[1])).value(), 0.5);
    }

    #[test]
    fn casimir_examples() {
        let c2 = QContext::new(2, 5).unwrap();
        assert_eq!(casimir_exp(&c2, &w(&[1])).value(), 1.5);
        assert_eq!(casimir_exp(&c2, &w(&[0])).value(), 0.0);
        for j in 0..6 {
            assert_eq!(casimir_exp(&c2, &w(&[j])).value(), (j * (j + 2)) as f64 / 2.0);
        }
        let c3 = QContext::new(3, 5).unwrap();
        let v = casimir_exp(&c3, &w(&[1, 0]));
        assert!((v.value() - 8.0 / 3.0).abs() < 1e-15);
        assert!((casimir_exp(&c3, &w(&[2, 1])).value() - 6.0).abs() < 1e-15);
        assert!((casimir_exp(&c3, &w(&[3, 0])).value() - 12.0).abs() < 1e-15);
    }

    #[test]
    fn fusion_step_examples() {
        let c = QContext::new(2, 3).unwrap();
        let s = fusion_step(&c, &w(&[1])).unwrap();
        assert_eq!(s.kept, vec![w(&[0])]);
        assert_eq!(s.negligible, vec![w(&[2])]);
        let c = QContext::new(3, 4).unwrap();
        let s = fusion_step(&c, &w(&[1, 0])).unwrap();
        // V⊗V for sl_3 is (2,0)⊕(1,1); no trivial summand
        assert_eq!(s.kept, vec![w(&[1, 1])]);
        assert_eq!(s.negligible, vec![w(&[2, 0])]);
        let s = fusion_step(&c, &w(&[1, 1])).unwrap();
        assert_eq!(s.kept, vec![w(&[0, 0])]);
        assert_eq!(s.negligible, vec![w(&[2, 1])]);
        let c = QContext::new(2, 5).unwrap();
        let s = fusion_step(&c, &w(&[1])).unwrap();
        assert_eq!(s.kept, vec![w(&[0]), w(&[2])]);
        assert!(s.negligible.is_empty());
        assert!(fusion_step(&c, &w(&[4])).is_err());
    }

    #[test]
    fn truncated_multiplicity_examples() {
        let c = QContext::new(2, 3).unwrap();
        let m = truncated_power_multiplicities(&c, 3);
        assert_eq!(m, BTreeMap::from([(w(&[1]), 1)]));
        assert_eq!(truncated_power_multiplicities(&c, 0), BTreeMap::from([(w(&[0]), 1)]));
        let c = QContext::new(2, 4).unwrap();
        assert_eq!(truncated_power_multiplicities(&c, 3), BTreeMap::from([(w(&[1]), 2)]));
    }

    #[test]
    fn classical_multiplicity_examples() {
        let m = classical_power_multiplicities(&w(&[2]), 2);
        assert_eq!(m, BTreeMap::from([(w(&[0]), 1), (w(&[2]), 2), (w(&[4]), 1)]));
        assert_eq!(classical_power_multiplicities(&w(&[3, 1]), 0), BTreeMap::from([(w(&[3, 1]), 1)]));
        let m = classical_power_multiplicities(&w(&[0, 0]), 3);
        assert_eq!(m, BTreeMap::from([(w(&[0, 0]), 1), (w(&[2, 1]), 2), (w(&[3, 0]), 1)]));
        let total: usize = m.iter().map(|(k, v)| v * dim_classical(k)).sum();
        assert_eq!(total, 27);
    }

    #[test]
    fn invariants_examples() {
        assert_eq!(weight_invariants(&w(&[2, 1])), WeightInvariants { deg: 3, conj: w(&[2, 1]) });
        assert_eq!(weight_invariants(&w(&[0, 0])), WeightInvariants { deg: 0, conj: w(&[0, 0]) });
        assert_eq!(weight_invariants(&w(&[3])), WeightInvariants { deg: 3, conj: w(&[3]) });
        assert_eq!(conjugate(&w(&[1, 0])), w(&[1, 1]));
        assert_eq!(conjugate(&w(&[2, 0, 0])), w(&[2, 2, 2]));
    }

    #[test]
    fn thresholds_examples() {
        let t = |n, l| thresholds(&QContext::new(n, l).unwrap());
        assert_eq!(t(2, 3), Thresholds { m: 1, m_tilde: 3 });
        assert_eq!(t(3, 4), Thresholds { m: 2, m_tilde: 5 });
        assert_eq!(t(2, 5), Thresholds { m: 3, m_tilde: 7 });
    }

    #[test]
    fn weyl_dims_and_weights() {
        assert_eq!(dim_classical(&w(&[1, 0])), 3);
        assert_eq!(dim_classical(&w(&[2, 1])), 8);
        assert_eq!(dim_classical(&w(&[2, 0])), 6);
        assert_eq!(dim_classical(&w(&[4])), 5);
        for p in [vec![2, 1], vec![3, 1], vec![2, 2, 1]] {
            let wt = w(&p);
            let total: usize = weight_multiset(&wt).values().sum();
            assert_eq!(total, dim_classical(&wt));
        }
    }

    #[test]
    fn brauer_klimyk_matches_iteration() {
        let t = classical_tensor(&w(&[1, 0]), &w(&[1, 0]));
        assert_eq!(t, BTreeMap::from([(w(&[1, 1]), 1), (w(&[2, 0]), 1)]));
        let t = classical_tensor(&w(&[2]), &w(&[3]));
        assert_eq!(t, BTreeMap::from([(w(&[1]), 1), (w(&[3]), 1), (w(&[5]), 1)]));
        let t = classical_tensor(&w(&[2, 1]), &w(&[2, 1]));
        let total: usize = t.iter().map(|(k, v)| v * dim_classical(k)).sum();
        assert_eq!(total, 64);
        assert_eq!(t.get(&w(&[2, 1])), Some(&2));
    }
}
