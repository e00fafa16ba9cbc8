//! The Haar functional on the coefficient coalgebra up to degree m̃: pairings of matrix
//! coefficients, annihilation of the truncation ideal, and the cosemisimplicity certificate.
//!
//! A coefficient (λ, φ, ψ, n) stands for the functional ω ↦ (φ, ω ψ) with φ, ψ in level-n
//! coordinates. Products of coefficients are represented at level n+m through the merge
//! map X_{n,m}, and h(φ⊗ψ) = (φ, e_n ψ) with e_n the projection onto the trivial copies.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{FusionError, Result};
use crate::groupoid::{Generator, Groupoid};
use crate::linalg::{self, diff_abs, eye, kron, max_abs, mm, CMat, LegTensor, C64, ONE};
use crate::report::{timed_result, CheckReport};
use crate::weights::{
    classical_power_multiplicities, conjugate, enumerate_alcove, thresholds, truncated_power_multiplicities, Weight,
};
use crate::wenzl::{random_word, Levels};

/// A matrix coefficient representative.
#[derive(Clone, Debug)]
pub struct Coefficient {
    pub weight: Weight,
    pub level: usize,
    pub phi: CMat,
    pub psi: CMat,
}

impl Coefficient {
    /// The unit coefficient at level 0.
    pub fn trivial(n: usize) -> Self {
        Coefficient { weight: Weight::zero(n), level: 0, phi: eye(1), psi: eye(1) }
    }
}

/// Haar functional data over built levels.
pub struct HaarContext<'a> {
    pub groupoid: &'a Groupoid<'a>,
    pub m_tilde: usize,
    pub rank_ratio: f64,
}

fn inner(a: &CMat, b: &CMat) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Per-λ cosemisimplicity data.
#[derive(Clone, Debug, Serialize)]
pub struct CertificateRow {
    pub weight: Weight,
    pub conjugate: Weight,
    pub degree_sum: usize,
    pub n_lambda1: usize,
    pub rank: usize,
    pub full: usize,
    pub sv_ratio: f64,
}

impl<'a> HaarContext<'a> {
    pub fn new(groupoid: &'a Groupoid<'a>) -> Self {
        let m_tilde = thresholds(&groupoid.lv.ctx).m_tilde;
        HaarContext { groupoid, m_tilde, rank_ratio: 1e-6 }
    }

    fn lv(&self) -> &Levels {
        self.groupoid.lv
    }

    /// h on a single coefficient: (φ, e_n ψ).
    pub fn haar(&self, a: &Coefficient) -> Result<C64> {
        if a.level > self.m_tilde {
            return Err(FusionError::DegreeOverflow(a.level, self.m_tilde));
        }
        let e = self.lv().trivial_projection(a.level)?;
        Ok(inner(&a.phi, &mm(&e, &a.psi)))
    }

    /// h(ab) = (φ⊗ξ, Y_{n,m} e_{n+m} X_{n,m} ψ⊗η).
    pub fn haar_pair(&self, a: &Coefficient, b: &Coefficient) -> Result<C64> {
        let (n, m) = (a.level, b.level);
        if n + m > self.m_tilde {
            return Err(FusionError::DegreeOverflow(n + m, self.m_tilde));
        }
        let lv = self.lv();
        let x = lv.x_map(n, m)?;
        let e = lv.trivial_projection(n + m)?;
        let y = lv.y_map(n, m)?;
        let right = mm(&y, &mm(&e, &mm(&x, &kron(&a.psi, &b.psi))));
        Ok(inner(&kron(&a.phi, &b.phi), &right))
    }

    /// Coefficient basis of M_λ at the section copy: (ι e_i, ι e_j) in row-major (i, j).
    pub fn coefficient_basis(&self, w: &Weight) -> Vec<Coefficient> {
        let g = self.groupoid;
        let s = g.section.selector(g.lv, w);
        let d = s.ncols();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                out.push(Coefficient {
                    weight: w.clone(),
                    level: g.section.level(w),
                    phi: s.columns(i, 1).into_owned(),
                    psi: s.columns(j, 1).into_owned(),
                });
            }
        }
        out
    }

    /// Gram matrix (a, b) ↦ h(ab) on M_λ × M_μ.
    pub fn gram(&self, lam: &Weight, mu: &Weight) -> Result<CMat> {
        let g = self.groupoid;
        let (h, k) = (g.section.level(lam), g.section.level(mu));
        if h + k > self.m_tilde {
            return Err(FusionError::DegreeOverflow(h + k, self.m_tilde));
        }
        let lv = self.lv();
        let (sa, sb) = (g.section.selector(lv, lam), g.section.selector(lv, mu));
        let (da, db) = (sa.ncols(), sb.ncols());
        let emb = kron(&sa, &sb);
        let core = mm(&emb.adjoint(), &mm(&*lv.y_map(h, k)?, &mm(&lv.trivial_projection(h + k)?, &mm(&*lv.x_map(h, k)?, &emb))));
        // core[(i,k),(j,l)] = h(a_ij b_kl)
        Ok(CMat::from_fn(da * da, db * db, |r, c| {
            let (i, j) = (r / da, r % da);
            let (k, l) = (c / db, c % db);
            core[(i * db + k, j * db + l)]
        }))
    }

    /// The certificate for one weight.
    pub fn certificate_row(&self, w: &Weight) -> Result<CertificateRow> {
        let g = self.groupoid;
        let wb = conjugate(w);
        let degree_sum = g.section.level(w) + g.section.level(&wb);
        let n_lambda1 = g.lv.ctx.n * w.first() as usize;
        let gram = self.gram(w, &wb)?;
        let s = linalg::singular_values(&gram);
        let smax = s.first().copied().unwrap_or(0.0);
        let rank = s.iter().filter(|&&x| x > self.rank_ratio * smax).count();
        let sv_ratio = if smax > 0.0 { s.last().copied().unwrap_or(0.0) / smax } else { 0.0 };
        Ok(CertificateRow {
            weight: w.clone(),
            conjugate: wb,
            degree_sum,
            n_lambda1,
            rank,
            full: gram.nrows().min(gram.ncols()),
            sv_ratio,
        })
    }

    /// The conjugation vector r_λ = Σ ψ̄_i ⊗ K_{2ρ} ψ_i in level h_λ̄ ⊗ level h_λ.
    pub fn conjugation_vector(&self, w: &Weight) -> Result<CMat> {
        let g = self.groupoid;
        let lv = self.lv();
        let wb = conjugate(w);
        let t = g.conjugation(w)?;
        let (sb, s) = (g.section.selector(lv, &wb), g.section.selector(lv, w));
        let k = lv.refs[w].space.gens.k_two_rho();
        let d = t.ncols();
        let mut r = CMat::zeros(sb.nrows() * s.nrows(), 1);
        for i in 0..d {
            let a = mm(&sb, &t.columns(i, 1).into_owned());
            let b = mm(&s, &k.columns(i, 1).into_owned());
            r += kron(&a, &b);
        }
        Ok(r)
    }
}

/// Arrows between truncated levels used to probe h.
struct Arrow {
    from: usize,
    to: usize,
    map: CMat,
    label: String,
}

/// Insert the determinant vector after the first `a` strands: level m → level m+N.
fn determinant_insertion(lv: &Levels, m: usize, a: usize) -> Result<CMat> {
    let n = lv.ctx.n;
    let top = lv.level(n)?;
    let c = top.copies.iter().find(|c| c.weight.is_zero()).ok_or_else(|| FusionError::WeightAbsent(vec![0; n - 1]))?;
    let mut s = CMat::zeros(top.dim, 1);
    s[(c.offset, 0)] = ONE;
    // ψ ↦ X_{a+N,m−a}(X_{a,N}(·⊗s)⊗·) Y_{a,m−a} ψ
    let y = lv.y_map(a, m - a)?;
    let ins = mm(&*lv.x_map(a, n)?, &kron(&eye(lv.dim(a)), &s));
    let mid = kron(&ins, &eye(lv.dim(m - a)));
    Ok(mm(&mm(&*lv.x_map(a + n, m - a)?, &mid), &y))
}

fn sample_arrows(lv: &Levels, top: usize, seed: u64) -> Result<Vec<Arrow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lv.ctx.n;
    let mut out = Vec::new();
    for m in 0..=top {
        if m >= 2 {
            for i in 1..m {
                let g = lv.truncated_braiding(&[i as i32], m)?;
                out.push(Arrow { from: m, to: m, map: g, label: format!("σ_{i} at level {m}") });
            }
            let mut comb = CMat::zeros(lv.dim(m), lv.dim(m));
            for _ in 0..3 {
                let w = random_word(&mut rng, m, 2 * m);
                let c = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                comb += lv.truncated_braiding(&w, m)? * c;
            }
            out.push(Arrow { from: m, to: m, map: comb, label: format!("random braid combination at level {m}") });
        }
        if m + n <= top {
            for a in 0..=m {
                let d = determinant_insertion(lv, m, a)?;
                out.push(Arrow { from: m, to: m + n, map: d.clone(), label: format!("determinant at slot {a}, {m}→{}", m + n) });
                out.push(Arrow { from: m + n, to: m, map: d.adjoint(), label: format!("determinant adjoint at slot {a}, {}→{m}", m + n) });
            }
        }
    }
    Ok(out)
}

/// The Haar suite.
pub fn verify_haar(hc: &HaarContext, seed: u64, tol: f64) -> Vec<CheckReport> {
    let lv = hc.lv();
    let ctx = lv.ctx;
    let g = hc.groupoid;
    let top = hc.m_tilde.min(lv.n_max());
    let mut out = Vec::new();

    out.push(timed_result("haar-unit", || {
        let one = hc.haar(&Coefficient::trivial(ctx.n))?;
        let pair = hc.haar_pair(&Coefficient::trivial(ctx.n), &Coefficient::trivial(ctx.n))?;
        let ok = one == ONE && pair == ONE;
        Ok(CheckReport::predicate("haar-unit", ok, (one - ONE).norm().max((pair - ONE).norm()), "h(I) and h(I·I)"))
    }));
    out.push(timed_result("haar-nontrivial-blocks", || {
        let mut worst = 0.0f64;
        for w in g.weights().iter().filter(|w| !w.is_zero()) {
            for c in hc.coefficient_basis(w) {
                worst = worst.max(hc.haar(&c)?.norm());
            }
        }
        Ok(CheckReport::residual("haar-nontrivial-blocks", worst, tol, "all basis coefficients, λ ≠ 0"))
    }));
    out.push(timed_result("haar-annihilation-arrows", || {
        let arrows = sample_arrows(lv, top, seed)?;
        let mut worst = 0.0f64;
        for a in &arrows {
            // h(φ⊗Aψ) − h(φA⊗ψ) = (φ, (e_n A − A e_m) ψ) for all φ, ψ
            let lhs = mm(&lv.trivial_projection(a.to)?, &a.map);
            let rhs = mm(&a.map, &lv.trivial_projection(a.from)?);
            worst = worst.max(diff_abs(&lhs, &rhs) / max_abs(&a.map).max(1.0));
        }
        let kinds: std::collections::BTreeSet<&str> = arrows.iter().map(|a| a.label.split(" at").next().unwrap_or("")).collect();
        Ok(CheckReport::residual(
            "haar-annihilation-arrows",
            worst,
            tol,
            format!("{} arrows up to level {top} ({})", arrows.len(), kinds.into_iter().collect::<Vec<_>>().join(", ")),
        ))
    }));
    out.push(timed_result("haar-annihilation-negligible", || {
        let amb = top.min(lv.ambient_max());
        let mut worst = 0.0f64;
        let mut count = 0;
        for n in 1..=amb {
            let e = lv.trivial_projection(n)?;
            let rows: Vec<usize> = (0..e.nrows()).filter(|&i| e[(i, i)].re > 0.5).collect();
            if rows.is_empty() {
                continue;
            }
            let l = lv.l(n)?;
            let el = CMat::from_fn(rows.len(), l.ncols(), |i, j| l[(rows[i], j)]);
            let w = LegTensor::from_matrix(vec![ctx.n; n], &el.transpose());
            for j in 2..=n {
                let pj = lv.p_ambient(j)?.transpose();
                for a in 0..=n - j {
                    // (e_n L_n (1⊗(1−p_j)⊗1))ᵀ = Wᵀ-columns minus p_jᵀ on legs a..a+j
                    let t = w.apply(a, j, &pj, &vec![ctx.n; j]);
                    let d = w.data.iter().zip(&t.data).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                    worst = worst.max(d);
                    count += 1;
                }
            }
        }
        Ok(CheckReport::residual("haar-annihilation-negligible", worst, tol, format!("{count} placements of 1−p_j, n ≤ {amb}")))
    }));
    out.push(timed_result("haar-trivial-free-negligible", || {
        let (ok, count) = negligible_trivial_free(&ctx, hc.m_tilde);
        Ok(CheckReport::predicate("haar-trivial-free-negligible", ok, 0.0, format!("{count} (r, λ) cases, exact integers")))
    }));
    out.push(timed_result("haar-no-early-negligible", || {
        let k = ctx.ell - ctx.n;
        let ok = (0..=k).all(|n| truncated_power_multiplicities(&ctx, n) == classical_power_multiplicities(&Weight::zero(ctx.n), n));
        Ok(CheckReport::predicate("haar-no-early-negligible", ok, 0.0, format!("powers n ≤ {k}")))
    }));
    out.push(timed_result("cosemisimple-degree", || {
        let mut ok = true;
        let mut worst = 0usize;
        for w in enumerate_alcove(&ctx) {
            let s = (w.deg() + conjugate(&w).deg()) as usize;
            let nl = ctx.n * w.first() as usize;
            ok &= s == nl && nl <= hc.m_tilde;
            worst = worst.max(nl);
        }
        Ok(CheckReport::predicate("cosemisimple-degree", ok, worst as f64, format!("max Nλ_1 = {worst} ≤ m̃ = {}", hc.m_tilde)))
    }));
    out.push(timed_result("cosemisimple-rank", || {
        let mut ok = true;
        let mut min_ratio = f64::INFINITY;
        let mut ranks = Vec::new();
        for w in g.weights() {
            let row = hc.certificate_row(&w)?;
            ok &= row.rank == row.full && row.sv_ratio > hc.rank_ratio;
            min_ratio = min_ratio.min(row.sv_ratio);
            ranks.push(format!("{}:{}/{}", row.weight, row.rank, row.full));
        }
        Ok(CheckReport::predicate("cosemisimple-rank", ok, min_ratio, ranks.join(" ")))
    }));
    out.push(timed_result("haar-orthogonality", || {
        let mut worst = 0.0f64;
        let mut count = 0;
        for a in g.weights() {
            for b in g.weights() {
                if b == conjugate(&a) || g.section.level(&a) + g.section.level(&b) > hc.m_tilde {
                    continue;
                }
                worst = worst.max(max_abs(&hc.gram(&a, &b)?));
                count += 1;
            }
        }
        Ok(CheckReport::residual("haar-orthogonality", worst, tol, format!("{count} non-conjugate pairs")))
    }));
    out.push(timed_result("conjugation-vector", || {
        let mut worst = 0.0f64;
        for w in g.weights() {
            let wb = conjugate(&w);
            let (h, hb) = (g.section.level(&w), g.section.level(&wb));
            if h + hb > lv.n_max() {
                return Err(FusionError::LevelsUnavailable(h + hb));
            }
            let r = hc.conjugation_vector(&w)?;
            let nr = max_abs(&r);
            // (1 − p) r = 0 in level coordinates
            let back = mm(&*lv.y_map(hb, h)?, &mm(&*lv.x_map(hb, h)?, &r));
            worst = worst.max(diff_abs(&back, &r) / nr);
            // invariance under Δ(a)
            let (ga, gb) = (lv.level_generators(hb)?, lv.level_generators(h)?);
            for a in Generator::all(ctx.n) {
                let mut v = CMat::zeros(r.nrows(), 1);
                for (x, y) in a.coproduct_terms(&ga, &gb) {
                    v += mm(&kron(&x, &y), &r);
                }
                let eps = if matches!(a, Generator::K(_) | Generator::KInv(_)) { ONE } else { C64::new(0.0, 0.0) };
                worst = worst.max(diff_abs(&v, &(&r * eps)) / nr);
            }
        }
        Ok(CheckReport::residual("conjugation-vector", worst, tol, "all λ: in the range of p and invariant"))
    }));
    out.push(timed_result("trivial-projection-central", || {
        let mut worst = 0.0f64;
        for n in 2..=top {
            let e = lv.trivial_projection(n)?;
            for i in 1..n {
                let gi = lv.compressed_generator(n, i, false)?;
                worst = worst.max(diff_abs(&mm(&e, &gi), &mm(&gi, &e)));
            }
        }
        Ok(CheckReport::residual("trivial-projection-central", worst, tol, format!("levels 2..={top}, all generators")))
    }));
    out
}

/// For every r < m̃ and every negligible start λ+ω_1 with λ_1 = ℓ−N and deg λ ≤ r, the trivial
/// weight does not occur in (λ+ω_1)⊗V^{⊗(m̃−r−1)}. Returns (all zero, number of cases).
pub fn negligible_trivial_free(ctx: &crate::QContext, m_tilde: usize) -> (bool, usize) {
    let k = (ctx.ell - ctx.n) as i64;
    let mut ok = true;
    let mut count = 0;
    for r in 0..m_tilde {
        for w in enumerate_alcove(ctx).into_iter().filter(|w| w.first() == k && w.deg() as usize <= r) {
            let mut start = w.parts.clone();
            start[0] += 1;
            let start = Weight { parts: start };
            let mult = classical_power_multiplicities(&start, m_tilde - r - 1).get(&Weight::zero(ctx.n)).copied().unwrap_or(0);
            ok &= mult == 0;
            count += 1;
        }
    }
    (ok, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::Groupoid;
    use crate::wenzl::LevelOptions;
    use crate::QContext;

    fn build(n: usize, ell: usize) -> Levels {
        let ctx = QContext::new(n, ell).unwrap();
        let mut o = LevelOptions::new(thresholds(&ctx).m_tilde);
        o.ambient_max = o.n_max.min(6);
        Levels::build(&ctx, &o).unwrap()
    }

    #[test]
    fn m_tilde_values() {
        assert_eq!(thresholds(&QContext::new(2, 3).unwrap()).m_tilde, 3);
        assert_eq!(thresholds(&QContext::new(3, 4).unwrap()).m_tilde, 5);
        assert_eq!(thresholds(&QContext::new(3, 5).unwrap()).m_tilde, 8);
    }

    #[test]
    fn gram_ranks_for_sl2_level_four() {
        let lv = build(2, 4);
        let g = Groupoid::with_default_section(&lv).unwrap();
        let hc = HaarContext::new(&g);
        let ranks: Vec<usize> = g.weights().iter().map(|w| hc.certificate_row(w).unwrap().rank).collect();
        assert_eq!(ranks, vec![1, 4, 9]);
    }

    #[test]
    fn degree_overflow() {
        let lv = build(2, 3);
        let g = Groupoid::with_default_section(&lv).unwrap();
        let hc = HaarContext::new(&g);
        let a = Coefficient { weight: Weight::kappa(2), level: 2, phi: eye(1), psi: eye(1) };
        assert!(matches!(hc.haar_pair(&a, &a), Err(FusionError::DegreeOverflow(4, 3))));
    }

    #[test]
    fn trivial_free_example() {
        // (2) ⊗ V = (1) ⊕ (3) has no trivial summand
        let ctx = QContext::new(2, 3).unwrap();
        let m = classical_power_multiplicities(&Weight::new(vec![2]).unwrap(), 1);
        assert_eq!(m.get(&Weight::zero(2)), None);
        assert!(negligible_trivial_free(&ctx, 3).0);
        assert!(negligible_trivial_free(&QContext::new(3, 4).unwrap(), 5).0);
    }

    #[test]
    fn suite_passes() {
        for (n, ell) in [(2, 3), (2, 4), (3, 4), (2, 5), (3, 5)] {
            let lv = build(n, ell);
            let g = Groupoid::with_default_section(&lv).unwrap();
            let hc = HaarContext::new(&g);
            for r in verify_haar(&hc, 0, 1e-9) {
                assert!(r.passed(), "({n},{ell}) {r:?}");
            }
        }
    }
}
