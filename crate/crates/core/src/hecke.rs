//! Antisymmetrizers in the Hecke algebra, the quantum determinant and its partial vectors,
//! their Kirillov–Wenzl norms, the conjugate equations, and generation by the determinant.

use itertools::Itertools;

use crate::braiding::{self, BraidOperators};
use crate::error::{FusionError, Result};
use crate::linalg::{self, diff_abs, eye, kron, max_abs, mm, CMat, LegTensor, C64, ONE, ZERO};
use crate::report::{timed_result, CheckReport};
use crate::scalars::{q_fact, QContext};
use crate::uqrep::power_action;
use crate::weights::{classical_power_multiplicities, Weight};
use crate::wenzl::Levels;

/// α_{−n} on V^{⊗n}, with the idempotent E_{−n} = λ_n^{-1}α_{−n} when [n]_q! ≠ 0.
#[derive(Clone, Debug)]
pub struct Antisymmetrizer {
    pub n: usize,
    pub alpha: CMat,
    pub lambda: C64,
    pub e: Option<CMat>,
}

/// λ_n = q^{−n(n−1)/2}[n]_q!.
pub fn lambda_n(ctx: &QContext, n: usize) -> Result<C64> {
    let e = -((n * n.saturating_sub(1) / 2) as i32);
    Ok(ctx.q().powi(e) * q_fact(ctx, n as i64)?)
}

/// α_{−1} = 1 and α_{−(n+1)} = Σ_k (−q^{-1})^k g_k⋯g_1 (1⊗α_{−n}).
pub fn antisymmetrizer(ctx: &QContext, n: usize) -> Result<Antisymmetrizer> {
    if n == 0 || n > ctx.n + 1 {
        return Err(FusionError::Config(format!("antisymmetrizer order {n} outside 1..={}", ctx.n + 1)));
    }
    let ops = BraidOperators::new(ctx);
    let d = ctx.n;
    let c = -ctx.q().inv();
    let mut alpha = eye(d);
    for m in 1..n {
        let shifted = kron(&eye(d), &alpha);
        let mut term = LegTensor::from_matrix(vec![d; m + 1], &shifted);
        let mut acc = shifted.clone();
        let mut coef = ONE;
        for k in 1..=m {
            // left-multiply by g_k so that the product reads g_k⋯g_1
            term = term.apply(k - 1, 2, &ops.g, &[d, d]);
            coef *= c;
            acc += term.clone().into_matrix() * coef;
        }
        alpha = acc;
    }
    let lambda = match lambda_n(ctx, n) {
        Ok(l) => l,
        Err(_) => ZERO,
    };
    let e = if lambda.norm() > ctx.tol { Some(&alpha / lambda) } else { None };
    Ok(Antisymmetrizer { n, alpha, lambda, e })
}

impl Antisymmetrizer {
    pub fn idempotent(&self) -> Result<&CMat> {
        self.e.as_ref().ok_or_else(|| FusionError::VanishingNormalizer(format!("[{}]_q! = 0", self.n)))
    }
}

/// Number of inversions of a sequence.
pub fn inversions(p: &[usize]) -> usize {
    (0..p.len()).flat_map(|i| (i + 1..p.len()).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count()
}

/// S_i̲ = Σ_p (x)^{i(p)} ψ_{i_{p(1)}}⊗…⊗ψ_{i_{p(n)}} for a strictly increasing tuple, with x = −q
/// (or x = −q^{-1} for S̃).
pub fn partial_determinant(ctx: &QContext, idx: &[usize], tilde: bool) -> CMat {
    let d = ctx.n;
    let n = idx.len();
    let x = if tilde { -ctx.q().inv() } else { -ctx.q() };
    let mut v = CMat::zeros(d.pow(n as u32), 1);
    for p in (0..n).permutations(n) {
        let pos = p.iter().fold(0usize, |acc, &k| acc * d + idx[k]);
        v[(pos, 0)] += x.powi(inversions(&p) as i32);
    }
    v
}

/// The quantum determinant S ∈ V^{⊗N}.
pub fn quantum_determinant(ctx: &QContext) -> CMat {
    partial_determinant(ctx, &(0..ctx.n).collect::<Vec<_>>(), false)
}

/// N(i̲) = #{(j, i) : j ∈ complement, i ∈ i̲, j > i}.
pub fn crossing_count(idx: &[usize], complement: &[usize]) -> usize {
    complement.iter().map(|&j| idx.iter().filter(|&&i| j > i).count()).sum()
}

/// S = Σ_{i̲} (−q)^{N(i̲)} S_j̲ ⊗ S_i̲ over n-subsets i̲ with complement j̲.
pub fn determinant_split_residual(ctx: &QContext, n: usize) -> f64 {
    let s = quantum_determinant(ctx);
    let mut acc = CMat::zeros(s.nrows(), 1);
    for idx in (0..ctx.n).combinations(n) {
        let comp: Vec<usize> = (0..ctx.n).filter(|k| !idx.contains(k)).collect();
        let c = (-ctx.q()).powi(crossing_count(&idx, &comp) as i32);
        acc += kron(&partial_determinant(ctx, &comp, false), &partial_determinant(ctx, &idx, false)) * c;
    }
    diff_abs(&acc, &s)
}

/// The form adjoint S* = S†R̄^{(N)} as a row.
pub fn determinant_adjoint(ctx: &QContext, s: &CMat) -> Result<CMat> {
    Ok(mm(&s.adjoint(), &braiding::rbar_full(ctx, ctx.n)?))
}

/// (S*⊗1_m)(1_m⊗S) on V^{⊗m}.
pub fn contraction_left(ctx: &QContext, m: usize) -> Result<CMat> {
    let d = ctx.n;
    let s = quantum_determinant(ctx);
    let sa = determinant_adjoint(ctx, &s)?;
    let dm = d.pow(m as u32);
    let dn = s.nrows();
    let mut out = CMat::zeros(dm, dm);
    for x in 0..dm {
        // x⊗S split as (first N legs) × (last m legs)
        let mut v = vec![ZERO; dm * dn];
        for (k, sk) in s.iter().enumerate() {
            v[x * dn + k] = *sk;
        }
        for a in 0..dn {
            for b in 0..dm {
                out[(b, x)] += sa[(0, a)] * v[a * dm + b];
            }
        }
    }
    Ok(out)
}

/// (1_m⊗S*)(S⊗1_m) on V^{⊗m}.
pub fn contraction_right(ctx: &QContext, m: usize) -> Result<CMat> {
    let d = ctx.n;
    let s = quantum_determinant(ctx);
    let sa = determinant_adjoint(ctx, &s)?;
    let dm = d.pow(m as u32);
    let dn = s.nrows();
    let mut out = CMat::zeros(dm, dm);
    for x in 0..dm {
        // S⊗x split as (first m legs) × (last N legs)
        let mut v = vec![ZERO; dn * dm];
        for (k, sk) in s.iter().enumerate() {
            v[k * dm + x] = *sk;
        }
        for a in 0..dm {
            for b in 0..dn {
                out[(a, x)] += v[a * dn + b] * sa[(0, b)];
            }
        }
    }
    Ok(out)
}

/// (−1)^{mn}[m]_q![n]_q! with n = N − m.
pub fn conjugate_constant(ctx: &QContext, m: usize) -> Result<C64> {
    let n = ctx.n - m;
    let sign = if (m * n).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(q_fact(ctx, m as i64)? * q_fact(ctx, n as i64)? * sign)
}

/// Dimension of the algebra generated by matrices, by closure under left multiplication.
fn generated_dim(gens: &[CMat], dim: usize) -> usize {
    let mut basis: Vec<CMat> = Vec::new();
    let mut add = |m: &CMat| -> bool {
        let n0 = m.norm();
        let mut v = m.clone();
        for _ in 0..2 {
            for b in &basis {
                let c: C64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
                v -= b * c;
            }
        }
        let nv = v.norm();
        if nv <= 1e-9 * n0.max(1.0) {
            return false;
        }
        basis.push(v / C64::new(nv, 0.0));
        true
    };
    let id = eye(dim);
    add(&id);
    let mut frontier = vec![id];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for g in gens {
                let c = mm(g, f);
                if add(&c) {
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    basis.len()
}

/// Hecke image dimension on V^{⊗n}, the commutant dimension Σ m_λ² of the tilting module
/// V^{⊗n}, and the numerically computed commutant when N^n is small.
pub fn schur_weyl_dims(ctx: &QContext, n: usize) -> Result<(usize, usize, Option<usize>)> {
    let ops = BraidOperators::new(ctx);
    let dim = ctx.n.pow(n as u32);
    let gs: Vec<CMat> = (1..n).map(|i| ops.g_translate(i, n)).collect();
    let image = generated_dim(&gs, dim);
    let expected = classical_power_multiplicities(&Weight::zero(ctx.n), n).values().map(|m| m * m).sum();
    let numeric = if dim <= 27 {
        let sp = power_action(ctx, n);
        let mats: Vec<&CMat> = sp.gens.e.iter().chain(&sp.gens.f).chain(&sp.gens.k).collect();
        let mut sys = CMat::zeros(mats.len() * dim * dim, dim * dim);
        for (i, m) in mats.iter().enumerate() {
            let blk = kron(&eye(dim), m) - kron(&m.transpose(), &eye(dim));
            sys.view_mut((i * dim * dim, 0), (dim * dim, dim * dim)).copy_from(&blk);
        }
        Some(linalg::kernel(&sys, ctx.tol)?.ncols())
    } else {
        None
    };
    Ok((image, expected, numeric))
}

/// The appendix suite.
pub fn verify_hecke(ctx: &QContext, lv: Option<&Levels>, tol: f64) -> Vec<CheckReport> {
    let nn = ctx.n;
    let q = ctx.q();
    let ops = BraidOperators::new(ctx);
    let mut out = Vec::new();

    out.push(timed_result("antisymmetrizer-absorbs", || {
        let mut worst = 0.0f64;
        for n in 2..=nn {
            let a = antisymmetrizer(ctx, n)?;
            for i in 1..n {
                let g = ops.g_translate(i, n);
                let target = &a.alpha * (-q.inv());
                worst = worst.max(diff_abs(&mm(&g, &a.alpha), &target)).max(diff_abs(&mm(&a.alpha, &g), &target));
            }
        }
        Ok(CheckReport::residual("antisymmetrizer-absorbs", worst, tol, format!("n ≤ {nn}, all g_i on both sides")))
    }));
    out.push(timed_result("antisymmetrizer-square", || {
        let mut worst = 0.0f64;
        for n in 1..=nn {
            let a = antisymmetrizer(ctx, n)?;
            let scale = max_abs(&a.alpha).max(1.0);
            worst = worst.max(diff_abs(&mm(&a.alpha, &a.alpha), &(&a.alpha * a.lambda)) / scale);
        }
        Ok(CheckReport::residual("antisymmetrizer-square", worst, tol, format!("α² = q^(−n(n−1)/2)[n]!α, n ≤ {nn}")))
    }));
    out.push(timed_result("antisymmetrizer-vanishes", || {
        let a = antisymmetrizer(ctx, nn + 1)?;
        Ok(CheckReport::residual("antisymmetrizer-vanishes", max_abs(&a.alpha), tol, format!("order {}", nn + 1)))
    }));
    out.push(timed_result("determinant-antisymmetric", || {
        let s = quantum_determinant(ctx);
        let mut worst = 0.0f64;
        for i in 1..nn {
            worst = worst.max(diff_abs(&mm(&ops.g_translate(i, nn), &s), &(&s * (-q.inv()))));
        }
        // E_{−N}(ψ_1⊗…⊗ψ_N) is proportional to S
        let e = antisymmetrizer(ctx, nn)?;
        let top = e.idempotent()?.column(0).into_owned();
        let c = top[0] / s[(0, 0)];
        let mut col = CMat::zeros(s.nrows(), 1);
        col.copy_from(&top);
        worst = worst.max(diff_abs(&col, &(&s * c)));
        for n in 1..nn {
            worst = worst.max(determinant_split_residual(ctx, n));
        }
        Ok(CheckReport::residual("determinant-antisymmetric", worst, tol, "g_iS = −q⁻¹S, E_{−N} range, crossing splits"))
    }));
    out.push(timed_result("determinant-norms", || {
        let mut worst = 0.0f64;
        let mut count = 0;
        for n in 1..=nn {
            let rb = braiding::rbar_full(ctx, n)?;
            let fact = q_fact(ctx, n as i64)?;
            let ph = q.powi((n * (n - 1) / 2) as i32);
            let tuples: Vec<Vec<usize>> = (0..nn).combinations(n).collect();
            let vs: Vec<CMat> = tuples.iter().map(|t| partial_determinant(ctx, t, false)).collect();
            for (i, t) in tuples.iter().enumerate() {
                let rs = mm(&rb, &vs[i]);
                worst = worst.max(diff_abs(&rs, &(partial_determinant(ctx, t, true) * ph)));
                for (j, v) in vs.iter().enumerate() {
                    let ip = mm(&v.adjoint(), &mm(&rb, &vs[i]))[(0, 0)];
                    let expect = if i == j { fact } else { ZERO };
                    worst = worst.max((ip - expect).norm());
                }
                count += 1;
            }
            // E_{−n} is a selfadjoint projection for the form
            if let Some(e) = antisymmetrizer(ctx, n)?.e {
                worst = worst.max(diff_abs(&mm(&rb, &e), &mm(&e.adjoint(), &rb)));
                worst = worst.max(diff_abs(&mm(&e, &e), &e));
            }
        }
        Ok(CheckReport::residual("determinant-norms", worst, tol, format!("{count} partial determinants, n ≤ {nn}")))
    }));
    out.push(timed_result("determinant-norms-levels", || {
        let Some(lv) = lv else {
            return Ok(CheckReport::skipped("determinant-norms-levels", "no levels built"));
        };
        let mut worst = 0.0f64;
        for n in 1..=nn.min(lv.ambient_max()) {
            let rb = braiding::rbar_full(ctx, n)?;
            let l = lv.l(n)?;
            for t in (0..nn).combinations(n) {
                let v = partial_determinant(ctx, &t, false);
                let a = mm(&v.adjoint(), &mm(&rb, &v))[(0, 0)];
                let c = mm(l, &v);
                let b: f64 = c.iter().map(|z| z.norm_sqr()).sum();
                worst = worst.max((a - C64::new(b, 0.0)).norm());
            }
        }
        Ok(CheckReport::residual("determinant-norms-levels", worst, tol, "full form vs level coordinates"))
    }));
    out.push(timed_result("conjugate-equations", || {
        let mut worst = 0.0f64;
        for m in 1..=nn {
            let c = conjugate_constant(ctx, m)?;
            let e = antisymmetrizer(ctx, m)?;
            let target = e.idempotent()? * c;
            worst = worst.max(diff_abs(&contraction_left(ctx, m)?, &target));
            worst = worst.max(diff_abs(&contraction_right(ctx, m)?, &target));
        }
        Ok(CheckReport::residual("conjugate-equations", worst, tol, format!("both contractions, m = 1..={nn}")))
    }));
    out.push(timed_result("determinant-generates", || {
        let g = &ops.g;
        let id = eye(nn * nn);
        let proj = (&id * q - g) / (q + q.inv());
        let e2 = contraction_left(ctx, 2)? / conjugate_constant(ctx, 2)?;
        let mut worst = diff_abs(&proj, &e2);
        let mut notes = vec!["[ω_2] = (q − g)/(q + q⁻¹) from contractions".to_string()];
        if let Some(lv) = lv.filter(|lv| lv.ambient_max() >= 2) {
            let (b, l) = (lv.b(2)?, lv.l(2)?);
            let flat = |m: &CMat| {
                let c = mm(&mm(l, m), b);
                CMat::from_column_slice(c.len(), 1, c.as_slice())
            };
            let base = [flat(&id), flat(&e2)];
            let eps = flat(&ops.eps);
            let r0 = linalg::rank(&CMat::from_columns(&[base[0].column(0), base[1].column(0)]), 1e-9)?;
            let r1 = linalg::rank(&CMat::from_columns(&[base[0].column(0), base[1].column(0), eps.column(0)]), 1e-9)?;
            if r0 != r1 {
                worst = f64::INFINITY;
            }
            notes.push(format!("level-2 braiding in a span of dim {r0}"));
            if ctx.n == 2 && ctx.ell == 3 {
                let s = quantum_determinant(ctx);
                let ss = mm(&s, &determinant_adjoint(ctx, &s)?);
                worst = worst.max(diff_abs(&lv.p_ambient(2)?, &ss));
                notes.push("p_2 = SS*".into());
            }
        }
        Ok(CheckReport::residual("determinant-generates", worst, tol, notes.join("; ")))
    }));
    out.push(timed_result("schur-weyl", || {
        let mut ok = true;
        let mut notes = Vec::new();
        for n in 2..=4 {
            if nn.pow(n as u32) > 81 {
                break;
            }
            let (img, exp, num) = schur_weyl_dims(ctx, n)?;
            ok &= img == exp && num.is_none_or(|x| x == exp);
            notes.push(match num {
                Some(x) => format!("n={n}: {img}/{exp}/{x}"),
                None => format!("n={n}: {img}/{exp}"),
            });
        }
        Ok(CheckReport::predicate("schur-weyl", ok, 0.0, format!("Hecke image / Σm² / commutant: {}", notes.join(", "))))
    }));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::q_int;
    use crate::wenzl::LevelOptions;

    #[test]
    fn small_antisymmetrizers() {
        let ctx = QContext::new(3, 5).unwrap();
        assert!(linalg::id_residual(&antisymmetrizer(&ctx, 1).unwrap().alpha) < 1e-15);
        let q = ctx.q();
        let l2 = lambda_n(&ctx, 2).unwrap();
        assert!((l2 - q.inv() * q_int(&ctx, 2)).norm() < 1e-12);
        assert!(max_abs(&antisymmetrizer(&ctx, 4).unwrap().alpha) < 1e-12);
    }

    #[test]
    fn sl2_determinant() {
        let ctx = QContext::new(2, 4).unwrap();
        let s = quantum_determinant(&ctx);
        // ψ_1⊗ψ_2 − qψ_2⊗ψ_1
        let mut e = CMat::zeros(4, 1);
        e[(1, 0)] = ONE;
        e[(2, 0)] = -ctx.q();
        assert!(diff_abs(&s, &e) < 1e-15);
        let c = contraction_left(&ctx, 1).unwrap();
        assert!(diff_abs(&c, &(-eye(2))) < 1e-12);
    }

    #[test]
    fn conjugate_constant_sl3() {
        let ctx = QContext::new(3, 4).unwrap();
        assert!((conjugate_constant(&ctx, 1).unwrap() - q_int(&ctx, 2)).norm() < 1e-12);
    }

    #[test]
    fn unit_norm_at_level_three() {
        // [2]_q = 1 at ℓ = 3, so S is an isometry
        let ctx = QContext::new(2, 3).unwrap();
        let s = quantum_determinant(&ctx);
        let n = determinant_adjoint(&ctx, &s).unwrap();
        assert!((mm(&n, &s)[(0, 0)] - ONE).norm() < 1e-12);
    }

    #[test]
    fn suite_passes() {
        for (n, ell) in [(2, 3), (2, 4), (3, 4), (2, 5), (3, 5)] {
            let ctx = QContext::new(n, ell).unwrap();
            let mut o = LevelOptions::new(n + 1);
            o.ambient_max = n + 1;
            let lv = Levels::build(&ctx, &o).unwrap();
            for r in verify_hecke(&ctx, Some(&lv), 1e-9) {
                eprintln!("({n},{ell}) {:?} {} {:.2e} {}", r.status, r.id, r.max_residual, r.coverage);
                assert!(r.passed(), "({n},{ell}) {r:?}");
            }
        }
    }
}
