//! The Hecke generator and R-matrix on V⊗V, their leg translates and chains, ribbon
//! Θ scalars, the unitarized coboundary R̄ on blocks and full powers, and σ_n.

use std::collections::BTreeMap;

use crate::error::{FusionError, Result};
use crate::linalg::{self, diff_abs, eye, kron, max_abs, mm, CMat, LegTensor, C64, ONE, ZERO};
use crate::scalars::{q_power, HalfExponent, QContext, QExponent};
use crate::uqrep::WeylDecomposition;
use crate::weights::{casimir_exp, classical_power_multiplicities, classical_tensor, Weight};

/// A braid word: k > 0 stands for σ_k, k < 0 for σ_k^{-1}, with 1 ≤ |k| ≤ n−1.
pub type BraidWord = Vec<i32>;

/// g on V⊗V: gψ_i⊗ψ_i = qψ_i⊗ψ_i, gψ_i⊗ψ_j = ψ_j⊗ψ_i for i > j and
/// gψ_i⊗ψ_j = ψ_j⊗ψ_i + (q − q^{-1})ψ_i⊗ψ_j for i < j.
pub fn hecke_generator(ctx: &QContext) -> CMat {
    let n = ctx.n;
    let q = ctx.q();
    let mut g = CMat::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            let col = i * n + j;
            if i == j {
                g[(col, col)] = q;
            } else {
                g[(j * n + i, col)] = ONE;
                if i < j {
                    g[(col, col)] += q - q.inv();
                }
            }
        }
    }
    g
}

/// The flip x⊗y ↦ y⊗x on C^d⊗C^d.
pub fn flip(d: usize) -> CMat {
    let mut s = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            s[(j * d + i, i * d + j)] = ONE;
        }
    }
    s
}

/// R = q^{-1/N}·flip·g on V⊗V.
pub fn r_matrix(ctx: &QContext) -> CMat {
    mm(&flip(ctx.n), &hecke_generator(ctx)) * q_power(ctx, ctx.exp(-2))
}

/// Dense operator on (C^d)^{⊗n} acting by a two-leg operator on legs (i, j) in that order.
pub fn leg_op(d: usize, n: usize, op: &CMat, i: usize, j: usize) -> CMat {
    LegTensor::identity(vec![d; n]).apply_pair(i, j, op).into_matrix()
}

/// Permutation matrix reversing the order of n legs of dimension d.
pub fn reversal_permutation(d: usize, n: usize) -> CMat {
    let perm: Vec<usize> = (0..n).rev().collect();
    LegTensor::identity(vec![d; n]).permute(&perm).into_matrix()
}

/// The braid group operators on tensor powers of V.
#[derive(Clone, Debug)]
pub struct BraidOperators {
    pub n: usize,
    pub g: CMat,
    pub g_inv: CMat,
    pub r: CMat,
    pub r_inv: CMat,
    /// ε = Σ∘R = q^{-1/N} g, the braiding V⊗V → V⊗V.
    pub eps: CMat,
    pub eps_inv: CMat,
}

impl BraidOperators {
    pub fn new(ctx: &QContext) -> Self {
        let g = hecke_generator(ctx);
        let q = ctx.q();
        // (g − q)(g + q^{-1}) = 0 gives g^{-1} = g − (q − q^{-1})
        let g_inv = &g - eye(ctx.n * ctx.n) * (q - q.inv());
        let r = r_matrix(ctx);
        let r_inv = linalg::inverse(&r).expect("R is invertible");
        let s = q_power(ctx, ctx.exp(-2));
        let eps = &g * s;
        let eps_inv = &g_inv * s.inv();
        BraidOperators { n: ctx.n, g, g_inv, r, r_inv, eps, eps_inv }
    }

    /// Dense g_i on V^{⊗n}, acting on legs i−1, i (1-based i as in a braid word).
    pub fn g_translate(&self, i: usize, n: usize) -> CMat {
        let d = self.n;
        kron(&kron(&eye(d.pow(i as u32 - 1)), &self.g), &eye(d.pow((n - i - 1) as u32)))
    }

    /// Apply ε(b) for a braid word to the leading legs `offset..` of a leg tensor.
    pub fn apply_word(&self, t: &LegTensor, word: &[i32], offset: usize) -> LegTensor {
        let mut acc = t.clone();
        // rightmost letter acts first
        for &k in word.iter().rev() {
            let op = if k > 0 { &self.eps } else { &self.eps_inv };
            let leg = offset + k.unsigned_abs() as usize - 1;
            acc = acc.apply(leg, 2, op, &[self.n, self.n]);
        }
        acc
    }

    /// Dense ε(b) on V^{⊗n}.
    pub fn word_matrix(&self, word: &[i32], n: usize) -> CMat {
        self.apply_word(&LegTensor::identity(vec![self.n; n]), word, 0).into_matrix()
    }
}

/// (Δ^{(n-1)}⊗1)(R) = R_{1,n+1}R_{2,n+1}⋯R_{n,n+1} on V^{⊗(n+1)}.
pub fn r_chain(ctx: &QContext, n: usize) -> CMat {
    let r = r_matrix(ctx);
    let t = LegTensor::identity(vec![ctx.n; n + 1]);
    apply_r_chain(&t, &r, 0, n, n).into_matrix()
}

/// Apply R_{a,t}R_{a+1,t}⋯R_{b−1,t} (rightmost first) to a leg tensor.
pub fn apply_r_chain(t: &LegTensor, r: &CMat, a: usize, b: usize, target: usize) -> LegTensor {
    let mut acc = t.clone();
    for i in (a..b).rev() {
        acc = acc.apply_pair(i, target, r);
    }
    acc
}

/// Exponent (c(λ) + c(κ) − c(μ))/2 of the Θ scalar on the μ-summand of V_λ⊗V.
pub fn theta_exponent(ctx: &QContext, lambda: &Weight, mu: &Weight) -> HalfExponent {
    let kappa = Weight::kappa(ctx.n);
    pair_theta_exponent(ctx, lambda, &kappa, mu)
}

/// Exponent (c(λ) + c(μ) − c(ν))/2 of Θ on the ν-summand of V_λ⊗V_μ.
pub fn pair_theta_exponent(ctx: &QContext, lambda: &Weight, mu: &Weight, nu: &Weight) -> HalfExponent {
    (casimir_exp(ctx, lambda) + casimir_exp(ctx, mu) - casimir_exp(ctx, nu)).half()
}

/// Θ scalar q^{(c(λ)+c(κ)−c(μ))/2}.
pub fn theta_block_scalar(ctx: &QContext, lambda: &Weight, mu: &Weight) -> C64 {
    theta_exponent(ctx, lambda, mu).eval(ctx)
}

/// Θ on V_λ⊗V as Σ_μ θ(λ, μ) P_μ over the isotypic idempotents of a decomposition.
pub fn theta_on_block(ctx: &QContext, lambda: &Weight, decomp: &WeylDecomposition) -> CMat {
    let d = decomp.d.nrows();
    decomp
        .isotypic_projections()
        .iter()
        .fold(CMat::zeros(d, d), |acc, (mu, p)| acc + p * theta_block_scalar(ctx, lambda, mu))
}

/// R̄ = R_{λ,V}Θ on V_λ⊗V, given R_{λ,V} in the block basis.
pub fn rbar_on_block(ctx: &QContext, lambda: &Weight, r_block: &CMat, decomp: &WeylDecomposition) -> CMat {
    mm(r_block, &theta_on_block(ctx, lambda, decomp))
}

/// Derivatives f^{(t)}(a), t < m, of the branch of a^{-1/2} with f(a) = value.
fn inv_sqrt_derivatives(a: C64, value: C64, m: usize) -> Vec<C64> {
    let mut out = vec![value];
    let mut coef = 1.0;
    for t in 1..m {
        coef *= -0.5 - (t - 1) as f64;
        out.push(value * coef * a.powi(-(t as i32)));
    }
    out
}

/// Max multiplicity tried when annihilating a generalized eigenspace.
const MAX_JORDAN: usize = 4;
const ANNIHILATION_THRESHOLD: f64 = 1e-6;

fn jordan_multiplicity(nodes: &[C64], x: &CMat, what: &str) -> Result<usize> {
    linalg::annihilating_multiplicity(nodes, x, ANNIHILATION_THRESHOLD, MAX_JORDAN)
        .ok_or_else(|| FusionError::Numerical(format!("{what}: spectrum not covered by the candidate nodes")))
}

/// Branch table: eigenvalue exponent a (mod 2ℓ) ↦ the set of square-root exponents s (mod 2ℓ).
type BranchTable = BTreeMap<QExponent, Vec<HalfExponent>>;

fn insert_branch(table: &mut BranchTable, ctx: &QContext, s: HalfExponent) {
    // a = −2s as an exponent over 2N
    let a = QExponent { num: -s.num, den: s.den / 2 }.modulo(ctx.ell);
    let s = s.modulo(ctx.ell);
    let e = table.entry(a).or_default();
    if !e.contains(&s) {
        e.push(s);
    }
}

fn check_collisions(table: &BranchTable, n: usize) -> Result<()> {
    for (a, ss) in table {
        if ss.len() > 1 {
            return Err(FusionError::BranchCollision {
                n,
                detail: format!("eigenvalue q^({}/{}) has square-root branches {:?}", a.num, a.den, ss),
            });
        }
    }
    Ok(())
}

/// f(A) for the branch of A^{-1/2} prescribed by a collision-free branch table.
fn branch_inverse_sqrt(ctx: &QContext, a: &CMat, table: &BranchTable, m: usize) -> CMat {
    let mut nodes = Vec::new();
    let mut vals = Vec::new();
    for (e, ss) in table {
        let z = q_power(ctx, *e);
        nodes.push(z);
        vals.push(inv_sqrt_derivatives(z, ss[0].eval(ctx), m));
    }
    linalg::hermite_eval(&nodes, &vals, a)
}

/// Θ = A^{-1/2} for the compressed operator A of R_21R on V_λ⊗V_μ, with the branch
/// q^{(c(λ)+c(μ)−c(ν))/2} on each classical summand ν.
pub fn theta_for_pair(ctx: &QContext, lambda: &Weight, mu: &Weight, a: &CMat) -> Result<CMat> {
    let mut table = BranchTable::new();
    for nu in classical_tensor(lambda, mu).keys() {
        insert_branch(&mut table, ctx, pair_theta_exponent(ctx, lambda, mu, nu));
    }
    check_collisions(&table, (lambda.deg() + mu.deg()) as usize)?;
    let nodes: Vec<C64> = table.keys().map(|e| q_power(ctx, *e)).collect();
    let m = jordan_multiplicity(&nodes, a, "Θ for a pair of blocks")?;
    Ok(branch_inverse_sqrt(ctx, a, &table, m))
}

/// R̄^{(n)} on V^{⊗n}, built as R̄·(Δ⊗1)(R̄)⋯(Δ^{(n−2)}⊗1)(R̄) with each Θ factor taken as
/// a branch of (Δ^{(m−1)}⊗1)(R_21R)^{-1/2}, resolved jointly with the ribbon element of V^{⊗m}.
pub fn rbar_full(ctx: &QContext, n: usize) -> Result<CMat> {
    let d = ctx.n;
    let r = r_matrix(ctx);
    let kappa = Weight::kappa(d);
    let c_kappa = casimir_exp(ctx, &kappa);
    let vk = q_power(ctx, -c_kappa);
    let mut cur = eye(d);
    // v acts on V^{⊗m} with eigenvalue q^{-c(λ)} on the λ-isotypic part
    let mut v = eye(d) * vk;
    for m in 1..n {
        let legs = vec![d; m + 1];
        let rch = apply_r_chain(&LegTensor::identity(legs.clone()), &r, 0, m, m).into_matrix();
        let mut t = LegTensor::identity(legs);
        for i in 0..m {
            t = t.apply_pair(m, i, &r);
        }
        let r21ch = t.into_matrix();
        let a = mm(&r21ch, &rch);
        let c = kron(&v, &eye(d));
        // group the summands by the ribbon eigenvalue of their V^{⊗m} source
        let mut groups: BTreeMap<QExponent, BranchTable> = BTreeMap::new();
        for lam in classical_power_multiplicities(&Weight::zero(d), m).keys() {
            let key = casimir_exp(ctx, lam).modulo(ctx.ell);
            let table = groups.entry(key).or_default();
            let mut succ = lam.to_zn();
            for i in 0..d {
                succ[i] += 1;
                if crate::weights::is_dominant_zn(&succ) {
                    insert_branch(table, ctx, theta_exponent(ctx, lam, &Weight::from_zn(&succ)));
                }
                succ[i] -= 1;
            }
        }
        for table in groups.values() {
            check_collisions(table, m + 1)?;
        }
        let c_nodes: Vec<C64> = groups.keys().map(|e| q_power(ctx, -*e)).collect();
        let mut a_nodes: Vec<C64> = groups.values().flat_map(|t| t.keys().map(|e| q_power(ctx, *e))).collect();
        a_nodes.sort_by(|x, y| x.arg().partial_cmp(&y.arg()).unwrap());
        a_nodes.dedup_by(|x, y| (*x - *y).norm() < 1e-9);
        let mc = jordan_multiplicity(&c_nodes, &c, "ribbon element")?;
        let ma = jordan_multiplicity(&a_nodes, &a, "R_21R chain")?;
        let mult = mc.max(ma);
        let dim = d.pow(m as u32 + 1);
        let mut theta = CMat::zeros(dim, dim);
        for (j, table) in groups.values().enumerate() {
            let vals: Vec<Vec<C64>> = (0..c_nodes.len())
                .map(|k| {
                    let mut row = vec![ZERO; mult];
                    if k == j {
                        row[0] = ONE;
                    }
                    row
                })
                .collect();
            let ej = linalg::hermite_eval(&c_nodes, &vals, &c);
            theta += mm(&ej, &branch_inverse_sqrt(ctx, &a, table, mult));
        }
        let res = diff_abs(&mm(&mm(&theta, &theta), &a), &eye(dim));
        if res > 1e-6 {
            return Err(FusionError::Numerical(format!("Θ² R_21R deviates from 1 by {res:e} at power {}", m + 1)));
        }
        cur = mm(&mm(&kron(&cur, &eye(d)), &rch), &theta);
        v = mm(&kron(&v, &(eye(d) * vk)), &linalg::inverse(&a)?);
    }
    Ok(cur)
}

/// σ_n = Σ_n R̄^{(n)} with Σ_n the leg-reversal permutation.
pub fn coboundary_sigma(ctx: &QContext, n: usize) -> Result<CMat> {
    if n <= 1 {
        return Ok(eye(ctx.n.pow(n as u32)));
    }
    Ok(mm(&reversal_permutation(ctx.n, n), &rbar_full(ctx, n)?))
}

/// Residual of the Yang–Baxter equation R_12R_13R_23 = R_23R_13R_12.
pub fn yang_baxter_residual(ctx: &QContext, r: &CMat) -> f64 {
    let d = ctx.n;
    let (r12, r13, r23) = (leg_op(d, 3, r, 0, 1), leg_op(d, 3, r, 0, 2), leg_op(d, 3, r, 1, 2));
    diff_abs(&linalg::mm_chain(&[&r12, &r13, &r23]), &linalg::mm_chain(&[&r23, &r13, &r12]))
}

/// Max residual of (g_i − q)(g_i + q^{-1}) = 0 and the braid relations on V^{⊗n}.
pub fn hecke_relation_residual(ctx: &QContext, ops: &BraidOperators, n: usize) -> f64 {
    let q = ctx.q();
    let dim = ctx.n.pow(n as u32);
    let gs: Vec<CMat> = (1..n).map(|i| ops.g_translate(i, n)).collect();
    let mut worst = 0.0f64;
    for (i, gi) in gs.iter().enumerate() {
        let quad = mm(&(gi - eye(dim) * q), &(gi + eye(dim) * q.inv()));
        worst = worst.max(max_abs(&quad));
        if let Some(gj) = gs.get(i + 1) {
            worst = worst.max(diff_abs(&linalg::mm_chain(&[gi, gj, gi]), &linalg::mm_chain(&[gj, gi, gj])));
        }
        for gj in gs.iter().skip(i + 2) {
            worst = worst.max(diff_abs(&mm(gi, gj), &mm(gj, gi)));
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::uqrep::{intertwiner_residual, power_action, power_action_with, weyl_decompose, Coproduct};

    fn w(p: &[i64]) -> Weight {
        Weight::new(p.to_vec()).unwrap()
    }

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn hecke_generator_examples() {
        let ctx = QContext::new(2, 5).unwrap();
        let q = ctx.q();
        let g = hecke_generator(&ctx);
        assert!(close(g[(0, 0)], q));
        let quad = mm(&(&g - eye(4) * q), &(&g + eye(4) * q.inv()));
        assert!(max_abs(&quad) < 1e-12);
        assert!(close(g.trace(), q * 3.0 - q.inv()));
        let ctx3 = QContext::new(3, 5).unwrap();
        let q3 = ctx3.q();
        assert!(close(hecke_generator(&ctx3).trace(), q3 * 3.0 + (q3 - q3.inv()) * 3.0));
    }

    #[test]
    fn hecke_and_braid_relations() {
        for (n, ell) in [(2, 3), (2, 5), (3, 4)] {
            let ctx = QContext::new(n, ell).unwrap();
            let ops = BraidOperators::new(&ctx);
            assert!(hecke_relation_residual(&ctx, &ops, 4) < 1e-10);
            assert!(linalg::id_residual(&mm(&ops.g, &ops.g_inv)) < 1e-12);
        }
    }

    #[test]
    fn r_matrix_examples() {
        let ctx = QContext::new(2, 7).unwrap();
        let r = r_matrix(&ctx);
        assert!(close(r[(0, 0)], q_power(&ctx, ctx.exp(2))));
        assert!(yang_baxter_residual(&ctx, &r) < 1e-12);
        // R* = R_21^{-1}
        let sw = flip(2);
        let r21 = mm(&mm(&sw, &r), &sw);
        assert!(linalg::id_residual(&mm(&r.adjoint(), &r21)) < 1e-12);
        let ctx3 = QContext::new(3, 5).unwrap();
        assert!(yang_baxter_residual(&ctx3, &r_matrix(&ctx3)) < 1e-12);
    }

    #[test]
    fn r_intertwines_coproduct_and_opposite() {
        for (n, ell) in [(2, 5), (3, 4)] {
            let ctx = QContext::new(n, ell).unwrap();
            let s = power_action(&ctx, 2);
            let r = r_matrix(&ctx);
            let sw = flip(n);
            // R Δ(a) = Δ^op(a) R with Δ^op(a) = flip Δ(a) flip
            for x in s.gens.e.iter().chain(&s.gens.f).chain(&s.gens.k) {
                let op = mm(&mm(&sw, x), &sw);
                assert!(diff_abs(&mm(&r, x), &mm(&op, &r)) < 1e-12);
            }
        }
    }

    #[test]
    fn coproduct_convention_pins_hecke_commutation() {
        let ctx = QContext::new(3, 5).unwrap();
        let g = hecke_generator(&ctx);
        assert!(intertwiner_residual(&power_action(&ctx, 2).gens, &g) < 1e-12);
        let std = power_action_with(&ctx, 2, Coproduct::Standard);
        assert!(intertwiner_residual(&std.gens, &g) > 0.1);
    }

    #[test]
    fn hecke_spectral_decomposition() {
        for (n, ell) in [(2, 5), (3, 5)] {
            let ctx = QContext::new(n, ell).unwrap();
            let q = ctx.q();
            let dec = weyl_decompose(&ctx, &power_action(&ctx, 2)).unwrap();
            let mut top = Weight::kappa(n);
            top.parts[0] = 2;
            let sym = dec.isotypic_projection(&top).unwrap();
            let anti_w = Weight::fundamental(n, 2);
            let anti = dec.isotypic_projection(&anti_w).unwrap();
            let expect = &sym * q - &anti * q.inv();
            assert!(diff_abs(&hecke_generator(&ctx), &expect) < 1e-10);
        }
    }

    #[test]
    fn r_chain_examples() {
        let ctx = QContext::new(2, 5).unwrap();
        let r = r_matrix(&ctx);
        assert!(diff_abs(&r_chain(&ctx, 1), &r) < 1e-14);
        let expect = mm(&leg_op(2, 3, &r, 0, 2), &leg_op(2, 3, &r, 1, 2));
        assert!(diff_abs(&r_chain(&ctx, 2), &expect) < 1e-12);
        // Σ∘(Δ^{(n-1)}⊗1)(R) intertwines V^{⊗n}⊗V with V⊗V^{⊗n}
        let n = 3;
        let ch = r_chain(&ctx, n);
        let mut perm = vec![n];
        perm.extend(0..n);
        let cyc = LegTensor::identity(vec![2; n + 1]).permute(&perm).into_matrix();
        let big = power_action(&ctx, n + 1);
        let lhs = mm(&cyc, &ch);
        for x in big.gens.e.iter().chain(&big.gens.f).chain(&big.gens.k) {
            assert!(diff_abs(&mm(&lhs, x), &mm(x, &lhs)) < 1e-11);
        }
    }

    #[test]
    fn theta_scalar_examples() {
        let ctx = QContext::new(2, 5).unwrap();
        let q = ctx.q();
        assert!(close(theta_block_scalar(&ctx, &w(&[1]), &w(&[0])), q_power(&ctx, ctx.exp(6))));
        assert!(close(theta_block_scalar(&ctx, &w(&[1]), &w(&[2])), q_power(&ctx, ctx.exp(-2))));
        assert!(close(theta_block_scalar(&ctx, &w(&[0]), &w(&[1])), ONE));
        assert!(close(q_power(&ctx, ctx.exp(6)), q * q.sqrt()));
    }

    fn v_block(ctx: &QContext) -> (CMat, WeylDecomposition) {
        let dec = weyl_decompose(ctx, &power_action(ctx, 2)).unwrap();
        (rbar_on_block(ctx, &Weight::kappa(ctx.n), &r_matrix(ctx), &dec), dec)
    }

    #[test]
    fn rbar_on_vector_block() {
        let ctx = QContext::new(2, 5).unwrap();
        let q = ctx.q();
        let (rb, _) = v_block(&ctx);
        assert!(linalg::herm_residual(&rb) < 1e-12);
        let s = CMat::from_column_slice(4, 1, &[ZERO, ONE, -q, ZERO]);
        let st = CMat::from_column_slice(4, 1, &[ZERO, ONE, -q.inv(), ZERO]);
        assert!(diff_abs(&mm(&rb, &s), &(st * q)) < 1e-12);
        // R̄ = 1 on ℂ⊗V
        let triv = weyl_decompose(&ctx, &power_action(&ctx, 1)).unwrap();
        assert!(linalg::id_residual(&rbar_on_block(&ctx, &Weight::zero(2), &eye(2), &triv)) < 1e-14);
    }

    #[test]
    fn theta_commutes_with_flipped_r() {
        for (n, ell) in [(2, 5), (3, 4)] {
            let ctx = QContext::new(n, ell).unwrap();
            let dec = weyl_decompose(&ctx, &power_action(&ctx, 2)).unwrap();
            let th = theta_on_block(&ctx, &Weight::kappa(n), &dec);
            let sw = flip(n);
            let th21 = mm(&mm(&sw, &th), &sw);
            let r = r_matrix(&ctx);
            assert!(diff_abs(&mm(&th21, &r), &mm(&r, &th)) < 1e-12);
            // Θ² R_21 R = 1
            let r21 = mm(&mm(&sw, &r), &sw);
            assert!(linalg::id_residual(&linalg::mm_chain(&[&th, &th, &r21, &r])) < 1e-12);
        }
    }

    #[test]
    fn rbar_full_base_case_and_selfadjointness() {
        let ctx = QContext::new(2, 5).unwrap();
        let (rb, _) = v_block(&ctx);
        assert!(diff_abs(&rbar_full(&ctx, 2).unwrap(), &rb) < 1e-10);
        for n in 3..=4 {
            assert!(linalg::herm_residual(&rbar_full(&ctx, n).unwrap()) < 1e-9);
        }
        let ctx3 = QContext::new(3, 5).unwrap();
        assert!(linalg::herm_residual(&rbar_full(&ctx3, 3).unwrap()) < 1e-9);
    }

    #[test]
    fn sigma_examples() {
        let ctx = QContext::new(2, 5).unwrap();
        let q = ctx.q();
        assert!(linalg::id_residual(&coboundary_sigma(&ctx, 1).unwrap()) < 1e-15);
        let s2 = coboundary_sigma(&ctx, 2).unwrap();
        let two = q + q.inv();
        assert!(close(s2[(1, 1)], (q - q.inv()) / two));
        assert!(close(s2[(2, 1)], c(2.0, 0.0) / two));
        assert!(s2[(0, 1)].norm() < 1e-14 && s2[(3, 1)].norm() < 1e-14);
        for n in 2..=4 {
            let s = coboundary_sigma(&ctx, n).unwrap();
            assert!(linalg::id_residual(&mm(&s, &s)) < 1e-9, "σ_{n}² ≠ 1");
        }
    }

    #[test]
    fn branch_collisions_are_reported() {
        let ctx = QContext::new(2, 3).unwrap();
        assert!(matches!(rbar_full(&ctx, 3), Err(FusionError::BranchCollision { n: 3, .. })));
        let ctx = QContext::new(2, 4).unwrap();
        assert!(rbar_full(&ctx, 3).is_ok());
        assert!(matches!(rbar_full(&ctx, 4), Err(FusionError::BranchCollision { n: 4, .. })));
    }
}
