//! The quantum group action on V and its tensor powers, highest weight vectors,
//! complete-reducibility decompositions and isotypic projections.

use std::collections::BTreeMap;

use crate::error::{FusionError, Result};
use crate::linalg::{self, c, diff_abs, eye, kron, max_abs, mm, CMat, C64, ONE};
use crate::scalars::{q_power, QContext};
use crate::weights::{self, dim_classical, is_dominant_zn, two_rho_zn, Weight};

/// Matrices of E_i, F_i, K_i, K_i^{-1} for i = 1..N-1.
#[derive(Clone, Debug)]
pub struct GeneratorSet {
    pub e: Vec<CMat>,
    pub f: Vec<CMat>,
    pub k: Vec<CMat>,
    pub kinv: Vec<CMat>,
}

impl GeneratorSet {
    pub fn dim(&self) -> usize {
        self.k[0].nrows()
    }

    pub fn rank(&self) -> usize {
        self.k.len()
    }

    /// Conjugate every generator by a change of basis: x ↦ left·x·right.
    pub fn compress(&self, left: &CMat, right: &CMat) -> GeneratorSet {
        let f = |xs: &Vec<CMat>| xs.iter().map(|x| mm(&mm(left, x), right)).collect();
        GeneratorSet { e: f(&self.e), f: f(&self.f), k: f(&self.k), kinv: f(&self.kinv) }
    }

    /// Max residual of the defining relations: K K^{-1} = 1, K_i E_j K_i^{-1} = q^{a_ij} E_j,
    /// K_i F_j K_i^{-1} = q^{-a_ij} F_j and [E_i, F_j] = δ_ij (K_i − K_i^{-1})/(q − q^{-1}).
    pub fn relation_residual(&self, ctx: &QContext) -> f64 {
        let r = self.rank();
        let q = ctx.q();
        let mut worst = 0.0f64;
        for i in 0..r {
            worst = worst.max(linalg::id_residual(&mm(&self.k[i], &self.kinv[i])));
            for j in 0..r {
                let a = cartan(i, j);
                let qa = q.powi(a as i32);
                let ke = mm(&mm(&self.k[i], &self.e[j]), &self.kinv[i]);
                worst = worst.max(diff_abs(&ke, &(&self.e[j] * qa)));
                let kf = mm(&mm(&self.k[i], &self.f[j]), &self.kinv[i]);
                worst = worst.max(diff_abs(&kf, &(&self.f[j] * qa.inv())));
                let comm = mm(&self.e[i], &self.f[j]) - mm(&self.f[j], &self.e[i]);
                let expect = if i == j {
                    (&self.k[i] - &self.kinv[i]) / (q - q.inv())
                } else {
                    CMat::zeros(self.dim(), self.dim())
                };
                worst = worst.max(diff_abs(&comm, &expect));
            }
        }
        worst
    }

    /// K_{2ρ} = Π K_i^{i(N−i)}.
    pub fn k_two_rho(&self) -> CMat {
        let n = self.rank() + 1;
        let mut acc = eye(self.dim());
        for (i, k) in self.k.iter().enumerate() {
            for _ in 0..(i + 1) * (n - i - 1) {
                acc = mm(&acc, k);
            }
        }
        acc
    }

    /// K_{2ρ}^{-1}.
    pub fn k_two_rho_inv(&self) -> CMat {
        let n = self.rank() + 1;
        let mut acc = eye(self.dim());
        for (i, k) in self.kinv.iter().enumerate() {
            for _ in 0..(i + 1) * (n - i - 1) {
                acc = mm(&acc, k);
            }
        }
        acc
    }
}

fn cartan(i: usize, j: usize) -> i64 {
    if i == j {
        2
    } else if i.abs_diff(j) == 1 {
        -1
    } else {
        0
    }
}

/// Coproduct conventions for tensor products of modules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coproduct {
    /// Δ(E) = E⊗1 + K⊗E, Δ(F) = F⊗K^{-1} + 1⊗F (used throughout).
    Mirrored,
    /// Δ(E) = E⊗K + 1⊗E, Δ(F) = F⊗1 + K^{-1}⊗F.
    Standard,
}

/// A module with a weight basis: generators plus the Z^N weight of every basis vector.
#[derive(Clone, Debug)]
pub struct ModuleSpace {
    pub gens: GeneratorSet,
    pub weights: Vec<Vec<i64>>,
}

impl ModuleSpace {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }
}

/// Diagonal K_i, K_i^{-1} from a list of Z^N weights.
fn k_from_weights(ctx: &QContext, wts: &[Vec<i64>]) -> (Vec<CMat>, Vec<CMat>) {
    let q = ctx.q();
    let mut ks = Vec::new();
    let mut kis = Vec::new();
    for i in 0..ctx.n - 1 {
        let d: Vec<C64> = wts.iter().map(|w| q.powi((w[i] - w[i + 1]) as i32)).collect();
        ks.push(CMat::from_diagonal(&nalgebra::DVector::from_vec(d.clone())));
        kis.push(CMat::from_diagonal(&nalgebra::DVector::from_vec(d.iter().map(|z| z.inv()).collect())));
    }
    (ks, kis)
}

/// The vector representation V with basis ψ_1..ψ_N.
pub fn vector_rep(ctx: &QContext) -> ModuleSpace {
    let n = ctx.n;
    let wts: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let (k, kinv) = k_from_weights(ctx, &wts);
    let mut e = Vec::new();
    let mut f = Vec::new();
    for i in 0..n - 1 {
        let mut ei = CMat::zeros(n, n);
        ei[(i, i + 1)] = ONE;
        let mut fi = CMat::zeros(n, n);
        fi[(i + 1, i)] = ONE;
        e.push(ei);
        f.push(fi);
    }
    ModuleSpace { gens: GeneratorSet { e, f, k, kinv }, weights: wts }
}

/// The one-dimensional trivial module.
pub fn trivial_module(ctx: &QContext) -> ModuleSpace {
    let z = CMat::zeros(1, 1);
    let r = ctx.n - 1;
    ModuleSpace {
        gens: GeneratorSet { e: vec![z.clone(); r], f: vec![z; r], k: vec![eye(1); r], kinv: vec![eye(1); r] },
        weights: vec![vec![0; ctx.n]],
    }
}

/// Tensor product module under the chosen coproduct.
pub fn tensor(a: &ModuleSpace, b: &ModuleSpace, conv: Coproduct) -> ModuleSpace {
    let (ga, gb) = (&a.gens, &b.gens);
    let (ia, ib) = (eye(ga.dim()), eye(gb.dim()));
    let r = ga.rank();
    let (mut e, mut f, mut k, mut kinv) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..r {
        match conv {
            Coproduct::Mirrored => {
                e.push(kron(&ga.e[i], &ib) + kron(&ga.k[i], &gb.e[i]));
                f.push(kron(&ga.f[i], &gb.kinv[i]) + kron(&ia, &gb.f[i]));
            }
            Coproduct::Standard => {
                e.push(kron(&ga.e[i], &gb.k[i]) + kron(&ia, &gb.e[i]));
                f.push(kron(&ga.f[i], &ib) + kron(&ga.kinv[i], &gb.f[i]));
            }
        }
        k.push(kron(&ga.k[i], &gb.k[i]));
        kinv.push(kron(&ga.kinv[i], &gb.kinv[i]));
    }
    let weights = a
        .weights
        .iter()
        .flat_map(|wa| b.weights.iter().map(move |wb| wa.iter().zip(wb).map(|(x, y)| x + y).collect()))
        .collect();
    ModuleSpace { gens: GeneratorSet { e, f, k, kinv }, weights }
}

/// Δ^{(n-1)} images of the generators on V^{⊗n}.
pub fn power_action(ctx: &QContext, n: usize) -> ModuleSpace {
    power_action_with(ctx, n, Coproduct::Mirrored)
}

pub fn power_action_with(ctx: &QContext, n: usize, conv: Coproduct) -> ModuleSpace {
    let v = vector_rep(ctx);
    let mut acc = trivial_module(ctx);
    for _ in 0..n {
        acc = tensor(&acc, &v, conv);
    }
    acc
}

/// Column selector onto the basis indices carrying weight w.
fn weight_indices(space: &ModuleSpace, w: &[i64]) -> Vec<usize> {
    (0..space.dim()).filter(|&k| space.weights[k] == w).collect()
}

fn distinct_weights_desc(space: &ModuleSpace) -> Vec<Vec<i64>> {
    let mut ws: Vec<Vec<i64>> = space.weights.clone();
    ws.sort();
    ws.dedup();
    ws.reverse();
    ws
}

/// A highest weight vector found in a module.
#[derive(Clone, Debug)]
pub struct HighestWeightVector {
    pub weight: Weight,
    /// Weight in Z^N coordinates, as carried by the ambient basis.
    pub zn: Vec<i64>,
    pub vector: CMat,
}

/// Basis of ∩ ker E_i organized by weight, optionally inside the span of `block`.
pub fn highest_weight_vectors(
    ctx: &QContext,
    space: &ModuleSpace,
    block: Option<&CMat>,
) -> Result<Vec<HighestWeightVector>> {
    let mut out = Vec::new();
    let d = space.dim();
    for w in distinct_weights_desc(space) {
        if !is_dominant_zn(&w) {
            continue;
        }
        let idx = weight_indices(space, &w);
        let found: CMat = match block {
            None => {
                let mut stacked = CMat::zeros((ctx.n - 1) * d, idx.len());
                for (i, e) in space.gens.e.iter().enumerate() {
                    for (jj, &j) in idx.iter().enumerate() {
                        for r in 0..d {
                            stacked[(i * d + r, jj)] = e[(r, j)];
                        }
                    }
                }
                let ker = linalg::kernel(&stacked, ctx.tol)?;
                let mut full = CMat::zeros(d, ker.ncols());
                for (jj, &j) in idx.iter().enumerate() {
                    for t in 0..ker.ncols() {
                        full[(j, t)] = ker[(jj, t)];
                    }
                }
                full
            }
            Some(b) => {
                // coefficients c with E_i B c = 0 and B c supported on the weight-w indices
                let k = b.ncols();
                let other: Vec<usize> = (0..d).filter(|r| !idx.contains(r)).collect();
                let mut stacked = CMat::zeros((ctx.n - 1) * d + other.len(), k);
                for (i, e) in space.gens.e.iter().enumerate() {
                    let eb = mm(e, b);
                    stacked.view_mut((i * d, 0), (d, k)).copy_from(&eb);
                }
                for (t, &r) in other.iter().enumerate() {
                    for j in 0..k {
                        stacked[((ctx.n - 1) * d + t, j)] = b[(r, j)];
                    }
                }
                let ker = linalg::kernel(&stacked, ctx.tol)?;
                let v = mm(b, &ker);
                linalg::range_basis(&v, ctx.tol)?
            }
        };
        for t in 0..found.ncols() {
            let col = found.column(t).into_owned();
            let nrm = col.norm();
            let v = CMat::from_column_slice(d, 1, (col / C64::new(nrm, 0.0)).as_slice());
            out.push(HighestWeightVector { weight: Weight::from_zn(&w), zn: w.clone(), vector: v });
        }
    }
    Ok(out)
}

/// One cyclic submodule: its basis (F-word images of the highest weight vector).
#[derive(Clone, Debug)]
pub struct WeylPiece {
    pub weight: Weight,
    pub basis: CMat,
    pub words: Vec<Vec<usize>>,
    pub hw: CMat,
}

/// The decomposition of a completely reducible module into highest weight submodules.
#[derive(Clone, Debug)]
pub struct WeylDecomposition {
    pub pieces: Vec<WeylPiece>,
    /// Columns of all piece bases side by side.
    pub d: CMat,
    pub d_inv: CMat,
}

/// Submodule generated by v under F-words in breadth-first order.
pub fn generate_submodule(ctx: &QContext, space: &ModuleSpace, v: &CMat) -> (CMat, Vec<Vec<usize>>) {
    let d = space.dim();
    let mut basis: Vec<CMat> = vec![v.clone()];
    let mut words: Vec<Vec<usize>> = vec![Vec::new()];
    // orthonormal shadow basis for the membership test
    let mut q: Vec<CMat> = vec![v / C64::new(v.norm(), 0.0)];
    let mut frontier: Vec<(Vec<usize>, CMat)> = vec![(Vec::new(), v.clone())];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (word, x) in &frontier {
            for (i, f) in space.gens.f.iter().enumerate() {
                let y = mm(f, x);
                let ny = y.norm();
                if ny <= 1e3 * ctx.tol {
                    continue;
                }
                let mut r = y.clone();
                for qq in &q {
                    let p = (qq.adjoint() * &r)[(0, 0)];
                    r -= qq * p;
                }
                let nr = r.norm();
                if nr > 1e3 * ctx.tol * ny.max(1.0) {
                    q.push(r / C64::new(nr, 0.0));
                    let mut w = word.clone();
                    w.push(i);
                    basis.push(y.clone());
                    words.push(w.clone());
                    next.push((w, y));
                }
            }
        }
        frontier = next;
    }
    let mut m = CMat::zeros(d, basis.len());
    for (j, b) in basis.iter().enumerate() {
        m.set_column(j, &b.column(0));
    }
    (m, words)
}

/// Decompose a completely reducible weight-graded module.
pub fn weyl_decompose(ctx: &QContext, space: &ModuleSpace) -> Result<WeylDecomposition> {
    let hws = highest_weight_vectors(ctx, space, None)?;
    let mut pieces = Vec::new();
    for hw in hws {
        let (basis, words) = generate_submodule(ctx, space, &hw.vector);
        let expect = dim_classical(&hw.weight);
        if basis.ncols() != expect {
            return Err(FusionError::NotCompletelyReducible(format!(
                "submodule of highest weight {} has dimension {} instead of {expect}",
                hw.weight,
                basis.ncols()
            )));
        }
        pieces.push(WeylPiece { weight: hw.weight, basis, words, hw: hw.vector });
    }
    pieces.sort_by(|a, b| a.weight.cmp(&b.weight));
    let total: usize = pieces.iter().map(|p| p.basis.ncols()).sum();
    if total != space.dim() {
        return Err(FusionError::NotCompletelyReducible(format!(
            "submodules span {total} of {} dimensions",
            space.dim()
        )));
    }
    let mut d = CMat::zeros(space.dim(), total);
    let mut o = 0;
    for p in &pieces {
        d.view_mut((0, o), p.basis.shape()).copy_from(&p.basis);
        o += p.basis.ncols();
    }
    let d_inv = linalg::inverse(&d).map_err(|_| FusionError::NotCompletelyReducible("submodules are not independent".into()))?;
    if linalg::id_residual(&mm(&d_inv, &d)) > 1e-6 {
        return Err(FusionError::NotCompletelyReducible("submodule sum is ill-conditioned".into()));
    }
    Ok(WeylDecomposition { pieces, d, d_inv })
}

impl WeylDecomposition {
    pub fn weights(&self) -> Vec<Weight> {
        let mut ws: Vec<Weight> = self.pieces.iter().map(|p| p.weight.clone()).collect();
        ws.dedup();
        ws
    }

    /// Idempotent onto the γ-isotypic part along the other summands.
    pub fn isotypic_projection(&self, gamma: &Weight) -> Result<CMat> {
        let n = self.d.nrows();
        let mut acc = CMat::zeros(n, n);
        let mut found = false;
        let mut o = 0;
        for p in &self.pieces {
            let k = p.basis.ncols();
            if &p.weight == gamma {
                found = true;
                acc += mm(&self.d.columns(o, k).into_owned(), &self.d_inv.rows(o, k).into_owned());
            }
            o += k;
        }
        if !found {
            return Err(FusionError::WeightAbsent(gamma.parts.clone()));
        }
        Ok(acc)
    }

    pub fn isotypic_projections(&self) -> BTreeMap<Weight, CMat> {
        self.weights().into_iter().map(|w| (w.clone(), self.isotypic_projection(&w).unwrap())).collect()
    }
}

/// Isotypic projection p_{λ,γ} of a decomposition.
pub fn isotypic_projection(decomp: &WeylDecomposition, gamma: &Weight) -> Result<CMat> {
    decomp.isotypic_projection(gamma)
}

/// Restrict a module's action to an invariant subspace spanned by the columns of `basis`.
pub fn restrict(ctx: &QContext, space: &ModuleSpace, basis: &CMat, weights: Vec<Vec<i64>>) -> ModuleSpace {
    let left = linalg::pinv(basis, ctx.tol);
    ModuleSpace { gens: space.gens.compress(&left, basis), weights }
}

/// An irreducible module of highest weight λ, cut out of V^{⊗deg λ}.
pub fn weyl_module(ctx: &QContext, lambda: &Weight) -> Result<ModuleSpace> {
    let n = lambda.deg() as usize;
    if n == 0 {
        return Ok(trivial_module(ctx));
    }
    let space = power_action(ctx, n);
    let zn = lambda.to_zn();
    let hws = highest_weight_vectors(ctx, &space, None)?;
    let hw = hws.into_iter().find(|h| h.zn == zn).ok_or_else(|| FusionError::WeightAbsent(lambda.parts.clone()))?;
    let (basis, words) = generate_submodule(ctx, &space, &hw.vector);
    let weights = words
        .iter()
        .map(|w| {
            let mut v = zn.clone();
            for &i in w {
                v[i] -= 1;
                v[i + 1] += 1;
            }
            v
        })
        .collect();
    Ok(restrict(ctx, &space, &basis, weights))
}

/// Trace of K_{2ρ} on V_λ.
pub fn quantum_dimension(ctx: &QContext, lambda: &Weight) -> Result<C64> {
    let m = weyl_module(ctx, lambda)?;
    Ok(m.gens.k_two_rho().trace())
}

/// Trace of K_{2ρ} from the classical weight multiset of V_λ.
pub fn quantum_dimension_from_weights(ctx: &QContext, lambda: &Weight) -> C64 {
    let two_rho = two_rho_zn(ctx.n);
    weights::weight_multiset(lambda)
        .iter()
        .map(|(w, &m)| q_power(ctx, weights::pairing_zn(ctx, &two_rho, w)) * c(m as f64, 0.0))
        .sum()
}

/// Commutator residual of an operator with every generator.
pub fn intertwiner_residual(gens: &GeneratorSet, x: &CMat) -> f64 {
    gens.e
        .iter()
        .chain(&gens.f)
        .chain(&gens.k)
        .map(|g| diff_abs(&mm(g, x), &mm(x, g)))
        .fold(0.0, f64::max)
}

/// Max entry of a matrix relative to max(1, ‖·‖).
pub fn scaled_residual(x: &CMat, scale: f64) -> f64 {
    max_abs(x) / scale.max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(p: &[i64]) -> Weight {
        Weight::new(p.to_vec()).unwrap()
    }

    #[test]
    fn vector_rep_examples() {
        let ctx = QContext::new(2, 5).unwrap();
        let v = vector_rep(&ctx);
        let q = ctx.q();
        assert!((v.gens.k[0][(0, 0)] - q).norm() < 1e-14);
        assert!((v.gens.k[0][(1, 1)] - q.inv()).norm() < 1e-14);
        assert_eq!(v.gens.e[0][(0, 1)], ONE);
        assert_eq!(v.gens.e[0][(1, 0)], linalg::ZERO);
        assert!(v.gens.relation_residual(&ctx) < 1e-12);
        let ctx3 = QContext::new(3, 5).unwrap();
        assert_eq!(vector_rep(&ctx3).weights[1], vec![0, 1, 0]);
    }

    #[test]
    fn power_action_relations() {
        for (n, ell) in [(2, 3), (2, 5), (3, 4)] {
            let ctx = QContext::new(n, ell).unwrap();
            for p in 1..=3 {
                let s = power_action(&ctx, p);
                assert!(s.gens.relation_residual(&ctx) < 1e-10);
            }
        }
        let ctx = QContext::new(2, 4).unwrap();
        let s = power_action(&ctx, 2);
        let q = ctx.q();
        let diag: Vec<C64> = (0..4).map(|i| s.gens.k[0][(i, i)]).collect();
        let expect = [q * q, ONE, ONE, q.inv() * q.inv()];
        for (a, b) in diag.iter().zip(expect) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn highest_weights_of_v_tensor_v() {
        let ctx = QContext::new(2, 5).unwrap();
        let s = power_action(&ctx, 2);
        let hws = highest_weight_vectors(&ctx, &s, None).unwrap();
        let ws: Vec<Weight> = hws.iter().map(|h| h.weight.clone()).collect();
        assert_eq!(ws, vec![w(&[2]), w(&[0])]);
        let v = vector_rep(&ctx);
        let hv = highest_weight_vectors(&ctx, &v, None).unwrap();
        assert_eq!(hv.len(), 1);
        assert!((hv[0].vector[(0, 0)] - ONE).norm() < 1e-14);
    }

    #[test]
    fn decomposition_examples() {
        let ctx = QContext::new(2, 3).unwrap();
        let d = weyl_decompose(&ctx, &power_action(&ctx, 2)).unwrap();
        let dims: Vec<(Weight, usize)> = d.pieces.iter().map(|p| (p.weight.clone(), p.basis.ncols())).collect();
        assert_eq!(dims, vec![(w(&[0]), 1), (w(&[2]), 3)]);
        let ctx = QContext::new(3, 4).unwrap();
        let d = weyl_decompose(&ctx, &power_action(&ctx, 2)).unwrap();
        let dims: Vec<usize> = d.pieces.iter().map(|p| p.basis.ncols()).collect();
        assert_eq!(dims, vec![3, 6]);
        let ps = d.isotypic_projections();
        let sum = ps.values().fold(CMat::zeros(9, 9), |a, p| a + p);
        assert!(linalg::id_residual(&sum) < 1e-10);
        for (a, pa) in &ps {
            assert!(diff_abs(&mm(pa, pa), pa) < 1e-10);
            for (b, pb) in &ps {
                if a != b {
                    assert!(max_abs(&mm(pa, pb)) < 1e-10);
                }
            }
        }
        assert!(matches!(d.isotypic_projection(&w(&[0, 0])), Err(FusionError::WeightAbsent(_))));
    }

    #[test]
    fn quantum_dimensions() {
        let ctx = QContext::new(2, 3).unwrap();
        assert!((quantum_dimension(&ctx, &w(&[0])).unwrap() - ONE).norm() < 1e-12);
        let q = ctx.q();
        assert!((quantum_dimension(&ctx, &w(&[1])).unwrap() - (q + q.inv())).norm() < 1e-12);
        assert!(quantum_dimension(&ctx, &w(&[2])).unwrap().norm() < 1e-12);
        let ctx = QContext::new(3, 5).unwrap();
        for lam in [w(&[1, 0]), w(&[2, 1]), w(&[2, 2])] {
            let a = quantum_dimension(&ctx, &lam).unwrap();
            let b = quantum_dimension_from_weights(&ctx, &lam);
            assert!((a - b).norm() < 1e-10);
            assert!(a.re > 0.0 && a.im.abs() < 1e-10);
        }
    }
}
