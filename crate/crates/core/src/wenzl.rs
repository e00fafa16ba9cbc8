//! Inductive construction of the truncated levels p_nV^{⊗n}: block decompositions of
//! V_λ⊗V, Wenzl-orthonormal reference modules, the one-step maps between levels,
//! the compressed tensor product and braiding, τ_n and level verification.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::braiding::{self, BraidOperators};
use crate::error::{FusionError, Result};
use crate::linalg::{self, diff_abs, eye, kron, max_abs, mm, CMat, LegTensor, C64};
use crate::report::{timed, timed_result, CheckReport};
use crate::scalars::QContext;
use crate::uqrep::{self, tensor, vector_rep, Coproduct, GeneratorSet, ModuleSpace, WeylDecomposition};
use crate::weights::{self, dim_classical, fusion_step, in_open_alcove, Weight};

/// A stored irreducible V_μ in a Wenzl-orthonormal weight basis, with R_{μ,V} on V_μ⊗V.
#[derive(Clone, Debug)]
pub struct ReferenceModule {
    pub weight: Weight,
    pub space: ModuleSpace,
    pub r_v: CMat,
}

impl ReferenceModule {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
}

/// Decomposition of V_λ⊗V (reference basis ⊗ standard basis) into its summands.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub lambda: Weight,
    pub decomp: WeylDecomposition,
    /// The Wenzl form R_{λ,V}Θ on V_λ⊗V.
    pub form: CMat,
    pub kept: Vec<Weight>,
    pub negligible: Vec<Weight>,
    /// Isometric embeddings V_μ → V_λ⊗V of the kept summands.
    pub embeddings: BTreeMap<Weight, CMat>,
    /// Kept embeddings side by side, and their left inverse J†F.
    pub jk: CMat,
    pub kk: CMat,
    /// Min eigenvalue of the form on the range of the kept summands.
    pub positivity: f64,
}

/// One copy of an irreducible inside a level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockCopy {
    pub weight: Weight,
    pub parent: Option<usize>,
    pub offset: usize,
    pub dim: usize,
}

/// The truncated space p_nV^{⊗n} as a list of irreducible copies.
#[derive(Clone, Debug)]
pub struct TruncatedLevel {
    pub n: usize,
    pub copies: Vec<BlockCopy>,
    pub dim: usize,
}

impl TruncatedLevel {
    pub fn multiplicities(&self) -> BTreeMap<Weight, usize> {
        let mut m = BTreeMap::new();
        for c in &self.copies {
            *m.entry(c.weight.clone()).or_insert(0) += 1;
        }
        m
    }

    /// First copy of λ, if any.
    pub fn first_copy(&self, lambda: &Weight) -> Option<&BlockCopy> {
        self.copies.iter().find(|c| &c.weight == lambda)
    }
}

#[derive(Clone, Debug)]
pub struct LevelOptions {
    pub n_max: usize,
    /// Largest n for which the ambient maps B_n, L_n are materialized.
    pub ambient_max: usize,
    pub memory_budget_mb: usize,
    /// Seed for random unimodular phases on the identification unitaries.
    pub phase_seed: Option<u64>,
}

impl LevelOptions {
    pub fn new(n_max: usize) -> Self {
        LevelOptions { n_max, ambient_max: n_max, memory_budget_mb: 2048, phase_seed: None }
    }
}

type Cache = RwLock<HashMap<(usize, usize, i32), Arc<CMat>>>;

/// All levels up to n_max with their connecting maps.
#[derive(Debug)]
pub struct Levels {
    pub ctx: QContext,
    pub braid: BraidOperators,
    pub refs: BTreeMap<Weight, ReferenceModule>,
    pub blocks: BTreeMap<Weight, BlockDecomposition>,
    pub levels: Vec<TruncatedLevel>,
    /// Π1_n: level n ⊗ V → level n+1.
    pub pi1: Vec<CMat>,
    /// Emb1_n: level n+1 → level n ⊗ V.
    pub emb1: Vec<CMat>,
    /// Ambient embeddings B_n: level n → V^{⊗n} and projections L_n: V^{⊗n} → level n.
    ambient: Vec<(CMat, CMat)>,
    cache: Cache,
}

fn fix_phase(j: &mut CMat) {
    if j.ncols() == 0 {
        return;
    }
    let top = j.column(0).into_owned();
    let mx = top.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if let Some(z) = top.iter().find(|z| z.norm() > 1e-8 * mx) {
        let ph = z / z.norm();
        *j /= ph;
    }
}

fn max_scaled(x: &CMat) -> f64 {
    max_abs(x).max(1.0)
}

impl Levels {
    pub fn build(ctx: &QContext, opts: &LevelOptions) -> Result<Levels> {
        let n = ctx.n;
        let zero = Weight::zero(n);
        let triv = uqrep::trivial_module(ctx);
        let mut refs = BTreeMap::new();
        refs.insert(zero.clone(), ReferenceModule { weight: zero.clone(), space: triv, r_v: eye(n) });
        let mut lv = Levels {
            ctx: *ctx,
            braid: BraidOperators::new(ctx),
            refs,
            blocks: BTreeMap::new(),
            levels: vec![TruncatedLevel {
                n: 0,
                copies: vec![BlockCopy { weight: zero, parent: None, offset: 0, dim: 1 }],
                dim: 1,
            }],
            pi1: Vec::new(),
            emb1: Vec::new(),
            ambient: vec![(eye(1), eye(1))],
            cache: RwLock::new(HashMap::new()),
        };
        let mut rng = opts.phase_seed.map(ChaCha8Rng::seed_from_u64);
        for k in 0..opts.n_max {
            lv.extend(&mut rng)?;
            if k < opts.ambient_max {
                let d = lv.levels[k + 1].dim;
                let need = (2 * n.pow(k as u32 + 1) * d * 16) >> 20;
                if need > opts.memory_budget_mb {
                    return Err(FusionError::MemoryBudget { need_mb: need, budget_mb: opts.memory_budget_mb });
                }
                lv.extend_ambient();
            }
        }
        Ok(lv)
    }

    pub fn n_max(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn dim(&self, n: usize) -> usize {
        self.levels[n].dim
    }

    pub fn dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.dim).collect()
    }

    pub fn level(&self, n: usize) -> Result<&TruncatedLevel> {
        self.levels.get(n).ok_or(FusionError::LevelsUnavailable(n))
    }

    fn reference(&self, lambda: &Weight) -> &ReferenceModule {
        &self.refs[lambda]
    }

    /// Decompose ref_λ⊗V and register references for newly met summands.
    fn decompose(&mut self, lambda: &Weight, rng: &mut Option<ChaCha8Rng>) -> Result<()> {
        if self.blocks.contains_key(lambda) {
            return Ok(());
        }
        let ctx = self.ctx;
        let nn = ctx.n;
        let reference = self.reference(lambda).clone();
        let dl = reference.dim();
        let space = tensor(&reference.space, &vector_rep(&ctx), Coproduct::Mirrored);
        let dec = uqrep::weyl_decompose(&ctx, &space)?;
        let step = fusion_step(&ctx, lambda)?;
        let mut expect: Vec<Weight> = step.kept.iter().chain(&step.negligible).cloned().collect();
        expect.sort();
        if dec.weights() != expect {
            return Err(FusionError::NotCompletelyReducible(format!(
                "summands of V_{lambda}⊗V are {:?}, expected {:?}",
                dec.weights(),
                expect
            )));
        }
        let form = braiding::rbar_on_block(&ctx, lambda, &reference.r_v, &dec);
        let h = linalg::herm_residual(&form);
        if h > 1e-8 * max_scaled(&form) {
            return Err(FusionError::Numerical(format!("form on V_{lambda}⊗V is not Hermitian ({h:e})")));
        }
        let kept: Vec<Weight> = dec.weights().into_iter().filter(|m| in_open_alcove(&ctx, m)).collect();
        let negligible: Vec<Weight> = dec.weights().into_iter().filter(|m| !in_open_alcove(&ctx, m)).collect();
        let mut embeddings = BTreeMap::new();
        for m in &kept {
            let piece = dec.pieces.iter().find(|p| &p.weight == m).expect("kept summand present");
            let j = if let Some(r) = self.refs.get(m) {
                let mut j = self.identify(r, &space, piece, &form)?;
                if let Some(rng) = rng.as_mut() {
                    let t: f64 = rng.random::<f64>() * std::f64::consts::TAU;
                    j *= C64::from_polar(1.0, t);
                }
                j
            } else {
                let (j, r) = self.new_reference(m, &space, piece, &form, &reference)?;
                self.refs.insert(m.clone(), r);
                j
            };
            embeddings.insert(m.clone(), j);
        }
        let total: usize = embeddings.values().map(|j| j.ncols()).sum();
        let mut jk = CMat::zeros(dl * nn, total);
        let mut o = 0;
        for m in &kept {
            let j = &embeddings[m];
            jk.view_mut((0, o), j.shape()).copy_from(j);
            o += j.ncols();
        }
        let kk = mm(&jk.adjoint(), &form);
        let res = linalg::id_residual(&mm(&kk, &jk));
        if res > 1e-8 {
            return Err(FusionError::Numerical(format!("kept embeddings of V_{lambda}⊗V are not orthonormal ({res:e})")));
        }
        let positivity = if total > 0 {
            let q = linalg::range_basis(&jk, ctx.tol)?;
            linalg::min_hermitian_eigenvalue(&mm(&mm(&q.adjoint(), &form), &q))
        } else {
            f64::INFINITY
        };
        self.blocks.insert(
            lambda.clone(),
            BlockDecomposition { lambda: lambda.clone(), decomp: dec, form, kept, negligible, embeddings, jk, kk, positivity },
        );
        Ok(())
    }

    /// Intertwiner from a stored reference onto a summand, normalized to an isometry.
    fn identify(&self, r: &ReferenceModule, space: &ModuleSpace, piece: &uqrep::WeylPiece, form: &CMat) -> Result<CMat> {
        let k = piece.words.len();
        let mut mref = CMat::zeros(r.dim(), k);
        let mut mamb = CMat::zeros(space.dim(), k);
        for (t, word) in piece.words.iter().enumerate() {
            let mut x = CMat::zeros(r.dim(), 1);
            x[(0, 0)] = C64::new(1.0, 0.0);
            let mut y = piece.hw.clone();
            for &i in word {
                x = mm(&r.space.gens.f[i], &x);
                y = mm(&space.gens.f[i], &y);
            }
            mref.set_column(t, &x.column(0));
            mamb.set_column(t, &y.column(0));
        }
        let mut j = mm(&mamb, &linalg::pinv(&mref, self.ctx.tol));
        let g = mm(&mm(&j.adjoint(), form), &j);
        let sc = g[(0, 0)].re;
        if !(sc > 0.0) {
            return Err(FusionError::PositivityFailure(sc));
        }
        let res = diff_abs(&g, &(eye(r.dim()) * C64::new(sc, 0.0)));
        if res > 1e-8 * sc.max(1.0) {
            return Err(FusionError::Numerical(format!("summand {} is not a scaled isometric copy ({res:e})", r.weight)));
        }
        j /= C64::new(sc.sqrt(), 0.0);
        fix_phase(&mut j);
        Ok(j)
    }

    /// Orthonormalize a new summand weight space by weight space and store it as reference.
    fn new_reference(
        &self,
        m: &Weight,
        space: &ModuleSpace,
        piece: &uqrep::WeylPiece,
        form: &CMat,
        parent: &ReferenceModule,
    ) -> Result<(CMat, ReferenceModule)> {
        let ctx = &self.ctx;
        let nn = ctx.n;
        let u = &piece.basis;
        let col_weight = |j: usize| {
            let col = u.column(j);
            let (k, _) = col.iter().enumerate().fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
            space.weights[k].clone()
        };
        let wts: Vec<Vec<i64>> = (0..u.ncols()).map(col_weight).collect();
        let mut order: Vec<usize> = (0..u.ncols()).collect();
        order.sort_by(|&a, &b| wts[b].cmp(&wts[a]).then(a.cmp(&b)));
        let mut groups: Vec<(Vec<i64>, Vec<usize>)> = Vec::new();
        for &j in &order {
            match groups.last_mut() {
                Some((w, idx)) if *w == wts[j] => idx.push(j),
                _ => groups.push((wts[j].clone(), vec![j])),
            }
        }
        let mut j_mat = CMat::zeros(u.nrows(), u.ncols());
        let mut weights_out = Vec::new();
        let mut o = 0;
        for (w, idx) in &groups {
            let x = CMat::from_fn(u.nrows(), idx.len(), |r, c| u[(r, idx[c])]);
            let g = mm(&mm(&x.adjoint(), form), &x);
            let l = linalg::cholesky(&g)?;
            let linv = linalg::inverse(&l)?;
            let xo = mm(&x, &linv.adjoint());
            j_mat.view_mut((0, o), xo.shape()).copy_from(&xo);
            weights_out.extend(std::iter::repeat_n(w.clone(), idx.len()));
            o += idx.len();
        }
        let res = linalg::id_residual(&mm(&mm(&j_mat.adjoint(), form), &j_mat));
        if res > 1e-8 {
            return Err(FusionError::Numerical(format!("reference {m} is not orthonormal ({res:e})")));
        }
        fix_phase(&mut j_mat);
        let kl = mm(&j_mat.adjoint(), form);
        let gens = space.gens.compress(&kl, &j_mat);
        let dl = parent.dim();
        let dm = j_mat.ncols();
        // R_{m,V} = (K⊗1)(R_{λ,V})_{13}R_{23}(J⊗1)
        let t = LegTensor::from_matrix(vec![dl, nn, nn], &kron(&j_mat, &eye(nn)))
            .apply_pair(1, 2, &self.braid.r)
            .apply_pair(0, 2, &parent.r_v)
            .apply(0, 2, &kl, &[dm]);
        let r_v = t.into_matrix();
        let reference = ReferenceModule { weight: m.clone(), space: ModuleSpace { gens, weights: weights_out }, r_v };
        Ok((j_mat, reference))
    }

    fn extend(&mut self, rng: &mut Option<ChaCha8Rng>) -> Result<()> {
        let nn = self.ctx.n;
        let cur = self.levels.last().unwrap().clone();
        for c in &cur.copies {
            self.decompose(&c.weight, rng)?;
        }
        let mut copies = Vec::new();
        let mut offset = 0;
        for (ci, c) in cur.copies.iter().enumerate() {
            for m in &self.blocks[&c.weight].kept {
                let dim = self.refs[m].dim();
                copies.push(BlockCopy { weight: m.clone(), parent: Some(ci), offset, dim });
                offset += dim;
            }
        }
        let mut pi = CMat::zeros(offset, cur.dim * nn);
        let mut emb = CMat::zeros(cur.dim * nn, offset);
        let mut row = 0;
        for c in &cur.copies {
            let b = &self.blocks[&c.weight];
            let kd = b.jk.ncols();
            pi.view_mut((row, c.offset * nn), b.kk.shape()).copy_from(&b.kk);
            emb.view_mut((c.offset * nn, row), b.jk.shape()).copy_from(&b.jk);
            row += kd;
        }
        self.levels.push(TruncatedLevel { n: cur.n + 1, copies, dim: offset });
        self.pi1.push(pi);
        self.emb1.push(emb);
        Ok(())
    }

    fn extend_ambient(&mut self) {
        let nn = self.ctx.n;
        let k = self.ambient.len() - 1;
        let (b, l) = &self.ambient[k];
        let dk = self.levels[k].dim;
        let emb = &self.emb1[k];
        let bn = LegTensor::from_matrix(vec![dk, nn], emb).apply(0, 1, b, &[b.nrows()]).into_matrix();
        let pit = self.pi1[k].transpose();
        let lt = LegTensor::from_matrix(vec![dk, nn], &pit).apply(0, 1, &l.transpose(), &[l.ncols()]).into_matrix();
        self.ambient.push((bn, lt.transpose()));
    }

    /// Largest n with ambient maps available.
    pub fn ambient_max(&self) -> usize {
        self.ambient.len() - 1
    }

    /// B_n: level n → V^{⊗n}.
    pub fn b(&self, n: usize) -> Result<&CMat> {
        self.ambient.get(n).map(|x| &x.0).ok_or(FusionError::LevelsUnavailable(n))
    }

    /// L_n: V^{⊗n} → level n, with L_nB_n = 1 and B_nL_n = p_n.
    pub fn l(&self, n: usize) -> Result<&CMat> {
        self.ambient.get(n).map(|x| &x.1).ok_or(FusionError::LevelsUnavailable(n))
    }

    /// p_n on V^{⊗n}.
    pub fn p_ambient(&self, n: usize) -> Result<CMat> {
        Ok(mm(self.b(n)?, self.l(n)?))
    }

    fn cached(&self, key: (usize, usize, i32), f: impl FnOnce() -> Result<CMat>) -> Result<Arc<CMat>> {
        if let Some(m) = self.cache.read().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(f()?);
        self.cache.write().unwrap().insert(key, m.clone());
        Ok(m)
    }

    fn require(&self, n: usize) -> Result<()> {
        if n > self.n_max() {
            Err(FusionError::LevelsUnavailable(n))
        } else {
            Ok(())
        }
    }

    /// X_{h,k} = Π_{h,k}(1⊗B_k): level h ⊗ level k → level h+k.
    pub fn x_map(&self, h: usize, k: usize) -> Result<Arc<CMat>> {
        self.require(h + k)?;
        self.cached((h, k, 0), || {
            let (dh, dk) = (self.dim(h), self.dim(k));
            if k == 0 {
                return Ok(eye(dh));
            }
            let prev = self.x_map(h, k - 1)?;
            let t = LegTensor::identity(vec![dh, dk])
                .apply(1, 1, &self.emb1[k - 1], &[self.dim(k - 1), self.ctx.n])
                .apply(0, 2, &prev, &[self.dim(h + k - 1)])
                .apply(0, 2, &self.pi1[h + k - 1], &[self.dim(h + k)]);
            Ok(t.into_matrix())
        })
    }

    /// Y_{h,k} = (1⊗L_k)Emb_{h,k}: level h+k → level h ⊗ level k.
    pub fn y_map(&self, h: usize, k: usize) -> Result<Arc<CMat>> {
        self.require(h + k)?;
        self.cached((h, k, 1), || {
            let dh = self.dim(h);
            if k == 0 {
                return Ok(eye(dh));
            }
            let prev = self.y_map(h, k - 1)?;
            let t = LegTensor::identity(vec![self.dim(h + k)])
                .apply(0, 1, &self.emb1[h + k - 1], &[self.dim(h + k - 1), self.ctx.n])
                .apply(0, 1, &prev, &[dh, self.dim(k - 1)])
                .apply(1, 2, &self.pi1[k - 1], &[self.dim(k)]);
            Ok(t.into_matrix())
        })
    }

    /// Compressed ε̲(σ_i^{±1}) = L_nε_i^{±1}B_n in level coordinates, 1 ≤ i ≤ n−1.
    pub fn compressed_generator(&self, n: usize, i: usize, inverse: bool) -> Result<Arc<CMat>> {
        self.require(n)?;
        assert!(i >= 1 && i < n, "generator index out of range");
        let tag = if inverse { 3 } else { 2 };
        self.cached((n, i, tag), || {
            let nn = self.ctx.n;
            let dn = self.dim(n);
            let e = if inverse { &self.braid.eps_inv } else { &self.braid.eps };
            let t = LegTensor::identity(vec![dn]).apply(0, 1, &self.emb1[n - 1], &[self.dim(n - 1), nn]);
            let t = if i < n - 1 {
                let prev = self.compressed_generator(n - 1, i, inverse)?;
                t.apply1(0, &prev)
            } else {
                t.apply(0, 1, &self.emb1[n - 2], &[self.dim(n - 2), nn])
                    .apply(1, 2, e, &[nn, nn])
                    .apply(0, 2, &self.pi1[n - 2], &[self.dim(n - 1)])
            };
            Ok(t.apply(0, 2, &self.pi1[n - 1], &[dn]).into_matrix())
        })
    }

    /// ε̲(b) = p_nε(b)p_n in level coordinates.
    pub fn truncated_braiding(&self, word: &[i32], n: usize) -> Result<CMat> {
        let mut acc = eye(self.dim(n));
        for &k in word {
            let g = self.compressed_generator(n, k.unsigned_abs() as usize, k < 0)?;
            acc = mm(&acc, &g);
        }
        Ok(acc)
    }

    /// S⊗̲T = X(S⊗T)Y for arrows in level coordinates: S: level m → m', T: level n → n'.
    pub fn truncated_tensor(&self, s: &CMat, sm: (usize, usize), t: &CMat, tn: (usize, usize)) -> Result<CMat> {
        let x = self.x_map(sm.1, tn.1)?;
        let y = self.y_map(sm.0, tn.0)?;
        Ok(mm(&mm(&x, &kron(s, t)), &y))
    }

    /// The U_q-action on level n: block diagonal over copies.
    pub fn level_generators(&self, n: usize) -> Result<GeneratorSet> {
        let lvl = self.level(n)?;
        let r = self.ctx.n - 1;
        let d = lvl.dim;
        let mut out = GeneratorSet {
            e: vec![CMat::zeros(d, d); r],
            f: vec![CMat::zeros(d, d); r],
            k: vec![CMat::zeros(d, d); r],
            kinv: vec![CMat::zeros(d, d); r],
        };
        for c in &lvl.copies {
            let g = &self.refs[&c.weight].space.gens;
            for i in 0..r {
                let o = (c.offset, c.offset);
                out.e[i].view_mut(o, (c.dim, c.dim)).copy_from(&g.e[i]);
                out.f[i].view_mut(o, (c.dim, c.dim)).copy_from(&g.f[i]);
                out.k[i].view_mut(o, (c.dim, c.dim)).copy_from(&g.k[i]);
                out.kinv[i].view_mut(o, (c.dim, c.dim)).copy_from(&g.kinv[i]);
            }
        }
        Ok(out)
    }

    /// e_n: projection of level n onto its trivial copies.
    pub fn trivial_projection(&self, n: usize) -> Result<CMat> {
        let lvl = self.level(n)?;
        let mut e = CMat::zeros(lvl.dim, lvl.dim);
        for c in lvl.copies.iter().filter(|c| c.weight.is_zero()) {
            e[(c.offset, c.offset)] = C64::new(1.0, 0.0);
        }
        Ok(e)
    }

    /// Orthonormal basis of the negligible complement ker Π1_n inside level n ⊗ V.
    pub fn negligible_complement(&self, n: usize) -> Result<CMat> {
        self.require(n + 1)?;
        let p = mm(&self.emb1[n], &self.pi1[n]);
        linalg::range_basis(&(eye(p.nrows()) - p), self.ctx.tol)
    }

    /// τ_n = p_nσ_np_n in level coordinates, computed as L_nΣ_nL_n† using R̄^{(n)}B_n = L_n†.
    pub fn tau(&self, n: usize) -> Result<CMat> {
        let l = self.l(n)?;
        let rev = braiding::reversal_permutation(self.ctx.n, n);
        Ok(mm(&mm(l, &rev), &l.adjoint()))
    }

    /// τ_n through the full R̄^{(n)}: L_nΣ_nR̄^{(n)}B_n.
    pub fn tau_from_rbar(&self, n: usize) -> Result<CMat> {
        let sigma = braiding::coboundary_sigma(&self.ctx, n)?;
        Ok(mm(&mm(self.l(n)?, &sigma), self.b(n)?))
    }

    /// Smallest form eigenvalue over the blocks feeding level n.
    pub fn level_positivity(&self, n: usize) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        let prev = self.level(n - 1)?;
        Ok(prev.copies.iter().map(|c| self.blocks[&c.weight].positivity).fold(f64::INFINITY, f64::min))
    }
}

/// Random braid word of the given length on n strands.
pub fn random_word(rng: &mut ChaCha8Rng, n: usize, len: usize) -> Vec<i32> {
    if n < 2 {
        return Vec::new();
    }
    (0..len)
        .map(|_| {
            let k = rng.random_range(1..n as i32);
            if rng.random::<bool>() { k } else { -k }
        })
        .collect()
}

/// Apply the middle projection 1_s⊗p_t⊗1_u to columns over n legs of V.
fn apply_middle(lv: &Levels, t: &LegTensor, s: usize, len: usize) -> Result<LegTensor> {
    let nn = lv.ctx.n;
    let merged = t.clone().merge(s, len);
    let l = lv.l(len)?;
    let b = lv.b(len)?;
    let out = merged.apply1(s, &mm(b, l));
    Ok(out.split(s, &vec![nn; len]))
}

/// Residual report for one level.
pub fn verify_level(lv: &Levels, n: usize, dense_cap: usize, seed: u64, tol: f64) -> Vec<CheckReport> {
    let ctx = lv.ctx;
    let mut out = Vec::new();
    let lvl = match lv.level(n) {
        Ok(l) => l.clone(),
        Err(e) => return vec![CheckReport::from_error("level-built", &e)],
    };
    let cov = format!("level {n}");
    out.push(timed(|| {
        let oracle = weights::truncated_power_multiplicities(&ctx, n);
        let ok = lvl.multiplicities() == oracle && lvl.copies.iter().all(|c| c.dim == dim_classical(&c.weight));
        let sum: usize = oracle.iter().map(|(w, m)| m * dim_classical(w)).sum();
        CheckReport::predicate("level-multiplicities", ok && sum == lvl.dim, lvl.dim as f64, cov.clone())
    }));
    out.push(timed_result("form-positivity", || {
        let p = lv.level_positivity(n)?;
        Ok(CheckReport::predicate("form-positivity", p > 1e-8, p, cov.clone()))
    }));
    out.push(timed(|| {
        let mut worst = 0.0f64;
        if n > 0 {
            for c in &lv.level(n - 1).unwrap().copies {
                let b = &lv.blocks[&c.weight];
                for p in b.decomp.isotypic_projections().values() {
                    worst = worst.max(diff_abs(&mm(&b.form, p), &mm(&p.adjoint(), &b.form)));
                }
            }
        }
        CheckReport::residual("projection-selfadjoint", worst, tol, cov.clone())
    }));
    // one-step maps
    out.push(timed(|| {
        if n == 0 {
            return CheckReport::residual("level-maps-isometric", 0.0, tol, cov.clone());
        }
        let r = linalg::id_residual(&mm(&lv.pi1[n - 1], &lv.emb1[n - 1]));
        CheckReport::residual("level-maps-isometric", r, tol, cov.clone())
    }));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9e37_79b9));
    let words: Vec<Vec<i32>> = (0..4).map(|_| random_word(&mut rng, n, 6)).collect();
    // arrow compatibility for r = 1, 2 on compressed braid images
    out.push(timed_result("arrow-compatibility", || {
        if n < 2 || n + 2 > lv.n_max() {
            return Ok(CheckReport::skipped("arrow-compatibility", format!("needs levels {n}..{}", n + 2)));
        }
        let mut worst = 0.0f64;
        for w in &words {
            let a = lv.truncated_braiding(w, n)?;
            for r in 1..=2 {
                let x = lv.x_map(n, r)?;
                let y = lv.y_map(n, r)?;
                let ar = kron(&a, &eye(lv.dim(r)));
                let p = mm(&y, &x);
                worst = worst.max(diff_abs(&mm(&ar, &p), &mm(&p, &ar)));
            }
        }
        Ok(CheckReport::residual("arrow-compatibility", worst, tol, format!("level {n}, r=1,2, {} words", words.len())))
    }));
    out.push(timed_result("braiding-unitary", || {
        let mut worst = 0.0f64;
        for i in 1..n {
            let g = lv.compressed_generator(n, i, false)?;
            let gi = lv.compressed_generator(n, i, true)?;
            worst = worst.max(linalg::id_residual(&mm(&g, &g.adjoint())));
            worst = worst.max(linalg::id_residual(&mm(&g, &gi)));
        }
        Ok(CheckReport::residual("braiding-unitary", worst, tol, cov.clone()))
    }));
    out.push(timed_result("braiding-natural", || {
        let gens = lv.level_generators(n)?;
        let mut worst = 0.0f64;
        for i in 1..n {
            worst = worst.max(uqrep::intertwiner_residual(&gens, &*lv.compressed_generator(n, i, false)?));
        }
        Ok(CheckReport::residual("braiding-natural", worst, tol, cov.clone()))
    }));
    out.push(timed_result("braid-relations-compressed", || {
        let mut worst = 0.0f64;
        for i in 1..n.saturating_sub(1) {
            let a = lv.compressed_generator(n, i, false)?;
            let b = lv.compressed_generator(n, i + 1, false)?;
            worst = worst.max(diff_abs(&linalg::mm_chain(&[&a, &b, &a]), &linalg::mm_chain(&[&b, &a, &b])));
        }
        Ok(CheckReport::residual("braid-relations-compressed", worst, tol, cov.clone()))
    }));
    if n > lv.ambient_max() || n > dense_cap {
        for id in ["left-coherence", "compression-functorial", "middle-absorption", "negligible-kill", "tau-involution"] {
            out.push(CheckReport::skipped(id, format!("level {n} above the ambient cap")));
        }
        return out;
    }
    out.push(timed_result("left-coherence", || {
        let l = lv.l(n)?;
        let b = lv.b(n)?;
        let mut worst = linalg::id_residual(&mm(l, b));
        for m in 1..n {
            let pm = lv.p_ambient(m)?;
            let rest = ctx.n.pow((n - m) as u32);
            let bt = LegTensor::from_matrix(vec![pm.nrows(), rest], b).apply1(0, &pm).into_matrix();
            worst = worst.max(diff_abs(&bt, b));
            let lt = LegTensor::from_matrix(vec![pm.nrows(), rest], &l.transpose()).apply1(0, &pm.transpose()).into_matrix();
            worst = worst.max(diff_abs(&lt.transpose(), l));
        }
        Ok(CheckReport::residual("left-coherence", worst, tol, format!("level {n}, m < {n}")))
    }));
    out.push(timed_result("compression-functorial", || {
        let mut worst = 0.0f64;
        let b = lv.b(n)?;
        let l = lv.l(n)?;
        for w in &words {
            let amb = lv.braid.apply_word(&LegTensor::from_matrix(vec![ctx.n; n], b), w, 0).into_matrix();
            worst = worst.max(diff_abs(&mm(l, &amb), &lv.truncated_braiding(w, n)?));
        }
        Ok(CheckReport::residual("compression-functorial", worst, tol, format!("level {n}, {} words", words.len())))
    }));
    out.push(timed_result("middle-absorption", || {
        let b = lv.b(n)?;
        let l = lv.l(n)?;
        let mut worst = 0.0f64;
        let mut count = 0;
        for (wi, s_word) in words.iter().enumerate() {
            let t_word = &words[(wi + 1) % words.len()];
            let sb = lv.braid.apply_word(&LegTensor::from_matrix(vec![ctx.n; n], b), s_word, 0);
            let plain = mm(l, &lv.braid.apply_word(&sb, t_word, 0).into_matrix());
            for t in 2..=n {
                for s in 0..=(n - t) {
                    let mid = apply_middle(lv, &sb, s, t)?;
                    let with = mm(l, &lv.braid.apply_word(&mid, t_word, 0).into_matrix());
                    worst = worst.max(diff_abs(&with, &plain));
                    count += 1;
                }
            }
        }
        Ok(CheckReport::residual("middle-absorption", worst, tol, format!("level {n}, {count} insertions")))
    }));
    out.push(timed_result("negligible-kill", || {
        if n < 2 {
            return Ok(CheckReport::residual("negligible-kill", 0.0, tol, "vacuous below level 2"));
        }
        let b = lv.b(n)?;
        let l = lv.l(n)?;
        let bm = lv.b(n - 1)?;
        let lm = lv.l(n - 1)?;
        // columns of 1_V⊗p_{n-1}
        let cols = kron(&eye(ctx.n), &mm(bm, lm));
        let mut worst = 0.0f64;
        for w in &words {
            // T = ε(b)(1 − p_n) is a negligible arrow
            let x = &cols - mm(b, &mm(l, &cols));
            let y = lv.braid.apply_word(&LegTensor::from_matrix(vec![ctx.n; n], &x), w, 0).into_matrix();
            worst = worst.max(max_abs(&mm(l, &y)));
        }
        Ok(CheckReport::residual("negligible-kill", worst, tol, format!("level {n}, {} words", words.len())))
    }));
    out.push(timed_result("tau-involution", || {
        let t = lv.tau(n)?;
        let r = linalg::herm_residual(&t).max(linalg::id_residual(&mm(&t, &t)));
        Ok(CheckReport::residual("tau-involution", r, tol, cov.clone()))
    }));
    out
}

/// ‖p_n∘(1⊗p_{n−1}) − p_n‖ and ‖p_n∘(1⊗p_{n−1})∘p_n − p_n‖ on V^{⊗n}.
pub fn right_coherence_defect(lv: &Levels, n: usize) -> Result<(f64, f64)> {
    let nn = lv.ctx.n;
    let p = lv.p_ambient(n)?;
    let pm = kron(&eye(nn), &lv.p_ambient(n - 1)?);
    let a = mm(&p, &pm);
    Ok((diff_abs(&a, &p), diff_abs(&mm(&a, &p), &p)))
}

/// Max residual of B_n†R̄^{(n)}B_n = 1 and L_n = B_n†R̄^{(n)}, when R̄^{(n)} is available.
pub fn form_consistency(lv: &Levels, n: usize) -> Result<f64> {
    let rb = braiding::rbar_full(&lv.ctx, n)?;
    let b = lv.b(n)?;
    let g = mm(&mm(&b.adjoint(), &rb), b);
    Ok(linalg::id_residual(&g).max(diff_abs(lv.l(n)?, &mm(&b.adjoint(), &rb))))
}
