//! The dual quantum groupoid ⊕_λ L(V_λ): sections, the non-unital coproduct, associators,
//! R-elements, antipode, counit and the surjection from U_q.
//!
//! Elements of the k-th tensor power are realized as level-natural operator families
//! Z(h_1, …, h_k) acting on tensor products of truncated-level coordinate spaces. Products
//! are compositions of families, coproduct translates conjugate by the merge/split maps
//! X_{h,k}, Y_{h,k}, and matrix blocks are read off as corners at the chosen section.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::braiding;
use crate::error::{FusionError, Result};
use crate::linalg::{self, diff_abs, eye, kron, max_abs, mm, CMat, LegTensor, C64, ONE, ZERO};
use crate::report::{timed_result, CheckReport};
use crate::uqrep::GeneratorSet;
use crate::weights::{conjugate, enumerate_alcove, Weight};
use crate::wenzl::Levels;

/// How a section picks its embedded copies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SectionPolicy {
    /// h_λ = deg λ and the first copy at that level.
    Default,
    /// h_λ = deg λ + N where built, a seeded copy and a seeded phase.
    Seeded(u64),
}

/// The embedded reference copy of one alcove weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionEntry {
    pub level: usize,
    pub copy: usize,
    pub offset: usize,
    pub dim: usize,
    #[serde(skip)]
    pub phase: C64,
}

#[derive(Clone, Debug)]
pub struct SectionData {
    pub policy: SectionPolicy,
    pub entries: BTreeMap<Weight, SectionEntry>,
}

impl SectionData {
    pub fn level(&self, w: &Weight) -> usize {
        self.entries[w].level
    }

    pub fn weights(&self) -> Vec<Weight> {
        self.entries.keys().cloned().collect()
    }

    /// ι_λ: V_λ → level h_λ in level coordinates.
    pub fn selector(&self, lv: &Levels, w: &Weight) -> CMat {
        let e = &self.entries[w];
        let mut s = CMat::zeros(lv.dim(e.level), e.dim);
        for i in 0..e.dim {
            s[(e.offset + i, i)] = e.phase;
        }
        s
    }
}

pub fn build_section(lv: &Levels, policy: SectionPolicy) -> Result<SectionData> {
    let ctx = &lv.ctx;
    let mut rng = match policy {
        SectionPolicy::Seeded(s) => Some(ChaCha8Rng::seed_from_u64(s)),
        SectionPolicy::Default => None,
    };
    let mut entries = BTreeMap::new();
    for w in enumerate_alcove(ctx) {
        let deg = w.deg() as usize;
        let mut level = deg;
        if rng.is_some() && deg + ctx.n <= lv.n_max() {
            level = deg + ctx.n;
        }
        let lvl = lv.level(level)?;
        let copies: Vec<usize> = lvl.copies.iter().positions(|c| c.weight == w).collect();
        if copies.is_empty() {
            return Err(FusionError::WeightAbsent(w.parts.clone()));
        }
        let (copy, phase) = match rng.as_mut() {
            Some(r) => (copies[r.random_range(0..copies.len())], C64::from_polar(1.0, r.random::<f64>() * std::f64::consts::TAU)),
            None => (copies[0], ONE),
        };
        let c = &lvl.copies[copy];
        entries.insert(w, SectionEntry { level, copy, offset: c.offset, dim: c.dim, phase });
    }
    Ok(SectionData { policy, entries })
}

/// An element of ⊕_λ L(V_λ).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupoidElement {
    pub blocks: BTreeMap<Weight, CMat>,
}

/// Generators of U_q acting through π.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Generator {
    E(usize),
    F(usize),
    K(usize),
    KInv(usize),
}

impl Generator {
    pub fn all(n: usize) -> Vec<Generator> {
        (0..n - 1).flat_map(|i| [Generator::E(i), Generator::F(i), Generator::K(i), Generator::KInv(i)]).collect()
    }

    /// The involution E* = F, K* = K^{-1}.
    pub fn star(self) -> Generator {
        match self {
            Generator::E(i) => Generator::F(i),
            Generator::F(i) => Generator::E(i),
            Generator::K(i) => Generator::KInv(i),
            Generator::KInv(i) => Generator::K(i),
        }
    }

    pub fn matrix(self, g: &GeneratorSet) -> CMat {
        match self {
            Generator::E(i) => g.e[i].clone(),
            Generator::F(i) => g.f[i].clone(),
            Generator::K(i) => g.k[i].clone(),
            Generator::KInv(i) => g.kinv[i].clone(),
        }
    }

    /// Matrix of the antipode image: S(E) = −K^{-1}E, S(F) = −FK, S(K) = K^{-1}.
    pub fn antipode_matrix(self, g: &GeneratorSet) -> CMat {
        match self {
            Generator::E(i) => -mm(&g.kinv[i], &g.e[i]),
            Generator::F(i) => -mm(&g.f[i], &g.k[i]),
            Generator::K(i) => g.kinv[i].clone(),
            Generator::KInv(i) => g.k[i].clone(),
        }
    }

    /// Δ(a) = Σ left⊗right under the mirrored coproduct.
    pub fn coproduct_terms(self, a: &GeneratorSet, b: &GeneratorSet) -> Vec<(CMat, CMat)> {
        let (ea, eb) = (eye(a.dim()), eye(b.dim()));
        match self {
            Generator::E(i) => vec![(a.e[i].clone(), eb), (a.k[i].clone(), b.e[i].clone())],
            Generator::F(i) => vec![(a.f[i].clone(), b.kinv[i].clone()), (ea, b.f[i].clone())],
            Generator::K(i) => vec![(a.k[i].clone(), b.k[i].clone())],
            Generator::KInv(i) => vec![(a.kinv[i].clone(), b.kinv[i].clone())],
        }
    }
}

impl GroupoidElement {
    pub fn identity(lv: &Levels) -> Self {
        GroupoidElement { blocks: lv.refs.iter().map(|(w, r)| (w.clone(), eye(r.dim()))).collect() }
    }

    pub fn random(lv: &Levels, rng: &mut ChaCha8Rng) -> Self {
        let blocks = lv
            .refs
            .iter()
            .map(|(w, r)| {
                let d = r.dim();
                (w.clone(), CMat::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)))
            })
            .collect();
        GroupoidElement { blocks }
    }

    /// π(a) for a generator: its matrix on every V_λ.
    pub fn pi(lv: &Levels, a: Generator) -> Self {
        GroupoidElement { blocks: lv.refs.iter().map(|(w, r)| (w.clone(), a.matrix(&r.space.gens))).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        GroupoidElement { blocks: self.blocks.iter().map(|(w, m)| (w.clone(), mm(m, &o.blocks[w]))).collect() }
    }

    pub fn adjoint(&self) -> Self {
        GroupoidElement { blocks: self.blocks.iter().map(|(w, m)| (w.clone(), m.adjoint())).collect() }
    }

    pub fn diff(&self, o: &Self) -> f64 {
        self.blocks.iter().map(|(w, m)| diff_abs(m, &o.blocks[w])).fold(0.0, f64::max)
    }

    /// Max over blocks of the operator norm.
    pub fn norm(&self) -> f64 {
        self.blocks.values().map(|m| linalg::singular_values(m).first().copied().unwrap_or(0.0)).fold(0.0, f64::max)
    }

    /// ε(ω): the trivial block.
    pub fn counit(&self) -> C64 {
        self.blocks.iter().find(|(w, _)| w.is_zero()).map(|(_, m)| m[(0, 0)]).unwrap_or(ZERO)
    }
}

/// A level-natural family, i.e. an element of a tensor power of the groupoid.
#[derive(Clone, Debug)]
pub enum Family {
    /// The unit of the k-th tensor power.
    Identity(usize),
    /// An element acting blockwise on each level.
    Node(GroupoidElement),
    /// The coproduct translate splitting slot `slot` of `inner` into two slots.
    Split { slot: usize, inner: Box<Family> },
    /// The counit applied in slot `slot`.
    Counit { slot: usize, inner: Box<Family> },
    /// Product, leftmost factor last.
    Product(Vec<Family>),
    /// Tensor product of families on consecutive slots.
    Tensor(Vec<Family>),
    /// The opposite of an order-2 family.
    Opposite(Box<Family>),
    Phi,
    Psi,
    R,
    R1,
    /// π⊗π(Δ(a)) for a generator a.
    PiPi(Generator),
}

impl Family {
    pub fn order(&self) -> usize {
        match self {
            Family::Identity(k) => *k,
            Family::Node(_) => 1,
            Family::Split { inner, .. } => inner.order() + 1,
            Family::Counit { inner, .. } => inner.order() - 1,
            Family::Product(fs) => fs[0].order(),
            Family::Tensor(fs) => fs.iter().map(Family::order).sum(),
            Family::Opposite(_) | Family::R | Family::R1 | Family::PiPi(_) => 2,
            Family::Phi | Family::Psi => 3,
        }
    }

    pub fn split(slot: usize, inner: Family) -> Family {
        Family::Split { slot, inner: Box::new(inner) }
    }

    pub fn counit(slot: usize, inner: Family) -> Family {
        Family::Counit { slot, inner: Box::new(inner) }
    }

    /// Δ(ω).
    pub fn coproduct(w: &GroupoidElement) -> Family {
        Family::split(0, Family::Node(w.clone()))
    }

    /// P = Δ(I).
    pub fn unit_coproduct() -> Family {
        Family::split(0, Family::Identity(1))
    }

    /// Δ_left^{(n)} applied to an order-1 family: (Δ⊗1…)∘⋯∘Δ.
    pub fn left_iterate(n: usize, f: Family) -> Family {
        (0..n).fold(f, |acc, _| Family::split(0, acc))
    }

    /// Δ_left^{(a_0)}⊗Δ_left^{(a_1)}⊗… applied slotwise to a family of order a.len().
    pub fn left_iterate_slots(counts: &[usize], f: Family) -> Family {
        let mut acc = f;
        // split the last slots first so that earlier slot indices stay valid
        for (s, &c) in counts.iter().enumerate().rev() {
            for _ in 0..c {
                acc = Family::split(s, acc);
            }
        }
        acc
    }

    pub fn product(fs: Vec<Family>) -> Family {
        Family::Product(fs)
    }
}

/// A binary bracketing of leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bracketing {
    Leaf,
    Node(Box<Bracketing>, Box<Bracketing>),
}

impl Bracketing {
    pub fn leaves(&self) -> usize {
        match self {
            Bracketing::Leaf => 1,
            Bracketing::Node(l, r) => l.leaves() + r.leaves(),
        }
    }

    /// All bracketings of n leaves.
    pub fn all(n: usize) -> Vec<Bracketing> {
        if n == 1 {
            return vec![Bracketing::Leaf];
        }
        let mut out = Vec::new();
        for a in 1..n {
            for l in Bracketing::all(a) {
                for r in Bracketing::all(n - a) {
                    out.push(Bracketing::Node(Box::new(l.clone()), Box::new(r)));
                }
            }
        }
        out
    }

    /// The iterated coproduct of an order-1 family along this bracketing.
    pub fn iterate(&self, f: Family) -> Family {
        fn rec(f: Family, slot: usize, t: &Bracketing) -> Family {
            match t {
                Bracketing::Leaf => f,
                Bracketing::Node(l, r) => {
                    let f = Family::split(slot, f);
                    let f = rec(f, slot + 1, r);
                    rec(f, slot, l)
                }
            }
        }
        rec(f, 0, self)
    }

    pub fn label(&self) -> String {
        match self {
            Bracketing::Leaf => "·".into(),
            Bracketing::Node(l, r) => format!("({}{})", l.label(), r.label()),
        }
    }
}

/// Corner blocks of an element of a tensor power, keyed by weight tuple.
#[derive(Clone, Debug)]
pub struct GroupoidTensor {
    pub order: usize,
    pub blocks: BTreeMap<Vec<Weight>, CMat>,
}

/// Tunables for the groupoid suite.
#[derive(Clone, Debug)]
pub struct GroupoidOptions {
    pub seed: u64,
    pub tol: f64,
    pub memory_budget_mb: usize,
    /// Tuples evaluated per check and order.
    pub max_tuples: usize,
    /// Largest number of legs for which the Wenzl form on V^{⊗n} is formed densely.
    pub dense_cap: usize,
}

impl Default for GroupoidOptions {
    fn default() -> Self {
        GroupoidOptions { seed: 0, tol: 1e-8, memory_budget_mb: 2048, max_tuples: 96, dense_cap: 6 }
    }
}

/// The groupoid over a set of built levels and a section.
pub struct Groupoid<'a> {
    pub lv: &'a Levels,
    pub section: SectionData,
    gens: Mutex<HashMap<usize, Arc<GeneratorSet>>>,
    braids: Mutex<HashMap<(usize, usize, bool), Arc<CMat>>>,
}

/// The braid word of the block crossing c_{h,k}: the first h strands pass over the last k.
pub fn block_braid_word(h: usize, k: usize) -> Vec<i32> {
    let mut applied = Vec::new();
    for i in (1..=h).rev() {
        for j in 0..k {
            applied.push((i + j) as i32);
        }
    }
    applied.reverse();
    applied
}

fn inverse_word(w: &[i32]) -> Vec<i32> {
    w.iter().rev().map(|k| -k).collect()
}

fn swap_legs(t: LegTensor, i: usize) -> LegTensor {
    let mut perm: Vec<usize> = (0..t.dims.len()).collect();
    perm.swap(i, i + 1);
    t.permute(&perm)
}

impl<'a> Groupoid<'a> {
    pub fn new(lv: &'a Levels, section: SectionData) -> Self {
        Groupoid { lv, section, gens: Mutex::new(HashMap::new()), braids: Mutex::new(HashMap::new()) }
    }

    pub fn with_default_section(lv: &'a Levels) -> Result<Self> {
        Ok(Self::new(lv, build_section(lv, SectionPolicy::Default)?))
    }

    pub fn weights(&self) -> Vec<Weight> {
        self.section.weights()
    }

    fn level_gens(&self, h: usize) -> Result<Arc<GeneratorSet>> {
        if let Some(g) = self.gens.lock().unwrap().get(&h) {
            return Ok(g.clone());
        }
        let g = Arc::new(self.lv.level_generators(h)?);
        self.gens.lock().unwrap().insert(h, g.clone());
        Ok(g)
    }

    /// Ē_{h,k} = ε̲(c_{h,k}) (or its inverse) on level h+k.
    fn block_braid(&self, h: usize, k: usize, inverse: bool) -> Result<Arc<CMat>> {
        let key = (h, k, inverse);
        if let Some(m) = self.braids.lock().unwrap().get(&key) {
            return Ok(m.clone());
        }
        let w = block_braid_word(h, k);
        let w = if inverse { inverse_word(&w) } else { w };
        let m = Arc::new(self.lv.truncated_braiding(&w, h + k)?);
        self.braids.lock().unwrap().insert(key, m.clone());
        Ok(m)
    }

    /// N_h(ω): block diagonal over the copies of level h.
    pub fn node(&self, w: &GroupoidElement, h: usize) -> Result<CMat> {
        let lvl = self.lv.level(h)?;
        let mut m = CMat::zeros(lvl.dim, lvl.dim);
        for c in &lvl.copies {
            let b = w.blocks.get(&c.weight).ok_or_else(|| FusionError::WeightAbsent(c.weight.parts.clone()))?;
            m.view_mut((c.offset, c.offset), (c.dim, c.dim)).copy_from(b);
        }
        Ok(m)
    }

    fn d(&self, h: usize) -> usize {
        self.lv.dim(h)
    }

    fn merge(&self, t: LegTensor, i: usize, a: usize, b: usize) -> Result<LegTensor> {
        let x = self.lv.x_map(a, b)?;
        Ok(t.apply(i, 2, &x, &[self.d(a + b)]))
    }

    fn unmerge(&self, t: LegTensor, i: usize, a: usize, b: usize) -> Result<LegTensor> {
        let y = self.lv.y_map(a, b)?;
        Ok(t.apply(i, 1, &y, &[self.d(a), self.d(b)]))
    }

    /// Apply a family acting on legs off..off+order of `t`, whose legs sit at `levels`.
    pub fn apply(&self, f: &Family, levels: &[usize], off: usize, t: LegTensor) -> Result<LegTensor> {
        match f {
            Family::Identity(_) => Ok(t),
            Family::Node(w) => Ok(t.apply1(off, &self.node(w, levels[off])?)),
            Family::Split { slot, inner } => {
                let i = off + slot;
                let (a, b) = (levels[i], levels[i + 1]);
                let t = self.merge(t, i, a, b)?;
                let mut lv2 = levels.to_vec();
                lv2.splice(i..i + 2, [a + b]);
                let t = self.apply(inner, &lv2, off, t)?;
                self.unmerge(t, i, a, b)
            }
            Family::Counit { slot, inner } => {
                let i = off + slot;
                let mut t = t;
                t.dims.insert(i, 1);
                let mut lv2 = levels.to_vec();
                lv2.insert(i, 0);
                let mut t = self.apply(inner, &lv2, off, t)?;
                debug_assert_eq!(t.dims[i], 1);
                t.dims.remove(i);
                Ok(t)
            }
            Family::Product(fs) => {
                let mut t = t;
                for g in fs.iter().rev() {
                    t = self.apply(g, levels, off, t)?;
                }
                Ok(t)
            }
            Family::Tensor(fs) => {
                let mut t = t;
                let mut o = off;
                for g in fs {
                    t = self.apply(g, levels, o, t)?;
                    o += g.order();
                }
                Ok(t)
            }
            Family::Opposite(inner) => {
                let mut lv2 = levels.to_vec();
                lv2.swap(off, off + 1);
                let t = self.apply(inner, &lv2, off, swap_legs(t, off))?;
                Ok(swap_legs(t, off))
            }
            Family::Phi => {
                let (h, k, m) = (levels[off], levels[off + 1], levels[off + 2]);
                let t = self.merge(t, off, h, k)?;
                let t = self.merge(t, off, h + k, m)?;
                let t = self.unmerge(t, off, h, k + m)?;
                self.unmerge(t, off + 1, k, m)
            }
            Family::Psi => {
                let (h, k, m) = (levels[off], levels[off + 1], levels[off + 2]);
                let t = self.merge(t, off + 1, k, m)?;
                let t = self.merge(t, off, h, k + m)?;
                let t = self.unmerge(t, off, h + k, m)?;
                self.unmerge(t, off, h, k)
            }
            Family::R => {
                let (h, k) = (levels[off], levels[off + 1]);
                let t = self.merge(t, off, h, k)?;
                let t = t.apply1(off, &*self.block_braid(h, k, false)?);
                let t = self.unmerge(t, off, k, h)?;
                Ok(swap_legs(t, off))
            }
            Family::R1 => {
                let (h, k) = (levels[off], levels[off + 1]);
                let t = swap_legs(t, off);
                let t = self.merge(t, off, k, h)?;
                let t = t.apply1(off, &*self.block_braid(h, k, true)?);
                self.unmerge(t, off, h, k)
            }
            Family::PiPi(a) => {
                let (ga, gb) = (self.level_gens(levels[off])?, self.level_gens(levels[off + 1])?);
                let mut acc: Option<LegTensor> = None;
                for (l, r) in a.coproduct_terms(&ga, &gb) {
                    let u = t.apply1(off, &l).apply1(off + 1, &r);
                    acc = Some(match acc {
                        None => u,
                        Some(mut s) => {
                            s.data.iter_mut().zip(&u.data).for_each(|(x, y)| *x += y);
                            s
                        }
                    });
                }
                Ok(acc.expect("at least one coproduct term"))
            }
        }
    }

    /// Levels of a weight tuple under the section.
    pub fn tuple_levels(&self, tuple: &[Weight]) -> Vec<usize> {
        tuple.iter().map(|w| self.section.level(w)).collect()
    }

    /// The corner block of a family at a weight tuple.
    pub fn corner(&self, f: &Family, tuple: &[Weight]) -> Result<CMat> {
        let cols: usize = tuple.iter().map(|w| self.section.entries[w].dim).product();
        self.corner_times(f, tuple, &eye(cols))
    }

    /// The corner block of a family at a weight tuple, times `right` on the right.
    pub fn corner_times(&self, f: &Family, tuple: &[Weight], right: &CMat) -> Result<CMat> {
        assert_eq!(f.order(), tuple.len(), "tuple length must match the family order");
        let levels = self.tuple_levels(tuple);
        let total: usize = levels.iter().sum();
        if total > self.lv.n_max() {
            return Err(FusionError::LevelsUnavailable(total));
        }
        let sels: Vec<CMat> = tuple.iter().map(|w| self.section.selector(self.lv, w)).collect();
        let mut t = LegTensor::from_matrix(sels.iter().map(|s| s.ncols()).collect(), right);
        for (i, s) in sels.iter().enumerate() {
            t = t.apply(i, 1, s, &[s.nrows()]);
        }
        let mut t = self.apply(f, &levels, 0, t)?;
        for (i, s) in sels.iter().enumerate() {
            t = t.apply(i, 1, &s.adjoint(), &[s.ncols()]);
        }
        Ok(t.into_matrix())
    }

    /// Corner blocks of a family over a list of tuples.
    pub fn blocks(&self, f: &Family, tuples: &[Vec<Weight>]) -> Result<GroupoidTensor> {
        let blocks = tuples.par_iter().map(|t| Ok((t.clone(), self.corner(f, t)?))).collect::<Result<Vec<_>>>()?;
        Ok(GroupoidTensor { order: f.order(), blocks: blocks.into_iter().collect() })
    }

    /// The family evaluated on whole levels.
    pub fn at_levels(&self, f: &Family, levels: &[usize]) -> Result<CMat> {
        let dims: Vec<usize> = levels.iter().map(|&h| self.d(h)).collect();
        Ok(self.apply(f, levels, 0, LegTensor::identity(dims))?.into_matrix())
    }

    /// Weight tuples of the given order whose total level fits, in increasing total level.
    /// At most `max` tuples are returned: the smallest ones plus a seeded sample of the rest.
    pub fn tuples(&self, order: usize, max: usize, budget_mb: usize, seed: u64) -> (Vec<Vec<Weight>>, usize) {
        let ws = self.weights();
        let nmax = self.lv.n_max();
        let mut all: Vec<Vec<Weight>> = (0..order)
            .map(|_| ws.iter().cloned())
            .multi_cartesian_product()
            .filter(|t| {
                let lv = self.tuple_levels(t);
                let total: usize = lv.iter().sum();
                if total > nmax {
                    return false;
                }
                let cols: usize = t.iter().map(|w| self.section.entries[w].dim).product();
                let rows: usize = lv.iter().map(|&h| self.d(h)).product::<usize>().max(self.d(total));
                (4 * 16 * rows * cols) >> 20 <= budget_mb
            })
            .collect();
        if order == 0 {
            all = vec![Vec::new()];
        }
        all.sort_by_key(|t| (self.tuple_levels(t).iter().sum::<usize>(), t.clone()));
        let total = all.len();
        if total <= max {
            return (all, total);
        }
        let head = max / 2;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rest: Vec<Vec<Weight>> = all.split_off(head);
        let mut out = all;
        while out.len() < max && !rest.is_empty() {
            let i = rng.random_range(0..rest.len());
            out.push(rest.swap_remove(i));
        }
        (out, total)
    }

    /// Max corner residual between two families over tuples, relative to max(1, |rhs|).
    /// Wide corners are compared on seeded Gaussian probe columns, which separate two
    /// distinct linear maps with probability one.
    pub fn compare(&self, lhs: &Family, rhs: &Family, tuples: &[Vec<Weight>]) -> Result<f64> {
        let res: Vec<f64> = tuples
            .par_iter()
            .enumerate()
            .map(|(i, t)| {
                let cols: usize = t.iter().map(|w| self.section.entries[w].dim).product();
                let right = if cols <= PROBE_THRESHOLD { eye(cols) } else { probe_columns(cols, i as u64) };
                let a = self.corner_times(lhs, t, &right)?;
                let b = self.corner_times(rhs, t, &right)?;
                Ok(diff_abs(&a, &b) / max_abs(&b).max(1.0))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(res.into_iter().fold(0.0, f64::max))
    }

    /// P corner from the ambient formula (ι⊗ι)* p_{h+k} (ι⊗ι).
    pub fn ambient_unit_corner(&self, a: &Weight, b: &Weight) -> Result<CMat> {
        let (h, k) = (self.section.level(a), self.section.level(b));
        let lv = self.lv;
        let ea = mm(lv.b(h)?, &self.section.selector(lv, a));
        let eb = mm(lv.b(k)?, &self.section.selector(lv, b));
        let emb = kron(&ea, &eb);
        let p = mm(lv.b(h + k)?, lv.l(h + k)?);
        let la = mm(&self.section.selector(lv, a).adjoint(), lv.l(h)?);
        let lb = mm(&self.section.selector(lv, b).adjoint(), lv.l(k)?);
        Ok(mm(&kron(&la, &lb), &mm(&p, &emb)))
    }

    /// R_{λ,μ} on V_λ⊗V_μ, compressed from V^{⊗h}⊗V^{⊗k} through the section copies.
    pub fn pair_r(&self, a: &Weight, b: &Weight) -> Result<CMat> {
        let (h, k) = (self.section.level(a), self.section.level(b));
        let lv = self.lv;
        let n = lv.ctx.n;
        let (sa, sb) = (self.section.selector(lv, a), self.section.selector(lv, b));
        if h == 0 || k == 0 {
            return Ok(eye(sa.ncols() * sb.ncols()));
        }
        let seed = kron(&mm(lv.b(h)?, &sa), &mm(lv.b(k)?, &sb));
        let t = lv.braid.apply_word(&LegTensor::from_matrix(vec![n; h + k], &seed), &block_braid_word(h, k), 0);
        // ε(c) lands in V^{⊗k}⊗V^{⊗h}; flip the blocks back
        let perm: Vec<usize> = (k..k + h).chain(0..k).collect();
        let t = t.permute(&perm).merge(0, h).merge(1, k);
        let la = mm(&sa.adjoint(), lv.l(h)?);
        let lb = mm(&sb.adjoint(), lv.l(k)?);
        Ok(t.apply(0, 1, &la, &[sa.ncols()]).apply(1, 1, &lb, &[sb.ncols()]).into_matrix())
    }

    /// π⊗π(R̄) = RΘ on V_λ⊗V_μ with Θ the branch of (R_21R)^{-1/2} fixed by the summands.
    pub fn pair_rbar(&self, a: &Weight, b: &Weight) -> Result<CMat> {
        let r = self.pair_r(a, b)?;
        let rr = self.pair_r(b, a)?;
        let (da, db) = (self.section.entries[a].dim, self.section.entries[b].dim);
        let fl = flip_pair(da, db);
        let r21 = mm(&mm(&fl.transpose(), &rr), &fl);
        let theta = braiding::theta_for_pair(&self.lv.ctx, a, b, &mm(&r21, &r))?;
        Ok(mm(&r, &theta))
    }

    /// T_λ with π_λ̄(a)T = Tπ_λ(S(a))ᵀ, normalized unitary.
    pub fn conjugation(&self, w: &Weight) -> Result<CMat> {
        let wb = conjugate(w);
        let gl = &self.lv.refs.get(w).ok_or_else(|| FusionError::ConjugateMissing(w.parts.clone()))?.space.gens;
        let gb = &self.lv.refs.get(&wb).ok_or_else(|| FusionError::ConjugateMissing(wb.parts.clone()))?.space.gens;
        let d = gl.dim();
        let gens = Generator::all(self.lv.ctx.n);
        let mut sys = CMat::zeros(gens.len() * d * d, d * d);
        for (g, a) in gens.iter().enumerate() {
            let m = a.matrix(gb);
            let nt = a.antipode_matrix(gl).transpose();
            // vec(MT − TNᵀ) = (1⊗M − N⊗1) vec T for column-major vec and Nᵀ-action on the right
            let blk = kron(&eye(d), &m) - kron(&nt.transpose(), &eye(d));
            sys.view_mut((g * d * d, 0), (d * d, d * d)).copy_from(&blk);
        }
        let ker = linalg::kernel(&sys, self.lv.ctx.tol)?;
        if ker.ncols() != 1 {
            return Err(FusionError::Numerical(format!("conjugation intertwiner for {w} has a {}-dim solution space", ker.ncols())));
        }
        let mut t = CMat::from_column_slice(d, d, ker.column(0).as_slice());
        let g = mm(&t.adjoint(), &t);
        let sc = g[(0, 0)].re;
        t /= C64::new(sc.sqrt(), 0.0);
        if let Some(z) = t.iter().find(|z| z.norm() > 1e-8).copied() {
            t /= z / z.norm();
        }
        Ok(t)
    }

    /// S(ω)_λ = (T_λ^{-1} ω_λ̄ T_λ)ᵀ.
    pub fn antipode(&self, w: &GroupoidElement) -> Result<GroupoidElement> {
        let mut blocks = BTreeMap::new();
        for lam in w.blocks.keys() {
            let t = self.conjugation(lam)?;
            let ti = linalg::inverse(&t)?;
            let wb = w.blocks.get(&conjugate(lam)).ok_or_else(|| FusionError::ConjugateMissing(lam.parts.clone()))?;
            blocks.insert(lam.clone(), mm(&mm(&ti, wb), &t).transpose());
        }
        Ok(GroupoidElement { blocks })
    }

    /// Σ ω_1 S(ω_2) (left = false) or Σ S(ω_1) ω_2 (left = true), from the corners of Δ(ω).
    pub fn antipode_contraction(&self, w: &GroupoidElement, left: bool) -> Result<GroupoidElement> {
        let fam = Family::coproduct(w);
        let mut blocks = BTreeMap::new();
        for lam in self.weights() {
            let lb = conjugate(&lam);
            let t = self.conjugation(&lam)?;
            let ti = linalg::inverse(&t)?;
            let d = t.ncols();
            let mut out = CMat::zeros(d, d);
            if !left {
                let z = self.corner(&fam, &[lam.clone(), lb])?;
                // out[i,j] = Σ Tinv[j,a] T[b,m] Z[(i,a),(m,b)]
                for i in 0..d {
                    for j in 0..d {
                        let mut s = ZERO;
                        for m in 0..d {
                            for a in 0..d {
                                for b in 0..d {
                                    s += ti[(j, a)] * t[(b, m)] * z[(i * d + a, m * d + b)];
                                }
                            }
                        }
                        out[(i, j)] = s;
                    }
                }
            } else {
                let z = self.corner(&fam, &[lb, lam.clone()])?;
                // out[i,j] = Σ Tinv[m,a] T[b,i] Z[(a,m),(b,j)]
                for i in 0..d {
                    for j in 0..d {
                        let mut s = ZERO;
                        for m in 0..d {
                            for a in 0..d {
                                for b in 0..d {
                                    s += ti[(m, a)] * t[(b, i)] * z[(a * d + m, b * d + j)];
                                }
                            }
                        }
                        out[(i, j)] = s;
                    }
                }
            }
            blocks.insert(lam, out);
        }
        Ok(GroupoidElement { blocks })
    }
}

/// Corners with more columns than this are compared on probe columns.
const PROBE_THRESHOLD: usize = 32;
const PROBE_COUNT: usize = 4;

fn probe_columns(cols: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    CMat::from_fn(cols, PROBE_COUNT, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// The flip V_a⊗V_b → V_b⊗V_a.
fn flip_pair(da: usize, db: usize) -> CMat {
    let mut f = CMat::zeros(da * db, da * db);
    for i in 0..da {
        for j in 0..db {
            f[(j * da + i, i * db + j)] = ONE;
        }
    }
    f
}

/// Levels needed by the groupoid suite: tuples of order up to `order` at the default section.
pub fn required_levels(lv_ctx: &crate::QContext, order: usize) -> usize {
    let max_deg = enumerate_alcove(lv_ctx).iter().map(|w| w.deg() as usize).max().unwrap_or(0);
    order * max_deg
}

fn cov(used: usize, total: usize, order: usize) -> String {
    format!("{used}/{total} order-{order} tuples")
}

/// The full identity suite for one section.
pub fn verify_groupoid(g: &Groupoid, opts: &GroupoidOptions) -> Vec<CheckReport> {
    let lv = g.lv;
    let ctx = lv.ctx;
    let tol = opts.tol;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let w1 = GroupoidElement::random(lv, &mut rng);
    let w2 = GroupoidElement::random(lv, &mut rng);
    let id = GroupoidElement::identity(lv);
    let budget = opts.memory_budget_mb;
    let t1 = g.tuples(1, usize::MAX, budget, opts.seed);
    let t2 = g.tuples(2, opts.max_tuples.max(64), budget, opts.seed);
    let t3 = g.tuples(3, opts.max_tuples, budget, opts.seed + 1);
    let t4 = g.tuples(4, opts.max_tuples, budget, opts.seed + 2);
    let p = Family::unit_coproduct();
    let d = |w: &GroupoidElement| Family::coproduct(w);
    let prod = Family::product;
    let mut out = Vec::new();

    out.push(timed_result("section-isometric", || {
        let mut worst = 0.0f64;
        for w in g.weights() {
            let s = g.section.selector(lv, &w);
            worst = worst.max(linalg::id_residual(&mm(&s.adjoint(), &s)));
        }
        Ok(CheckReport::residual("section-isometric", worst, tol, format!("{} weights", g.weights().len())))
    }));
    out.push(timed_result("coproduct-unit", || {
        let mut worst = 0.0f64;
        let mut n = 0;
        for t in t2.0.iter().filter(|t| g.tuple_levels(t).iter().sum::<usize>() <= lv.ambient_max()) {
            let fam = g.corner(&p, t)?;
            worst = worst.max(diff_abs(&fam, &g.ambient_unit_corner(&t[0], &t[1])?));
            n += 1;
        }
        Ok(CheckReport::residual("coproduct-unit", worst, tol, format!("{n} pairs against the ambient projection")))
    }));
    out.push(timed_result("unit-idempotent", || {
        let r = g.compare(&prod(vec![p.clone(), p.clone()]), &p, &t2.0)?;
        Ok(CheckReport::residual("unit-idempotent", r, tol, cov(t2.0.len(), t2.1, 2)))
    }));
    out.push(timed_result("unit-not-identity", || {
        let mut worst = 0.0f64;
        for t in &t2.0 {
            worst = worst.max(linalg::id_residual(&g.corner(&p, t)?));
        }
        Ok(CheckReport::predicate("unit-not-identity", worst > 1e-3, worst, cov(t2.0.len(), t2.1, 2)))
    }));
    out.push(timed_result("coproduct-multiplicative", || {
        let r = g.compare(&d(&w1.mul(&w2)), &prod(vec![d(&w1), d(&w2)]), &t2.0)?;
        Ok(CheckReport::residual("coproduct-multiplicative", r, tol, cov(t2.0.len(), t2.1, 2)))
    }));
    out.push(timed_result("coproduct-support", || {
        let r = g
            .compare(&prod(vec![p.clone(), d(&w1)]), &d(&w1), &t2.0)?
            .max(g.compare(&prod(vec![d(&w1), p.clone()]), &d(&w1), &t2.0)?);
        Ok(CheckReport::residual("coproduct-support", r, tol, cov(t2.0.len(), t2.1, 2)))
    }));
    out.push(timed_result("counit-multiplicative", || {
        let a = w1.mul(&w2).counit() - w1.counit() * w2.counit();
        let b = w1.adjoint().counit() - w1.counit().conj();
        Ok(CheckReport::residual("counit-multiplicative", a.norm().max(b.norm()), tol, "random pair"))
    }));
    out.push(timed_result("counit-property", || {
        let mut worst = 0.0f64;
        for slot in 0..2 {
            worst = worst.max(g.compare(&Family::counit(slot, d(&w1)), &Family::Node(w1.clone()), &t1.0)?);
        }
        Ok(CheckReport::residual("counit-property", worst, tol, "both slots, all weights"))
    }));
    out.push(timed_result("antipode-antimultiplicative", || {
        let lhs = g.antipode(&w1.mul(&w2))?;
        let rhs = g.antipode(&w2)?.mul(&g.antipode(&w1)?);
        let s1 = g.antipode(&id)?.diff(&id);
        Ok(CheckReport::residual("antipode-antimultiplicative", lhs.diff(&rhs).max(s1), tol, "random pair and the unit"))
    }));
    out.push(timed_result("antipode-star", || {
        let r = g.antipode(&w1.adjoint())?.diff(&g.antipode(&w1)?.adjoint());
        Ok(CheckReport::residual("antipode-star", r, tol, "random element"))
    }));
    out.push(timed_result("antipode-square", || {
        let s2 = g.antipode(&g.antipode(&w1)?)?;
        let mut worst = 0.0f64;
        for (w, m) in &w1.blocks {
            let gens = &lv.refs[w].space.gens;
            let expect = mm(&mm(&gens.k_two_rho_inv(), m), &gens.k_two_rho());
            worst = worst.max(diff_abs(&s2.blocks[w], &expect));
        }
        Ok(CheckReport::residual("antipode-square", worst, tol, "random element, K_{2ρ} conjugation"))
    }));
    out.push(timed_result("antipode-on-generators", || {
        let mut worst = 0.0f64;
        for a in Generator::all(ctx.n) {
            let s = g.antipode(&GroupoidElement::pi(lv, a))?;
            for (w, m) in &s.blocks {
                worst = worst.max(diff_abs(m, &a.antipode_matrix(&lv.refs[w].space.gens)));
            }
        }
        Ok(CheckReport::residual("antipode-on-generators", worst, tol, "S(π(a)) = π(S(a))"))
    }));
    out.push(timed_result("antipode-axiom", || {
        let needed = g.weights().iter().map(|w| g.section.level(w) + g.section.level(&conjugate(w))).max().unwrap_or(0);
        if needed > lv.n_max() {
            return Ok(CheckReport::skipped("antipode-axiom", format!("needs level {needed}")));
        }
        let mut worst = 0.0f64;
        for w in [&w1, &id] {
            let e = w.counit();
            for left in [false, true] {
                let r = g.antipode_contraction(w, left)?;
                for m in r.blocks.values() {
                    worst = worst.max(diff_abs(m, &(eye(m.nrows()) * e)));
                }
            }
        }
        Ok(CheckReport::residual("antipode-axiom", worst, tol, "both contractions, random element and unit"))
    }));

    // associators
    let phi = Family::Phi;
    let psi = Family::Psi;
    let dd_left = |f: Family| Family::split(0, Family::split(0, f));
    let dd_right = |f: Family| Family::split(1, Family::split(0, f));
    out.push(timed_result("associator-idempotent", || {
        let r = g
            .compare(&prod(vec![phi.clone(), phi.clone()]), &phi, &t3.0)?
            .max(g.compare(&prod(vec![psi.clone(), psi.clone()]), &psi, &t3.0)?);
        Ok(CheckReport::residual("associator-idempotent", r, tol, cov(t3.0.len(), t3.1, 3)))
    }));
    out.push(timed_result("associator-support", || {
        let r = g
            .compare(&prod(vec![psi.clone(), phi.clone()]), &dd_left(Family::Identity(1)), &t3.0)?
            .max(g.compare(&prod(vec![phi.clone(), psi.clone()]), &dd_right(Family::Identity(1)), &t3.0)?);
        Ok(CheckReport::residual("associator-support", r, tol, cov(t3.0.len(), t3.1, 3)))
    }));
    out.push(timed_result("associator-quasi-inverse", || {
        let r = g
            .compare(&prod(vec![psi.clone(), phi.clone(), psi.clone()]), &psi, &t3.0)?
            .max(g.compare(&prod(vec![phi.clone(), psi.clone(), phi.clone()]), &phi, &t3.0)?);
        Ok(CheckReport::residual("associator-quasi-inverse", r, tol, cov(t3.0.len(), t3.1, 3)))
    }));
    out.push(timed_result("associator-intertwining", || {
        let l = dd_left(Family::Node(w1.clone()));
        let rt = dd_right(Family::Node(w1.clone()));
        let r = g
            .compare(&prod(vec![phi.clone(), l.clone()]), &prod(vec![rt.clone(), phi.clone()]), &t3.0)?
            .max(g.compare(&prod(vec![psi.clone(), rt]), &prod(vec![l, psi.clone()]), &t3.0)?);
        Ok(CheckReport::residual("associator-intertwining", r, tol, cov(t3.0.len(), t3.1, 3)))
    }));
    out.push(timed_result("associator-from-units", || {
        let r = g.compare(&prod(vec![dd_right(Family::Identity(1)), dd_left(Family::Identity(1))]), &phi, &t3.0)?.max(
            g.compare(&prod(vec![dd_left(Family::Identity(1)), dd_right(Family::Identity(1))]), &psi, &t3.0)?,
        );
        Ok(CheckReport::residual("associator-from-units", r, tol, cov(t3.0.len(), t3.1, 3)))
    }));
    out.push(timed_result("coproduct-strictness", || {
        let mut worst = 0.0f64;
        for w in [&id, &w1] {
            let a = dd_left(Family::Node(w.clone()));
            let b = dd_right(Family::Node(w.clone()));
            worst = worst.max(g.compare(&a, &b, &t3.0)?);
        }
        Ok(CheckReport::predicate("coproduct-strictness", worst > 1e-3, worst, cov(t3.0.len(), t3.1, 3)))
    }));
    out.push(timed_result("cocycle", || {
        let lhs = prod(vec![Family::split(2, phi.clone()), Family::split(0, phi.clone())]);
        let rhs = prod(vec![
            Family::Tensor(vec![Family::Identity(1), phi.clone()]),
            Family::split(1, phi.clone()),
            Family::Tensor(vec![phi.clone(), Family::Identity(1)]),
        ]);
        let r = g.compare(&lhs, &rhs, &t4.0)?;
        Ok(CheckReport::residual("cocycle", r, tol, cov(t4.0.len(), t4.1, 4)))
    }));
    out.push(timed_result("cocycle-counit", || {
        let mut worst = 0.0f64;
        for slot in 0..3 {
            worst = worst.max(g.compare(&Family::counit(slot, phi.clone()), &p, &t2.0)?);
        }
        Ok(CheckReport::residual("cocycle-counit", worst, tol, cov(t2.0.len(), t2.1, 2)))
    }));

    // R-elements
    let r = Family::R;
    let r1 = Family::R1;
    let pop = Family::Opposite(Box::new(p.clone()));
    out.push(timed_result("r-support", || {
        let res = [
            g.compare(&prod(vec![r.clone(), p.clone()]), &r, &t2.0)?,
            g.compare(&prod(vec![pop.clone(), r.clone()]), &r, &t2.0)?,
            g.compare(&prod(vec![r1.clone(), pop.clone()]), &r1, &t2.0)?,
            g.compare(&prod(vec![p.clone(), r1.clone()]), &r1, &t2.0)?,
        ];
        Ok(CheckReport::residual("r-support", res.into_iter().fold(0.0, f64::max), tol, cov(t2.0.len(), t2.1, 2)))
    }));
    out.push(timed_result("r-intertwining", || {
        let dop = Family::Opposite(Box::new(d(&w1)));
        let a = g.compare(&prod(vec![r.clone(), d(&w1), r1.clone()]), &dop, &t2.0)?;
        let b = g.compare(&prod(vec![r1.clone(), dop.clone(), r.clone()]), &d(&w1), &t2.0)?;
        Ok(CheckReport::residual("r-intertwining", a.max(b), tol, cov(t2.0.len(), t2.1, 2)))
    }));
    out.push(timed_result("r-block-braiding", || block_braiding_report(g, tol)));

    // π
    out.push(timed_result("pi-coproduct", || {
        let mut worst = 0.0f64;
        for a in Generator::all(ctx.n) {
            let da = d(&GroupoidElement::pi(lv, a));
            let pp = Family::PiPi(a);
            worst = worst.max(g.compare(&prod(vec![p.clone(), pp.clone()]), &da, &t2.0)?);
            worst = worst.max(g.compare(&prod(vec![pp, p.clone()]), &da, &t2.0)?);
        }
        Ok(CheckReport::residual("pi-coproduct", worst, tol, cov(t2.0.len(), t2.1, 2)))
    }));
    out.push(timed_result("pi-star", || {
        let mut worst = 0.0f64;
        for a in Generator::all(ctx.n) {
            worst = worst.max(GroupoidElement::pi(lv, a).adjoint().diff(&GroupoidElement::pi(lv, a.star())));
        }
        Ok(CheckReport::residual("pi-star", worst, tol, "all generators"))
    }));
    out.push(timed_result("pi-surjective", || {
        let (rank, full) = pi_span_rank(lv)?;
        Ok(CheckReport::predicate("pi-surjective", rank == full, rank as f64, format!("rank {rank} of {full}")))
    }));
    out.push(timed_result("coproduct-star", || coproduct_star_report(g, &w1, &t2.0, tol)));
    out.push(timed_result("cstar-identity", || {
        let n = w1.norm();
        let r = (w1.adjoint().mul(&w1).norm() - n * n).abs() / (n * n).max(1.0);
        Ok(CheckReport::residual("cstar-identity", r, tol, "random element"))
    }));
    out.push(timed_result("iterated-coproduct-reduction", || {
        let mut worst = 0.0f64;
        let node = Family::Node(w1.clone());
        // right-nested iterates of order 3 and 4
        for (n, t) in [(2usize, &t3), (3, &t4)] {
            let right = (0..n).fold(node.clone(), |acc, i| Family::split(i, acc));
            let pn = Family::left_iterate(n, Family::Identity(1));
            let lhs = Family::left_iterate(n, node.clone());
            worst = worst.max(g.compare(&lhs, &prod(vec![pn.clone(), right, pn]), &t.0)?);
        }
        Ok(CheckReport::residual("iterated-coproduct-reduction", worst, tol, format!("{} + {} tuples", t3.0.len(), t4.0.len())))
    }));
    out.extend(tensor_equivalence_reports(g, opts, &w1));
    out.push(timed_result("rep-positivity", || rep_positivity_report(g, opts)));
    out.push(timed_result("functor-full", || functor_full_report(g)));
    out
}

/// Ē_{h,k} against the ambient Σ_{h,k}-flipped R chain on V^{⊗(h+k)}.
fn block_braiding_report(g: &Groupoid, tol: f64) -> Result<CheckReport> {
    let lv = g.lv;
    let n = lv.ctx.n;
    let mut worst = 0.0f64;
    let mut count = 0;
    for h in 1..=3 {
        for k in 1..=3 {
            if h + k > lv.ambient_max().min(6) {
                continue;
            }
            // ε(c_{h,k}) = Σ_{h,k}·(R_{(h),(k)}) with R_{(h),(k)} = Π R_{i,j}, i in the first block
            let mut t = LegTensor::identity(vec![n; h + k]);
            for i in (0..h).rev() {
                for j in h..h + k {
                    t = t.apply_pair(i, j, &lv.braid.r);
                }
            }
            let perm: Vec<usize> = (h..h + k).chain(0..h).collect();
            let amb = t.permute(&perm).into_matrix();
            let word = lv.braid.word_matrix(&block_braid_word(h, k), h + k);
            worst = worst.max(diff_abs(&amb, &word));
            count += 1;
        }
    }
    Ok(CheckReport::residual("r-block-braiding", worst, tol, format!("{count} block shapes")))
}

/// Δ(ω)* = π⊗π(R̄)Δ(ω*)π⊗π(R̄)^{-1} on corners, for a random ω, the unit and π(generators).
fn coproduct_star_report(g: &Groupoid, w1: &GroupoidElement, tuples: &[Vec<Weight>], tol: f64) -> Result<CheckReport> {
    let lv = g.lv;
    let mut elems = vec![w1.clone(), GroupoidElement::identity(lv)];
    elems.extend(Generator::all(lv.ctx.n).into_iter().map(|a| GroupoidElement::pi(lv, a)));
    let mut worst = 0.0f64;
    let mut covered = 0;
    let mut skipped = Vec::new();
    for t in tuples {
        let (h, k) = (g.section.level(&t[0]), g.section.level(&t[1]));
        if h.max(k) > lv.ambient_max() {
            skipped.push(format!("{}⊗{} (ambient)", t[0], t[1]));
            continue;
        }
        let rb = match g.pair_rbar(&t[0], &t[1]) {
            Ok(m) => m,
            Err(FusionError::BranchCollision { .. }) => {
                skipped.push(format!("{}⊗{} (branch collision)", t[0], t[1]));
                continue;
            }
            Err(e) => return Err(e),
        };
        let rbi = linalg::inverse(&rb)?;
        worst = worst.max(linalg::herm_residual(&rb));
        for w in &elems {
            let lhs = g.corner(&Family::coproduct(w), t)?.adjoint();
            let rhs = mm(&mm(&rb, &g.corner(&Family::coproduct(&w.adjoint()), t)?), &rbi);
            worst = worst.max(diff_abs(&lhs, &rhs) / max_abs(&lhs).max(1.0));
        }
        covered += 1;
    }
    let mut cov = format!("{covered}/{} pairs", tuples.len());
    if !skipped.is_empty() {
        cov.push_str(&format!("; skipped {}", skipped.join(", ")));
    }
    if covered == 0 {
        return Ok(CheckReport::skipped("coproduct-star", cov));
    }
    Ok(CheckReport::residual("coproduct-star", worst, tol, cov))
}

/// Rank of the span of π(words) in ⊕ L(V_λ), and the full dimension Σ d_λ².
pub fn pi_span_rank(lv: &Levels) -> Result<(usize, usize)> {
    let ws: Vec<&Weight> = lv.refs.keys().collect();
    let full: usize = ws.iter().map(|w| lv.refs[*w].dim().pow(2)).sum();
    let gens: Vec<GroupoidElement> = Generator::all(lv.ctx.n).into_iter().map(|a| GroupoidElement::pi(lv, a)).collect();
    let flatten = |e: &GroupoidElement| -> Vec<C64> { ws.iter().flat_map(|w| e.blocks[*w].iter().copied().collect::<Vec<_>>()).collect() };
    // orthonormal basis of the span, grown by Gram–Schmidt with reorthogonalization
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut add = |v: Vec<C64>| -> bool {
        let norm0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let mut v = v;
        for _ in 0..2 {
            for b in &basis {
                let c: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(y, x)| *y -= c * x);
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 1e-9 * norm0.max(1.0) {
            return false;
        }
        basis.push(v.into_iter().map(|z| z / norm).collect());
        true
    };
    let id = GroupoidElement::identity(lv);
    add(flatten(&id));
    let mut frontier = vec![id];
    // algebra closure: multiply the newest elements by generators until the span is stable
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for f in &frontier {
            for a in &gens {
                let cand = a.mul(f);
                if add(flatten(&cand)) {
                    next.push(cand);
                }
            }
        }
        frontier = next;
    }
    Ok((basis.len(), full))
}

/// Q_{n,r} = Δ_left^{(n+r−1)}(I)·(Δ_left^{(n−1)}⊗Δ_left^{(r−1)})(Δ(I)).
pub fn q_family(n: usize, r: usize) -> Family {
    Family::product(vec![
        Family::left_iterate(n + r - 1, Family::Identity(1)),
        Family::left_iterate_slots(&[n - 1, r - 1], Family::unit_coproduct()),
    ])
}

/// The quasi-inverse companion of Q_{n,r} with the factors swapped.
fn q_bar_family(n: usize, r: usize) -> Family {
    Family::product(vec![
        Family::left_iterate_slots(&[n - 1, r - 1], Family::unit_coproduct()),
        Family::left_iterate(n + r - 1, Family::Identity(1)),
    ])
}

fn tensor_equivalence_reports(g: &Groupoid, opts: &GroupoidOptions, w: &GroupoidElement) -> Vec<CheckReport> {
    let tol = opts.tol;
    let budget = opts.memory_budget_mb;
    let small = (opts.max_tuples / 4).max(8);
    let mut out = Vec::new();
    out.push(timed_result("tensor-structure", || {
        let mut worst = 0.0f64;
        let mut count = 0;
        for (n, r) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            let (ts, _) = g.tuples(n + r, small, budget, opts.seed + (n * 3 + r) as u64);
            let q = q_family(n, r);
            let qb = q_bar_family(n, r);
            // intertwining and quasi-invertibility
            let lhs = Family::product(vec![q.clone(), Family::left_iterate_slots(&[n - 1, r - 1], Family::coproduct(w))]);
            let rhs = Family::product(vec![Family::left_iterate(n + r - 1, Family::Node(w.clone())), q.clone()]);
            worst = worst.max(g.compare(&lhs, &rhs, &ts)?);
            worst = worst.max(g.compare(&Family::product(vec![q.clone(), qb.clone(), q.clone()]), &q, &ts)?);
            worst = worst.max(g.compare(&Family::product(vec![qb.clone(), q.clone(), qb.clone()]), &qb, &ts)?);
            count += ts.len();
        }
        let (t2, _) = g.tuples(2, small, budget, opts.seed);
        worst = worst.max(g.compare(&q_family(1, 1), &Family::unit_coproduct(), &t2)?);
        Ok(CheckReport::residual("tensor-structure", worst, tol, format!("n,r ∈ {{1,2}}, {count} tuples")))
    }));
    out.push(timed_result("tensor-hexagon", || {
        let mut worst = 0.0f64;
        let mut count = 0;
        for (m, n, r) in (0..3).map(|_| [1usize, 2]).multi_cartesian_product().map(|v| (v[0], v[1], v[2])) {
            let (ts, _) = g.tuples(m + n + r, small, budget, opts.seed + (m * 9 + n * 3 + r) as u64);
            let lhs = Family::product(vec![
                q_family(m, n + r),
                Family::Tensor(vec![Family::Identity(m), q_family(n, r)]),
                Family::left_iterate_slots(&[m - 1, n - 1, r - 1], Family::Phi),
            ]);
            let rhs = Family::product(vec![q_family(m + n, r), Family::Tensor(vec![q_family(m, n), Family::Identity(r)])]);
            worst = worst.max(g.compare(&lhs, &rhs, &ts)?);
            count += ts.len();
        }
        Ok(CheckReport::residual("tensor-hexagon", worst, tol, format!("m,n,r ∈ {{1,2}}, {count} tuples")))
    }));
    out
}

/// Wenzl positivity of the support idempotents of V̂^{⊗n}∘Δ^{(n−1)}(I) for every bracketing.
fn rep_positivity_report(g: &Groupoid, opts: &GroupoidOptions) -> Result<CheckReport> {
    let lv = g.lv;
    let ctx = lv.ctx;
    let mut min_eig = f64::INFINITY;
    let mut covered = Vec::new();
    let mut skipped = Vec::new();
    for n in 2..=opts.dense_cap.min(4).min(lv.n_max()) {
        let rb = match braiding::rbar_full(&ctx, n) {
            Ok(m) => m,
            Err(e @ FusionError::BranchCollision { .. }) => {
                skipped.push(format!("n={n}: {e}"));
                continue;
            }
            Err(e) => return Err(e),
        };
        for b in Bracketing::all(n) {
            let f = b.iterate(Family::Identity(1));
            let z = g.at_levels(&f, &vec![1; n])?;
            let q = linalg::range_basis(&z, ctx.tol)?;
            let gram = mm(&mm(&q.adjoint(), &rb), &q);
            if linalg::herm_residual(&gram) > 1e-8 {
                return Ok(CheckReport::residual("rep-positivity", f64::INFINITY, 0.0, format!("form not Hermitian on {}", b.label())));
            }
            min_eig = min_eig.min(linalg::min_hermitian_eigenvalue(&gram));
        }
        covered.push(n);
    }
    let mut cov = format!("all bracketings for n ∈ {covered:?}");
    if !skipped.is_empty() {
        cov.push_str(&format!("; skipped {}", skipped.join(", ")));
    }
    if covered.is_empty() {
        return Ok(CheckReport::skipped("rep-positivity", cov));
    }
    Ok(CheckReport::predicate("rep-positivity", min_eig > 1e-8, min_eig, cov))
}

/// Commutant of the level action computed numerically equals Σ m_λ².
fn functor_full_report(g: &Groupoid) -> Result<CheckReport> {
    let lv = g.lv;
    let mut ok = true;
    let mut levels = Vec::new();
    for n in 1..=lv.n_max().min(4) {
        let d = lv.dim(n);
        if d > 40 {
            break;
        }
        let gens = lv.level_generators(n)?;
        let mats: Vec<CMat> = gens.e.iter().chain(&gens.f).chain(&gens.k).cloned().collect();
        let mut sys = CMat::zeros(mats.len() * d * d, d * d);
        for (i, m) in mats.iter().enumerate() {
            let blk = kron(&eye(d), m) - kron(&m.transpose(), &eye(d));
            sys.view_mut((i * d * d, 0), (d * d, d * d)).copy_from(&blk);
        }
        let dim = linalg::kernel(&sys, lv.ctx.tol)?.ncols();
        let expect: usize = lv.levels[n].multiplicities().values().map(|m| m * m).sum();
        ok &= dim == expect;
        levels.push(format!("n={n}: {dim}/{expect}"));
    }
    Ok(CheckReport::predicate("functor-full", ok, 0.0, levels.join(", ")))
}

/// Twisting identities between two sections on the same levels: corners of PΔ(ω)P at one
/// section agree with corners of Δ(ω) at the other.
pub fn compare_sections(a: &Groupoid, b: &Groupoid, opts: &GroupoidOptions) -> CheckReport {
    timed_result("section-independence", || {
        let lv = a.lv;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
        let elems = [GroupoidElement::identity(lv), GroupoidElement::random(lv, &mut rng), GroupoidElement::random(lv, &mut rng)];
        let ws = a.weights();
        let mut worst = 0.0f64;
        let mut count = 0;
        let mut cross = 0;
        for x in &ws {
            for y in &ws {
                let t = [x.clone(), y.clone()];
                let sa: usize = a.tuple_levels(&t).iter().sum();
                let sb: usize = b.tuple_levels(&t).iter().sum();
                if sa.max(sb) > lv.n_max() {
                    continue;
                }
                if sa != sb {
                    cross += 1;
                }
                for w in &elems {
                    let dw = Family::coproduct(w);
                    let pdp = Family::product(vec![Family::unit_coproduct(), dw.clone(), Family::unit_coproduct()]);
                    // phases of the two embeddings of V_x⊗V_y
                    let r1 = diff_abs(&b.corner(&pdp, &t)?, &a.corner(&dw, &t)?);
                    let r2 = diff_abs(&a.corner(&pdp, &t)?, &b.corner(&dw, &t)?);
                    worst = worst.max(r1).max(r2);
                }
                count += 1;
            }
        }
        Ok(CheckReport::residual(
            "section-independence",
            worst,
            opts.tol,
            format!("{count} pairs, {cross} with different total levels"),
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;
    use crate::wenzl::LevelOptions;
    use crate::QContext;

    fn w(p: &[i64]) -> Weight {
        Weight::new(p.to_vec()).unwrap()
    }

    fn levels(n: usize, ell: usize, nmax: usize) -> Levels {
        let ctx = QContext::new(n, ell).unwrap();
        let mut o = LevelOptions::new(nmax);
        o.ambient_max = nmax.min(6);
        Levels::build(&ctx, &o).unwrap()
    }

    #[test]
    fn default_section_examples() {
        let lv = levels(2, 3, 2);
        let s = build_section(&lv, SectionPolicy::Default).unwrap();
        assert_eq!(s.level(&w(&[0])), 0);
        assert_eq!(s.level(&w(&[1])), 1);
        let lv = levels(3, 4, 2);
        let s = build_section(&lv, SectionPolicy::Default).unwrap();
        assert_eq!(s.level(&w(&[1, 1])), 2);
    }

    #[test]
    fn unit_examples() {
        let lv = levels(2, 3, 2);
        let g = Groupoid::with_default_section(&lv).unwrap();
        let p = Family::unit_coproduct();
        let b = g.corner(&p, &[w(&[1]), w(&[1])]).unwrap();
        let tr = b.trace();
        assert!((tr - ONE).norm() < 1e-10, "rank-1 idempotent, trace {tr}");
        assert!(diff_abs(&mm(&b, &b), &b) < 1e-10);
        let b0 = g.corner(&p, &[w(&[0]), w(&[1])]).unwrap();
        assert!(linalg::id_residual(&b0) < 1e-12);
    }

    #[test]
    fn blockwise_corner_product_is_not_idempotent() {
        // products of corners drop the copies outside the section; families keep them
        let lv = levels(2, 4, 4);
        let g = Groupoid::with_default_section(&lv).unwrap();
        let p = Family::unit_coproduct();
        let t = [w(&[2]), w(&[2])];
        let c = g.corner(&p, &t).unwrap();
        assert!(diff_abs(&mm(&c, &c), &c) > 0.1);
        let cc = g.corner(&Family::product(vec![p.clone(), p.clone()]), &t).unwrap();
        assert!(diff_abs(&cc, &c) < 1e-10);
    }

    #[test]
    fn block_braid_word_shapes() {
        assert_eq!(block_braid_word(1, 1), vec![1]);
        assert_eq!(block_braid_word(1, 2), vec![2, 1]);
        assert_eq!(block_braid_word(2, 1), vec![1, 2]);
    }

    #[test]
    fn strict_quasi_coassociativity_at_the_smallest_level() {
        let lv = levels(2, 3, 3);
        let g = Groupoid::with_default_section(&lv).unwrap();
        let t = [w(&[1]), w(&[1]), w(&[1])];
        let phi = g.corner(&Family::Phi, &t).unwrap();
        let pp = g.corner(&Family::product(vec![Family::Psi, Family::Phi]), &t).unwrap();
        assert!(diff_abs(&phi, &pp) > 1e-3);
    }

    #[test]
    fn suite_passes_small_configs() {
        for (n, ell) in [(2, 3), (2, 4), (3, 4)] {
            let ctx = QContext::new(n, ell).unwrap();
            let lv = levels(n, ell, required_levels(&ctx, 4));
            let g = Groupoid::with_default_section(&lv).unwrap();
            let opts = GroupoidOptions { max_tuples: 32, ..Default::default() };
            for r in verify_groupoid(&g, &opts) {
                assert!(r.status != Status::Fail, "({n},{ell}) {r:?}");
            }
        }
    }

    #[test]
    fn sections_agree() {
        let lv = levels(2, 4, 8);
        let a = Groupoid::with_default_section(&lv).unwrap();
        let b = Groupoid::new(&lv, build_section(&lv, SectionPolicy::Seeded(3)).unwrap());
        assert!(b.weights().iter().any(|x| b.section.level(x) != a.section.level(x)));
        let r = compare_sections(&a, &b, &GroupoidOptions::default());
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn antipode_of_unit_and_counit() {
        let lv = levels(3, 4, 3);
        let g = Groupoid::with_default_section(&lv).unwrap();
        let id = GroupoidElement::identity(&lv);
        assert!(g.antipode(&id).unwrap().diff(&id) < 1e-10);
        assert!((id.counit() - ONE).norm() < 1e-14);
    }

    #[test]
    fn pi_is_surjective() {
        let lv = levels(2, 4, 2);
        let (r, full) = pi_span_rank(&lv).unwrap();
        assert_eq!((r, full), (14, 14));
    }
}
