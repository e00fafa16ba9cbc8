//! Dense complex linear algebra helpers and the leg-tensor engine.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{FusionError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<Complex64>;

pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

/// Raw strided complex GEMM: c = a·b with explicit row/column strides.
#[allow(clippy::too_many_arguments)]
fn gemm_raw(
    m: usize,
    k: usize,
    n: usize,
    a: &[C64],
    rsa: usize,
    csa: usize,
    b: &[C64],
    rsb: usize,
    csb: usize,
    out: &mut [C64],
    rsc: usize,
    csc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        out.iter_mut().for_each(|x| *x = ZERO);
        return;
    }
    // SAFETY: Complex64 is repr(C) with layout [f64; 2]; slices cover the strided extents.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            rsa as isize,
            csa as isize,
            b.as_ptr() as *const [f64; 2],
            rsb as isize,
            csb as isize,
            [0.0, 0.0],
            out.as_mut_ptr() as *mut [f64; 2],
            rsc as isize,
            csc as isize,
        );
    }
}

/// Matrix product a·b.
pub fn mm(a: &CMat, b: &CMat) -> CMat {
    assert_eq!(a.ncols(), b.nrows(), "dimension mismatch in product");
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = CMat::zeros(m, n);
    gemm_raw(m, k, n, a.as_slice(), 1, m, b.as_slice(), 1, k, out.as_mut_slice(), 1, m);
    out
}

/// Product of a chain of matrices, left to right.
pub fn mm_chain(ms: &[&CMat]) -> CMat {
    let mut acc = ms[0].clone();
    for m in &ms[1..] {
        acc = mm(&acc, m);
    }
    acc
}

/// a† · b.
pub fn mm_ha(a: &CMat, b: &CMat) -> CMat {
    mm(&a.adjoint(), b)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac, br, bc) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    let mut out = CMat::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for jj in 0..bc {
                for ii in 0..br {
                    out[(i * br + ii, j * bc + jj)] = x * b[(ii, jj)];
                }
            }
        }
    }
    out
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn diff_abs(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in residual");
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Max entry of m − m†.
pub fn herm_residual(m: &CMat) -> f64 {
    diff_abs(m, &m.adjoint())
}

/// Residual of m against the identity.
pub fn id_residual(m: &CMat) -> f64 {
    diff_abs(m, &eye(m.nrows()))
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Number of singular values above the rank threshold 10³·tol relative to max(1, s_0).
/// Values inside the ambiguity band (tol·scale, threshold] raise RankDeficiency.
fn numerical_rank(s: &[f64], tol: f64, what: &str) -> Result<usize> {
    let scale = s.first().copied().unwrap_or(0.0).max(1.0);
    let thr = 1e3 * tol * scale;
    let r = s.iter().filter(|&&x| x > thr).count();
    if let Some(&x) = s.iter().find(|&&x| x <= thr && x > tol * scale) {
        return Err(FusionError::RankDeficiency(format!("{what}: singular value {x:e} inside ({:e}, {thr:e}]", tol * scale)));
    }
    Ok(r)
}

/// Orthonormal basis of the column range.
pub fn range_basis(m: &CMat, tol: f64) -> Result<CMat> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Ok(CMat::zeros(m.nrows(), 0));
    }
    let svd = m.clone().svd(true, false);
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let s: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let r = numerical_rank(&s, tol, "range")?;
    let u = svd.u.unwrap();
    Ok(CMat::from_fn(m.nrows(), r, |i, j| u[(i, idx[j])]))
}

pub fn rank(m: &CMat, tol: f64) -> Result<usize> {
    numerical_rank(&singular_values(m), tol, "rank")
}

/// Orthonormal basis of the kernel.
pub fn kernel(m: &CMat, tol: f64) -> Result<CMat> {
    let (r, c) = m.shape();
    if c == 0 {
        return Ok(CMat::zeros(0, 0));
    }
    if r == 0 {
        return Ok(eye(c));
    }
    // pad to at least square so that the thin SVD carries a full right basis
    let padded = if r < c {
        let mut p = CMat::zeros(c, c);
        p.view_mut((0, 0), (r, c)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let s: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let rk = numerical_rank(&s, tol, "kernel")?;
    let k = c - rk;
    Ok(CMat::from_fn(c, k, |i, j| vt[(idx[rk + j], i)].conj()))
}

/// Moore–Penrose pseudo-inverse with the relative cutoff 10³·tol.
pub fn pinv(m: &CMat, tol: f64) -> CMat {
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max).max(1.0);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut out = CMat::zeros(m.ncols(), m.nrows());
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > 1e3 * tol * smax {
            let vk = vt.row(k).adjoint();
            let uk = u.column(k).adjoint();
            out += (vk * uk) / C64::new(s, 0.0);
        }
    }
    out
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone().try_inverse().ok_or_else(|| FusionError::Numerical("singular matrix".into()))
}

/// Eigenvalues of a Hermitian matrix in increasing order.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut e: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    e.sort_by(|a, b| a.partial_cmp(b).unwrap());
    e
}

pub fn min_hermitian_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

/// Lower Cholesky factor of a Hermitian positive definite matrix.
pub fn cholesky(m: &CMat) -> Result<CMat> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    match h.cholesky() {
        Some(ch) => Ok(ch.l()),
        None => Err(FusionError::PositivityFailure(min_hermitian_eigenvalue(m))),
    }
}

/// Evaluate the Hermite interpolation polynomial of f at the matrix x.
/// `vals[i][j]` holds f^{(j)}(nodes[i]); every node carries the same number of derivatives.
pub fn hermite_eval(nodes: &[C64], vals: &[Vec<C64>], x: &CMat) -> CMat {
    let m = vals.first().map_or(0, |v| v.len());
    let z: Vec<C64> = nodes.iter().flat_map(|&a| std::iter::repeat_n(a, m)).collect();
    let n = z.len();
    let d = x.nrows();
    if n == 0 {
        return CMat::zeros(d, d);
    }
    let mut tab = vec![vec![ZERO; n]; n];
    for (i, row) in tab.iter_mut().enumerate() {
        row[0] = vals[i / m][0];
    }
    let mut fact = 1.0;
    for j in 1..n {
        fact *= j as f64;
        for i in 0..n - j {
            tab[i][j] = if (z[i + j] - z[i]).norm() < 1e-12 {
                vals[i / m][j] / fact
            } else {
                (tab[i + 1][j - 1] - tab[i][j - 1]) / (z[i + j] - z[i])
            };
        }
    }
    let id = eye(d);
    let mut res = &id * tab[0][n - 1];
    for j in (0..n - 1).rev() {
        res = mm(&res, &(x - &id * z[j])) + &id * tab[0][j];
    }
    res
}

/// Minimal multiplicity M ≤ max_m for which Π (x − z_i)^M vanishes numerically.
/// Each factor is normalized to max-abs 1 before multiplying; `thr` bounds the product.
pub fn annihilating_multiplicity(nodes: &[C64], x: &CMat, thr: f64, max_m: usize) -> Option<usize> {
    let id = eye(x.nrows());
    let mut base = id.clone();
    for &z in nodes {
        let s = x - &id * z;
        let n = max_abs(&s);
        if n > 0.0 {
            base = mm(&base, &(s / C64::new(n, 0.0)));
        } else {
            base = s;
        }
    }
    let mut acc = base.clone();
    for m in 1..=max_m {
        if max_abs(&acc) < thr {
            return Some(m);
        }
        acc = mm(&acc, &base);
    }
    None
}

/// A block of columns stored row-major over a list of legs: index [l_0]..[l_k][col].
#[derive(Clone, Debug)]
pub struct LegTensor {
    pub dims: Vec<usize>,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl LegTensor {
    pub fn rows(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn from_matrix(dims: Vec<usize>, m: &CMat) -> Self {
        let rows: usize = dims.iter().product();
        assert_eq!(rows, m.nrows(), "leg dims do not match matrix rows");
        let cols = m.ncols();
        let mut data = vec![ZERO; rows * cols];
        for j in 0..cols {
            for i in 0..rows {
                data[i * cols + j] = m[(i, j)];
            }
        }
        LegTensor { dims, cols, data }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        let mut data = vec![ZERO; n * n];
        for i in 0..n {
            data[i * n + i] = ONE;
        }
        LegTensor { dims, cols: n, data }
    }

    pub fn into_matrix(self) -> CMat {
        let rows = self.rows();
        CMat::from_row_slice(rows, self.cols, &self.data)
    }

    /// Merge the legs start..start+count into one leg.
    pub fn merge(mut self, start: usize, count: usize) -> Self {
        let d: usize = self.dims[start..start + count].iter().product();
        self.dims.splice(start..start + count, [d]);
        self
    }

    /// Split leg `at` into the given factors.
    pub fn split(mut self, at: usize, factors: &[usize]) -> Self {
        assert_eq!(self.dims[at], factors.iter().product::<usize>(), "bad split");
        self.dims.splice(at..at + 1, factors.iter().copied());
        self
    }

    /// Apply `mat` (mout × Π dims[start..start+nin]) to the legs start..start+nin,
    /// replacing them by `out_dims`.
    pub fn apply(&self, start: usize, nin: usize, mat: &CMat, out_dims: &[usize]) -> Self {
        let pre: usize = self.dims[..start].iter().product();
        let mid: usize = self.dims[start..start + nin].iter().product();
        let post: usize = self.dims[start + nin..].iter().product::<usize>() * self.cols;
        let mout: usize = out_dims.iter().product();
        assert_eq!(mat.ncols(), mid, "operator input dim mismatch");
        assert_eq!(mat.nrows(), mout, "operator output dim mismatch");
        let mut data = vec![ZERO; pre * mout * post];
        let a = mat.as_slice();
        let work = |(inp, out): (&[C64], &mut [C64])| {
            gemm_raw(mout, mid, post, a, 1, mout, inp, post, 1, out, post, 1);
        };
        if pre > 1 && mout * post * mid > 4096 {
            self.data.par_chunks(mid * post).zip(data.par_chunks_mut(mout * post)).for_each(work);
        } else {
            self.data.chunks(mid * post).zip(data.chunks_mut(mout * post)).for_each(work);
        }
        let mut dims = self.dims[..start].to_vec();
        dims.extend_from_slice(out_dims);
        dims.extend_from_slice(&self.dims[start + nin..]);
        LegTensor { dims, cols: self.cols, data }
    }

    /// Apply the same single-leg operator to a leg, keeping its dimension.
    pub fn apply1(&self, leg: usize, mat: &CMat) -> Self {
        self.apply(leg, 1, mat, &[mat.nrows()])
    }

    /// Reorder legs: new leg k is old leg perm[k].
    pub fn permute(&self, perm: &[usize]) -> Self {
        let k = self.dims.len();
        assert_eq!(perm.len(), k, "permutation length mismatch");
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let mut old_strides = vec![self.cols; k];
        for i in (0..k.saturating_sub(1)).rev() {
            old_strides[i] = old_strides[i + 1] * self.dims[i + 1];
        }
        let strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let total = self.data.len();
        let mut data = vec![ZERO; total];
        let cols = self.cols;
        let rows = self.rows();
        let mut idx = vec![0usize; k];
        for r in 0..rows {
            let mut off = 0;
            for t in 0..k {
                off += idx[t] * strides[t];
            }
            data[r * cols..(r + 1) * cols].copy_from_slice(&self.data[off..off + cols]);
            for t in (0..k).rev() {
                idx[t] += 1;
                if idx[t] < new_dims[t] {
                    break;
                }
                idx[t] = 0;
            }
        }
        LegTensor { dims: new_dims, cols, data }
    }

    /// Apply a two-leg operator acting on legs (i, j) in that tensor order.
    pub fn apply_pair(&self, i: usize, j: usize, mat: &CMat) -> Self {
        assert_ne!(i, j, "legs must differ");
        if j == i + 1 {
            return self.apply(i, 2, mat, &[self.dims[i], self.dims[j]]);
        }
        let k = self.dims.len();
        // bring legs i, j to positions 0, 1, apply, and move back
        let mut perm = vec![i, j];
        perm.extend((0..k).filter(|&t| t != i && t != j));
        let moved = self.permute(&perm).apply(0, 2, mat, &[self.dims[i], self.dims[j]]);
        let mut inv = vec![0; k];
        for (pos, &p) in perm.iter().enumerate() {
            inv[p] = pos;
        }
        moved.permute(&inv)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(r: usize, c: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(r, c, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn gemm_matches_nalgebra() {
        let a = random(7, 5, 1);
        let b = random(5, 9, 2);
        assert!(diff_abs(&mm(&a, &b), &(&a * &b)) < 1e-13);
    }

    #[test]
    fn leg_apply_matches_kron() {
        let x = random(3 * 4 * 2, 5, 3);
        let m = random(6, 4, 4);
        let t = LegTensor::from_matrix(vec![3, 4, 2], &x).apply(1, 1, &m, &[6]).into_matrix();
        let expect = kron(&kron(&eye(3), &m), &eye(2)) * &x;
        assert!(diff_abs(&t, &expect) < 1e-12);
    }

    #[test]
    fn apply_pair_on_distant_legs() {
        let x = random(8, 3, 5);
        let m = random(4, 4, 6);
        let t = LegTensor::from_matrix(vec![2, 2, 2], &x).apply_pair(2, 0, &m).into_matrix();
        let mut expect = CMat::zeros(8, 3);
        for col in 0..3 {
            for (a0, a1, a2) in itertools::iproduct!(0..2, 0..2, 0..2) {
                for (b0, b2) in itertools::iproduct!(0..2, 0..2) {
                    expect[(a0 * 4 + a1 * 2 + a2, col)] += m[(a2 * 2 + a0, b2 * 2 + b0)] * x[(b0 * 4 + a1 * 2 + b2, col)];
                }
            }
        }
        assert!(diff_abs(&t, &expect) < 1e-12);
    }

    #[test]
    fn kernel_and_range() {
        let a = random(4, 2, 7);
        let m = &a * a.adjoint();
        assert_eq!(kernel(&m, 1e-9).unwrap().ncols(), 2);
        assert_eq!(range_basis(&m, 1e-9).unwrap().ncols(), 2);
        let wide = random(2, 5, 8);
        let k = kernel(&wide, 1e-9).unwrap();
        assert_eq!(k.ncols(), 3);
        assert!(max_abs(&(&wide * &k)) < 1e-12);
    }

    #[test]
    fn hermite_sqrt_inverse() {
        // f(a) = a^{-1/2} on a diagonalizable matrix with eigenvalues 1 and 4
        let x = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(4.0, 0.0)]));
        let nodes = vec![c(1.0, 0.0), c(4.0, 0.0)];
        let vals = vec![vec![c(1.0, 0.0)], vec![c(0.5, 0.0)]];
        let f = hermite_eval(&nodes, &vals, &x);
        assert!((f[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((f[(1, 1)] - c(0.5, 0.0)).norm() < 1e-14);
    }
}
