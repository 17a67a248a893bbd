//! Dense complex tensors (row-major) and the matrix factorizations used by
//! the tensor-network code.

use matrixmultiply::{zgemm, CGemmOption};
use faer::{MatRef, Side};
use num_complex::Complex64 as C64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<C64>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), data.len(), "tensor shape/data mismatch");
        Tensor { shape, data }
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        Tensor { shape, data: vec![ZERO; len] }
    }

    pub fn scalar(x: C64) -> Self {
        Tensor { shape: vec![], data: vec![x] }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn reshape(mut self, shape: Vec<usize>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), self.data.len(), "bad reshape");
        self.shape = shape;
        self
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn scale(&mut self, s: C64) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    pub fn conj(&self) -> Self {
        Tensor { shape: self.shape.clone(), data: self.data.iter().map(|x| x.conj()).collect() }
    }

    /// Axis `k` of the result is axis `perm[k]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> Self {
        let r = self.shape.len();
        assert_eq!(perm.len(), r);
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return self.clone();
        }
        let new_shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mut old_strides = vec![1usize; r];
        for k in (0..r.saturating_sub(1)).rev() {
            old_strides[k] = old_strides[k + 1] * self.shape[k + 1];
        }
        let strides: Vec<usize> = perm.iter().map(|&p| old_strides[p]).collect();
        let mut out = Vec::with_capacity(self.data.len());
        if self.data.is_empty() {
            return Tensor { shape: new_shape, data: out };
        }
        // odometer over the new index, innermost axis handled as a strided run
        let last = r - 1;
        let inner = new_shape[last];
        let inner_stride = strides[last];
        let mut idx = vec![0usize; r];
        let mut base = 0usize;
        loop {
            let mut off = base;
            for _ in 0..inner {
                out.push(self.data[off]);
                off += inner_stride;
            }
            let mut k = last;
            loop {
                if k == 0 {
                    return Tensor { shape: new_shape, data: out };
                }
                k -= 1;
                idx[k] += 1;
                base += strides[k];
                if idx[k] < new_shape[k] {
                    break;
                }
                base -= strides[k] * new_shape[k];
                idx[k] = 0;
            }
        }
    }

    /// `out[.., c, ..] = Σ_a self[.., a, ..] m[a, c]` on axis `axis`.
    pub fn apply_on_axis(&self, axis: usize, m: &Mat) -> Tensor {
        let d = self.shape[axis];
        assert_eq!(m.rows, d, "matrix does not match axis");
        let pre: usize = self.shape[..axis].iter().product();
        let post: usize = self.shape[axis + 1..].iter().product();
        let mt = m.transpose();
        let mut data = Vec::with_capacity(pre * m.cols * post);
        for p in 0..pre {
            let block = &self.data[p * d * post..(p + 1) * d * post];
            data.extend(gemm(&mt.data, false, block, false, m.cols, d, post));
        }
        let mut shape = self.shape.clone();
        shape[axis] = m.cols;
        Tensor { shape, data }
    }

    /// Multiplies slice `i` along `axis` by `w[i]`.
    pub fn scale_axis(&mut self, axis: usize, w: &[C64]) {
        let d = self.shape[axis];
        assert_eq!(w.len(), d);
        let post: usize = self.shape[axis + 1..].iter().product();
        for (k, x) in self.data.iter_mut().enumerate() {
            *x *= w[(k / post) % d];
        }
    }

    /// Moves the listed axes to the front (in the given order), keeping the
    /// remaining axes in their original order.
    pub fn move_to_front(&self, axes: &[usize]) -> (Self, Vec<usize>) {
        let rest: Vec<usize> = (0..self.rank()).filter(|a| !axes.contains(a)).collect();
        let perm: Vec<usize> = axes.iter().chain(rest.iter()).copied().collect();
        (self.permute(&perm), rest)
    }
}

/// `C = op(A) · op(B)` for row-major `A` (m×k) and `B` (k×n).
pub(crate) fn gemm(a: &[C64], conj_a: bool, b: &[C64], conj_b: bool, m: usize, k: usize, n: usize) -> Vec<C64> {
    let ca: Vec<C64>;
    let a = if conj_a {
        ca = a.iter().map(|x| x.conj()).collect();
        &ca[..]
    } else {
        a
    };
    let cb: Vec<C64>;
    let b = if conj_b {
        cb = b.iter().map(|x| x.conj()).collect();
        &cb[..]
    } else {
        b
    };
    gemm_strided(a, [k, 1], b, [n, 1], m, k, n)
}

/// `C = A · B` with `A[i, l] = a[i·sa[0] + l·sa[1]]` and likewise for `B`.
fn gemm_strided(a: &[C64], sa: [usize; 2], b: &[C64], sb: [usize; 2], m: usize, k: usize, n: usize) -> Vec<C64> {
    assert_eq!(a.len(), m * k);
    assert_eq!(b.len(), k * n);
    let mut c = vec![ZERO; m * n];
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: Complex64 is repr(C) with two f64 fields, identical to [f64; 2];
    // both operands are dense m×k / k×n blocks addressed through the given
    // strides, so every access stays inside the asserted lengths.
    unsafe {
        zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            sa[0] as isize,
            sa[1] as isize,
            b.as_ptr() as *const [f64; 2],
            sb[0] as isize,
            sb[1] as isize,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
    c
}

/// Strides of a tensor viewed as a matrix whose contracted block `axes` is either
/// the leading or the trailing run of axes (in order); `None` otherwise.
/// `contracted_is_row` is set for the right operand (k×n).
fn matrix_view(rank: usize, axes: &[usize], free_len: usize, k: usize, contracted_is_row: bool) -> Option<[usize; 2]> {
    let c = axes.len();
    let leading = axes.iter().enumerate().all(|(i, &x)| i == x);
    let trailing = axes.iter().enumerate().all(|(i, &x)| x == rank - c + i);
    // storage is (contracted × free) when leading, (free × contracted) when trailing
    match (leading, trailing, contracted_is_row) {
        (true, _, true) => Some([free_len, 1]),
        (true, _, false) => Some([1, free_len]),
        (_, true, true) => Some([1, k]),
        (_, true, false) => Some([k, 1]),
        _ => None,
    }
}

/// Contracts `ax_a` of `a` with `ax_b` of `b`. Result axes: free axes of `a`
/// in order, then free axes of `b` in order.
pub fn contract(a: &Tensor, ax_a: &[usize], b: &Tensor, ax_b: &[usize]) -> Tensor {
    contract_conj(a, ax_a, b, ax_b, false)
}

/// Like [`contract`] but with `b` complex-conjugated.
pub fn contract_conj(a: &Tensor, ax_a: &[usize], b: &Tensor, ax_b: &[usize], conj_b: bool) -> Tensor {
    assert_eq!(ax_a.len(), ax_b.len());
    for (&x, &y) in ax_a.iter().zip(ax_b) {
        assert_eq!(a.shape[x], b.shape[y], "contracted dimensions differ");
    }
    let free_a: Vec<usize> = (0..a.rank()).filter(|x| !ax_a.contains(x)).collect();
    let free_b: Vec<usize> = (0..b.rank()).filter(|x| !ax_b.contains(x)).collect();
    let m: usize = free_a.iter().map(|&x| a.shape[x]).product();
    let k: usize = ax_a.iter().map(|&x| a.shape[x]).product();
    let n: usize = free_b.iter().map(|&x| b.shape[x]).product();
    let shape: Vec<usize> = free_a.iter().map(|&x| a.shape[x]).chain(free_b.iter().map(|&x| b.shape[x])).collect();
    let pa: Tensor;
    let (da, sa) = match matrix_view(a.rank(), ax_a, m, k, false) {
        Some(st) => (&a.data[..], st),
        None => {
            let perm: Vec<usize> = free_a.iter().chain(ax_a).copied().collect();
            pa = a.permute(&perm);
            (&pa.data[..], [k, 1])
        }
    };
    let pb: Tensor;
    let (db, sb) = match matrix_view(b.rank(), ax_b, n, k, true) {
        Some(st) => (&b.data[..], st),
        None => {
            let perm: Vec<usize> = ax_b.iter().chain(&free_b).copied().collect();
            pb = b.permute(&perm);
            (&pb.data[..], [n, 1])
        }
    };
    let cb: Vec<C64>;
    let db = if conj_b {
        cb = db.iter().map(|x| x.conj()).collect();
        &cb[..]
    } else {
        db
    };
    Tensor { shape, data: gemm_strided(da, sa, db, sb, m, k, n) }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl Mat {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(rows * cols, data.len());
        Mat { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = C64::new(x, 0.0);
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: C64) {
        self.data[i * self.cols + j] = x;
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        Mat { rows: self.rows, cols: other.cols, data: gemm(&self.data, false, &other.data, false, self.rows, self.cols, other.cols) }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for x in &mut self.data {
            *x *= s;
        }
    }

    fn to_faer(&self) -> faer::Mat<C64> {
        faer::Mat::from_fn(self.rows, self.cols, |i, j| self.data[i * self.cols + j])
    }

    fn from_faer(m: MatRef<'_, C64>) -> Self {
        let (rows, cols) = (m.nrows(), m.ncols());
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(m[(i, j)]);
            }
        }
        Mat { rows, cols, data }
    }

    /// Keeps the first `k` columns.
    pub fn take_cols(&self, k: usize) -> Mat {
        let mut data = Vec::with_capacity(self.rows * k);
        for i in 0..self.rows {
            data.extend_from_slice(&self.data[i * self.cols..i * self.cols + k]);
        }
        Mat { rows: self.rows, cols: k, data }
    }

    /// Keeps the first `k` rows.
    pub fn take_rows(&self, k: usize) -> Mat {
        Mat { rows: k, cols: self.cols, data: self.data[..k * self.cols].to_vec() }
    }
}

/// Thin QR: `A = Q R` with `Q` (rows×r) isometric, `R` (r×cols), r = min.
pub fn qr(a: &Mat) -> (Mat, Mat) {
    if a.rows == 0 || a.cols == 0 {
        let k = a.rows.min(a.cols);
        return (Mat::zeros(a.rows, k), Mat::zeros(k, a.cols));
    }
    let q = a.to_faer().qr();
    (Mat::from_faer(q.compute_thin_Q().as_ref()), Mat::from_faer(q.thin_R()))
}

/// Thin LQ: `A = L Q` with `Q` (r×cols) co-isometric.
pub fn lq(a: &Mat) -> (Mat, Mat) {
    let (q, r) = qr(&a.adjoint());
    (r.adjoint(), q.adjoint())
}

#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub vt: Mat,
    /// Σ of squared singular values dropped by the rank cap, relative to
    /// the total.
    pub discarded: f64,
}

/// Full thin SVD with singular values in descending order.
pub fn svd(a: &Mat) -> Svd {
    let r = a.rows.min(a.cols);
    if r == 0 {
        return Svd { u: Mat::zeros(a.rows, 0), s: vec![], vt: Mat::zeros(0, a.cols), discarded: 0.0 };
    }
    let dec = a.to_faer().thin_svd().expect("svd did not converge");
    let (u, v) = (dec.U(), dec.V());
    let sv = dec.S().column_vector();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&x, &y| sv[y].re.total_cmp(&sv[x].re));
    let s: Vec<f64> = order.iter().map(|&k| sv[k].re).collect();
    let mut um = Mat::zeros(a.rows, r);
    let mut vm = Mat::zeros(r, a.cols);
    for (new, &old) in order.iter().enumerate() {
        for i in 0..a.rows {
            um.data[i * r + new] = u[(i, old)];
        }
        for j in 0..a.cols {
            vm.data[new * a.cols + j] = v[(j, old)].conj();
        }
    }
    Svd { u: um, s, vt: vm, discarded: 0.0 }
}

/// SVD truncated to at most `max_rank` values; values below
/// `rel_cutoff · s_max` are treated as numerical zeros and dropped without
/// counting towards `discarded`.
pub fn truncated_svd(a: &Mat, max_rank: Option<usize>, rel_cutoff: f64) -> Svd {
    // reduce very rectangular problems to their square core first
    if a.rows > 2 * a.cols && a.cols > 0 {
        let (q, r) = qr(a);
        let mut inner = truncated_svd(&r, max_rank, rel_cutoff);
        inner.u = q.matmul(&inner.u);
        return inner;
    }
    if a.cols > 2 * a.rows && a.rows > 0 {
        let (l, q) = lq(a);
        let mut inner = truncated_svd(&l, max_rank, rel_cutoff);
        inner.vt = inner.vt.matmul(&q);
        return inner;
    }
    let full = svd(a);
    let total: f64 = full.s.iter().map(|x| x * x).sum();
    let smax = full.s.first().copied().unwrap_or(0.0);
    let mut keep = full.s.iter().take_while(|&&x| x > rel_cutoff * smax && x > 0.0).count();
    let nonzero = keep;
    if let Some(cap) = max_rank {
        keep = keep.min(cap.max(1));
    }
    let keep = keep.max(1).min(full.s.len());
    let dropped: f64 = full.s[keep..nonzero.max(keep)].iter().map(|x| x * x).sum();
    let discarded = if total > 0.0 { dropped / total } else { 0.0 };
    Svd { u: full.u.take_cols(keep), s: full.s[..keep].to_vec(), vt: full.vt.take_rows(keep), discarded }
}

/// Eigendecomposition of a Hermitian matrix (symmetrized first); returns
/// eigenvalues and the eigenvector matrix (columns).
pub fn herm_eig(a: &Mat) -> (Vec<f64>, Mat) {
    let n = a.rows;
    let h = faer::Mat::from_fn(n, n, |i, j| (a.data[i * n + j] + a.data[j * n + i].conj()) * 0.5);
    let e = h.self_adjoint_eigen(Side::Lower).expect("eigendecomposition did not converge");
    let vals = e.S().column_vector();
    ((0..n).map(|k| vals[k].re).collect(), Mat::from_faer(e.U()))
}

/// Hermitian square root and its pseudo-inverse. Eigenvalues are clamped at
/// `eps` from below (negative noise becomes zero); the pseudo-inverse drops
/// eigenvalues below `rel_pinv · λ_max`.
pub fn herm_sqrt_pinv(a: &Mat, eps: f64, rel_pinv: f64) -> (Mat, Mat) {
    let (vals, vecs) = herm_eig(a);
    let lmax = vals.iter().copied().fold(0.0f64, f64::max);
    let n = vals.len();
    let sq: Vec<f64> = vals.iter().map(|&l| if l < eps { 0.0 } else { l.sqrt() }).collect();
    let inv: Vec<f64> = vals.iter().map(|&l| if l <= rel_pinv * lmax || l < eps { 0.0 } else { 1.0 / l.sqrt() }).collect();
    let build = |d: &[f64]| {
        let mut out = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = ZERO;
                for k in 0..n {
                    if d[k] != 0.0 {
                        acc += vecs.data[i * n + k] * d[k] * vecs.data[j * n + k].conj();
                    }
                }
                out.data[i * n + j] = acc;
            }
        }
        out
    };
    (build(&sq), build(&inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mat(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Mat {
        Mat::new(rows, cols, (0..rows * cols).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect())
    }

    fn max_diff(a: &Mat, b: &Mat) -> f64 {
        a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn permute_matches_naive() {
        let t = Tensor::new(vec![2, 3, 4], (0..24).map(|x| C64::new(x as f64, 0.0)).collect());
        let p = t.permute(&[2, 0, 1]);
        assert_eq!(p.shape(), &[4, 2, 3]);
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..4 {
                    assert_eq!(p.data()[c * 6 + a * 3 + b], t.data()[a * 12 + b * 4 + c]);
                }
            }
        }
    }

    #[test]
    fn contract_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = Tensor::new(vec![3, 2, 4], random_mat(1, 24, &mut rng).data);
        let b = Tensor::new(vec![4, 5, 3], random_mat(1, 60, &mut rng).data);
        let c = contract_conj(&a, &[0, 2], &b, &[2, 0], true);
        assert_eq!(c.shape(), &[2, 5]);
        for j in 0..2 {
            for l in 0..5 {
                let mut acc = ZERO;
                for i in 0..3 {
                    for k in 0..4 {
                        acc += a.data()[i * 8 + j * 4 + k] * b.data()[k * 15 + l * 3 + i].conj();
                    }
                }
                assert!((acc - c.data()[j * 5 + l]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn apply_on_axis_matches_contract() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let t = Tensor::new(vec![2, 3, 4], random_mat(1, 24, &mut rng).data);
        let m = random_mat(3, 5, &mut rng);
        let got = t.apply_on_axis(1, &m);
        let want = contract(&t, &[1], &Tensor::new(vec![3, 5], m.data.clone()), &[0]).permute(&[0, 2, 1]);
        assert_eq!(got.shape(), want.shape());
        assert!(got.data().iter().zip(want.data()).all(|(a, b)| (a - b).norm() < 1e-12));
        let mut s = t.clone();
        s.scale_axis(2, &[ONE, ZERO, ONE, ONE]);
        assert_eq!(s.data()[1], ZERO);
        assert_eq!(s.data()[2], t.data()[2]);
    }

    #[test]
    fn svd_reconstructs_and_is_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &(r, c) in &[(5, 3), (3, 7), (20, 4), (4, 20), (6, 6)] {
            let a = random_mat(r, c, &mut rng);
            let d = truncated_svd(&a, None, 1e-14);
            assert!(d.s.windows(2).all(|w| w[0] >= w[1]));
            let rec = d.u.matmul(&Mat::from_diag(&d.s)).matmul(&d.vt);
            assert!(max_diff(&rec, &a) < 1e-12);
            assert_eq!(d.discarded, 0.0);
        }
    }

    #[test]
    fn truncation_reports_weight() {
        let a = Mat::from_diag(&[3.0, 2.0, 1.0]);
        let d = truncated_svd(&a, Some(2), 1e-14);
        assert_eq!(d.s, vec![3.0, 2.0]);
        assert!((d.discarded - 1.0 / 14.0).abs() < 1e-14);
        let z = truncated_svd(&Mat::from_diag(&[1.0, 1e-20]), Some(1), 1e-13);
        assert_eq!(z.discarded, 0.0);
    }

    #[test]
    fn qr_and_lq_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_mat(7, 3, &mut rng);
        let (q, r) = qr(&a);
        assert!(max_diff(&q.matmul(&r), &a) < 1e-12);
        assert!(max_diff(&q.adjoint().matmul(&q), &Mat::identity(3)) < 1e-12);
        let b = random_mat(3, 7, &mut rng);
        let (l, q) = lq(&b);
        assert!(max_diff(&l.matmul(&q), &b) < 1e-12);
    }

    #[test]
    fn sqrt_and_pinv() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = random_mat(4, 4, &mut rng);
        let h = x.matmul(&x.adjoint());
        let (s, si) = herm_sqrt_pinv(&h, 1e-12, 1e-12);
        assert!(max_diff(&s.matmul(&s), &h) < 1e-12);
        assert!(max_diff(&s.matmul(&si), &Mat::identity(4)) < 1e-8);
        let sing = Mat::from_diag(&[1.0, 0.0]);
        let (s, si) = herm_sqrt_pinv(&sing, 1e-12, 1e-12);
        assert!(max_diff(&s, &sing) < 1e-14 && max_diff(&si, &sing) < 1e-14);
    }
}
