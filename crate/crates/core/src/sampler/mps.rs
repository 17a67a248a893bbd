//! Open-boundary MPS helpers. Sites are tensors `[left, phys.., right]`.

use num_complex::Complex64 as C64;

use crate::linalg::{contract, lq, qr, truncated_svd, Mat, Tensor};
use crate::tn::SVD_CUTOFF;

pub(crate) fn ones(shape: Vec<usize>) -> Tensor {
    let len = shape.iter().product();
    Tensor::new(shape, vec![C64::new(1.0, 0.0); len])
}

/// `rows = Π shape[..rank-1]`, `cols = shape[rank-1]`.
fn as_left_mat(t: &Tensor) -> Mat {
    let cols = *t.shape().last().expect("rank ≥ 1");
    Mat::new(t.len() / cols.max(1), cols, t.data().to_vec())
}

fn as_right_mat(t: &Tensor) -> Mat {
    let rows = t.shape()[0];
    Mat::new(rows, t.len() / rows.max(1), t.data().to_vec())
}

fn with_left(t: &Tensor, left: usize) -> Vec<usize> {
    let mut s = t.shape().to_vec();
    s[0] = left;
    s
}

fn with_right(t: &Tensor, right: usize) -> Vec<usize> {
    let mut s = t.shape().to_vec();
    *s.last_mut().expect("rank ≥ 1") = right;
    s
}

fn absorb_left(m: &Mat, t: &Tensor) -> Tensor {
    let mt = Tensor::new(vec![m.rows, m.cols], m.data.clone());
    contract(&mt, &[1], t, &[0])
}

fn absorb_right(t: &Tensor, m: &Mat) -> Tensor {
    let mt = Tensor::new(vec![m.rows, m.cols], m.data.clone());
    contract(t, &[t.rank() - 1], &mt, &[0])
}

/// Brings `sites` to right-canonical form with bonds capped at `cap` and
/// unit norm; returns `ln` of the norm factored out, or `None` when the MPS
/// has zero norm.
pub(crate) fn compress(sites: &mut [Tensor], cap: Option<usize>) -> Option<f64> {
    let n = sites.len();
    for r in 0..n.saturating_sub(1) {
        let (q, rm) = qr(&as_left_mat(&sites[r]));
        sites[r] = Tensor::new(with_right(&sites[r], q.cols), q.data);
        sites[r + 1] = absorb_left(&rm, &sites[r + 1]);
    }
    let mut log_norm = normalize(&mut sites[n - 1])?;
    for r in (1..n).rev() {
        let dec = truncated_svd(&as_right_mat(&sites[r]), cap, SVD_CUTOFF);
        sites[r] = Tensor::new(with_left(&sites[r], dec.vt.rows), dec.vt.data);
        let mut us = dec.u;
        for i in 0..us.rows {
            for (j, s) in dec.s.iter().enumerate() {
                us.data[i * us.cols + j] *= s;
            }
        }
        sites[r - 1] = absorb_right(&sites[r - 1], &us);
    }
    log_norm += normalize(&mut sites[0])?;
    Some(log_norm)
}

fn normalize(t: &mut Tensor) -> Option<f64> {
    let nrm = t.norm_sqr().sqrt();
    if !(nrm > 0.0 && nrm.is_finite()) {
        return None;
    }
    t.scale(C64::new(1.0 / nrm, 0.0));
    Some(nrm.ln())
}

/// Left-orthonormal factor of `t` across its last bond.
pub(crate) fn left_orthonormal(t: &Tensor) -> Tensor {
    let (q, _) = qr(&as_left_mat(t));
    Tensor::new(with_right(t, q.cols), q.data)
}

/// Right-orthonormal factor of `t` across its first bond.
pub(crate) fn right_orthonormal(t: &Tensor) -> Tensor {
    let (_, q) = lq(&as_right_mat(t));
    Tensor::new(with_left(t, q.rows), q.data)
}

/// Contracts an MPS whose physical legs all have dimension 1.
pub(crate) fn scalar_value(sites: &[Tensor]) -> C64 {
    let mut v = vec![C64::new(1.0, 0.0)];
    for t in sites {
        let m = as_right_mat(t);
        assert_eq!(m.rows, v.len(), "bond mismatch");
        assert_eq!(m.cols, *t.shape().last().unwrap(), "open physical leg");
        let mut next = vec![C64::new(0.0, 0.0); m.cols];
        for (i, vi) in v.iter().enumerate() {
            for j in 0..m.cols {
                next[j] += vi * m.data[i * m.cols + j];
            }
        }
        v = next;
    }
    v[0]
}

#[cfg(test)]
pub(crate) fn max_bond(sites: &[Tensor]) -> usize {
    sites.iter().map(|t| t.shape()[0]).max().unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_mps(dims: &[usize], p: usize, seed: u64) -> Vec<Tensor> {
        let mut x = seed;
        let mut next = || {
            x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        dims.windows(2)
            .map(|w| {
                let len = w[0] * p * w[1];
                Tensor::new(vec![w[0], p, w[1]], (0..len).map(|_| C64::new(next(), next())).collect())
            })
            .collect()
    }

    fn dense(sites: &[Tensor]) -> Vec<C64> {
        let mut acc = sites[0].clone();
        for t in &sites[1..] {
            acc = contract(&acc, &[acc.rank() - 1], t, &[0]);
        }
        acc.into_data()
    }

    #[test]
    fn uncapped_compression_is_exact_up_to_norm() {
        let mut m = random_mps(&[1, 3, 5, 4, 1], 2, 7);
        let before = dense(&m);
        let c = compress(&mut m, None).unwrap();
        let after = dense(&m);
        let f = c.exp();
        assert!(before.iter().zip(&after).all(|(a, b)| (a - b * f).norm() < 1e-12));
        // bonds cannot exceed the exact Schmidt ranks 2, 4, 2
        assert!(max_bond(&m) <= 4);
    }

    #[test]
    fn capped_compression_respects_cap_and_is_normalized() {
        let mut m = random_mps(&[1, 4, 8, 4, 1], 2, 3);
        compress(&mut m, Some(2)).unwrap();
        assert!(max_bond(&m) <= 2);
        let nrm: f64 = dense(&m).iter().map(|a| a.norm_sqr()).sum();
        assert!((nrm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_mps_is_rejected() {
        let mut m = vec![Tensor::zeros(vec![1, 2, 1])];
        assert!(compress(&mut m, None).is_none());
    }
}
