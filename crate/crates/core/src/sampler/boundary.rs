//! Norm boundary MPSs built from the right edge leftward.
//!
//! `envs[b]` approximates the double-layer contraction of all columns to
//! the right of column `b`. Its sites carry `[up, ket, bra, down]` where
//! `ket`/`bra` are the horizontal bonds between columns `b` and `b+1` at
//! that row.

use serde::{Deserialize, Serialize};

use super::column::{Columns, Slot};
use super::mps::{left_orthonormal, ones, right_orthonormal};
use crate::error::{Error, Result};
use crate::linalg::{contract, contract_conj, truncated_svd, Mat, Tensor};
use crate::tn::{TnState, SVD_CUTOFF};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    /// Bond cap `R_M` of the norm MPSs; `None` keeps the exact rank.
    pub rank: Option<usize>,
    /// Variational refinement sweeps after each zip-up.
    pub variational_passes: usize,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        BoundaryConfig { rank: None, variational_passes: 2 }
    }
}

#[derive(Clone, Debug)]
pub struct BoundaryEnvs {
    pub(crate) columns: Columns,
    pub(crate) envs: Vec<Vec<Tensor>>,
    /// `identity[b][r]`: row `r` of `envs[b]` is an identity matrix.
    pub(crate) identity: Vec<Vec<bool>>,
    pub(crate) log_scale: Vec<f64>,
    /// Relative weight dropped while compressing each environment; the
    /// rightmost (trivial) one is 0.
    pub fit_residuals: Vec<f64>,
    pub config: BoundaryConfig,
}

impl BoundaryEnvs {
    pub fn num_columns(&self) -> usize {
        self.envs.len()
    }

    /// Largest bond dimension across all norm MPSs.
    pub fn max_rank(&self) -> usize {
        self.envs.iter().flat_map(|e| e.iter().map(|t| t.shape()[3])).max().unwrap_or(1)
    }

    /// Residual of the environment adjacent to the leftmost column.
    pub fn final_residual(&self) -> f64 {
        self.fit_residuals.first().copied().unwrap_or(0.0)
    }

    /// `⟨ψ|ψ⟩` from the leftmost column closed against `envs[0]`.
    pub fn norm_estimate(&self) -> f64 {
        let env = &self.envs[0];
        let mut c = ones(vec![1, 1, 1, 1]);
        for (r, slot) in self.columns.slots[0].iter().enumerate() {
            let b = row_block(&c, &env[r], slot);
            let s = b.shape().to_vec();
            c = b.reshape(vec![s[0] * s[1] * s[2], s[3], s[4], s[5]]);
        }
        c.data()[0].re * self.log_scale[0].exp()
    }
}

/// `L[a, vM, uk, ub]` through one row of the target → `[a, lk, lb, vM', dk, db]`.
pub(crate) fn row_block(l: &Tensor, m: &Tensor, slot: &Slot) -> Tensor {
    let t = &slot.t;
    let x = contract(l, &[1], m, &[0]); // a uk ub pk pb vM'
    let x = contract(&x, &[1, 3], t, &[1, 4]); // a ub pb vM' s dk lk
    let x = contract_conj(&x, &[1, 2, 4], t, &[1, 4, 0], true); // a vM' dk lk db lb
    x.permute(&[0, 3, 5, 1, 2, 4])
}

/// `R[a', vM', dk, db]` through one row from below → `[a', lk, lb, vM, uk, ub]`.
pub(crate) fn row_block_up(rt: &Tensor, m: &Tensor, slot: &Slot) -> Tensor {
    let t = &slot.t;
    let x = contract(rt, &[1], m, &[3]); // a' dk db vM pk pb
    let x = contract(&x, &[1, 4], t, &[2, 4]); // a' db vM pb s uk lk
    let x = contract_conj(&x, &[1, 3, 4], t, &[2, 4, 0], true); // a' vM uk lk ub lb
    x.permute(&[0, 3, 5, 1, 2, 4])
}

fn as_mat(t: &Tensor, split: usize) -> Mat {
    let rows: usize = t.shape()[..split].iter().product();
    Mat::new(rows, t.len() / rows.max(1), t.data().to_vec())
}

struct Fit {
    sites: Vec<Tensor>,
    discarded: f64,
    log_norm: f64,
}

/// Applies column `slots` to `right` and compresses the result.
fn fit_column(slots: &[Slot], right: &[Tensor], cfg: &BoundaryConfig) -> Option<Fit> {
    let rows = slots.len();
    let mut sites = Vec::with_capacity(rows);
    let mut lefts = vec![ones(vec![1, 1, 1, 1])];
    let mut discarded = 0.0;
    for r in 0..rows {
        let b = row_block(&lefts[r], &right[r], &slots[r]);
        let s = b.shape().to_vec();
        if r + 1 == rows {
            sites.push(b.reshape(vec![s[0], s[1], s[2], 1]));
            break;
        }
        let dec = truncated_svd(&as_mat(&b, 3), cfg.rank, SVD_CUTOFF);
        discarded += dec.discarded;
        let k = dec.s.len();
        sites.push(Tensor::new(vec![s[0], s[1], s[2], k], dec.u.data));
        let mut sv = dec.vt;
        for (i, x) in dec.s.iter().enumerate() {
            for y in &mut sv.data[i * sv.cols..(i + 1) * sv.cols] {
                *y *= x;
            }
        }
        lefts.push(Tensor::new(vec![k, s[3], s[4], s[5]], sv.data));
    }
    if rows > 1 {
        for _ in 0..cfg.variational_passes {
            refine(slots, right, &mut sites, &mut lefts);
        }
    }
    // the weight sits on the last site; the others are left-orthonormal
    let last = sites.last_mut().expect("rows ≥ 1");
    let nrm = last.norm_sqr().sqrt();
    if !(nrm > 0.0 && nrm.is_finite()) {
        return None;
    }
    last.scale(num_complex::Complex64::new(1.0 / nrm, 0.0));
    Some(Fit { sites, discarded, log_norm: nrm.ln() })
}

/// One upward then one downward one-site fitting sweep. Expects `sites`
/// left-orthonormal above the last row and `lefts[r]` the matching left
/// environments; leaves them in the same form.
fn refine(slots: &[Slot], right: &[Tensor], sites: &mut [Tensor], lefts: &mut [Tensor]) {
    let rows = slots.len();
    let mut rights = vec![ones(vec![1, 1, 1, 1]); rows + 1];
    for r in (1..rows).rev() {
        let y = contract(&row_block(&lefts[r], &right[r], &slots[r]), &[3, 4, 5], &rights[r + 1], &[1, 2, 3]);
        let q = right_orthonormal(&y);
        let up = row_block_up(&rights[r + 1], &right[r], &slots[r]);
        rights[r] = contract_conj(&up, &[0, 1, 2], &q, &[3, 1, 2], true).permute(&[3, 0, 1, 2]);
        sites[r] = q;
    }
    for r in 0..rows {
        let blk = row_block(&lefts[r], &right[r], &slots[r]);
        let y = contract(&blk, &[3, 4, 5], &rights[r + 1], &[1, 2, 3]);
        if r + 1 == rows {
            sites[r] = y;
            break;
        }
        let q = left_orthonormal(&y);
        lefts[r + 1] = contract_conj(&blk, &[0, 1, 2], &q, &[0, 1, 2], true).permute(&[3, 0, 1, 2]);
        sites[r] = q;
    }
}

/// Multiplies every site without physical legs into a neighbouring site
/// and replaces it by an identity; returns the identity flags.
fn fold_trivial_rows(sites: &mut [Tensor]) -> Vec<bool> {
    let rows = sites.len();
    let trivial = |t: &Tensor| t.shape()[1] == 1 && t.shape()[2] == 1;
    let Some(anchor) = sites.iter().position(|t| !trivial(t)) else {
        return vec![false; rows];
    };
    let mut flags = vec![false; rows];
    let identity = |d: usize| {
        let mut t = Tensor::zeros(vec![d, 1, 1, d]);
        for i in 0..d {
            t.data_mut()[i * d + i] = num_complex::Complex64::new(1.0, 0.0);
        }
        t
    };
    // above the first non-trivial site: the chain closes on a dimension-1
    // bond at the top, so the product is a row vector
    if anchor > 0 {
        let mut top = sites[0].clone();
        for t in &sites[1..=anchor] {
            top = contract(&top, &[top.rank() - 1], t, &[0]);
        }
        let sh = sites[anchor].shape().to_vec();
        sites[anchor] = top.reshape(vec![1, sh[1], sh[2], sh[3]]);
        for r in 0..anchor {
            sites[r] = identity(1);
            flags[r] = true;
        }
    }
    // everything else: fold upwards into the nearest non-trivial site
    let mut last = anchor;
    for r in anchor + 1..rows {
        if !trivial(&sites[r]) {
            last = r;
            continue;
        }
        let m = sites[r].clone();
        let d = m.shape()[3];
        let sh = sites[last].shape().to_vec();
        sites[last] = contract(&sites[last], &[3], &m, &[0]).reshape(vec![sh[0], sh[1], sh[2], d]);
        for t in &mut sites[last + 1..r] {
            *t = identity(d);
        }
        sites[r] = identity(d);
        flags[last + 1..=r].iter_mut().for_each(|f| *f = true);
    }
    flags
}


/// Builds the norm environments of `state` with bond cap `cfg.rank`.
pub fn build_norm_envs(state: &TnState, cfg: &BoundaryConfig) -> Result<BoundaryEnvs> {
    if cfg.rank == Some(0) {
        return Err(Error::InvalidArgument("R_M must be at least 1".into()));
    }
    let columns = Columns::new(state)?;
    let nb = columns.num_columns();
    let rows = columns.num_rows();
    let mut envs = vec![Vec::new(); nb];
    let mut log_scale = vec![0.0; nb];
    let mut fit_residuals = vec![0.0; nb];
    let mut identity = vec![vec![false; rows]; nb];
    envs[nb - 1] = vec![ones(vec![1, 1, 1, 1]); rows];
    for b in (1..nb).rev() {
        let fit = fit_column(&columns.slots[b], &envs[b], cfg).ok_or(Error::CompressionFailure(b))?;
        log::debug!("norm env {}: residual {:.3e}", b - 1, fit.discarded);
        envs[b - 1] = fit.sites;
        identity[b - 1] = fold_trivial_rows(&mut envs[b - 1]);
        log_scale[b - 1] = log_scale[b] + fit.log_norm;
        fit_residuals[b - 1] = fit.discarded;
    }
    Ok(BoundaryEnvs { columns, envs, identity, log_scale, fit_residuals, config: cfg.clone() })
}
