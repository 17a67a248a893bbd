//! Column-by-column sequential sampling.
//!
//! Samples are processed in groups that share every bit drawn so far, so
//! the environments of a common prefix are contracted once per group. Each
//! sample still draws its own uniform variate at every decision, making the
//! result distributionally identical to drawing the samples one at a time.
//! Draws happen in depth-first order (bit 0 branch before bit 1, samples in
//! ascending index within a group).

use num_complex::Complex64 as C64;
use rand::Rng;

use super::boundary::BoundaryEnvs;
use super::column::Slot;
use super::mps::{compress, ones, scalar_value};
use crate::linalg::{contract, contract_conj, Tensor};

/// Smallest total conditional mass accepted before a sample is aborted.
pub const MIN_CONDITIONAL_MASS: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Draw {
    Done { z: Vec<i8>, log_p: f64, log_q: f64 },
    Aborted { qubit: Option<usize> },
}

pub(crate) struct Drawer<'a, R: Rng> {
    envs: &'a BoundaryEnvs,
    rank: Option<usize>,
    rng: &'a mut R,
    out: Vec<Option<Draw>>,
}

/// Amplitude MPS with sites `[up, ket, down]` and a carried log scale.
#[derive(Clone)]
struct Amp {
    sites: Vec<Tensor>,
    log_scale: f64,
}

/// Absorbed column: sites `[up, s, ket_right, down]`.
struct Column<'c> {
    b: usize,
    a: Vec<Tensor>,
    log_scale: f64,
    /// `k[r][s]` contracts rows `r..` with row `r` fixed to `s` and the rows
    /// below traced; `[a, a*, vM]`.
    k: Vec<Vec<Tensor>>,
    /// Last row holding a vertex.
    last: Option<usize>,
    env: &'c [Tensor],
    identity: &'c [bool],
    slots: &'c [Slot],
}

impl Column<'_> {
    fn m(&self, r: usize) -> Option<&Tensor> {
        (!self.identity[r]).then(|| &self.env[r])
    }
}

impl<'a, R: Rng> Drawer<'a, R> {
    pub fn new(envs: &'a BoundaryEnvs, rank: Option<usize>, rng: &'a mut R) -> Self {
        Drawer { envs, rank, rng, out: Vec::new() }
    }

    /// Draws `count` samples.
    pub fn run(mut self, n: usize, count: usize) -> Vec<Draw> {
        self.out = vec![None; count];
        let rows = self.envs.columns.num_rows();
        let amp = Amp { sites: vec![ones(vec![1, 1, 1]); rows], log_scale: 0.0 };
        let group: Vec<usize> = (0..count).collect();
        let mut z = vec![0i8; n];
        self.column(0, amp, &group, &mut z, 0.0);
        self.out.into_iter().map(|d| d.expect("every sample resolved")).collect()
    }

    fn abort(&mut self, group: &[usize], qubit: Option<usize>) {
        for &i in group {
            self.out[i] = Some(Draw::Aborted { qubit });
        }
    }

    fn column(&mut self, b: usize, amp: Amp, group: &[usize], z: &mut [i8], log_q: f64) {
        let envs = self.envs;
        if b == envs.num_columns() {
            let value = scalar_value(&amp.sites);
            let log_p = 2.0 * (value.norm().ln() + amp.log_scale);
            for &i in group {
                self.out[i] = Some(Draw::Done { z: z.to_vec(), log_p, log_q });
            }
            return;
        }
        let slots = &envs.columns.slots[b][..];
        let mut a: Vec<Tensor> = amp.sites.iter().zip(slots).map(|(m, s)| absorb(m, &s.t)).collect();
        let Some(c) = compress(&mut a, self.rank) else {
            return self.abort(group, None);
        };
        let env = &envs.envs[b][..];
        let rows = slots.len();
        let identity = &envs.identity[b][..];
        let m = |r: usize| (!identity[r]).then(|| &env[r]);
        let mut k = vec![Vec::new(); rows];
        let mut e = ones(vec![1, 1, 1]);
        for r in (0..rows).rev() {
            k[r] = (0..a[r].shape()[1]).map(|s| close_below(&project(&a[r], s), m(r), &e)).collect();
            e = k[r].iter().skip(1).fold(k[r][0].clone(), |mut acc, t| {
                acc.data_mut().iter_mut().zip(t.data()).for_each(|(x, y)| *x += y);
                acc
            });
        }
        let last = slots.iter().rposition(|s| s.vertex.is_some());
        let col = Column { b, a, log_scale: amp.log_scale + c, k, last, env, identity, slots };
        let mut bits = vec![0usize; rows];
        self.row(&col, 0, ones(vec![1, 1, 1]), group, z, &mut bits, log_q);
    }

    #[allow(clippy::too_many_arguments)]
    fn row(&mut self, col: &Column, r: usize, f: Tensor, group: &[usize], z: &mut [i8], bits: &mut [usize], log_q: f64) {
        if r == col.slots.len() {
            let mut sites: Vec<Tensor> = col.a.iter().zip(bits.iter()).map(|(t, &s)| project(t, s)).collect();
            let Some(c) = compress(&mut sites, self.rank) else {
                return self.abort(group, None);
            };
            let amp = Amp { sites, log_scale: col.log_scale + c };
            return self.column(col.b + 1, amp, group, z, log_q);
        }
        // rows past the last vertex only matter through the projection
        let needs_env = |r: usize| col.last.is_some_and(|l| r < l);
        let Some(v) = col.slots[r].vertex else {
            let f = if needs_env(r) { extend(&f, &project(&col.a[r], 0), col.m(r)) } else { f };
            return self.row(col, r + 1, f, group, z, bits, log_q);
        };
        let p: Vec<f64> = col.k[r].iter().map(|k| overlap(&f, k).max(0.0)).collect();
        let total = p[0] + p[1];
        if !(total > MIN_CONDITIONAL_MASS && total.is_finite()) {
            log::warn!("aborting {} sample(s): conditional mass {total:.3e} at qubit {v}", group.len());
            return self.abort(group, Some(v));
        }
        let p0 = p[0] / total;
        let mut split: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for &i in group {
            let u: f64 = self.rng.gen();
            split[usize::from(u >= p0)].push(i);
        }
        for (s, sub) in split.iter().enumerate() {
            if sub.is_empty() {
                continue;
            }
            z[v] = if s == 0 { 1 } else { -1 };
            bits[r] = s;
            let lq = log_q + (p[s] / total).ln();
            let fnew = if needs_env(r) {
                let mut t = extend(&f, &project(&col.a[r], s), col.m(r));
                t.scale(C64::new(1.0 / p[s], 0.0));
                t
            } else {
                ones(vec![1, 1, 1])
            };
            self.row(col, r + 1, fnew, sub, z, bits, lq);
        }
        z[v] = 0;
    }
}

/// `m[ml, lk, mr] · T[s, uk, dk, lk, pk]` → `[(ml uk), s, pk, (mr dk)]`.
fn absorb(m: &Tensor, t: &Tensor) -> Tensor {
    let x = contract(m, &[1], t, &[3]).permute(&[0, 3, 2, 5, 1, 4]);
    let s = x.shape().to_vec();
    x.reshape(vec![s[0] * s[1], s[2], s[3], s[4] * s[5]])
}

/// `A[a, s, pk, a']` at fixed `s` → `[a, pk, a']`.
fn project(a: &Tensor, s: usize) -> Tensor {
    let sh = a.shape();
    let block = sh[2] * sh[3];
    let mut data = Vec::with_capacity(sh[0] * block);
    for i in 0..sh[0] {
        let off = (i * sh[1] + s) * block;
        data.extend_from_slice(&a.data()[off..off + block]);
    }
    Tensor::new(vec![sh[0], sh[2], sh[3]], data)
}

/// `[a, a*, vM]` for a row fixed to `a_s[a, pk, a']` closed against the
/// rows below.
/// `m = None` stands for an identity row.
fn close_below(a_s: &Tensor, m: Option<&Tensor>, e: &Tensor) -> Tensor {
    let x = contract(a_s, &[2], e, &[0]); // a pk a*' vM'
    let x = match m {
        Some(m) => contract(&x, &[1, 3], m, &[1, 3]), // a a*' vM pb
        None => x.permute(&[0, 2, 3, 1]),
    };
    contract_conj(&x, &[1, 3], a_s, &[2, 1], true).permute(&[0, 2, 1])
}

/// Extends the top environment `F[a, a*, vM]` through a row fixed to
/// `a_s[a, pk, a']`.
fn extend(f: &Tensor, a_s: &Tensor, m: Option<&Tensor>) -> Tensor {
    let g = contract(f, &[0], a_s, &[0]); // a* vM pk a'
    let h = match m {
        Some(m) => contract(&g, &[1, 2], m, &[0, 1]), // a* a' pb vM'
        None => g.permute(&[0, 3, 2, 1]),
    };
    contract_conj(&h, &[0, 2], a_s, &[0, 1], true).permute(&[0, 2, 1]) // a' a*' vM'
}

fn overlap(f: &Tensor, k: &Tensor) -> f64 {
    f.data().iter().zip(k.data()).map(|(x, y)| x * y).sum::<C64>().re
}
