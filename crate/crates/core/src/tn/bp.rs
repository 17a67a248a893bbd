//! Belief propagation on the norm network `⟨ψ|ψ⟩`.
//!
//! A message `M_{w→v}` lives on the bond `(w, v)`; entry `[a, b]` pairs ket
//! index `a` with bra index `b` of that bond.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::TnState;
use crate::error::{Error, Result};
use crate::linalg::{contract_conj, Mat, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpSchedule {
    /// Every message of a sweep is computed from the previous sweep.
    Synchronous,
    /// Messages are overwritten in place, in edge order.
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BpConfig {
    pub tolerance: f64,
    pub max_iters: usize,
    pub damping: f64,
    pub schedule: BpSchedule,
}

impl Default for BpConfig {
    fn default() -> Self {
        BpConfig { tolerance: 1e-10, max_iters: 100, damping: 0.0, schedule: BpSchedule::Sequential }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BpCache {
    /// Index `2e` holds `M_{i→j}`, `2e + 1` holds `M_{j→i}` for edge `e = (i, j)`, `i < j`.
    messages: Vec<Mat>,
    pub converged: bool,
    pub iterations: usize,
    pub final_delta: f64,
}

fn slot(state: &TnState, from: usize, to: usize) -> usize {
    let e = state.lattice().edge_index(from, to).expect("not an edge");
    2 * e + usize::from(from > to)
}

impl BpCache {
    /// Uniform messages `1/D` on every bond.
    pub fn identity(state: &TnState) -> Self {
        let mut messages = Vec::with_capacity(2 * state.lattice().edges().len());
        for &(a, b) in state.lattice().edges() {
            let d = state.bond_dim(a, b);
            let mut m = Mat::identity(d);
            m.scale(1.0 / d as f64);
            messages.push(m.clone());
            messages.push(m);
        }
        BpCache { messages, converged: false, iterations: 0, final_delta: f64::INFINITY }
    }

    pub fn message(&self, state: &TnState, from: usize, to: usize) -> &Mat {
        &self.messages[slot(state, from, to)]
    }

    pub(crate) fn set_message(&mut self, state: &TnState, from: usize, to: usize, m: Mat) {
        let k = slot(state, from, to);
        self.messages[k] = m;
    }

    /// Whether every message matches the current bond dimensions.
    pub fn matches(&self, state: &TnState) -> bool {
        self.messages.len() == 2 * state.lattice().edges().len()
            && state.lattice().edges().iter().enumerate().all(|(e, &(a, b))| {
                let d = state.bond_dim(a, b);
                self.messages[2 * e].rows == d && self.messages[2 * e + 1].rows == d
            })
    }

    pub fn messages(&self) -> &[Mat] {
        &self.messages
    }
}

/// Physical-axis weights for local contractions.
pub(crate) const UNIT: [f64; 2] = [1.0, 1.0];

/// Double-layer contraction of site `v` with the incoming matrices on every
/// bond except `to`. Returns the open `D×D` matrix on bond `(v, to)`, or a
/// `1×1` matrix holding the closed scalar when `to` is `None`.
pub(crate) fn outgoing<'a>(
    state: &TnState,
    v: usize,
    to: Option<usize>,
    incoming: impl Fn(usize) -> &'a Mat,
    weight: [f64; 2],
) -> Mat {
    let t = state.tensor(v);
    let mut ket: Tensor = t.clone();
    for &w in state.lattice().neighbors(v) {
        if Some(w) != to {
            ket = ket.apply_on_axis(state.bond_axis(v, w), incoming(w));
        }
    }
    if weight != UNIT {
        ket.scale_axis(0, &[C64::new(weight[0], 0.0), C64::new(weight[1], 0.0)]);
    }
    match to {
        Some(j) => {
            let aj = state.bond_axis(v, j);
            let axes: Vec<usize> = (0..t.rank()).filter(|&x| x != aj).collect();
            let r = contract_conj(&ket, &axes, t, &axes, true);
            let d = r.shape()[0];
            Mat::new(d, d, r.into_data())
        }
        None => {
            let axes: Vec<usize> = (0..t.rank()).collect();
            let r = contract_conj(&ket, &axes, t, &axes, true);
            Mat::new(1, 1, r.into_data())
        }
    }
}

/// Hermitian part scaled to unit trace.
pub(crate) fn normalize_message(m: &Mat) -> Option<Mat> {
    let h = m.adjoint();
    let mut out = Mat::new(m.rows, m.cols, m.data.iter().zip(&h.data).map(|(a, b)| (a + b) * 0.5).collect());
    let tr = out.trace().re;
    if !(tr.is_finite() && tr > 0.0) {
        return None;
    }
    out.scale(1.0 / tr);
    Some(out)
}

fn distance(a: &Mat, b: &Mat) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Iterates BP to a fixed point, starting from `warm` when its dimensions
/// match the state and from uniform messages otherwise.
pub fn run_bp(state: &TnState, cfg: &BpConfig, warm: Option<&BpCache>) -> Result<BpCache> {
    state.check_finite()?;
    let mut cache = match warm {
        Some(w) if w.matches(state) => BpCache { converged: false, iterations: 0, final_delta: f64::INFINITY, ..w.clone() },
        _ => BpCache::identity(state),
    };
    let edges = state.lattice().edges().to_vec();
    let directed: Vec<(usize, usize)> = edges.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
    for it in 1..=cfg.max_iters {
        let old = cache.messages.clone();
        let mut delta: f64 = 0.0;
        for &(v, to) in &directed {
            let raw = match cfg.schedule {
                BpSchedule::Synchronous => outgoing(state, v, Some(to), |w| &old[slot(state, w, v)], UNIT),
                BpSchedule::Sequential => outgoing(state, v, Some(to), |w| &cache.messages[slot(state, w, v)], UNIT),
            };
            let mut new = normalize_message(&raw).ok_or(Error::DegenerateNorm(vec![v, to]))?;
            let k = slot(state, v, to);
            if cfg.damping > 0.0 {
                let mixed = new.data.iter().zip(&old[k].data).map(|(a, b)| a * (1.0 - cfg.damping) + b * cfg.damping).collect();
                new = normalize_message(&Mat::new(new.rows, new.cols, mixed)).ok_or(Error::DegenerateNorm(vec![v, to]))?;
            }
            delta = delta.max(distance(&new, &old[k]));
            cache.messages[k] = new;
        }
        cache.iterations = it;
        cache.final_delta = delta;
        if delta <= cfg.tolerance {
            cache.converged = true;
            break;
        }
    }
    if !cache.converged {
        log::warn!("BP stopped after {} iterations with delta {:.3e}", cache.iterations, cache.final_delta);
    }
    Ok(cache)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_device, Lattice};
    use crate::linalg::herm_eig;
    use crate::tn::gates::{rx, zz};
    use crate::tn::{apply_gate, Gate};

    fn random_path_state(n: usize, seed: u64) -> TnState {
        let edges: Vec<(usize, usize)> = (0..n - 1).map(|v| (v, v + 1)).collect();
        let l = Lattice::from_graph(n, &edges).unwrap();
        let mut s = TnState::init_plus(&l, None).unwrap();
        let mut bp = BpCache::identity(&s);
        for k in 0..3 * n {
            let a = (k * 7 + seed as usize) % (n - 1);
            apply_gate(&mut s, &mut bp, &Gate::Single { site: a, u: rx(0.3 + 0.1 * k as f64) }).unwrap();
            apply_gate(&mut s, &mut bp, &Gate::Two { a, b: a + 1, u: zz(0.2 * (k as f64 + 1.0)) }).unwrap();
        }
        s
    }

    #[test]
    fn product_state_messages_are_one() {
        let l = build_device("guadalupe").unwrap();
        let s = TnState::init_plus(&l, Some(8)).unwrap();
        let bp = run_bp(&s, &BpConfig::default(), None).unwrap();
        assert!(bp.converged);
        assert_eq!(bp.iterations, 1);
        assert!(bp.messages().iter().all(|m| m.rows == 1 && (m.data[0].re - 1.0).abs() < 1e-15));
    }

    #[test]
    fn tree_converges_within_diameter() {
        let s = random_path_state(8, 1);
        for schedule in [BpSchedule::Synchronous, BpSchedule::Sequential] {
            let cfg = BpConfig { schedule, ..BpConfig::default() };
            let bp = run_bp(&s, &cfg, None).unwrap();
            assert!(bp.converged);
            assert!(bp.iterations <= 8, "{schedule:?} took {}", bp.iterations);
        }
    }

    #[test]
    fn messages_are_psd_unit_trace() {
        let s = random_path_state(6, 3);
        let bp = run_bp(&s, &BpConfig::default(), None).unwrap();
        for m in bp.messages() {
            assert!((m.trace().re - 1.0).abs() < 1e-12);
            let (vals, _) = herm_eig(m);
            assert!(vals.iter().all(|&x| x >= -1e-12));
        }
    }
}
