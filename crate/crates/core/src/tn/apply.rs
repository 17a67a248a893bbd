//! BP-gauged gate application.

use num_complex::Complex64 as C64;

use super::bp::BpCache;
use super::gates::Gate;
use super::TnState;
use crate::error::{Error, Result};
use crate::linalg::{contract, herm_sqrt_pinv, qr, truncated_svd, Mat, Tensor};

/// Singular values below this fraction of the largest are numerical zeros.
pub const SVD_CUTOFF: f64 = 1e-13;
const SQRT_EPS: f64 = 1e-12;
const PINV_CUTOFF: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GateReport {
    /// Relative squared weight dropped by the bond-dimension cap.
    pub truncation_weight: f64,
    /// Bond dimension after the gate (0 for single-qubit gates).
    pub bond_dim: usize,
}

fn check_unitary(u: &[C64], d: usize) {
    let mut err: f64 = 0.0;
    for r in 0..d {
        for c in 0..d {
            let x: C64 = (0..d).map(|k| u[k * d + r].conj() * u[k * d + c]).sum();
            let want = if r == c { 1.0 } else { 0.0 };
            err = err.max((x - want).norm());
        }
    }
    if err > 1e-10 {
        log::warn!("applying a non-unitary gate (deviation {err:.2e})");
    }
}

/// Applies `gate`. Two-qubit gates absorb the square roots of the incoming
/// messages on the external bonds of both sites, contract the gate, SVD
/// across the shared bond, keep at most `chi_max` values split as `√Λ` to
/// each side, and restore the external bonds with the pseudo-inverse roots.
/// The two messages on the gated bond are replaced by the new local ones;
/// all other messages are left untouched.
pub fn apply_gate(state: &mut TnState, bp: &mut BpCache, gate: &Gate) -> Result<GateReport> {
    match gate {
        Gate::Single { site, u } => {
            if *site >= state.n() {
                return Err(Error::InvalidArgument(format!("site {site} out of range")));
            }
            check_unitary(&[u[0][0], u[0][1], u[1][0], u[1][1]], 2);
            state.apply_single(*site, u);
            Ok(GateReport::default())
        }
        Gate::Two { a, b, u } => {
            if !state.lattice().has_edge(*a, *b) {
                return Err(Error::NotAnEdge(*a, *b));
            }
            let flat: Vec<C64> = u.iter().flatten().copied().collect();
            check_unitary(&flat, 4);
            apply_two(state, bp, *a, *b, u)
        }
    }
}

/// Site tensor with environment roots absorbed, laid out as
/// `[external bonds.., phys, bond to j]`, plus the pseudo-inverse roots.
struct Gauged {
    t: Tensor,
    externals: Vec<usize>,
    pinvs: Vec<Mat>,
}

fn gauge_site(state: &TnState, bp: &BpCache, i: usize, j: usize) -> Gauged {
    let nbrs = state.lattice().neighbors(i);
    let externals: Vec<usize> = nbrs.iter().copied().filter(|&w| w != j).collect();
    let mut perm: Vec<usize> = externals.iter().map(|&w| state.bond_axis(i, w)).collect();
    perm.push(0);
    perm.push(state.bond_axis(i, j));
    let mut t = state.tensor(i).permute(&perm);
    let mut pinvs = Vec::with_capacity(externals.len());
    for (k, &w) in externals.iter().enumerate() {
        let (s, sp) = herm_sqrt_pinv(bp.message(state, w, i), SQRT_EPS, PINV_CUTOFF);
        t = t.apply_on_axis(k, &s);
        pinvs.push(sp);
    }
    Gauged { t, externals, pinvs }
}

/// Undoes [`gauge_site`] for a new tensor `[external.., phys, new bond]`.
fn restore_site(state: &TnState, i: usize, j: usize, g: &Gauged, mut t: Tensor) -> Tensor {
    for (k, sp) in g.pinvs.iter().enumerate() {
        t = t.apply_on_axis(k, sp);
    }
    // current layout: [externals in neighbor order (skipping j), phys, j]
    let nbrs = state.lattice().neighbors(i);
    let pos_j = nbrs.binary_search(&j).expect("neighbor");
    let ne = g.externals.len();
    let mut perm = vec![ne];
    for k in 0..nbrs.len() {
        perm.push(match k.cmp(&pos_j) {
            std::cmp::Ordering::Less => k,
            std::cmp::Ordering::Equal => ne + 1,
            std::cmp::Ordering::Greater => k - 1,
        });
    }
    t.permute(&perm)
}

fn apply_two(state: &mut TnState, bp: &mut BpCache, a: usize, b: usize, u: &[[C64; 4]; 4]) -> Result<GateReport> {
    let (i, j) = (a, b);
    let d = state.bond_dim(i, j);
    let gi = gauge_site(state, bp, i, j);
    let gj = gauge_site(state, bp, j, i);
    let ext_i: usize = gi.t.shape()[..gi.externals.len()].iter().product();
    let ext_j: usize = gj.t.shape()[..gj.externals.len()].iter().product();
    let (qi, ri) = qr(&Mat::new(ext_i, 2 * d, gi.t.data().to_vec()));
    let (qj, rj) = qr(&Mat::new(ext_j, 2 * d, gj.t.data().to_vec()));
    let (ki, kj) = (ri.rows, rj.rows);
    // A[ri, si, rj, sj] = Σ_e Ri[ri, si, e] Rj[rj, sj, e]
    let ti = Tensor::new(vec![ki, 2, d], ri.data);
    let tj = Tensor::new(vec![kj, 2, d], rj.data);
    let amp = contract(&ti, &[2], &tj, &[2]).permute(&[0, 2, 1, 3]); // [ri, rj, si, sj]
    // gate acts on (si, sj): out[.., s'] = Σ_s in[.., s] U[s', s]
    let gt = Mat::new(4, 4, (0..16).map(|k| u[k % 4][k / 4]).collect());
    let amp = amp.reshape(vec![ki, kj, 4]).apply_on_axis(2, &gt);
    let theta = amp.reshape(vec![ki, kj, 2, 2]).permute(&[0, 2, 1, 3]);
    let theta = Mat::new(2 * ki, 2 * kj, theta.into_data());
    if theta.data.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let svd = truncated_svd(&theta, state.chi_max(), SVD_CUTOFF);
    let k = svd.s.len();
    let sq: Vec<f64> = svd.s.iter().map(|x| x.sqrt()).collect();
    let mut left = svd.u;
    for r in 0..left.rows {
        for c in 0..k {
            left.data[r * k + c] *= sq[c];
        }
    }
    let mut right = svd.vt;
    for r in 0..k {
        for c in 0..right.cols {
            right.data[r * right.cols + c] *= sq[r];
        }
    }
    // left: (ri, si') × k  →  Qi · left  →  [externals.., phys, k]
    let new_i = qi.matmul(&Mat::new(ki, 2 * k, left.data));
    let mut shape_i: Vec<usize> = gi.t.shape()[..gi.externals.len()].to_vec();
    shape_i.extend([2, k]);
    let new_i = restore_site(state, i, j, &gi, Tensor::new(shape_i, new_i.data));
    // right: k × (rj, sj')  →  (rj, sj') × k
    let right_t = right.transpose();
    let new_j = qj.matmul(&Mat::new(kj, 2 * k, right_t.data));
    let mut shape_j: Vec<usize> = gj.t.shape()[..gj.externals.len()].to_vec();
    shape_j.extend([2, k]);
    let new_j = restore_site(state, j, i, &gj, Tensor::new(shape_j, new_j.data));
    state.set_tensor(i, new_i);
    state.set_tensor(j, new_j);
    let total: f64 = svd.s.iter().sum();
    let msg = if total > 0.0 {
        Mat::from_diag(&svd.s.iter().map(|x| x / total).collect::<Vec<_>>())
    } else {
        Mat::from_diag(&vec![1.0 / k as f64; k])
    };
    bp.set_message(state, i, j, msg.clone());
    bp.set_message(state, j, i, msg);
    Ok(GateReport { truncation_weight: svd.discarded, bond_dim: k })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::random_instance;
    use crate::lattice::build_device;
    use crate::schedule::Schedule;
    use crate::statevector::qaoa_state;
    use crate::tn::gates::{cnot, compile_circuit, rx, zz};
    use crate::tn::{run_bp, to_dense, BpConfig};

    fn max_err(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn identity_gate_keeps_state() {
        let l = build_device("guadalupe").unwrap();
        let mut s = TnState::init_plus(&l, Some(8)).unwrap();
        let mut bp = BpCache::identity(&s);
        apply_gate(&mut s, &mut bp, &Gate::Two { a: 1, b: 2, u: zz(0.4) }).unwrap();
        let before = to_dense(&s).unwrap();
        let id = Gate::Two { a: 1, b: 4, u: zz(0.0) };
        apply_gate(&mut s, &mut bp, &id).unwrap();
        assert!(max_err(&before, &to_dense(&s).unwrap()) < 1e-12);
    }

    #[test]
    fn gate_then_inverse_restores() {
        let l = build_device("guadalupe").unwrap();
        let mut s = TnState::init_plus(&l, None).unwrap();
        let mut bp = BpCache::identity(&s);
        for (a, b) in [(1, 2), (2, 3), (1, 4)] {
            apply_gate(&mut s, &mut bp, &Gate::Two { a, b, u: zz(0.3) }).unwrap();
            apply_gate(&mut s, &mut bp, &Gate::Single { site: a, u: rx(0.9) }).unwrap();
        }
        let before = to_dense(&s).unwrap();
        bp = run_bp(&s, &BpConfig::default(), Some(&bp)).unwrap();
        apply_gate(&mut s, &mut bp, &Gate::Two { a: 4, b: 1, u: cnot() }).unwrap();
        apply_gate(&mut s, &mut bp, &Gate::Two { a: 4, b: 1, u: cnot() }).unwrap();
        let after = to_dense(&s).unwrap();
        let overlap: C64 = before.iter().zip(&after).map(|(x, y)| x.conj() * y).sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn small_circuit_matches_statevector() {
        let l = build_device("guadalupe").unwrap();
        let inst = random_instance(&l, 11);
        let sched = Schedule::new(vec![0.3, -0.2], vec![0.5, 0.25]).unwrap();
        let mut s = TnState::init_plus(&l, None).unwrap();
        let mut bp = BpCache::identity(&s);
        for layer in compile_circuit(&inst, &sched).unwrap() {
            for g in &layer.gates {
                let rep = apply_gate(&mut s, &mut bp, g).unwrap();
                assert_eq!(rep.truncation_weight, 0.0);
            }
            bp = run_bp(&s, &BpConfig::default(), Some(&bp)).unwrap();
        }
        let want = qaoa_state(&inst, &sched).unwrap();
        assert!(max_err(&to_dense(&s).unwrap(), want.amplitudes()) < 1e-10);
    }

    #[test]
    fn truncation_reports_weight() {
        let l = build_device("guadalupe").unwrap();
        let inst = random_instance(&l, 12);
        let sched = Schedule::new(vec![0.7; 3], vec![0.4; 3]).unwrap();
        let mut s = TnState::init_plus(&l, Some(2)).unwrap();
        let mut bp = BpCache::identity(&s);
        let mut total = 0.0;
        for layer in compile_circuit(&inst, &sched).unwrap() {
            for g in &layer.gates {
                total += apply_gate(&mut s, &mut bp, g).unwrap().truncation_weight;
            }
            bp = run_bp(&s, &BpConfig::default(), Some(&bp)).unwrap();
        }
        assert!(total > 0.0);
        assert!(s.max_bond_dim() <= 2);
    }

    #[test]
    fn non_edge_rejected() {
        let l = build_device("guadalupe").unwrap();
        let mut s = TnState::init_plus(&l, None).unwrap();
        let mut bp = BpCache::identity(&s);
        assert!(matches!(apply_gate(&mut s, &mut bp, &Gate::Two { a: 0, b: 5, u: cnot() }), Err(Error::NotAnEdge(0, 5))));
    }
}
