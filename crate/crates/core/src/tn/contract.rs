//! Exact contraction of a state into dense form (small systems only).

use num_complex::Complex64 as C64;

use super::TnState;
use crate::error::{Error, Result};
use crate::linalg::{contract, Tensor};
use crate::statevector::DEFAULT_QUBIT_CAP;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Leg {
    Phys(usize),
    Bond(usize),
}

struct Labeled {
    t: Tensor,
    legs: Vec<Leg>,
}

fn labeled_sites(state: &TnState, fixed: Option<&[i8]>) -> Vec<Labeled> {
    let lat = state.lattice();
    (0..state.n())
        .map(|v| {
            let mut legs = vec![Leg::Phys(v)];
            legs.extend(lat.neighbors(v).iter().map(|&w| Leg::Bond(lat.edge_index(v, w).expect("edge"))));
            let t = state.tensor(v).clone();
            match fixed {
                None => Labeled { t, legs },
                Some(z) => {
                    let s = usize::from(z[v] != 1);
                    let rest: Vec<usize> = t.shape()[1..].to_vec();
                    let len: usize = rest.iter().product();
                    let data = t.data()[s * len..(s + 1) * len].to_vec();
                    Labeled { t: Tensor::new(rest, data), legs: legs[1..].to_vec() }
                }
            }
        })
        .collect()
}

/// Greedy pairwise contraction: repeatedly merges the pair of tensors
/// sharing a bond whose result is smallest.
fn contract_all(mut items: Vec<Labeled>) -> Labeled {
    while items.len() > 1 {
        let mut best: Option<(usize, usize, usize)> = None;
        for x in 0..items.len() {
            for y in x + 1..items.len() {
                let shared = items[x].legs.iter().any(|l| matches!(l, Leg::Bond(_)) && items[y].legs.contains(l));
                if !shared {
                    continue;
                }
                let size = result_size(&items[x], &items[y]);
                if best.is_none_or(|b| size < b.2) {
                    best = Some((x, y, size));
                }
            }
        }
        // disconnected leftovers (cannot happen on connected lattices) are
        // joined by an outer product
        let (x, y, _) = best.unwrap_or((0, 1, 0));
        let b = items.swap_remove(y);
        let a = items.swap_remove(x);
        items.push(merge(a, b));
    }
    items.pop().expect("non-empty network")
}

fn result_size(a: &Labeled, b: &Labeled) -> usize {
    let mut size = 1usize;
    for (k, l) in a.legs.iter().enumerate() {
        if !b.legs.contains(l) {
            size = size.saturating_mul(a.t.shape()[k]);
        }
    }
    for (k, l) in b.legs.iter().enumerate() {
        if !a.legs.contains(l) {
            size = size.saturating_mul(b.t.shape()[k]);
        }
    }
    size
}

fn merge(a: Labeled, b: Labeled) -> Labeled {
    let mut ax_a = Vec::new();
    let mut ax_b = Vec::new();
    for (k, l) in a.legs.iter().enumerate() {
        if let Some(m) = b.legs.iter().position(|x| x == l) {
            ax_a.push(k);
            ax_b.push(m);
        }
    }
    let t = contract(&a.t, &ax_a, &b.t, &ax_b);
    let legs = a
        .legs
        .iter()
        .enumerate()
        .filter(|(k, _)| !ax_a.contains(k))
        .map(|(_, l)| *l)
        .chain(b.legs.iter().enumerate().filter(|(k, _)| !ax_b.contains(k)).map(|(_, l)| *l))
        .collect();
    Labeled { t, legs }
}

/// All `2^n` amplitudes, indexed with bit `q` ↔ qubit `q`.
pub fn to_dense(state: &TnState) -> Result<Vec<C64>> {
    let n = state.n();
    if n > DEFAULT_QUBIT_CAP {
        return Err(Error::TooManyQubits { n, cap: DEFAULT_QUBIT_CAP });
    }
    let r = contract_all(labeled_sites(state, None));
    // most significant bit first: qubit n-1, …, qubit 0
    let perm: Vec<usize> =
        (0..n).rev().map(|q| r.legs.iter().position(|l| *l == Leg::Phys(q)).expect("physical leg")).collect();
    Ok(r.t.permute(&perm).into_data())
}

/// `⟨z|ψ⟩` by contracting the network with every physical index fixed.
pub fn amplitude(state: &TnState, z: &[i8]) -> Result<C64> {
    if z.len() != state.n() {
        return Err(Error::LengthMismatch { expected: state.n(), got: z.len() });
    }
    if let Some(q) = z.iter().position(|&s| s != 1 && s != -1) {
        return Err(Error::InvalidSpin { index: q, value: z[q] });
    }
    let r = contract_all(labeled_sites(state, Some(z)));
    Ok(r.t.data()[0])
}

/// `⟨ψ|ψ⟩` from the dense vector.
pub fn norm_sqr(state: &TnState) -> Result<f64> {
    Ok(to_dense(state)?.iter().map(|a| a.norm_sqr()).sum())
}
