//! Local expectation values in the BP environment.

use super::bp::{outgoing, BpCache, UNIT};
use super::TnState;
use crate::error::{Error, Result};
use crate::instance::SpinGlassInstance;
use crate::linalg::Mat;

const Z: [f64; 2] = [1.0, -1.0];

fn pair(a: &Mat, b: &Mat) -> f64 {
    a.data.iter().zip(&b.data).map(|(x, y)| (x * y).re).sum()
}

/// Orders `sites` along a simple path of lattice edges.
fn as_path(state: &TnState, sites: &[usize]) -> Result<Vec<usize>> {
    let lat = state.lattice();
    if sites.len() <= 1 {
        return Ok(sites.to_vec());
    }
    let inner = |v: usize| sites.iter().filter(|&&w| w != v && lat.has_edge(v, w)).count();
    let start = sites.iter().copied().find(|&v| inner(v) == 1).ok_or_else(|| {
        Error::InvalidArgument(format!("sites {sites:?} do not form a path"))
    })?;
    let mut path = vec![start];
    while path.len() < sites.len() {
        let last = *path.last().expect("non-empty");
        let next = sites
            .iter()
            .copied()
            .find(|&w| !path.contains(&w) && lat.has_edge(last, w))
            .ok_or_else(|| Error::InvalidArgument(format!("sites {sites:?} do not form a path")))?;
        path.push(next);
    }
    Ok(path)
}

/// Contracts the path region with the given physical weights and BP
/// messages on all external bonds.
fn region_value(state: &TnState, bp: &BpCache, path: &[usize], weights: &[[f64; 2]]) -> f64 {
    let msg = |from: usize, to: usize| bp.message(state, from, to);
    if path.len() == 1 {
        let v = path[0];
        return outgoing(state, v, None, |w| msg(w, v), weights[0]).data[0].re;
    }
    let mut cur = outgoing(state, path[0], Some(path[1]), |w| msg(w, path[0]), weights[0]);
    for k in 1..path.len() - 1 {
        let (prev, v, next) = (path[k - 1], path[k], path[k + 1]);
        let held = cur;
        cur = outgoing(state, v, Some(next), |w| if w == prev { &held } else { msg(w, v) }, weights[k]);
    }
    let last = path.len() - 1;
    let end = outgoing(state, path[last], Some(path[last - 1]), |w| msg(w, path[last]), weights[last]);
    pair(&cur, &end)
}

/// `⟨Π_{q ∈ sites} Z_q⟩` for sites forming a path, normalized by the same
/// contraction without operators.
pub fn local_expectation(state: &TnState, bp: &BpCache, sites: &[usize]) -> Result<f64> {
    let path = as_path(state, sites)?;
    let num = region_value(state, bp, &path, &vec![Z; path.len()]);
    let den = region_value(state, bp, &path, &vec![UNIT; path.len()]);
    if !(den.is_finite() && den.abs() > 1e-300) {
        return Err(Error::DegenerateNorm(path));
    }
    Ok(num / den)
}

/// Sum of BP-local expectations of every cost term.
pub fn bp_energy(state: &TnState, bp: &BpCache, instance: &SpinGlassInstance) -> Result<f64> {
    if instance.n() != state.n() {
        return Err(Error::LengthMismatch { expected: state.n(), got: instance.n() });
    }
    let mut e = 0.0;
    for term in instance.cost_operator_terms() {
        e += term.coeff as f64 * local_expectation(state, bp, &term.sites)?;
    }
    Ok(e)
}

/// BP estimate of `ln⟨ψ|ψ⟩`: `Σ_v ln Z_v − Σ_e ln Z_e` with unit-trace
/// messages. Exact on trees.
pub fn bp_log_norm(state: &TnState, bp: &BpCache) -> Result<f64> {
    let mut total = 0.0;
    for v in 0..state.n() {
        let z = outgoing(state, v, None, |w| bp.message(state, w, v), UNIT).data[0].re;
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::DegenerateNorm(vec![v]));
        }
        total += z.ln();
    }
    for &(a, b) in state.lattice().edges() {
        let z = pair(bp.message(state, a, b), bp.message(state, b, a));
        if !(z > 0.0 && z.is_finite()) {
            return Err(Error::DegenerateNorm(vec![a, b]));
        }
        total -= z.ln();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{random_instance, SpinGlassInstance};
    use crate::lattice::{build_device, Lattice};
    use crate::schedule::Schedule;
    use crate::statevector::{energy, qaoa_state, DenseState};
    use crate::tn::{apply_gate, compile_circuit, norm_sqr, run_bp, to_dense, BpConfig};

    #[test]
    fn plus_state_energy_zero() {
        let l = build_device("guadalupe").unwrap();
        let inst = random_instance(&l, 4);
        let s = TnState::init_plus(&l, Some(4)).unwrap();
        let bp = run_bp(&s, &BpConfig::default(), None).unwrap();
        assert!(bp_energy(&s, &bp, &inst).unwrap().abs() < 1e-15);
        assert!(bp_log_norm(&s, &bp).unwrap().abs() < 1e-14);
    }

    #[test]
    fn basis_state_energy_is_cost() {
        let l = build_device("guadalupe").unwrap();
        let inst = random_instance(&l, 4);
        let z: Vec<i8> = (0..16).map(|q| if q % 3 == 2 { -1 } else { 1 }).collect();
        let s = TnState::basis_state(&l, &z, None).unwrap();
        let bp = run_bp(&s, &BpConfig::default(), None).unwrap();
        assert_eq!(bp_energy(&s, &bp, &inst).unwrap(), inst.cost(&z).unwrap() as f64);
    }

    #[test]
    fn tree_energy_and_norm_exact() {
        // a comb: spine 0-1-2-3 with teeth 4, 5, 6, 7
        let edges = [(0, 1), (1, 2), (2, 3), (0, 4), (1, 5), (2, 6), (3, 7)];
        let l = Lattice::from_graph(8, &edges).unwrap();
        let linear: Vec<(usize, i8)> = (0..8).map(|v| (v, if v % 3 == 0 { -1 } else { 1 })).collect();
        let quadratic: Vec<(usize, usize, i8)> =
            edges.iter().enumerate().map(|(k, &(a, b))| (a, b, if k % 2 == 0 { 1 } else { -1 })).collect();
        let inst = SpinGlassInstance::new(l.clone(), 0, linear, quadratic, vec![]).unwrap();
        let sched = Schedule::new(vec![0.4, -0.7], vec![0.3, 0.8]).unwrap();
        let mut s = TnState::init_plus(&l, None).unwrap();
        let mut bp = run_bp(&s, &BpConfig::default(), None).unwrap();
        for layer in compile_circuit(&inst, &sched).unwrap() {
            for g in &layer.gates {
                apply_gate(&mut s, &mut bp, g).unwrap();
            }
            bp = run_bp(&s, &BpConfig::default(), Some(&bp)).unwrap();
        }
        let want = energy(&qaoa_state(&inst, &sched).unwrap(), &inst).unwrap();
        assert!((bp_energy(&s, &bp, &inst).unwrap() - want).abs() < 1e-10);
        let norm = norm_sqr(&s).unwrap();
        assert!((bp_log_norm(&s, &bp).unwrap() - norm.ln()).abs() < 1e-10);
        let dense = DenseState::from_amplitudes(to_dense(&s).unwrap()).unwrap();
        assert!((energy(&dense, &inst).unwrap() / norm - want).abs() < 1e-10);
    }

    #[test]
    fn non_path_region_rejected() {
        let l = build_device("guadalupe").unwrap();
        let s = TnState::init_plus(&l, None).unwrap();
        let bp = run_bp(&s, &BpConfig::default(), None).unwrap();
        assert!(local_expectation(&s, &bp, &[0, 5]).is_err());
    }
}
