//! Gate set and circuit compilation.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::instance::SpinGlassInstance;
use crate::schedule::Schedule;

const O: C64 = C64::new(0.0, 0.0);
const I1: C64 = C64::new(1.0, 0.0);

/// One- or two-qubit gate. Two-qubit matrices use the basis index
/// `2 s_a + s_b`.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate {
    Single { site: usize, u: [[C64; 2]; 2] },
    Two { a: usize, b: usize, u: [[C64; 4]; 4] },
}

/// `exp(−iθZ/2)`.
pub fn rz(theta: f64) -> [[C64; 2]; 2] {
    [[C64::from_polar(1.0, -theta / 2.0), O], [O, C64::from_polar(1.0, theta / 2.0)]]
}

/// `exp(−iθX/2)`.
pub fn rx(theta: f64) -> [[C64; 2]; 2] {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    [[C64::new(c, 0.0), C64::new(0.0, -s)], [C64::new(0.0, -s), C64::new(c, 0.0)]]
}

/// `exp(−iφ Z⊗Z)`.
pub fn zz(phi: f64) -> [[C64; 4]; 4] {
    let m = C64::from_polar(1.0, -phi);
    let p = m.conj();
    [[m, O, O, O], [O, p, O, O], [O, O, p, O], [O, O, O, m]]
}

/// CNOT with the first qubit as control.
pub fn cnot() -> [[C64; 4]; 4] {
    [[I1, O, O, O], [O, I1, O, O], [O, O, O, I1], [O, O, I1, O]]
}

impl Gate {
    pub fn sites(&self) -> Vec<usize> {
        match self {
            Gate::Single { site, .. } => vec![*site],
            Gate::Two { a, b, .. } => vec![*a, *b],
        }
    }

    /// Applies the gate to a dense amplitude vector (bit `q` of the index is
    /// qubit `q`).
    pub fn apply_dense(&self, amps: &mut [C64]) {
        match self {
            Gate::Single { site, u } => {
                let bit = 1usize << site;
                for i in 0..amps.len() {
                    if i & bit == 0 {
                        let (x, y) = (amps[i], amps[i | bit]);
                        amps[i] = u[0][0] * x + u[0][1] * y;
                        amps[i | bit] = u[1][0] * x + u[1][1] * y;
                    }
                }
            }
            Gate::Two { a, b, u } => {
                let (ba, bb) = (1usize << a, 1usize << b);
                for i in 0..amps.len() {
                    if i & ba == 0 && i & bb == 0 {
                        let idx = [i, i | bb, i | ba, i | ba | bb];
                        let x = idx.map(|k| amps[k]);
                        for r in 0..4 {
                            amps[idx[r]] = (0..4).map(|c| u[r][c] * x[c]).sum();
                        }
                    }
                }
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        match self {
            Gate::Single { u, .. } => (0..2).all(|r| (0..2).all(|c| u[r][c] == if r == c { I1 } else { O })),
            Gate::Two { u, .. } => (0..4).all(|r| (0..4).all(|c| u[r][c] == if r == c { I1 } else { O })),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    Cost,
    Mixer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub kind: LayerKind,
    /// 1-based QAOA layer index.
    pub step: usize,
    pub gates: Vec<Gate>,
}

/// Three-body rotation `exp(−iγ d Z_l Z_n1 Z_n2)` as the CNOT sandwich
/// around `Rz(2γd)` on `l`.
pub fn cubic_sandwich(l: usize, n1: usize, n2: usize, angle: f64) -> Vec<Gate> {
    vec![
        Gate::Two { a: n1, b: l, u: cnot() },
        Gate::Two { a: n2, b: l, u: cnot() },
        Gate::Single { site: l, u: rz(2.0 * angle) },
        Gate::Two { a: n2, b: l, u: cnot() },
        Gate::Two { a: n1, b: l, u: cnot() },
    ]
}

/// Per QAOA layer: a cost layer (linear Rz, quadratic ZZ, cubic sandwiches)
/// followed by a mixer layer of `Rx(2β)` on every qubit.
pub fn compile_circuit(instance: &SpinGlassInstance, schedule: &Schedule) -> Result<Vec<Layer>> {
    let lattice = instance.lattice();
    for &(l, n1, n2, _) in &instance.cubic {
        if !lattice.has_edge(l, n1) || !lattice.has_edge(l, n2) {
            return Err(Error::NotAnEdge(l, if lattice.has_edge(l, n1) { n2 } else { n1 }));
        }
    }
    let mut layers = Vec::with_capacity(2 * schedule.p());
    for (j, (gamma, beta)) in schedule.layers().enumerate() {
        let mut gates = Vec::new();
        for &(v, d) in &instance.linear {
            gates.push(Gate::Single { site: v, u: rz(2.0 * gamma * d as f64) });
        }
        for &(a, b, d) in &instance.quadratic {
            gates.push(Gate::Two { a, b, u: zz(gamma * d as f64) });
        }
        for &(l, n1, n2, d) in &instance.cubic {
            gates.extend(cubic_sandwich(l, n1, n2, gamma * d as f64));
        }
        layers.push(Layer { kind: LayerKind::Cost, step: j + 1, gates });
        let mixer = (0..instance.n()).map(|q| Gate::Single { site: q, u: rx(2.0 * beta) }).collect();
        layers.push(Layer { kind: LayerKind::Mixer, step: j + 1, gates: mixer });
    }
    Ok(layers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::random_instance;
    use crate::lattice::{build_device, build_square};
    use crate::statevector::{qaoa_state, DenseState};

    #[test]
    fn square_gate_count() {
        let inst = random_instance(&build_square(4, 4).unwrap(), 1);
        let layers = compile_circuit(&inst, &Schedule::new(vec![0.3], vec![0.2]).unwrap()).unwrap();
        assert_eq!(layers.len(), 2);
        let two = layers[0].gates.iter().filter(|g| matches!(g, Gate::Two { .. })).count();
        assert_eq!(two, 24);
        assert_eq!(layers[0].gates.len(), 24);
        assert_eq!(layers[1].gates.len(), 16);
    }

    #[test]
    fn zero_gamma_layer_is_identity() {
        let inst = random_instance(&build_device("guadalupe").unwrap(), 2);
        let layers = compile_circuit(&inst, &Schedule::new(vec![0.0], vec![0.4]).unwrap()).unwrap();
        let mut amps = vec![C64::new(0.3, 0.1); 1 << 16];
        let before = amps.clone();
        for g in &layers[0].gates {
            g.apply_dense(&mut amps);
        }
        assert!(amps.iter().zip(&before).all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn compiled_circuit_matches_statevector() {
        let inst = random_instance(&build_device("guadalupe").unwrap(), 5);
        let sched = Schedule::new(vec![0.2, -0.4, 0.7], vec![0.6, 0.3, -0.1]).unwrap();
        let mut s = DenseState::plus_state(16).unwrap();
        let mut amps = s.amplitudes().to_vec();
        for layer in compile_circuit(&inst, &sched).unwrap() {
            for g in &layer.gates {
                g.apply_dense(&mut amps);
            }
        }
        s = DenseState::from_amplitudes(amps).unwrap();
        let want = qaoa_state(&inst, &sched).unwrap();
        let err = s.amplitudes().iter().zip(want.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }
}
