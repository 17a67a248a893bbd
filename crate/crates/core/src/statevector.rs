//! Dense state-vector simulator.
//!
//! Basis index convention: bit `q` of the index is the computational value
//! of qubit `q`, and `z_q = +1` for bit 0, `z_q = −1` for bit 1.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::instance::{spins_to_index, SpinGlassInstance, Term};
use crate::schedule::{EnergyBackend, Schedule};

pub const DEFAULT_QUBIT_CAP: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<C64>,
}

impl DenseState {
    pub fn plus_state(n: usize) -> Result<Self> {
        Self::plus_state_with_cap(n, DEFAULT_QUBIT_CAP)
    }

    pub fn plus_state_with_cap(n: usize, cap: usize) -> Result<Self> {
        if n == 0 || n > cap {
            return Err(Error::TooManyQubits { n, cap });
        }
        let a = (0.5f64).powf(n as f64 / 2.0);
        Ok(DenseState { n, amps: vec![C64::new(a, 0.0); 1 << n] })
    }

    /// Computational basis state for spins `z`.
    pub fn basis_state(z: &[i8]) -> Result<Self> {
        let n = z.len();
        if n == 0 || n > DEFAULT_QUBIT_CAP {
            return Err(Error::TooManyQubits { n, cap: DEFAULT_QUBIT_CAP });
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[spins_to_index(z) as usize] = C64::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if amps.len() != 1 << n || n == 0 {
            return Err(Error::InvalidArgument("amplitude count is not a power of two".into()));
        }
        Ok(DenseState { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn amplitude(&self, z: &[i8]) -> Result<C64> {
        if z.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: z.len() });
        }
        Ok(self.amps[spins_to_index(z) as usize])
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `exp(−iθ X)` on qubit `q`.
    pub fn apply_rx_half(&mut self, q: usize, theta: f64) {
        let (c, s) = (theta.cos(), theta.sin());
        let ms = C64::new(0.0, -s);
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let a = self.amps[i];
                let b = self.amps[i | bit];
                self.amps[i] = a * c + b * ms;
                self.amps[i | bit] = a * ms + b * c;
            }
        }
    }

    /// Applies `exp(−iγ d Z_{s1} ⋯ Z_{sk})` for each term, in order.
    pub fn apply_cost_terms(&mut self, terms: &[Term], gamma: f64) {
        for t in terms {
            let mask: usize = t.sites.iter().map(|&s| 1usize << s).sum();
            let plus = C64::from_polar(1.0, -gamma * t.coeff as f64);
            let minus = plus.conj();
            for (i, a) in self.amps.iter_mut().enumerate() {
                *a *= if (i & mask).count_ones() % 2 == 0 { plus } else { minus };
            }
        }
    }

    /// Writes the state as little-endian: `n: u64`, then `2^n` pairs of
    /// `f64` (re, im) in basis-index order.
    pub fn write_le<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&(self.n as u64).to_le_bytes())?;
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_le<R: Read>(mut r: R) -> Result<Self> {
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        if n == 0 || n > 40 {
            return Err(Error::InvalidArgument(format!("bad qubit count {n} in state dump")));
        }
        let mut amps = Vec::with_capacity(1 << n);
        for _ in 0..(1usize << n) {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            amps.push(C64::new(re, f64::from_le_bytes(b8)));
        }
        Ok(DenseState { n, amps })
    }
}

fn check_dims(state: &DenseState, instance: &SpinGlassInstance) -> Result<()> {
    if state.n != instance.n() {
        return Err(Error::LengthMismatch { expected: instance.n(), got: state.n });
    }
    Ok(())
}

/// Integer cost of every basis index.
pub fn cost_table(instance: &SpinGlassInstance) -> Vec<i64> {
    (0..1u64 << instance.n()).map(|x| instance.cost_of_index(x)).collect()
}

/// Applies the QAOA layers: the diagonal phase `exp(−iγ_j C)` followed by
/// `exp(−iβ_j X)` on every qubit.
pub fn apply_qaoa(state: &mut DenseState, instance: &SpinGlassInstance, schedule: &Schedule) -> Result<()> {
    check_dims(state, instance)?;
    let costs = cost_table(instance);
    let cmin = costs.iter().copied().min().unwrap_or(0);
    let cmax = costs.iter().copied().max().unwrap_or(0);
    for (gamma, beta) in schedule.layers() {
        if gamma != 0.0 {
            let phases: Vec<C64> = (cmin..=cmax).map(|c| C64::from_polar(1.0, -gamma * c as f64)).collect();
            for (a, &c) in state.amps.iter_mut().zip(&costs) {
                *a *= phases[(c - cmin) as usize];
            }
        }
        if beta != 0.0 {
            for q in 0..state.n {
                state.apply_rx_half(q, beta);
            }
        }
    }
    Ok(())
}

/// Prepares `U(γ, β)|+⟩^n`.
pub fn qaoa_state(instance: &SpinGlassInstance, schedule: &Schedule) -> Result<DenseState> {
    let mut s = DenseState::plus_state(instance.n())?;
    apply_qaoa(&mut s, instance, schedule)?;
    Ok(s)
}

/// `Σ_z |ψ(z)|² C(z)`.
pub fn energy(state: &DenseState, instance: &SpinGlassInstance) -> Result<f64> {
    check_dims(state, instance)?;
    Ok(state.amps.iter().enumerate().map(|(x, a)| a.norm_sqr() * instance.cost_of_index(x as u64) as f64).sum())
}

/// I.i.d. basis indices drawn from `|ψ|²`.
pub fn sample_exact<R: Rng + ?Sized>(state: &DenseState, count: usize, rng: &mut R) -> Vec<u64> {
    let mut cdf = Vec::with_capacity(state.amps.len());
    let mut acc = 0.0;
    for a in &state.amps {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    (0..count)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(cdf.len() - 1) as u64
        })
        .collect()
}

/// Exact-simulation backend for training.
#[derive(Clone, Copy, Debug, Default)]
pub struct StateVectorBackend;

impl EnergyBackend for StateVectorBackend {
    fn energy(&self, instance: &SpinGlassInstance, schedule: &Schedule) -> Result<f64> {
        energy(&qaoa_state(instance, schedule)?, instance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::random_instance;
    use crate::lattice::{build_device, build_square};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn plus_states() {
        let s = DenseState::plus_state(1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0].re - h).abs() < 1e-15 && (s.amplitudes()[1].re - h).abs() < 1e-15);
        assert!(DenseState::plus_state(2).unwrap().amplitudes().iter().all(|a| (a.re - 0.5).abs() < 1e-15));
        assert!((DenseState::plus_state(10).unwrap().norm_sqr() - 1.0).abs() < 1e-12);
        assert!(matches!(DenseState::plus_state(30), Err(Error::TooManyQubits { .. })));
        let s = DenseState::plus_state(3).unwrap();
        assert!((s.amplitude(&[1, -1, 1]).unwrap().re - 0.125f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_schedule_is_identity_and_plus_energy_zero() {
        let inst = random_instance(&build_device("guadalupe").unwrap(), 3);
        let s = qaoa_state(&inst, &Schedule::zeros(3).unwrap()).unwrap();
        assert_eq!(s, DenseState::plus_state(16).unwrap());
        assert!(energy(&s, &inst).unwrap().abs() < 1e-12);
    }

    #[test]
    fn diagonal_only_keeps_uniform_probabilities() {
        let inst = random_instance(&build_square(3, 3).unwrap(), 4);
        let sched = Schedule::new(vec![0.3, 1.1], vec![0.0, 0.0]).unwrap();
        let s = qaoa_state(&inst, &sched).unwrap();
        assert!(s.probabilities().iter().all(|p| (p - 1.0 / 512.0).abs() < 1e-14));
    }

    #[test]
    fn basis_energy_is_cost() {
        let inst = random_instance(&build_device("guadalupe").unwrap(), 8);
        let z: Vec<i8> = (0..16).map(|q| if q % 3 == 0 { -1 } else { 1 }).collect();
        let s = DenseState::basis_state(&z).unwrap();
        assert_eq!(energy(&s, &inst).unwrap(), inst.cost(&z).unwrap() as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_exact(&s, 50, &mut rng).iter().all(|&x| x == spins_to_index(&z)));
        let mut z2 = z.clone();
        z2[1] = -1;
        assert_eq!(s.amplitude(&z2).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let s = DenseState::plus_state(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts = [0usize; 4];
        for x in sample_exact(&s, 40_000, &mut rng) {
            counts[x as usize] += 1;
        }
        for c in counts {
            assert!((c as f64 / 40_000.0 - 0.25).abs() < 0.01);
        }
    }

    #[test]
    fn unitarity_over_deep_circuit() {
        let inst = random_instance(&build_square(3, 4).unwrap(), 9);
        let gammas: Vec<f64> = (0..100).map(|j| 0.1 + 0.01 * j as f64).collect();
        let betas: Vec<f64> = (0..100).map(|j| 0.7 - 0.005 * j as f64).collect();
        let s = qaoa_state(&inst, &Schedule::new(gammas, betas).unwrap()).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn dump_round_trip() {
        let inst = random_instance(&build_square(2, 3).unwrap(), 2);
        let s = qaoa_state(&inst, &Schedule::new(vec![0.4], vec![0.2]).unwrap()).unwrap();
        let mut buf = Vec::new();
        s.write_le(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 16 * 64);
        assert_eq!(DenseState::read_le(buf.as_slice()).unwrap(), s);
    }
}
