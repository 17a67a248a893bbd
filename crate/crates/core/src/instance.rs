//! Random ±1 spin-glass instances, exact cost evaluation and brute-force
//! ground states.
//!
//! Coefficients are drawn from a counter-based generator: the sign of term
//! `k` in coefficient class `c` (0 linear, 1 quadratic, 2 cubic) is the low
//! bit of `splitmix64(seed ^ splitmix64(c + 1) + k * GOLDEN)`, so an instance
//! depends only on `(lattice, seed)` and is identical on every platform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{self, Lattice, LatticeKind};

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic `±1` for term `index` of coefficient class `class`.
pub fn counter_sign(seed: u64, class: u64, index: u64) -> i8 {
    let key = seed ^ splitmix64(class + 1);
    if splitmix64(key.wrapping_add(index.wrapping_mul(GOLDEN))) & 1 == 0 {
        1
    } else {
        -1
    }
}

/// A Z-string term of the cost Hamiltonian.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub sites: Vec<usize>,
    pub coeff: i8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpinGlassInstance {
    lattice: Lattice,
    pub seed: u64,
    /// `(v, d_v)`; empty on square lattices.
    pub linear: Vec<(usize, i8)>,
    /// `(i, j, d_ij)` with `i < j`, one per lattice edge.
    pub quadratic: Vec<(usize, usize, i8)>,
    /// `(l, n1, n2, d)`; empty on square lattices.
    pub cubic: Vec<(usize, usize, usize, i8)>,
}

impl SpinGlassInstance {
    /// Assembles an instance from explicit coefficients.
    pub fn new(
        lattice: Lattice,
        seed: u64,
        linear: Vec<(usize, i8)>,
        quadratic: Vec<(usize, usize, i8)>,
        cubic: Vec<(usize, usize, usize, i8)>,
    ) -> Result<Self> {
        let n = lattice.n();
        let pm = |d: i8| d == 1 || d == -1;
        if !linear.iter().all(|&(v, d)| v < n && pm(d))
            || !quadratic.iter().all(|&(i, j, d)| lattice.has_edge(i, j) && pm(d))
            || !cubic
                .iter()
                .all(|&(l, a, b, d)| lattice.has_edge(l, a) && lattice.has_edge(l, b) && a != b && pm(d))
        {
            return Err(Error::InvalidArgument("coefficient outside ±1 or off-lattice term".into()));
        }
        Ok(SpinGlassInstance { lattice, seed, linear, quadratic, cubic })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    /// Flat list of Z-string terms: linear, then quadratic, then cubic.
    pub fn cost_operator_terms(&self) -> Vec<Term> {
        let mut terms = Vec::with_capacity(self.linear.len() + self.quadratic.len() + self.cubic.len());
        terms.extend(self.linear.iter().map(|&(v, d)| Term { sites: vec![v], coeff: d }));
        terms.extend(self.quadratic.iter().map(|&(i, j, d)| Term { sites: vec![i, j], coeff: d }));
        terms.extend(self.cubic.iter().map(|&(l, a, b, d)| Term { sites: vec![l, a, b], coeff: d }));
        terms
    }

    /// Exact integer cost of a spin vector.
    pub fn cost(&self, z: &[i8]) -> Result<i64> {
        if z.len() != self.n() {
            return Err(Error::LengthMismatch { expected: self.n(), got: z.len() });
        }
        if let Some((index, &value)) = z.iter().enumerate().find(|(_, &s)| s != 1 && s != -1) {
            return Err(Error::InvalidSpin { index, value });
        }
        Ok(self.cost_unchecked(z))
    }

    pub(crate) fn cost_unchecked(&self, z: &[i8]) -> i64 {
        let mut c = 0i64;
        for &(v, d) in &self.linear {
            c += (d * z[v]) as i64;
        }
        for &(i, j, d) in &self.quadratic {
            c += (d * z[i] * z[j]) as i64;
        }
        for &(l, a, b, d) in &self.cubic {
            c += (d * z[l] * z[a] * z[b]) as i64;
        }
        c
    }

    /// Cost of the computational basis index `x` (bit `q` set ⇔ `z_q = −1`).
    pub fn cost_of_index(&self, x: u64) -> i64 {
        let s = |q: usize| -> i64 { 1 - 2 * ((x >> q) & 1) as i64 };
        let mut c = 0i64;
        for &(v, d) in &self.linear {
            c += d as i64 * s(v);
        }
        for &(i, j, d) in &self.quadratic {
            c += d as i64 * s(i) * s(j);
        }
        for &(l, a, b, d) in &self.cubic {
            c += d as i64 * s(l) * s(a) * s(b);
        }
        c
    }

    pub fn to_doc(&self) -> InstanceDoc {
        InstanceDoc {
            lattice_ref: self.lattice.kind().to_string(),
            seed: self.seed,
            linear: self.linear.iter().map(|&(v, d)| [v as i64, d as i64]).collect(),
            quadratic: self.quadratic.iter().map(|&(i, j, d)| [i as i64, j as i64, d as i64]).collect(),
            cubic: self.cubic.iter().map(|&(l, a, b, d)| [l as i64, a as i64, b as i64, d as i64]).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_doc())?)
    }

    pub fn from_doc(doc: &InstanceDoc) -> Result<Self> {
        let kind: LatticeKind = doc.lattice_ref.parse()?;
        let lattice = lattice::build(kind)?;
        let idx = |x: i64| -> Result<usize> {
            usize::try_from(x).map_err(|_| Error::InvalidArgument(format!("negative vertex {x}")))
        };
        let coef = |x: i64| -> Result<i8> {
            match x {
                1 => Ok(1),
                -1 => Ok(-1),
                _ => Err(Error::InvalidArgument(format!("coefficient {x} is not ±1"))),
            }
        };
        let linear = doc.linear.iter().map(|t| Ok((idx(t[0])?, coef(t[1])?))).collect::<Result<_>>()?;
        let quadratic =
            doc.quadratic.iter().map(|t| Ok((idx(t[0])?, idx(t[1])?, coef(t[2])?))).collect::<Result<_>>()?;
        let cubic = doc
            .cubic
            .iter()
            .map(|t| Ok((idx(t[0])?, idx(t[1])?, idx(t[2])?, coef(t[3])?)))
            .collect::<Result<_>>()?;
        Self::new(lattice, doc.seed, linear, quadratic, cubic)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(s)?)
    }
}

/// Instance JSON layout.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceDoc {
    pub lattice_ref: String,
    pub seed: u64,
    pub linear: Vec<[i64; 2]>,
    pub quadratic: Vec<[i64; 3]>,
    pub cubic: Vec<[i64; 4]>,
}

/// Seeded random instance: field and cubic terms on heavy-hex lattices,
/// nearest-neighbor couplings only on square lattices.
pub fn random_instance(lattice: &Lattice, seed: u64) -> SpinGlassInstance {
    let quadratic = lattice
        .edges()
        .iter()
        .enumerate()
        .map(|(k, &(i, j))| (i, j, counter_sign(seed, 1, k as u64)))
        .collect();
    let (linear, cubic) = if lattice.kind().is_heavy_hex() {
        let linear = (0..lattice.n()).map(|v| (v, counter_sign(seed, 0, v as u64))).collect();
        let cls = lattice::classify_by_degree(lattice);
        let cubic = cls
            .w
            .iter()
            .enumerate()
            .map(|(k, &(l, a, b))| (l, a, b, counter_sign(seed, 2, k as u64)))
            .collect();
        (linear, cubic)
    } else {
        (Vec::new(), Vec::new())
    };
    SpinGlassInstance { lattice: lattice.clone(), seed, linear, quadratic, cubic }
}

/// Default enumeration cap.
pub const BRUTE_FORCE_CAP: usize = 26;
/// Default number of stored minimizers.
pub const MAX_REPRESENTATIVES: usize = 1024;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub energy: i64,
    pub count: u64,
    /// Basis indices of the first minimizers in enumeration order.
    pub representatives: Vec<u64>,
}

impl GroundTruth {
    pub fn spins(&self, n: usize) -> Vec<Vec<i8>> {
        self.representatives.iter().map(|&x| index_to_spins(x, n)).collect()
    }
}

pub fn index_to_spins(x: u64, n: usize) -> Vec<i8> {
    (0..n).map(|q| if (x >> q) & 1 == 0 { 1 } else { -1 }).collect()
}

pub fn spins_to_index(z: &[i8]) -> u64 {
    z.iter().enumerate().fold(0u64, |acc, (q, &s)| if s == -1 { acc | (1 << q) } else { acc })
}

pub fn brute_force(instance: &SpinGlassInstance) -> Result<GroundTruth> {
    brute_force_with(instance, BRUTE_FORCE_CAP, MAX_REPRESENTATIVES)
}

/// Exhaustive search using a Gray-code walk (one spin flip per step).
pub fn brute_force_with(instance: &SpinGlassInstance, cap: usize, max_reps: usize) -> Result<GroundTruth> {
    let n = instance.n();
    if n > cap {
        return Err(Error::TooManyQubits { n, cap });
    }
    // Per-site incident terms for incremental updates.
    let mut incident: Vec<Vec<(i64, Vec<usize>)>> = vec![Vec::new(); n];
    for t in instance.cost_operator_terms() {
        for &s in &t.sites {
            let others: Vec<usize> = t.sites.iter().copied().filter(|&o| o != s).collect();
            incident[s].push((t.coeff as i64, others));
        }
    }
    let mut z = vec![1i8; n];
    let mut energy = instance.cost_unchecked(&z);
    let mut best = GroundTruth { energy, count: 1, representatives: vec![0] };
    let mut x: u64 = 0;
    for step in 1u64..(1u64 << n) {
        let q = step.trailing_zeros() as usize;
        let mut local = 0i64;
        for (d, others) in &incident[q] {
            local += d * others.iter().map(|&o| z[o] as i64).product::<i64>();
        }
        energy -= 2 * local * z[q] as i64;
        z[q] = -z[q];
        x ^= 1 << q;
        if energy < best.energy {
            best = GroundTruth { energy, count: 1, representatives: vec![x] };
        } else if energy == best.energy {
            best.count += 1;
            if best.representatives.len() < max_reps {
                best.representatives.push(x);
            }
        }
    }
    best.representatives.sort_unstable();
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_device, build_square, HeavyHexSpec};

    fn path3() -> Lattice {
        Lattice::from_parts(
            LatticeKind::HeavyHex(HeavyHexSpec::Grid { rows: 1, cols: 1 }),
            &[(0, 1), (1, 2)],
            &[(0, 0), (1, 0), (2, 0)],
        )
        .unwrap()
    }

    #[test]
    fn deterministic() {
        let l = build_device("guadalupe").unwrap();
        assert_eq!(random_instance(&l, 7), random_instance(&l, 7));
        assert_ne!(random_instance(&l, 7), random_instance(&l, 8));
    }

    #[test]
    fn square_has_only_couplings() {
        let inst = random_instance(&build_square(4, 4).unwrap(), 3);
        assert_eq!((inst.linear.len(), inst.quadratic.len(), inst.cubic.len()), (0, 24, 0));
        assert_eq!(random_instance(&build_square(2, 2).unwrap(), 1).cost_operator_terms().len(), 4);
    }

    #[test]
    fn path_cost_all_plus() {
        let l = path3();
        let inst = SpinGlassInstance::new(l, 0, vec![(0, 1), (1, 1), (2, 1)], vec![(0, 1, 1), (1, 2, 1)], vec![]).unwrap();
        assert_eq!(inst.cost(&[1, 1, 1]).unwrap(), 5);
        assert!(matches!(inst.cost(&[1, 1]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(inst.cost(&[1, 0, 1]), Err(Error::InvalidSpin { index: 1, .. })));
        let terms = inst.cost_operator_terms();
        assert_eq!(terms.iter().filter(|t| t.sites.len() == 1).count(), 3);
        assert_eq!(terms.iter().filter(|t| t.sites.len() == 2).count(), 2);
    }

    #[test]
    fn heavy_hex_path_instance_has_no_cubic() {
        let inst = random_instance(&path3(), 11);
        assert_eq!(inst.cubic.len(), 0);
        assert_eq!(inst.linear.len(), 3);
    }

    #[test]
    fn guadalupe_term_count() {
        let l = build_device("guadalupe").unwrap();
        let w = lattice::classify_vertices(&l).unwrap().w.len();
        let inst = random_instance(&l, 5);
        assert_eq!(inst.cost_operator_terms().len(), 16 + 16 + w);
    }

    #[test]
    fn brute_force_tiny() {
        let single = Lattice::from_parts(
            LatticeKind::HeavyHex(HeavyHexSpec::Grid { rows: 1, cols: 1 }),
            &[],
            &[(0, 0)],
        )
        .unwrap();
        let inst = SpinGlassInstance::new(single, 0, vec![(0, 1)], vec![], vec![]).unwrap();
        let gt = brute_force(&inst).unwrap();
        assert_eq!(gt.energy, -1);
        assert_eq!(gt.spins(1), vec![vec![-1]]);

        let pair = Lattice::from_parts(LatticeKind::Square { rows: 1, cols: 2 }, &[(0, 1)], &[(0, 0), (1, 0)]).unwrap();
        let inst = SpinGlassInstance::new(pair, 0, vec![], vec![(0, 1, 1)], vec![]).unwrap();
        let gt = brute_force(&inst).unwrap();
        assert_eq!((gt.energy, gt.count), (-1, 2));
    }

    #[test]
    fn brute_force_cap() {
        let inst = random_instance(&build_device("geneva").unwrap(), 0);
        assert!(matches!(brute_force_with(&inst, 20, 4), Err(Error::TooManyQubits { .. })));
    }

    #[test]
    fn json_round_trip() {
        let inst = random_instance(&build_device("guadalupe").unwrap(), 99);
        assert_eq!(SpinGlassInstance::from_json(&inst.to_json().unwrap()).unwrap(), inst);
    }
}
