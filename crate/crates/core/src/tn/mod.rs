//! Graph-shaped tensor-network states.
//!
//! Site tensor `v` has axis 0 physical (dimension 2, index 0 ↔ `z = +1`)
//! followed by one virtual axis per neighbor, in the sorted neighbor order
//! of the lattice.

mod apply;
pub mod bp;
pub mod checkpoint;
pub mod contract;
pub mod entropy;
pub mod evolve;
pub mod expect;
pub mod gates;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::linalg::{Mat, Tensor};

pub use apply::{apply_gate, GateReport, SVD_CUTOFF};
pub use bp::{run_bp, BpCache, BpConfig, BpSchedule};
pub use contract::{amplitude, norm_sqr, to_dense};
pub use entropy::{cut_entropy, edge_entropy, CutSpec, EdgeSpectrum};
pub use evolve::{evolve, write_diagnostics_csv, BpRefresh, EvolveConfig, EvolveResult, StepRecord, TnBackend};
pub use expect::{bp_energy, bp_log_norm, local_expectation};
pub use gates::{compile_circuit, Gate, Layer, LayerKind};

#[derive(Clone, Debug, PartialEq)]
pub struct TnState {
    lattice: Lattice,
    chi_max: Option<usize>,
    tensors: Vec<Tensor>,
}

impl TnState {
    /// `|+⟩^n` with all bonds of dimension 1. `chi_max = None` disables
    /// truncation.
    pub fn init_plus(lattice: &Lattice, chi_max: Option<usize>) -> Result<Self> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::product_state(lattice, &vec![[C64::new(h, 0.0); 2]; lattice.n()], chi_max)
    }

    /// Product state with single-qubit amplitudes `local[v]`.
    pub fn product_state(lattice: &Lattice, local: &[[C64; 2]], chi_max: Option<usize>) -> Result<Self> {
        if chi_max == Some(0) {
            return Err(Error::InvalidArgument("chi_max must be at least 1".into()));
        }
        if local.len() != lattice.n() {
            return Err(Error::LengthMismatch { expected: lattice.n(), got: local.len() });
        }
        let tensors = (0..lattice.n())
            .map(|v| {
                let mut shape = vec![2];
                shape.extend(std::iter::repeat(1).take(lattice.degree(v)));
                Tensor::new(shape, local[v].to_vec())
            })
            .collect();
        Ok(TnState { lattice: lattice.clone(), chi_max, tensors })
    }

    /// Computational basis state for spins `z`.
    pub fn basis_state(lattice: &Lattice, z: &[i8], chi_max: Option<usize>) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let local: Vec<[C64; 2]> = z.iter().map(|&s| if s == 1 { [one, zero] } else { [zero, one] }).collect();
        Self::product_state(lattice, &local, chi_max)
    }

    pub(crate) fn from_parts(lattice: Lattice, chi_max: Option<usize>, tensors: Vec<Tensor>) -> Result<Self> {
        let state = TnState { lattice, chi_max, tensors };
        state.validate()?;
        Ok(state)
    }

    /// Checks axis layout and bond agreement.
    pub fn validate(&self) -> Result<()> {
        let n = self.lattice.n();
        if self.tensors.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: self.tensors.len() });
        }
        for v in 0..n {
            let t = &self.tensors[v];
            if t.rank() != 1 + self.lattice.degree(v) || t.shape()[0] != 2 {
                return Err(Error::InvalidDimensions(format!("site {v} has shape {:?}", t.shape())));
            }
        }
        for &(a, b) in self.lattice.edges() {
            if self.bond_dim(a, b) != self.tensors[b].shape()[self.bond_axis(b, a)] {
                return Err(Error::InvalidDimensions(format!("bond ({a}, {b}) disagrees")));
            }
        }
        Ok(())
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn n(&self) -> usize {
        self.lattice.n()
    }

    pub fn chi_max(&self) -> Option<usize> {
        self.chi_max
    }

    pub fn tensor(&self, v: usize) -> &Tensor {
        &self.tensors[v]
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub(crate) fn set_tensor(&mut self, v: usize, t: Tensor) {
        self.tensors[v] = t;
    }

    /// Axis of site `v` carrying the bond to neighbor `w`.
    pub fn bond_axis(&self, v: usize, w: usize) -> usize {
        1 + self.lattice.neighbors(v).binary_search(&w).expect("not a neighbor")
    }

    pub fn bond_dim(&self, v: usize, w: usize) -> usize {
        self.tensors[v].shape()[self.bond_axis(v, w)]
    }

    /// Bond dimensions in lattice edge order.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.lattice.edges().iter().map(|&(a, b)| self.bond_dim(a, b)).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// `T_v ← U T_v` on the physical axis.
    pub fn apply_single(&mut self, v: usize, u: &[[C64; 2]; 2]) {
        let m = Mat::new(2, 2, vec![u[0][0], u[1][0], u[0][1], u[1][1]]);
        self.tensors[v] = self.tensors[v].apply_on_axis(0, &m);
    }

    /// Inserts `G G⁻¹ = 1` on bond `(a, b)`: `G` is absorbed into `a`,
    /// `G⁻¹` into `b`. The represented state is unchanged.
    pub fn gauge_bond(&mut self, a: usize, b: usize, g: &Mat, g_inv: &Mat) -> Result<()> {
        if !self.lattice.has_edge(a, b) {
            return Err(Error::NotAnEdge(a, b));
        }
        let (xa, xb) = (self.bond_axis(a, b), self.bond_axis(b, a));
        self.tensors[a] = self.tensors[a].apply_on_axis(xa, g);
        self.tensors[b] = self.tensors[b].apply_on_axis(xb, &g_inv.transpose());
        Ok(())
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        for (v, t) in self.tensors.iter().enumerate() {
            if t.data().iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
                return Err(Error::NonFinite(v));
            }
        }
        Ok(())
    }
}
