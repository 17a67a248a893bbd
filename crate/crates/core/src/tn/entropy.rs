//! Bond entanglement estimates from BP messages.

use serde::{Deserialize, Serialize};

use super::bp::BpCache;
use super::TnState;
use crate::error::{Error, Result};
use crate::linalg::{herm_sqrt_pinv, svd, Mat};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpectrum {
    pub edge: (usize, usize),
    /// Descending, normalized to `Σ Λ² = 1`.
    pub singular_values: Vec<f64>,
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSpec {
    pub edges: Vec<EdgeSpectrum>,
    pub s_cut: f64,
}

impl CutSpec {
    /// `|∂A| · log2 χ`.
    pub fn bound(&self, chi: usize) -> f64 {
        self.edges.len() as f64 * (chi as f64).log2()
    }
}

/// Spectrum of the bond `(a, b)`. With `G_a[x, y] = ⟨L_y|L_x⟩` the message
/// out of `a`'s side and `G_b` the one out of `b`'s side, the Schmidt values
/// are the singular values of `conj(G_a)^{1/2} G_b^{1/2}`.
pub fn edge_entropy(state: &TnState, bp: &BpCache, a: usize, b: usize) -> Result<EdgeSpectrum> {
    if !state.lattice().has_edge(a, b) {
        return Err(Error::NotAnEdge(a, b));
    }
    let ga = bp.message(state, a, b);
    let gb = bp.message(state, b, a);
    let ga_conj = Mat::new(ga.rows, ga.cols, ga.data.iter().map(|x| x.conj()).collect());
    let (ra, _) = herm_sqrt_pinv(&ga_conj, 0.0, 0.0);
    let (rb, _) = herm_sqrt_pinv(gb, 0.0, 0.0);
    let s = svd(&ra.matmul(&rb)).s;
    let norm: f64 = s.iter().map(|x| x * x).sum();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::ZeroSpectrum(a, b));
    }
    let singular_values: Vec<f64> = s.iter().map(|x| x / norm.sqrt()).collect();
    let entropy = singular_values
        .iter()
        .map(|x| x * x)
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0);
    Ok(EdgeSpectrum { edge: (a.min(b), a.max(b)), singular_values, entropy })
}

/// `S_cut = Σ_{e ∈ cut} S_e`.
pub fn cut_entropy(state: &TnState, bp: &BpCache, cut: &[(usize, usize)]) -> Result<CutSpec> {
    let edges = cut.iter().map(|&(a, b)| edge_entropy(state, bp, a, b)).collect::<Result<Vec<_>>>()?;
    let s_cut = edges.iter().map(|e| e.entropy).sum();
    Ok(CutSpec { edges, s_cut })
}
