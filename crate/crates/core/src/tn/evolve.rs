//! Full QAOA evolution with diagnostics.

use serde::{Deserialize, Serialize};

use super::bp::{run_bp, BpCache, BpConfig};
use super::gates::{compile_circuit, LayerKind};
use super::{apply_gate, bp_energy, bp_log_norm, cut_entropy, TnState};
use crate::error::Result;
use crate::instance::SpinGlassInstance;
use crate::lattice::bisecting_cut;
use crate::schedule::{EnergyBackend, Schedule};

/// When BP is re-converged during an evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BpRefresh {
    /// After every cost layer and every mixer layer.
    PerLayer,
    /// After every two-qubit gate.
    PerGate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolveConfig {
    /// `None` disables truncation.
    pub chi_max: Option<usize>,
    pub bp: BpConfig,
    pub refresh: BpRefresh,
    /// Extra BP attempts (with damping 0.5) when a refresh does not converge.
    pub bp_retries: usize,
    /// Record entropy and norm diagnostics after each QAOA layer.
    pub diagnostics: bool,
}

impl EvolveConfig {
    pub fn new(chi_max: Option<usize>) -> Self {
        EvolveConfig { chi_max, bp: BpConfig::default(), refresh: BpRefresh::PerLayer, bp_retries: 1, diagnostics: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// QAOA layer index `j` (0 = initial state).
    pub step: usize,
    pub fraction: f64,
    /// Truncation weight summed over the gates of this layer.
    pub truncation_weight: f64,
    /// BP estimate of `⟨ψ|ψ⟩`.
    pub norm_estimate: f64,
    pub s_cut: f64,
}

#[derive(Clone, Debug)]
pub struct EvolveResult {
    pub state: TnState,
    pub bp: BpCache,
    pub records: Vec<StepRecord>,
    pub total_truncation: f64,
    /// BP refreshes that ended unconverged.
    pub bp_failures: usize,
}

fn refresh(state: &TnState, cfg: &EvolveConfig, warm: &BpCache, failures: &mut usize) -> Result<BpCache> {
    let mut bp = run_bp(state, &cfg.bp, Some(warm))?;
    for _ in 0..cfg.bp_retries {
        if bp.converged {
            break;
        }
        let damped = BpConfig { damping: 0.5, ..cfg.bp };
        bp = run_bp(state, &damped, Some(&bp))?;
    }
    if !bp.converged {
        *failures += 1;
        log::warn!("continuing with unconverged BP (delta {:.3e})", bp.final_delta);
    }
    Ok(bp)
}

fn record(state: &TnState, bp: &BpCache, cut: &[(usize, usize)], step: usize, p: usize, trunc: f64) -> Result<StepRecord> {
    Ok(StepRecord {
        step,
        fraction: if p == 0 { 0.0 } else { step as f64 / p as f64 },
        truncation_weight: trunc,
        norm_estimate: bp_log_norm(state, bp)?.exp(),
        s_cut: cut_entropy(state, bp, cut)?.s_cut,
    })
}

/// `step,fraction,truncation_weight,norm_estimate,S_cut`, one row per record.
pub fn write_diagnostics_csv<W: std::io::Write>(records: &[StepRecord], mut w: W) -> Result<()> {
    writeln!(w, "step,fraction,truncation_weight,norm_estimate,S_cut")?;
    for r in records {
        writeln!(w, "{},{},{:e},{:e},{:e}", r.step, r.fraction, r.truncation_weight, r.norm_estimate, r.s_cut)?;
    }
    Ok(())
}

/// Runs the compiled circuit of `schedule` on `state`.
pub fn evolve(state: TnState, instance: &SpinGlassInstance, schedule: &Schedule, cfg: &EvolveConfig) -> Result<EvolveResult> {
    let mut state = state;
    let cut = bisecting_cut(state.lattice());
    let mut failures = 0;
    let mut bp = refresh(&state, cfg, &BpCache::identity(&state), &mut failures)?;
    let p = schedule.p();
    let mut records = Vec::new();
    if cfg.diagnostics {
        records.push(record(&state, &bp, &cut, 0, p, 0.0)?);
    }
    let mut total = 0.0;
    let mut layer_trunc = 0.0;
    for layer in compile_circuit(instance, schedule)? {
        for g in &layer.gates {
            let rep = apply_gate(&mut state, &mut bp, g)?;
            layer_trunc += rep.truncation_weight;
            if cfg.refresh == BpRefresh::PerGate && rep.bond_dim > 0 {
                bp = refresh(&state, cfg, &bp, &mut failures)?;
            }
        }
        bp = refresh(&state, cfg, &bp, &mut failures)?;
        if layer.kind == LayerKind::Mixer {
            total += layer_trunc;
            if cfg.diagnostics {
                records.push(record(&state, &bp, &cut, layer.step, p, layer_trunc)?);
            }
            layer_trunc = 0.0;
        }
    }
    Ok(EvolveResult { state, bp, records, total_truncation: total, bp_failures: failures })
}

/// Energy backend evolving a TN at fixed `χ` and reading off `bp_energy`.
#[derive(Clone, Debug)]
pub struct TnBackend {
    pub config: EvolveConfig,
}

impl TnBackend {
    pub fn new(chi_max: usize) -> Self {
        let mut config = EvolveConfig::new(Some(chi_max));
        config.diagnostics = false;
        TnBackend { config }
    }
}

impl EnergyBackend for TnBackend {
    fn energy(&self, instance: &SpinGlassInstance, schedule: &Schedule) -> Result<f64> {
        let state = TnState::init_plus(instance.lattice(), self.config.chi_max)?;
        let r = evolve(state, instance, schedule, &self.config)?;
        bp_energy(&r.state, &r.bp, instance)
    }
}
