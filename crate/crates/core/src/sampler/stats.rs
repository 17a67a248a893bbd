use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Batch, SampleRecord};
use crate::error::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    #[serde(rename = "N_s")]
    pub n_s: usize,
    pub mean_omega: f64,
    /// Population variance.
    pub var_omega: f64,
    pub var_omega_tilde: f64,
    pub aborts: usize,
}

/// Statistics of `omega` and the normalized weights `ω / Mean(ω)`.
pub fn batch_stats(omega: &[f64], aborts: usize) -> (BatchStats, Vec<f64>) {
    let n = omega.len();
    let (mean, var) = mean_var(omega);
    let tilde: Vec<f64> = omega.iter().map(|w| w / mean).collect();
    let (_, var_t) = mean_var(&tilde);
    (BatchStats { n_s: n, mean_omega: mean, var_omega: var, var_omega_tilde: var_t, aborts }, tilde)
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Equal-width bins over `[lo, hi]`; the last bin is closed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn edges(&self) -> Vec<f64> {
        let k = self.counts.len();
        (0..=k).map(|i| self.lo + (self.hi - self.lo) * i as f64 / k as f64).collect()
    }
}

pub fn histogram(values: &[f64], bins: usize) -> Histogram {
    let bins = bins.max(1);
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut counts = vec![0; bins];
    if finite.is_empty() {
        return Histogram { lo: 0.0, hi: 0.0, counts };
    }
    let width = hi - lo;
    for v in finite {
        let k = if width > 0.0 { (((v - lo) / width) * bins as f64) as usize } else { 0 };
        counts[k.min(bins - 1)] += 1;
    }
    Histogram { lo, hi, counts }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightDiagnostics {
    pub mean_omega: f64,
    pub var_omega: f64,
    pub var_omega_tilde: f64,
    pub omega: Histogram,
    pub omega_tilde: Histogram,
    /// `(energy, count)` ascending by energy.
    pub energies: Vec<(i64, usize)>,
}

pub fn weight_diagnostics(records: &[SampleRecord], bins: usize) -> WeightDiagnostics {
    let omega: Vec<f64> = records.iter().map(|r| r.omega).collect();
    let (stats, tilde) = batch_stats(&omega, 0);
    let mut energies = BTreeMap::new();
    for e in records.iter().filter_map(|r| r.energy) {
        *energies.entry(e).or_insert(0) += 1;
    }
    WeightDiagnostics {
        mean_omega: stats.mean_omega,
        var_omega: stats.var_omega,
        var_omega_tilde: stats.var_omega_tilde,
        omega: histogram(&omega, bins),
        omega_tilde: histogram(&tilde, bins),
        energies: energies.into_iter().collect(),
    }
}

/// `sample_index,bitstring,energy,log_P,log_Q,omega,omega_tilde`.
pub fn write_samples_csv<W: Write>(batch: &Batch, mut w: W) -> Result<()> {
    writeln!(w, "sample_index,bitstring,energy,log_P,log_Q,omega,omega_tilde")?;
    for (r, t) in batch.records.iter().zip(&batch.omega_tilde) {
        let e = r.energy.map(|e| e.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{:e},{:e},{:e},{:e}", r.index, r.bitstring(), e, r.log_p, r.log_q, r.omega, t)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_weights() {
        let (s, t) = batch_stats(&[1.0, 3.0], 0);
        assert_eq!(s.mean_omega, 2.0);
        assert_eq!(t, vec![0.5, 1.5]);
        assert_eq!(s.var_omega, 1.0);
        assert_eq!(s.var_omega_tilde, 0.25);
    }

    #[test]
    fn constant_weights_have_zero_variance() {
        let (s, t) = batch_stats(&[0.7; 5], 1);
        assert_eq!(s.var_omega_tilde, 0.0);
        assert!(t.iter().all(|&x| x == 1.0));
        assert_eq!(s.aborts, 1);
    }

    #[test]
    fn histogram_bins() {
        let h = histogram(&[0.0, 0.5, 1.0, 1.0], 2);
        assert_eq!(h.counts, vec![1, 3]);
        assert_eq!(h.edges(), vec![0.0, 0.5, 1.0]);
        assert_eq!(histogram(&[2.0, 2.0], 3).counts, vec![2, 0, 0]);
    }
}
