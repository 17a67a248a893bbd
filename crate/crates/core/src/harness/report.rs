//! Merged summaries over the outputs of `run`. Every number comes from a
//! file listed in `sources`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{rank_dir, ExperimentConfig, StageFilter};
use super::output::Outputs;
use super::stages::{batch_dir, ground_truth_file, run_dir};
use crate::error::{Error, Result};
use crate::instance::GroundTruth;
use crate::sampler::{histogram, BatchStats};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub instance_seed: u64,
    pub p: usize,
    pub boundary_rank: Option<usize>,
    pub stats: BatchStats,
    pub mean_energy: f64,
    /// `Σ ω̃_i C(z_i) / N_s`.
    pub weighted_energy: f64,
    pub min_energy: i64,
    pub ground_state_energy: Option<i64>,
    /// Samples at the ground-state energy.
    pub ground_state_hits: Option<usize>,
    pub sources: Vec<String>,
}

pub(crate) struct SampleRow {
    pub energy: i64,
    pub omega: f64,
    pub omega_tilde: f64,
}

fn bad(file: &str, line: usize) -> Error {
    Error::MissingInput(format!("{file}: malformed line {line}"))
}

/// Parses the layout written by `write_samples_csv`.
pub(crate) fn parse_samples(file: &str, text: &str) -> Result<Vec<SampleRow>> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad(file, i + 1));
        }
        rows.push(SampleRow {
            energy: f[2].parse().map_err(|_| bad(file, i + 1))?,
            omega: f[5].parse().map_err(|_| bad(file, i + 1))?,
            omega_tilde: f[6].parse().map_err(|_| bad(file, i + 1))?,
        });
    }
    Ok(rows)
}

fn rank_label(r: Option<usize>) -> String {
    r.map_or_else(|| "full".into(), |r| r.to_string())
}

pub(crate) fn report(cfg: &ExperimentConfig, filter: &StageFilter, out: &mut Outputs) -> Result<()> {
    let mut energy_csv = String::from("p,R_M,instance_seed,energy,count\n");
    let mut weight_csv = String::from("p,R_M,instance_seed,weight,bin,lo,hi,count\n");
    let mut scut_csv = String::from("instance_seed,p,step,fraction,S_cut\n");
    let mut summary = Vec::new();
    for &p in cfg.p.iter().filter(|&&p| filter.p(p)) {
        for &seed in cfg.target_seeds.iter().filter(|&&s| filter.seed(s)) {
            let diag = format!("{}/diagnostics.csv", run_dir(seed, p));
            for (i, line) in out.read(&diag)?.lines().enumerate().skip(1) {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 5 {
                    return Err(bad(&diag, i + 1));
                }
                scut_csv.push_str(&format!("{seed},{p},{},{},{}\n", f[0], f[1], f[4]));
            }
            let gt_file = ground_truth_file(seed);
            let gt: Option<GroundTruth> = match out.read(&gt_file) {
                Ok(text) => Some(serde_json::from_str(&text)?),
                Err(_) => None,
            };
            for &rm in cfg.boundary_ranks.iter().filter(|&&r| filter.rm(r)) {
                let dir = batch_dir(seed, p, rm);
                let samples_file = format!("{dir}/samples.csv");
                let stats_file = format!("{dir}/stats.json");
                let rows = parse_samples(&samples_file, &out.read(&samples_file)?)?;
                let stats: BatchStats = serde_json::from_str(&out.read(&stats_file)?)?;
                if rows.is_empty() {
                    return Err(Error::MissingInput(format!("{samples_file}: no samples")));
                }
                let label = rank_label(rm);
                let mut counts = BTreeMap::new();
                for r in &rows {
                    *counts.entry(r.energy).or_insert(0usize) += 1;
                }
                for (e, c) in &counts {
                    energy_csv.push_str(&format!("{p},{label},{seed},{e},{c}\n"));
                }
                for (name, values) in [
                    ("omega", rows.iter().map(|r| r.omega).collect::<Vec<_>>()),
                    ("omega_tilde", rows.iter().map(|r| r.omega_tilde).collect()),
                ] {
                    let h = histogram(&values, cfg.histogram_bins);
                    let edges = h.edges();
                    for (k, c) in h.counts.iter().enumerate() {
                        weight_csv.push_str(&format!("{p},{label},{seed},{name},{k},{:e},{:e},{c}\n", edges[k], edges[k + 1]));
                    }
                }
                let n = rows.len() as f64;
                let min_energy = *counts.keys().next().expect("non-empty");
                let mut sources = vec![samples_file, stats_file, diag.clone()];
                if gt.is_some() {
                    sources.push(gt_file.clone());
                }
                summary.push(SummaryRow {
                    instance_seed: seed,
                    p,
                    boundary_rank: rm,
                    stats,
                    mean_energy: rows.iter().map(|r| r.energy as f64).sum::<f64>() / n,
                    weighted_energy: rows.iter().map(|r| r.omega_tilde * r.energy as f64).sum::<f64>() / n,
                    min_energy,
                    ground_state_energy: gt.as_ref().map(|g| g.energy),
                    ground_state_hits: gt.as_ref().map(|g| counts.get(&g.energy).copied().unwrap_or(0)),
                    sources,
                });
                log::debug!("report: target {seed}, p = {p}, {}", rank_dir(rm));
            }
        }
    }
    out.write("reports/energy_histograms.csv", energy_csv.as_bytes())?;
    out.write("reports/weight_histograms.csv", weight_csv.as_bytes())?;
    out.write("reports/scut_traces.csv", scut_csv.as_bytes())?;
    out.write_json("reports/summary.json", &summary)?;
    Ok(())
}
