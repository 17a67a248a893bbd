//! `gen`, `train` and `run`.

use serde::{Deserialize, Serialize};

use super::config::{rank_dir, Backend, ExperimentConfig, ScheduleSource, StageFilter};
use super::output::Outputs;
use crate::error::{Error, Result};
use crate::instance::{brute_force, random_instance, SpinGlassInstance, BRUTE_FORCE_CAP};
use crate::sampler::{build_norm_envs, sample_batch_with, write_samples_csv, BoundaryConfig, SamplerConfig};
use crate::schedule::{baseline_p5, median_transfer, train_one, InterpCoeffs, Schedule, TrainConfig};
use crate::statevector::StateVectorBackend;
use crate::tn::{evolve, write_diagnostics_csv, EvolveConfig, TnBackend, TnState};

pub(crate) fn instance_file(role: &str, seed: u64) -> String {
    format!("instances/{role}_{seed}.json")
}

pub(crate) fn ground_truth_file(seed: u64) -> String {
    format!("ground_truth/target_{seed}.json")
}

pub(crate) fn run_dir(seed: u64, p: usize) -> String {
    format!("runs/target_{seed}/p{p}")
}

pub(crate) fn batch_dir(seed: u64, p: usize, rm: Option<usize>) -> String {
    format!("{}/{}", run_dir(seed, p), rank_dir(rm))
}

fn schedule_dir(p: usize) -> String {
    format!("schedules/p{p}")
}

/// Result of training one instance at one depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub instance_seed: u64,
    pub p: usize,
    pub coeffs: InterpCoeffs,
    pub schedule: Schedule,
    pub energy: Option<f64>,
    pub evaluations: usize,
}

/// Norm-environment summary stored next to each batch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSummary {
    pub boundary_rank: Option<usize>,
    pub amplitude_rank: Option<usize>,
    pub max_rank: usize,
    pub norm_estimate: f64,
    pub fit_residuals: Vec<f64>,
    pub seed: u64,
}

fn load_instance(out: &Outputs, role: &str, seed: u64) -> Result<SpinGlassInstance> {
    SpinGlassInstance::from_json(&out.read(&instance_file(role, seed))?)
}

pub(crate) fn gen(cfg: &ExperimentConfig, filter: &StageFilter, out: &mut Outputs) -> Result<()> {
    let l = cfg.build_lattice()?;
    out.write("lattice.json", l.to_json()?.as_bytes())?;
    for (role, seeds) in [("train", &cfg.train_seeds), ("target", &cfg.target_seeds)] {
        for &seed in seeds.iter().filter(|&&s| filter.seed(s)) {
            let inst = random_instance(&l, seed);
            out.write(&instance_file(role, seed), inst.to_json()?.as_bytes())?;
            if role == "target" && l.n() <= BRUTE_FORCE_CAP {
                out.write_json(&ground_truth_file(seed), &brute_force(&inst)?)?;
            }
        }
    }
    Ok(())
}

pub(crate) fn train(cfg: &ExperimentConfig, filter: &StageFilter, out: &mut Outputs) -> Result<()> {
    for &p in cfg.p.iter().filter(|&&p| filter.p(p)) {
        let tc = TrainConfig::new(p, cfg.num_basis, cfg.max_evals);
        let mut log = String::from("instance_seed,iteration,best_energy,evaluations\n");
        let mut any = false;
        for &seed in cfg.train_seeds.iter().filter(|&&s| filter.seed(s)) {
            let inst = load_instance(out, "train", seed)?;
            let t = match cfg.backend {
                Backend::Statevector => train_one(&inst, &StateVectorBackend, &tc)?,
                Backend::Tn => train_one(&inst, &TnBackend::new(cfg.chi), &tc)?,
            };
            log::info!("trained p = {p}, seed {seed}: energy {:?} after {} evaluations", t.energy, t.evaluations);
            for row in &t.log {
                log.push_str(&format!("{},{},{:e},{}\n", row.instance_seed, row.iteration, row.best_energy, row.evaluations));
            }
            let rec = TrainRecord { instance_seed: seed, p, coeffs: t.coeffs, schedule: t.schedule, energy: t.energy, evaluations: t.evaluations };
            out.write_json(&format!("{}/train_{seed}.json", schedule_dir(p)), &rec)?;
            any = true;
        }
        if any {
            out.write(&format!("{}/train_log.csv", schedule_dir(p)), log.as_bytes())?;
        }
        // the median needs every training instance, possibly from earlier
        // filtered invocations
        let mut scheds = Vec::new();
        for &seed in &cfg.train_seeds {
            match out.read(&format!("{}/train_{seed}.json", schedule_dir(p))) {
                Ok(text) => scheds.push(serde_json::from_str::<TrainRecord>(&text)?.schedule),
                Err(_) => {
                    log::warn!("p = {p}: training seed {seed} missing, median not written");
                    scheds.clear();
                    break;
                }
            }
        }
        if !scheds.is_empty() {
            out.write_json(&format!("{}/median.json", schedule_dir(p)), &median_transfer(&scheds)?)?;
        }
    }
    Ok(())
}

fn resolve_schedule(cfg: &ExperimentConfig, out: &Outputs, p: usize) -> Result<Schedule> {
    let s: Schedule = match cfg.schedule_source() {
        ScheduleSource::BaselineP5 => baseline_p5(),
        ScheduleSource::Trained => serde_json::from_str(&out.read(&format!("{}/median.json", schedule_dir(p)))?)?,
        ScheduleSource::File(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::MissingInput(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text)?
        }
    };
    if s.p() != p {
        return Err(Error::Config(format!("schedule has p = {} but the run asks for p = {p}", s.p())));
    }
    Ok(s)
}

pub(crate) fn run(cfg: &ExperimentConfig, filter: &StageFilter, out: &mut Outputs) -> Result<()> {
    for &p in cfg.p.iter().filter(|&&p| filter.p(p)) {
        let sched = resolve_schedule(cfg, out, p)?;
        for &seed in cfg.target_seeds.iter().filter(|&&s| filter.seed(s)) {
            let inst = load_instance(out, "target", seed)?;
            let state = TnState::init_plus(inst.lattice(), Some(cfg.chi))?;
            let r = evolve(state, &inst, &sched, &EvolveConfig::new(Some(cfg.chi)))?;
            log::info!("evolved target {seed} at p = {p}: truncation {:.3e}", r.total_truncation);
            let mut buf = Vec::new();
            write_diagnostics_csv(&r.records, &mut buf)?;
            out.write(&format!("{}/diagnostics.csv", run_dir(seed, p)), &buf)?;
            for &rm in cfg.boundary_ranks.iter().filter(|&&r| filter.rm(r)) {
                let boundary = BoundaryConfig { rank: rm, variational_passes: cfg.variational_passes };
                let envs = build_norm_envs(&r.state, &boundary)?;
                let sc = SamplerConfig {
                    amplitude_rank: cfg.amplitude_rank,
                    boundary,
                    n_samples: cfg.n_samples,
                    seed: cfg.derive_seed("run", &[seed, p as u64, rm.map_or(0, |r| r as u64 + 1)]),
                    workers: cfg.workers,
                };
                let batch = sample_batch_with(&envs, Some(&inst), &sc)?;
                log::info!("target {seed}, p = {p}, {}: {:?}", rank_dir(rm), batch.stats);
                let dir = batch_dir(seed, p, rm);
                let mut buf = Vec::new();
                write_samples_csv(&batch, &mut buf)?;
                out.write(&format!("{dir}/samples.csv"), &buf)?;
                out.write_json(&format!("{dir}/stats.json"), &batch.stats)?;
                let summary = EnvSummary {
                    boundary_rank: rm,
                    amplitude_rank: cfg.amplitude_rank,
                    max_rank: envs.max_rank(),
                    norm_estimate: envs.norm_estimate(),
                    fit_residuals: envs.fit_residuals.clone(),
                    seed: sc.seed,
                };
                out.write_json(&format!("{dir}/envs.json"), &summary)?;
            }
        }
    }
    Ok(())
}
