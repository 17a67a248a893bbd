//! Boundary-MPS bitstring sampling with importance weights.

mod boundary;
mod column;
mod draw;
mod mps;
mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub use boundary::{build_norm_envs, BoundaryConfig, BoundaryEnvs};
pub use draw::MIN_CONDITIONAL_MASS;
pub use stats::{batch_stats, histogram, weight_diagnostics, write_samples_csv, BatchStats, Histogram, WeightDiagnostics};

use crate::error::{Error, Result};
use crate::instance::SpinGlassInstance;
use crate::tn::TnState;
use draw::{Draw, Drawer};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub z: Vec<i8>,
    pub log_q: f64,
    pub log_p: f64,
    /// `P/Q`.
    pub omega: f64,
    pub energy: Option<i64>,
}

impl SampleRecord {
    /// `'1'` where `z_q = -1`, qubit 0 first.
    pub fn bitstring(&self) -> String {
        self.z.iter().map(|&s| if s == 1 { '0' } else { '1' }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Bond cap `R_m` of the amplitude MPSs; `None` keeps the exact rank.
    pub amplitude_rank: Option<usize>,
    pub boundary: BoundaryConfig,
    pub n_samples: usize,
    pub seed: u64,
    /// Samples are split into contiguous index ranges, worker `w` taking
    /// `[w·N/W, (w+1)·N/W)` with RNG seed `seed + w`.
    pub workers: usize,
}

impl SamplerConfig {
    pub fn new(amplitude_rank: Option<usize>, boundary_rank: Option<usize>, n_samples: usize, seed: u64) -> Self {
        SamplerConfig {
            amplitude_rank,
            boundary: BoundaryConfig { rank: boundary_rank, ..BoundaryConfig::default() },
            n_samples,
            seed,
            workers: 1,
        }
    }
}

/// A completed batch. `omega_tilde[k]` belongs to `records[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub records: Vec<SampleRecord>,
    pub omega_tilde: Vec<f64>,
    pub stats: BatchStats,
    pub fit_residuals: Vec<f64>,
}

fn check_rank(r: Option<usize>) -> Result<()> {
    if r == Some(0) {
        return Err(Error::InvalidArgument("R_m must be at least 1".into()));
    }
    Ok(())
}

fn to_record(index: usize, d: Draw, instance: Option<&SpinGlassInstance>) -> Result<std::result::Result<SampleRecord, Option<usize>>> {
    match d {
        Draw::Aborted { qubit } => Ok(Err(qubit)),
        Draw::Done { z, log_p, log_q } => {
            let energy = instance.map(|inst| inst.cost(&z)).transpose()?;
            Ok(Ok(SampleRecord { index, z, log_q, log_p, omega: (log_p - log_q).exp(), energy }))
        }
    }
}

/// Draws one sample using prebuilt environments.
pub fn sample_one<R: rand::Rng>(envs: &BoundaryEnvs, amplitude_rank: Option<usize>, rng: &mut R) -> Result<SampleRecord> {
    check_rank(amplitude_rank)?;
    let n = envs.columns.partition.column_of.len();
    let d = Drawer::new(envs, amplitude_rank, rng).run(n, 1).pop().expect("one draw");
    match to_record(0, d, None)? {
        Ok(r) => Ok(r),
        Err(Some(q)) => Err(Error::DegenerateConditional(q)),
        Err(None) => Err(Error::CompressionFailure(0)),
    }
}

/// Draws `count` samples on one RNG stream.
pub fn sample_many<R: rand::Rng>(envs: &BoundaryEnvs, amplitude_rank: Option<usize>, count: usize, rng: &mut R) -> Result<Vec<Option<SampleRecord>>> {
    check_rank(amplitude_rank)?;
    let n = envs.columns.partition.column_of.len();
    let draws = Drawer::new(envs, amplitude_rank, rng).run(n, count);
    draws.into_iter().enumerate().map(|(i, d)| to_record(i, d, None).map(|r| r.ok())).collect()
}

/// Builds the norm environments of `state` and draws a batch.
pub fn sample_batch(state: &TnState, instance: Option<&SpinGlassInstance>, cfg: &SamplerConfig) -> Result<Batch> {
    let envs = build_norm_envs(state, &cfg.boundary)?;
    sample_batch_with(&envs, instance, cfg)
}

/// Like [`sample_batch`] with environments built beforehand.
pub fn sample_batch_with(envs: &BoundaryEnvs, instance: Option<&SpinGlassInstance>, cfg: &SamplerConfig) -> Result<Batch> {
    if cfg.n_samples == 0 {
        return Err(Error::InvalidArgument("N_s must be at least 1".into()));
    }
    check_rank(cfg.amplitude_rank)?;
    let n = envs.columns.partition.column_of.len();
    let workers = cfg.workers.clamp(1, cfg.n_samples);
    let bounds: Vec<usize> = (0..=workers).map(|w| w * cfg.n_samples / workers).collect();
    let chunks: Vec<Vec<Draw>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let count = bounds[w + 1] - bounds[w];
                scope.spawn(move || {
                    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed.wrapping_add(w as u64));
                    Drawer::new(envs, cfg.amplitude_rank, &mut rng).run(n, count)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sampler worker panicked")).collect()
    });
    let mut records = Vec::with_capacity(cfg.n_samples);
    let mut aborts = 0;
    for (i, d) in chunks.into_iter().flatten().enumerate() {
        match to_record(i, d, instance)? {
            Ok(r) => records.push(r),
            Err(_) => aborts += 1,
        }
    }
    if aborts > 0 {
        log::warn!("{aborts} of {} samples aborted", cfg.n_samples);
    }
    let omega: Vec<f64> = records.iter().map(|r| r.omega).collect();
    let (stats, omega_tilde) = batch_stats(&omega, aborts);
    Ok(Batch { records, omega_tilde, stats, fit_residuals: envs.fit_residuals.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_device, build_square, Lattice};
    use crate::tn::{evolve, norm_sqr, EvolveConfig};
    use crate::{instance::random_instance, schedule::Schedule};

    fn qaoa(l: &Lattice, chi: usize) -> TnState {
        let inst = random_instance(l, 5);
        let sched = Schedule::new(vec![0.3, 0.5], vec![0.6, 0.3]).unwrap();
        evolve(TnState::init_plus(l, Some(chi)).unwrap(), &inst, &sched, &EvolveConfig::new(Some(chi))).unwrap().state
    }

    #[test]
    fn basis_state_is_sampled_with_unit_weight() {
        let l = build_device("guadalupe").unwrap();
        let z0: Vec<i8> = (0..16).map(|q| if q % 3 == 0 { -1 } else { 1 }).collect();
        let s = TnState::basis_state(&l, &z0, None).unwrap();
        let envs = build_norm_envs(&s, &BoundaryConfig { rank: Some(1), ..Default::default() }).unwrap();
        assert_eq!(envs.max_rank(), 1);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..5 {
            let r = sample_one(&envs, Some(1), &mut rng).unwrap();
            assert_eq!(r.z, z0);
            assert!(r.log_q.abs() < 1e-12 && (r.omega - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn plus_state_has_uniform_proposal() {
        let l = build_square(3, 3).unwrap();
        let s = TnState::init_plus(&l, None).unwrap();
        let b = sample_batch(&s, None, &SamplerConfig::new(Some(2), Some(2), 50, 1)).unwrap();
        for r in &b.records {
            assert!((r.log_q + 9.0 * 2f64.ln()).abs() < 1e-12);
            assert!((r.omega - 1.0).abs() < 1e-12);
        }
        assert!(b.stats.var_omega < 1e-24);
    }

    #[test]
    fn exact_ranks_give_constant_weight_equal_to_norm() {
        let l = build_square(3, 3).unwrap();
        let s = qaoa(&l, 4);
        let exact = norm_sqr(&s).unwrap();
        let b = sample_batch(&s, None, &SamplerConfig::new(None, None, 200, 9)).unwrap();
        assert_eq!(b.stats.aborts, 0);
        assert!(b.stats.var_omega < 1e-12, "{:?}", b.stats);
        assert!((b.stats.mean_omega - exact).abs() < 1e-10 * exact);
        let mean_t: f64 = b.omega_tilde.iter().sum::<f64>() / b.omega_tilde.len() as f64;
        assert!((mean_t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn capped_batches_are_deterministic_and_normalized() {
        let l = build_square(3, 4).unwrap();
        let s = qaoa(&l, 4);
        let cfg = SamplerConfig::new(Some(2), Some(2), 64, 17);
        let a = sample_batch(&s, None, &cfg).unwrap();
        let b = sample_batch(&s, None, &cfg).unwrap();
        assert_eq!(a.records, b.records);
        let mean_t: f64 = a.omega_tilde.iter().sum::<f64>() / a.omega_tilde.len() as f64;
        assert!((mean_t - 1.0).abs() < 1e-12);
        assert!(a.records.iter().all(|r| r.omega.is_finite() && r.omega >= 0.0 && r.log_q.is_finite()));
        let w = sample_batch(&s, None, &SamplerConfig { workers: 3, ..cfg.clone() }).unwrap();
        assert_eq!(w.records.len(), 64);
        assert_eq!(w, sample_batch(&s, None, &SamplerConfig { workers: 3, ..cfg }).unwrap());
    }

    #[test]
    fn first_batch_sample_matches_sample_one() {
        let l = build_square(3, 3).unwrap();
        let s = qaoa(&l, 2);
        let envs = build_norm_envs(&s, &BoundaryConfig::default()).unwrap();
        let one = sample_one(&envs, Some(2), &mut ChaCha20Rng::seed_from_u64(4)).unwrap();
        let cfg = SamplerConfig { amplitude_rank: Some(2), n_samples: 1, seed: 4, ..SamplerConfig::new(None, None, 1, 4) };
        let b = sample_batch_with(&envs, None, &cfg).unwrap();
        assert_eq!(b.records[0], one);
    }

    #[test]
    fn rejects_unembedded_lattice_and_zero_ranks() {
        let star = Lattice::from_graph(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = TnState::init_plus(&star, None).unwrap();
        assert!(build_norm_envs(&s, &BoundaryConfig::default()).is_err());
        let l = build_square(2, 2).unwrap();
        let s = TnState::init_plus(&l, None).unwrap();
        assert!(build_norm_envs(&s, &BoundaryConfig { rank: Some(0), ..Default::default() }).is_err());
        assert!(sample_batch(&s, None, &SamplerConfig::new(Some(0), None, 1, 0)).is_err());
        assert!(sample_batch(&s, None, &SamplerConfig::new(None, None, 0, 0)).is_err());
    }
}
