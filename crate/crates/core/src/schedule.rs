//! QAOA angle schedules, their Chebyshev interpolation, median transfer
//! across instances and per-instance derivative-free training.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::SpinGlassInstance;
use crate::optimizer::{self, DfoConfig};

/// Per-layer angles `(γ_j, β_j)`, `j = 1..p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleDoc", into = "ScheduleDoc")]
pub struct Schedule {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleDoc {
    p: usize,
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl TryFrom<ScheduleDoc> for Schedule {
    type Error = Error;

    fn try_from(doc: ScheduleDoc) -> Result<Self> {
        if doc.gammas.len() != doc.p {
            return Err(Error::InvalidArgument(format!("p = {} but {} gammas", doc.p, doc.gammas.len())));
        }
        Schedule::new(doc.gammas, doc.betas)
    }
}

impl From<Schedule> for ScheduleDoc {
    fn from(s: Schedule) -> Self {
        ScheduleDoc { p: s.p(), gammas: s.gammas, betas: s.betas }
    }
}

impl Schedule {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.len() != betas.len() {
            return Err(Error::DepthMismatch);
        }
        if gammas.is_empty() {
            return Err(Error::InvalidArgument("schedule needs p >= 1".into()));
        }
        if gammas.iter().chain(&betas).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite schedule angle".into()));
        }
        Ok(Schedule { gammas, betas })
    }

    /// All-zero schedule of depth `p` (identity circuit).
    pub fn zeros(p: usize) -> Result<Self> {
        Self::new(vec![0.0; p], vec![0.0; p])
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn layers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gammas.iter().copied().zip(self.betas.iter().copied())
    }
}

/// The fixed `p = 5` schedule from a global parameter search.
pub fn baseline_p5() -> Schedule {
    Schedule {
        gammas: vec![6.16555, 6.08373, 6.01445, 5.9616, 5.93736],
        betas: vec![0.53822, 0.44776, 0.32923, 0.23056, 0.12587],
    }
}

/// Chebyshev coefficients `u` (for γ) and `v` (for β).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpCoeffs {
    #[serde(rename = "C")]
    pub num_basis: usize,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl InterpCoeffs {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() || u.is_empty() {
            return Err(Error::InvalidArgument("coefficient vectors must share a length >= 1".into()));
        }
        Ok(InterpCoeffs { num_basis: u.len(), u, v })
    }

    fn to_flat(&self) -> Vec<f64> {
        self.u.iter().chain(&self.v).copied().collect()
    }

    fn from_flat(x: &[f64]) -> Self {
        let c = x.len() / 2;
        InterpCoeffs { num_basis: c, u: x[..c].to_vec(), v: x[c..].to_vec() }
    }

    /// Linear ramp `a + b (2x − 1)` in the first two basis functions.
    pub fn ramp(num_basis: usize, gamma: (f64, f64), beta: (f64, f64)) -> Result<Self> {
        if num_basis == 0 {
            return Err(Error::InvalidArgument("num_basis must be >= 1".into()));
        }
        let mut u = vec![0.0; num_basis];
        let mut v = vec![0.0; num_basis];
        u[0] = gamma.0;
        v[0] = beta.0;
        if num_basis > 1 {
            u[1] = gamma.1;
            v[1] = beta.1;
        }
        Self::new(u, v)
    }

    /// Least-squares linear ramp through [`baseline_p5`].
    pub fn baseline_ramp(num_basis: usize) -> Result<Self> {
        let base = baseline_p5();
        let p = base.p() as f64;
        let xs: Vec<f64> = (1..=base.p()).map(|j| 2.0 * j as f64 / p - 1.0).collect();
        let fit = |ys: &[f64]| {
            let mx = xs.iter().sum::<f64>() / p;
            let my = ys.iter().sum::<f64>() / p;
            let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            let b = sxy / sxx;
            if num_basis > 1 {
                (my - b * mx, b)
            } else {
                (my, 0.0)
            }
        };
        Self::ramp(num_basis, fit(base.gammas()), fit(base.betas()))
    }
}

/// Shifted Chebyshev polynomial of the first kind, `f_c(x) = T_{c−1}(2x − 1)`.
pub fn basis_value(c: usize, x: f64) -> Result<f64> {
    if c == 0 {
        return Err(Error::InvalidArgument("basis index starts at 1".into()));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain(x));
    }
    Ok(chebyshev(c - 1, 2.0 * x - 1.0))
}

fn chebyshev(k: usize, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, t);
    match k {
        0 => prev,
        _ => {
            for _ in 1..k {
                let next = 2.0 * t * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// Evaluates the interpolated schedule at `x = j / p`, `j = 1..p`.
pub fn schedule_from_coeffs(coeffs: &InterpCoeffs, p: usize) -> Result<Schedule> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be >= 1".into()));
    }
    let eval = |w: &[f64], x: f64| -> f64 { w.iter().enumerate().map(|(c, wc)| wc * chebyshev(c, 2.0 * x - 1.0)).sum() };
    let xs = (1..=p).map(|j| j as f64 / p as f64);
    let gammas = xs.clone().map(|x| eval(&coeffs.u, x)).collect();
    let betas = xs.map(|x| eval(&coeffs.v, x)).collect();
    Schedule::new(gammas, betas)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Layer-wise median of γ and β across schedules of equal depth.
pub fn median_transfer(schedules: &[Schedule]) -> Result<Schedule> {
    let first = schedules.first().ok_or_else(|| Error::InvalidArgument("no schedules".into()))?;
    let p = first.p();
    if schedules.iter().any(|s| s.p() != p) {
        return Err(Error::DepthMismatch);
    }
    let mut gammas = Vec::with_capacity(p);
    let mut betas = Vec::with_capacity(p);
    for j in 0..p {
        gammas.push(median(&mut schedules.iter().map(|s| s.gammas[j]).collect::<Vec<_>>()));
        betas.push(median(&mut schedules.iter().map(|s| s.betas[j]).collect::<Vec<_>>()));
    }
    Schedule::new(gammas, betas)
}

/// Anything that can evaluate `⟨H_C⟩` for a schedule.
pub trait EnergyBackend {
    fn energy(&self, instance: &SpinGlassInstance, schedule: &Schedule) -> Result<f64>;
}

impl<F> EnergyBackend for F
where
    F: Fn(&SpinGlassInstance, &Schedule) -> Result<f64>,
{
    fn energy(&self, instance: &SpinGlassInstance, schedule: &Schedule) -> Result<f64> {
        self(instance, schedule)
    }
}

#[derive(Clone, Debug)]
pub struct TrainConfig {
    pub p: usize,
    pub num_basis: usize,
    pub max_evals: usize,
    pub rho_begin: f64,
    pub rho_end: f64,
    /// Box half-width for every coefficient.
    pub bound: f64,
    /// Starting coefficients; defaults to [`InterpCoeffs::baseline_ramp`].
    pub init: Option<InterpCoeffs>,
}

impl TrainConfig {
    pub fn new(p: usize, num_basis: usize, max_evals: usize) -> Self {
        TrainConfig { p, num_basis, max_evals, rho_begin: 0.3, rho_end: 1e-6, bound: 2.0 * PI, init: None }
    }
}

/// One row of the training log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRow {
    pub instance_seed: u64,
    pub iteration: usize,
    pub best_energy: f64,
    pub evaluations: usize,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub coeffs: InterpCoeffs,
    pub schedule: Schedule,
    /// Best energy found; `None` with a zero evaluation budget.
    pub energy: Option<f64>,
    pub evaluations: usize,
    pub log: Vec<TrainLogRow>,
}

/// Trains each instance independently, minimizing `⟨H_C⟩` over the
/// interpolation coefficients.
pub fn train<B: EnergyBackend + ?Sized>(
    instances: &[SpinGlassInstance],
    backend: &B,
    cfg: &TrainConfig,
) -> Result<Vec<TrainOutcome>> {
    instances
        .iter()
        .enumerate()
        .map(|(index, inst)| {
            train_one(inst, backend, cfg).map_err(|e| Error::Instance { index, source: Box::new(e) })
        })
        .collect()
}

pub fn train_one<B: EnergyBackend + ?Sized>(
    instance: &SpinGlassInstance,
    backend: &B,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    let init = match &cfg.init {
        Some(c) => c.clone(),
        None => InterpCoeffs::baseline_ramp(cfg.num_basis)?,
    };
    if init.num_basis != cfg.num_basis {
        return Err(Error::InvalidArgument("initial coefficients disagree with num_basis".into()));
    }
    let dim = 2 * cfg.num_basis;
    let dfo = DfoConfig {
        lower: vec![-cfg.bound; dim],
        upper: vec![cfg.bound; dim],
        rho_begin: cfg.rho_begin,
        rho_end: cfg.rho_end,
        max_evals: cfg.max_evals,
    };
    let objective = |x: &[f64]| -> Result<f64> {
        let sched = schedule_from_coeffs(&InterpCoeffs::from_flat(x), cfg.p)?;
        backend.energy(instance, &sched)
    };
    let res = optimizer::minimize(objective, &init.to_flat(), &dfo)?;
    let coeffs = if res.evals == 0 { init } else { InterpCoeffs::from_flat(&res.x) };
    let schedule = schedule_from_coeffs(&coeffs, cfg.p)?;
    let log = res
        .history
        .iter()
        .enumerate()
        .map(|(i, &best)| TrainLogRow { instance_seed: instance.seed, iteration: i + 1, best_energy: best, evaluations: i + 1 })
        .collect();
    if res.f.is_some_and(|f| f.is_nan()) {
        warn!("training on instance {} produced NaN energies", instance.seed);
    }
    Ok(TrainOutcome { coeffs, schedule, energy: res.f, evaluations: res.evals, log })
}
