use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{splitmix64, BRUTE_FORCE_CAP};
use crate::lattice::{self, Lattice, LatticeKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Statevector,
    Tn,
}

/// One experiment. Everything a command writes is a function of this
/// document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Lattice reference such as `heavyhex:guadalupe` or `square:4x4`.
    pub lattice: String,
    #[serde(default)]
    pub train_seeds: Vec<u64>,
    pub target_seeds: Vec<u64>,
    pub p: Vec<usize>,
    #[serde(rename = "C", default = "default_num_basis")]
    pub num_basis: usize,
    pub chi: usize,
    /// `R_m`; `null` keeps the exact rank.
    #[serde(default)]
    pub amplitude_rank: Option<usize>,
    /// `R_M` values to sweep; `null` entries keep the exact rank.
    pub boundary_ranks: Vec<Option<usize>>,
    pub n_samples: usize,
    /// Energy backend used by `train`.
    pub backend: Backend,
    #[serde(default = "default_max_evals")]
    pub max_evals: usize,
    /// `trained` (median of the training stage), `baseline_p5`, or a path to
    /// a schedule JSON file.
    #[serde(default = "default_schedule")]
    pub schedule: String,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(default = "default_passes")]
    pub variational_passes: usize,
}

fn default_num_basis() -> usize {
    10
}
fn default_max_evals() -> usize {
    200
}
fn default_schedule() -> String {
    "trained".into()
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}
fn one() -> usize {
    1
}
fn default_bins() -> usize {
    40
}
fn default_passes() -> usize {
    2
}

/// Where `run` takes its schedules from.
#[derive(Clone, Debug, PartialEq)]
pub enum ScheduleSource {
    Trained,
    BaselineP5,
    File(PathBuf),
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn lattice_kind(&self) -> Result<LatticeKind> {
        self.lattice.parse().map_err(|e: Error| Error::Config(format!("lattice `{}`: {e}", self.lattice)))
    }

    pub fn build_lattice(&self) -> Result<Lattice> {
        lattice::build(self.lattice_kind()?).map_err(|e| Error::Config(format!("lattice `{}`: {e}", self.lattice)))
    }

    pub fn schedule_source(&self) -> ScheduleSource {
        match self.schedule.as_str() {
            "trained" => ScheduleSource::Trained,
            "baseline_p5" => ScheduleSource::BaselineP5,
            path => ScheduleSource::File(PathBuf::from(path)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        let l = self.build_lattice()?;
        if self.target_seeds.is_empty() {
            return bad("target_seeds is empty");
        }
        if self.p.is_empty() || self.p.contains(&0) {
            return bad("p must be a non-empty list of depths >= 1");
        }
        if self.num_basis == 0 || self.chi == 0 || self.n_samples == 0 || self.workers == 0 || self.histogram_bins == 0 {
            return bad("C, chi, n_samples, workers and histogram_bins must be >= 1");
        }
        if self.amplitude_rank == Some(0) || self.boundary_ranks.contains(&Some(0)) {
            return bad("ranks must be >= 1");
        }
        if self.boundary_ranks.is_empty() {
            return bad("boundary_ranks is empty");
        }
        if !l.is_embedded() {
            return bad("the sampler needs an embedded lattice");
        }
        match self.schedule_source() {
            ScheduleSource::Trained if self.train_seeds.is_empty() => bad("schedule `trained` needs train_seeds"),
            ScheduleSource::BaselineP5 if self.p.iter().any(|&p| p != 5) => bad("schedule `baseline_p5` needs p = [5]"),
            _ if self.backend == Backend::Statevector && l.n() > BRUTE_FORCE_CAP => {
                bad(&format!("statevector backend limited to {BRUTE_FORCE_CAP} qubits"))
            }
            _ => Ok(()),
        }
    }

    /// Seed for a stochastic unit of work; distinct `(stage, parts)` give
    /// independent streams.
    pub fn derive_seed(&self, stage: &str, parts: &[u64]) -> u64 {
        let mut h = splitmix64(self.master_seed);
        for b in stage.bytes() {
            h = splitmix64(h ^ b as u64);
        }
        for &x in parts {
            h = splitmix64(h ^ x);
        }
        h
    }
}

/// Restricts which `(p, seed, R_M)` units a command processes. Written as
/// `key=value` pairs joined by commas, e.g. `p=5,seed=3,rm=full`; several
/// values for one key are joined with `|`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StageFilter {
    p: Option<Vec<usize>>,
    seed: Option<Vec<u64>>,
    rm: Option<Vec<Option<usize>>>,
}

fn rank_label(r: Option<usize>) -> String {
    r.map_or_else(|| "full".to_string(), |r| r.to_string())
}

pub(crate) fn parse_rank(s: &str) -> Option<Option<usize>> {
    if s == "full" {
        Some(None)
    } else {
        s.parse().ok().map(Some)
    }
}

impl std::str::FromStr for StageFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut f = StageFilter::default();
        let bad = |part: &str| Error::Config(format!("bad stage filter `{part}`"));
        for part in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = part.split_once('=').ok_or_else(|| bad(part))?;
            let vals: Vec<&str> = v.split('|').collect();
            match k.trim() {
                "p" => f.p = Some(vals.iter().map(|x| x.parse().map_err(|_| bad(part))).collect::<Result<_>>()?),
                "seed" => f.seed = Some(vals.iter().map(|x| x.parse().map_err(|_| bad(part))).collect::<Result<_>>()?),
                "rm" => f.rm = Some(vals.iter().map(|x| parse_rank(x).ok_or_else(|| bad(part))).collect::<Result<_>>()?),
                _ => return Err(bad(part)),
            }
        }
        Ok(f)
    }
}

impl StageFilter {
    pub fn p(&self, p: usize) -> bool {
        self.p.as_ref().is_none_or(|v| v.contains(&p))
    }

    pub fn seed(&self, s: u64) -> bool {
        self.seed.as_ref().is_none_or(|v| v.contains(&s))
    }

    pub fn rm(&self, r: Option<usize>) -> bool {
        self.rm.as_ref().is_none_or(|v| v.contains(&r))
    }
}

/// Directory label of a boundary rank: `rm4`, `rmfull`.
pub fn rank_dir(r: Option<usize>) -> String {
    format!("rm{}", rank_label(r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> serde_json::Value {
        serde_json::json!({
            "lattice": "square:3x3", "train_seeds": [1, 2], "target_seeds": [7], "p": [2],
            "C": 2, "chi": 4, "amplitude_rank": 4, "boundary_ranks": [1, null], "n_samples": 10,
            "backend": "statevector", "max_evals": 5
        })
    }

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(&base().to_string()).unwrap();
        assert_eq!(c.boundary_ranks, vec![Some(1), None]);
        assert_eq!(c.schedule_source(), ScheduleSource::Trained);
        assert_eq!(c.out_dir, PathBuf::from("out"));
        assert_eq!(c.workers, 1);
    }

    #[test]
    fn schema_violations_are_config_errors() {
        let cases = [
            ("lattice", serde_json::json!("hexagon:9")),
            ("p", serde_json::json!([])),
            ("boundary_ranks", serde_json::json!([0])),
            ("backend", serde_json::json!("gpu")),
            ("extra_field", serde_json::json!(1)),
            ("schedule", serde_json::json!("baseline_p5")),
        ];
        for (k, v) in cases {
            let mut j = base();
            j[k] = v;
            assert!(matches!(ExperimentConfig::from_json(&j.to_string()), Err(Error::Config(_))), "{k}");
        }
    }

    #[test]
    fn seeds_depend_on_every_part() {
        let c = ExperimentConfig::from_json(&base().to_string()).unwrap();
        let a = c.derive_seed("run", &[7, 2, 1]);
        assert_eq!(a, c.derive_seed("run", &[7, 2, 1]));
        assert_ne!(a, c.derive_seed("run", &[7, 2, 2]));
        assert_ne!(a, c.derive_seed("gen", &[7, 2, 1]));
        let d = ExperimentConfig { master_seed: 1, ..c };
        assert_ne!(a, d.derive_seed("run", &[7, 2, 1]));
    }

    #[test]
    fn stage_filters() {
        let f: StageFilter = "p=5|10, rm=full".parse().unwrap();
        assert!(f.p(10) && !f.p(25) && f.seed(3) && f.rm(None) && !f.rm(Some(4)));
        assert!("q=1".parse::<StageFilter>().is_err());
        assert!("p=x".parse::<StageFilter>().is_err());
        assert_eq!(rank_dir(Some(4)), "rm4");
    }
}
