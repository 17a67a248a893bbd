//! Experiment orchestration: `gen → train → run → report` driven by one
//! JSON config, with every output recorded in `manifest.json`.
//!
//! Output layout under the output directory:
//! * `lattice.json`, `instances/{train,target}_<seed>.json`,
//!   `ground_truth/target_<seed>.json` (when brute force is feasible);
//! * `schedules/p<p>/train_<seed>.json`, `train_log.csv`, `median.json`;
//! * `runs/target_<seed>/p<p>/diagnostics.csv` and, per boundary rank,
//!   `rm<R>/{samples.csv, stats.json, envs.json}`;
//! * `reports/{energy_histograms.csv, weight_histograms.csv,
//!   scut_traces.csv, summary.json}`.

mod config;
mod output;
mod report;
mod stages;

use std::path::Path;
use std::time::Instant;

pub use config::{rank_dir, Backend, ExperimentConfig, ScheduleSource, StageFilter};
pub use output::{config_hash, RunManifest, StageEntry, StageStatus, MANIFEST};
pub use report::SummaryRow;
pub use stages::{EnvSummary, TrainRecord};

use crate::error::{Error, Result};
use output::Outputs;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Gen,
    Train,
    Run,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Train => "train",
            Command::Run => "run",
            Command::Report => "report",
        }
    }
}

/// Process exit code for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 2,
        _ => 3,
    }
}

/// Runs one command and records it in the manifest under `out_dir`. A
/// failed stage is recorded too before its error is returned.
pub fn execute(cmd: Command, cfg: &ExperimentConfig, out_dir: &Path, filter: &StageFilter) -> Result<RunManifest> {
    cfg.validate()?;
    let mut manifest = RunManifest::load_or_new(out_dir, cfg);
    let mut out = Outputs::new(out_dir);
    let t = Instant::now();
    let res = match cmd {
        Command::Gen => stages::gen(cfg, filter, &mut out),
        Command::Train => stages::train(cfg, filter, &mut out),
        Command::Run => stages::run(cfg, filter, &mut out),
        Command::Report => report::report(cfg, filter, &mut out),
    };
    let wall_seconds = t.elapsed().as_secs_f64();
    let entry = match &res {
        Ok(()) => {
            // keep files of earlier (filtered) invocations that still exist
            let mut files = out.written;
            if let Some(prev) = manifest.stages.get(cmd.name()) {
                files.extend(prev.files.iter().filter(|f| out_dir.join(f).is_file()).cloned());
            }
            files.sort();
            files.dedup();
            StageEntry { status: StageStatus::Ok, files, wall_seconds, error: None }
        }
        Err(e) => StageEntry { status: StageStatus::Failed, files: Vec::new(), wall_seconds, error: Some(e.to_string()) },
    };
    manifest.stages.insert(cmd.name().to_string(), entry);
    manifest.save(out_dir)?;
    res.map(|()| manifest)
}
