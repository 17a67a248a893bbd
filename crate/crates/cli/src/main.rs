use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tnqaoa::harness::{execute, exit_code, Command, ExperimentConfig, StageFilter};

/// Overrides the config's output directory; `--out` wins over it.
const OUT_ENV: &str = "TNQAOA_OUT_DIR";

#[derive(Parser)]
#[command(name = "tnqaoa", version, about = "Tensor-network QAOA experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write seeded instances and brute-force ground truths.
    Gen(Common),
    /// Train schedules on the training instances and take their median.
    Train(Common),
    /// Evolve the target instances and sample them.
    Run(Common),
    /// Merge run outputs into histogram and summary files.
    Report(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replaces the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// e.g. `p=5|10,seed=3,rm=full`
    #[arg(long)]
    stage_filter: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (cmd, args) = match cli.cmd {
        Cmd::Gen(a) => (Command::Gen, a),
        Cmd::Train(a) => (Command::Train, a),
        Cmd::Run(a) => (Command::Run, a),
        Cmd::Report(a) => (Command::Report, a),
    };
    let res = (|| {
        let mut cfg = ExperimentConfig::load(&args.config)?;
        if let Some(s) = args.seed {
            cfg.master_seed = s;
        }
        if let Some(out) = args.out.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from)) {
            cfg.out_dir = out;
        }
        let filter: StageFilter = args.stage_filter.as_deref().unwrap_or("").parse()?;
        let out_dir = cfg.out_dir.clone();
        execute(cmd, &cfg, &out_dir, &filter)
    })();
    match res {
        Ok(m) => {
            let n = m.stages.get(cmd.name()).map_or(0, |s| s.files.len());
            log::info!("{} finished: {n} files in {}", cmd.name(), m.config.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            log::error!("{} failed: {e}", cmd.name());
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
