use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use suave::managing::ManagerKind;
use suave::runner::{execute, RunConfig};

/// Runs seeded pipeline-inspection missions and writes per-run metrics and
/// batch statistics.
#[derive(Debug, Parser)]
#[command(name = "suave", version)]
struct Args {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `manager.kind`.
    #[arg(long, value_parser = parse_manager)]
    manager: Option<ManagerKind>,
    /// Overrides `runs`.
    #[arg(long)]
    runs: Option<usize>,
    /// Overrides `base_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a per-step trajectory CSV for each run.
    #[arg(long)]
    trace: bool,
    /// Dump the knowledge base after every MAPE cycle (metacontrol only).
    #[arg(long)]
    snapshot_kb: bool,
}

fn parse_manager(s: &str) -> Result<ManagerKind, String> {
    s.parse()
}

fn config_from(args: &Args) -> Result<RunConfig, String> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path).map_err(|e| e.to_string())?,
        None => RunConfig::default(),
    };
    if let Some(kind) = args.manager {
        cfg.manager.kind = kind;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(seed) = args.seed {
        cfg.base_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.output = out.clone();
    }
    cfg.trace |= args.trace;
    cfg.snapshot_kb |= args.snapshot_kb;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match config_from(&args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("suave: {msg}");
            return ExitCode::from(2);
        }
    };
    match execute(&cfg) {
        Ok(report) => {
            let s = report.stats;
            println!(
                "{}: {} runs, found {}, search time {:.2} +/- {:.2} s, distance {:.2} +/- {:.2} m -> {}",
                s.manager,
                s.runs,
                s.found,
                s.search_time.mean,
                s.search_time.std,
                s.distance_inspected.mean,
                s.distance_inspected.std,
                report.dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("suave: {e}");
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
