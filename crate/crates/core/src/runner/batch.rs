use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::mission::{Mission, MissionOptions, MissionOutcome, RunMetrics, TraceRow};
use super::RunError;
use crate::managing::ManagerKind;

pub const RUNS_CSV: &str = "runs.csv";
pub const STATS_CSV: &str = "stats.csv";
pub const RESULTS_JSON: &str = "results.json";
pub const PARTIAL_MARKER: &str = "PARTIAL";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; NaN for fewer than two values.
    pub std: f64,
}

pub fn mean_std(xs: &[f64]) -> MeanStd {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return MeanStd {
            mean: f64::NAN,
            std: f64::NAN,
        };
    }
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() < 2 {
        f64::NAN
    } else {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    MeanStd { mean, std }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatchStats {
    pub manager: ManagerKind,
    pub runs: usize,
    pub found: usize,
    pub search_time: MeanStd,
    pub distance_inspected: MeanStd,
}

impl BatchStats {
    pub fn from_runs(manager: ManagerKind, runs: &[RunMetrics]) -> Self {
        let times: Vec<f64> = runs.iter().map(|r| r.search_time).collect();
        let dists: Vec<f64> = runs.iter().map(|r| r.distance_inspected).collect();
        Self {
            manager,
            runs: runs.len(),
            found: runs.iter().filter(|r| r.pipeline_found).count(),
            search_time: mean_std(&times),
            distance_inspected: mean_std(&dists),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchResult {
    pub manager: ManagerKind,
    pub outcomes: Vec<MissionOutcome>,
    pub stats: BatchStats,
}

impl BatchResult {
    pub fn metrics(&self) -> Vec<RunMetrics> {
        self.outcomes.iter().map(|o| o.metrics).collect()
    }
}

/// A run failed; `completed` holds the runs before it in seed order.
#[derive(Debug)]
pub struct BatchFailure {
    pub seed: u64,
    pub error: RunError,
    pub completed: Vec<MissionOutcome>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOptions {
    pub parallel: bool,
    pub record_access: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self {
            parallel: true,
            record_access: false,
        }
    }
}

pub fn seeds(config: &RunConfig) -> Vec<u64> {
    (0..config.runs as u64).map(|i| config.base_seed + i).collect()
}

/// Runs `config.runs` missions on sequential seeds. Results are ordered by
/// seed whether or not the runs execute in parallel.
pub fn run_batch_with(config: &RunConfig, options: BatchOptions) -> Result<BatchResult, BatchFailure> {
    if let Err(e) = config.validate() {
        return Err(BatchFailure {
            seed: config.base_seed,
            error: e.into(),
            completed: Vec::new(),
        });
    }
    let mission_options = MissionOptions {
        trace: config.trace,
        snapshot_kb: config.snapshot_kb,
        record_access: options.record_access,
    };
    let one = |seed: u64| Mission::new(config, seed, mission_options).and_then(Mission::run);
    let seeds = seeds(config);
    let results: Vec<Result<MissionOutcome, RunError>> = if options.parallel {
        seeds.par_iter().map(|s| one(*s)).collect()
    } else {
        seeds.iter().map(|s| one(*s)).collect()
    };
    let mut outcomes = Vec::with_capacity(results.len());
    for (seed, result) in seeds.into_iter().zip(results) {
        match result {
            Ok(o) => outcomes.push(o),
            Err(error) => {
                return Err(BatchFailure {
                    seed,
                    error,
                    completed: outcomes,
                })
            }
        }
    }
    let metrics: Vec<RunMetrics> = outcomes.iter().map(|o| o.metrics).collect();
    Ok(BatchResult {
        manager: config.manager.kind,
        stats: BatchStats::from_runs(config.manager.kind, &metrics),
        outcomes,
    })
}

pub fn run_batch(config: &RunConfig) -> Result<BatchResult, BatchFailure> {
    run_batch_with(config, BatchOptions::default())
}

#[derive(Serialize)]
struct RunRow<'a> {
    manager: &'a str,
    seed: u64,
    pipeline_found: bool,
    search_time_s: f64,
    distance_inspected_m: f64,
}

#[derive(Serialize)]
struct StatsRow<'a> {
    manager: &'a str,
    runs: usize,
    found: usize,
    search_time_mean_s: f64,
    search_time_std_s: f64,
    distance_inspected_mean_m: f64,
    distance_inspected_std_m: f64,
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, RunError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| RunError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn runs_csv(manager: ManagerKind, runs: &[RunMetrics]) -> Result<String, RunError> {
    to_csv(runs.iter().map(|r| RunRow {
        manager: manager.name(),
        seed: r.seed,
        pipeline_found: r.pipeline_found,
        search_time_s: r.search_time,
        distance_inspected_m: r.distance_inspected,
    }))
}

pub fn stats_csv(stats: &BatchStats) -> Result<String, RunError> {
    to_csv([StatsRow {
        manager: stats.manager.name(),
        runs: stats.runs,
        found: stats.found,
        search_time_mean_s: stats.search_time.mean,
        search_time_std_s: stats.search_time.std,
        distance_inspected_mean_m: stats.distance_inspected.mean,
        distance_inspected_std_m: stats.distance_inspected.std,
    }])
}

pub fn trace_csv(rows: &[TraceRow]) -> Result<String, RunError> {
    to_csv(rows)
}

#[derive(Serialize)]
struct ResultsDoc<'a> {
    config: &'a RunConfig,
    partial: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    stats: BatchStats,
    wall_clock_s: f64,
}

/// Files written for one batch.
#[derive(Debug, Clone)]
pub struct BatchReport {
    pub dir: PathBuf,
    pub stats: BatchStats,
    pub partial: bool,
}

fn write(path: &Path, contents: &str) -> Result<(), RunError> {
    let mut f = fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}

fn write_outcomes(
    dir: &Path,
    config: &RunConfig,
    outcomes: &[MissionOutcome],
    error: Option<String>,
    wall_clock_s: f64,
) -> Result<BatchStats, RunError> {
    fs::create_dir_all(dir)?;
    let kind = config.manager.kind;
    let metrics: Vec<RunMetrics> = outcomes.iter().map(|o| o.metrics).collect();
    let stats = BatchStats::from_runs(kind, &metrics);
    let partial = error.is_some();
    let marker = dir.join(PARTIAL_MARKER);
    if let Some(msg) = &error {
        write(&marker, &format!("batch aborted: {msg}\n"))?;
    } else if marker.exists() {
        fs::remove_file(&marker)?;
    }
    write(&dir.join(RUNS_CSV), &runs_csv(kind, &metrics)?)?;
    write(&dir.join(STATS_CSV), &stats_csv(&stats)?)?;

    if config.trace {
        let traces = dir.join("traces");
        fs::create_dir_all(&traces)?;
        for o in outcomes {
            write(&traces.join(format!("seed_{}.csv", o.metrics.seed)), &trace_csv(&o.trace)?)?;
        }
    }
    if config.snapshot_kb && kind == ManagerKind::Metacontrol {
        let snaps = dir.join("kb_snapshots");
        fs::create_dir_all(&snaps)?;
        for o in outcomes {
            let mut text = String::new();
            for s in &o.snapshots {
                text.push_str(&serde_json::to_string(s)?);
                text.push('\n');
            }
            write(&snaps.join(format!("seed_{}.jsonl", o.metrics.seed)), &text)?;
        }
    }

    let doc = ResultsDoc {
        config,
        partial,
        error,
        stats,
        wall_clock_s,
    };
    write(&dir.join(RESULTS_JSON), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    Ok(stats)
}

/// Runs the batch and writes its outputs to `config.output`. On failure
/// the completed runs are still written and the directory is marked
/// partial.
pub fn execute(config: &RunConfig) -> Result<BatchReport, RunError> {
    config.validate()?;
    let start = Instant::now();
    let dir = config.output.clone();
    match run_batch(config) {
        Ok(result) => {
            let stats = write_outcomes(&dir, config, &result.outcomes, None, start.elapsed().as_secs_f64())?;
            Ok(BatchReport {
                dir,
                stats,
                partial: false,
            })
        }
        Err(failure) => {
            let msg = format!("seed {}: {}", failure.seed, failure.error);
            write_outcomes(&dir, config, &failure.completed, Some(msg), start.elapsed().as_secs_f64())?;
            Err(failure.error)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hand_stats() {
        let s = mean_std(&[2.0, 4.0]);
        assert_abs_diff_eq!(s.mean, 3.0);
        assert_abs_diff_eq!(s.std, 2f64.sqrt(), epsilon = 1e-12);
        let one = mean_std(&[5.0]);
        assert_eq!(one.mean, 5.0);
        assert!(one.std.is_nan());
    }

    #[test]
    fn csv_layout() {
        let runs = [RunMetrics {
            seed: 3,
            pipeline_found: true,
            search_time: 12.5,
            distance_inspected: 4.25,
        }];
        let text = runs_csv(ManagerKind::Random, &runs).unwrap();
        assert_eq!(
            text,
            "manager,seed,pipeline_found,search_time_s,distance_inspected_m\nrandom,3,true,12.5,4.25\n"
        );
        let stats = stats_csv(&BatchStats::from_runs(ManagerKind::Random, &runs)).unwrap();
        assert!(stats.lines().nth(1).unwrap().ends_with(",NaN,4.25,NaN"), "{stats}");
    }

    #[test]
    fn failed_batch_is_marked_partial() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            runs: 3,
            output: dir.path().to_path_buf(),
            ..RunConfig::default()
        };
        let done = vec![Mission::new(&cfg, 1, MissionOptions::default()).unwrap().run().unwrap()];
        write_outcomes(dir.path(), &cfg, &done, Some("seed 2: boom".into()), 0.0).unwrap();
        let marker = std::fs::read_to_string(dir.path().join(PARTIAL_MARKER)).unwrap();
        assert!(marker.contains("seed 2: boom"));
        let runs = std::fs::read_to_string(dir.path().join(RUNS_CSV)).unwrap();
        assert_eq!(runs.lines().count(), 2);
        let doc: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(RESULTS_JSON)).unwrap()).unwrap();
        assert_eq!(doc["partial"], true);
        assert_eq!(doc["stats"]["runs"], 1);

        write_outcomes(dir.path(), &cfg, &done, None, 0.0).unwrap();
        assert!(!dir.path().join(PARTIAL_MARKER).exists());
    }
}
