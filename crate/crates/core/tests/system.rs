use std::collections::BTreeSet;
use std::fs;
use std::process::Command;

use proptest::prelude::*;
use suave::bus::{change_mode_service, AccessOp, ServiceRequest};
use suave::managed::{MissionPhase, NODES};
use suave::managing::{ManagerKind, RANDOM_CLIENT};
use suave::runner::{execute, run_once, Mission, MissionOptions, RunConfig, PARTIAL_MARKER, RESULTS_JSON, RUNS_CSV, STATS_CSV};

const KINDS: [ManagerKind; 3] = [ManagerKind::None, ManagerKind::Random, ManagerKind::Metacontrol];

fn config(kind: ManagerKind) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.manager.kind = kind;
    cfg
}

fn unreachable(kind: ManagerKind) -> RunConfig {
    let mut cfg = config(kind);
    cfg.layout.start_offset_min = 400.0;
    cfg.layout.start_offset_max = 400.0;
    cfg
}

fn recorded(cfg: &RunConfig, seed: u64) -> suave::runner::MissionOutcome {
    let options = MissionOptions {
        record_access: true,
        ..Default::default()
    };
    Mission::new(cfg, seed, options).and_then(Mission::run).unwrap()
}

#[test]
fn every_manager_drives_the_same_managed_side() {
    let services: BTreeSet<String> = NODES.iter().map(|n| change_mode_service(n)).collect();
    for kind in KINDS {
        let m = Mission::new(&config(kind), 1, MissionOptions::default()).unwrap();
        assert_eq!(m.manager().kind(), kind);
        for s in &services {
            assert!(m.bus().has_service(s), "{kind}: {s}");
        }
        assert_eq!(m.managed().nodes().summary(), Mission::new(&config(ManagerKind::None), 1, MissionOptions::default()).unwrap().managed().nodes().summary());
    }
}

#[test]
fn fixed_manager_only_configures_at_startup() {
    let out = recorded(&unreachable(ManagerKind::None), 2);
    let calls: Vec<_> = out
        .access_log
        .iter()
        .filter(|a| a.op == AccessOp::Call && a.endpoint.ends_with("/change_mode"))
        .collect();
    assert_eq!(calls.len(), 2);
    assert!(calls.iter().all(|a| a.stamp == 0.0));
}

#[test]
fn managers_touch_only_allowed_endpoints() {
    for kind in KINDS {
        let out = recorded(&config(kind), 3);
        let clients: Vec<&str> = match kind {
            ManagerKind::None => vec!["fixed_manager"],
            ManagerKind::Random => vec![RANDOM_CLIENT],
            ManagerKind::Metacontrol => vec!["mros_reasoner", "system_modes_bridge"],
        };
        for a in out.access_log.iter().filter(|a| clients.contains(&a.client.as_str())) {
            let ok = match a.op {
                AccessOp::Subscribe => a.endpoint == "/diagnostics",
                AccessOp::Serve => a.endpoint == "/mros/objective" || a.endpoint == "/mros/request_configuration",
                AccessOp::Call => a.endpoint.ends_with("/change_mode") || a.endpoint == "/mros/request_configuration",
                AccessOp::Publish => false,
            };
            assert!(ok, "{kind}: {a:?}");
        }
    }
}

#[test]
fn random_manager_reconfigures_on_its_period_only() {
    let cfg = unreachable(ManagerKind::Random);
    let out = recorded(&cfg, 4);
    let stamps: Vec<f64> = out
        .access_log
        .iter()
        .filter(|a| a.client == RANDOM_CLIENT && a.op == AccessOp::Call)
        .map(|a| a.stamp)
        .collect();
    assert!(!stamps.is_empty());
    for t in &stamps {
        let k = t / cfg.manager.adaptation_period;
        assert!((k - k.round()).abs() < 1e-9, "call at {t}");
    }
    let modes = |o: &suave::runner::MissionOutcome| -> Vec<ServiceRequest> {
        o.access_log
            .iter()
            .filter(|a| a.client == RANDOM_CLIENT)
            .filter_map(|a| a.request.clone())
            .collect()
    };
    assert_eq!(modes(&out), modes(&recorded(&cfg, 4)));
}

#[test]
fn metacontrol_finds_pipeline_on_typical_seed() {
    let m = run_once(&config(ManagerKind::Metacontrol), 1).unwrap();
    assert!(m.pipeline_found);
    assert!(m.distance_inspected > 0.0);
}

#[test]
fn mission_ends_at_time_limit() {
    let mut cfg = config(ManagerKind::Metacontrol);
    cfg.time_limit = 12.0;
    let mut m = Mission::new(&cfg, 1, MissionOptions::default()).unwrap();
    let mut ticks = 0;
    while m.tick().unwrap() != MissionPhase::Done {
        ticks += 1;
    }
    assert_eq!(ticks, 120);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn metrics_bounded_and_reproducible(seed in 0u64..10_000, k in 0usize..3) {
        let cfg = config(KINDS[k]);
        let a = run_once(&cfg, seed).unwrap();
        prop_assert_eq!(a, run_once(&cfg, seed).unwrap());
        prop_assert!(a.search_time >= 0.0 && a.search_time <= cfg.time_limit);
        prop_assert!(a.distance_inspected >= 0.0 && a.distance_inspected <= cfg.layout.pipeline_length + 1e-9);
        prop_assert_eq!(a.pipeline_found, a.search_time < cfg.time_limit);
    }
}

#[derive(serde::Deserialize)]
struct Row {
    manager: String,
    seed: u64,
    pipeline_found: bool,
    search_time_s: f64,
    distance_inspected_m: f64,
}

#[test]
fn stats_match_emitted_rows() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(ManagerKind::Metacontrol);
    cfg.runs = 6;
    cfg.base_seed = 11;
    cfg.output = dir.path().to_path_buf();
    let report = execute(&cfg).unwrap();
    assert!(!report.partial && !dir.path().join(PARTIAL_MARKER).exists());

    let mut rdr = csv::Reader::from_path(dir.path().join(RUNS_CSV)).unwrap();
    let rows: Vec<Row> = rdr.deserialize().map(Result::unwrap).collect();
    assert_eq!(rows.iter().map(|r| r.seed).collect::<Vec<_>>(), (11..17).collect::<Vec<_>>());
    assert!(rows.iter().all(|r| r.manager == "metacontrol"));
    let n = rows.len() as f64;
    let mean = rows.iter().map(|r| r.search_time_s).sum::<f64>() / n;
    let var = rows.iter().map(|r| (r.search_time_s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((report.stats.search_time.mean - mean).abs() < 1e-9);
    assert!((report.stats.search_time.std - var.sqrt()).abs() < 1e-9);
    let dmean = rows.iter().map(|r| r.distance_inspected_m).sum::<f64>() / n;
    assert!((report.stats.distance_inspected.mean - dmean).abs() < 1e-9);
    assert_eq!(report.stats.found, rows.iter().filter(|r| r.pipeline_found).count());

    let stats = fs::read_to_string(dir.path().join(STATS_CSV)).unwrap();
    assert!(stats.starts_with("manager,runs,found,search_time_mean_s,search_time_std_s,"));
    let results: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join(RESULTS_JSON)).unwrap()).unwrap();
    let echoed: RunConfig = serde_json::from_value(results["config"].clone()).unwrap();
    assert_eq!(echoed, cfg);
    assert_eq!(results["partial"], false);
}

#[test]
fn output_bytes_reproducible() {
    let mut texts = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = config(ManagerKind::Random);
        cfg.runs = 8;
        cfg.output = dir.path().to_path_buf();
        cfg.trace = true;
        execute(&cfg).unwrap();
        let runs = fs::read(dir.path().join(RUNS_CSV)).unwrap();
        let stats = fs::read(dir.path().join(STATS_CSV)).unwrap();
        let trace = fs::read(dir.path().join("traces/seed_3.csv")).unwrap();
        texts.push((runs, stats, trace));
    }
    assert!(texts[0] == texts[1]);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_suave"))
}

#[test]
fn cli_runs_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let status = cli()
        .args(["--manager", "metacontrol", "--runs", "2", "--seed", "5", "--snapshot-kb", "--trace", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let runs = fs::read_to_string(dir.path().join(RUNS_CSV)).unwrap();
    assert_eq!(runs.lines().count(), 3);
    assert!(runs.lines().nth(1).unwrap().starts_with("metacontrol,5,"));
    let snaps = fs::read_to_string(dir.path().join("kb_snapshots/seed_5.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(snaps.lines().next().unwrap()).unwrap();
    assert_eq!(first["stamp"], 0.0);
    assert!(first["kb"]["designs"].is_object() || first["kb"]["designs"].is_array());
    assert_eq!(snaps.lines().count(), 300);
    let trace = fs::read_to_string(dir.path().join("traces/seed_6.csv")).unwrap();
    assert!(trace.starts_with("t,x,y,z,heading,water_visibility,thrusters,phase,driver,modes"));
    assert_eq!(trace.lines().count(), 3001);
}

#[test]
fn cli_reads_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let out = dir.path().join("out");
    fs::write(&path, format!(r#"{{"runs": 1, "manager": {{"kind": "none"}}, "output": {:?}}}"#, out)).unwrap();
    let status = cli().arg("--config").arg(&path).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let stats = fs::read_to_string(out.join(STATS_CSV)).unwrap();
    assert!(stats.lines().nth(1).unwrap().starts_with("none,1,"));
    assert!(stats.trim_end().ends_with("NaN"));
}

#[test]
fn cli_rejects_bad_input_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"water_visibility": {"min": 3.0, "max": 1.0, "period": 80.0}}"#).unwrap();
    let garbled = dir.path().join("garbled.json");
    fs::write(&garbled, "{ not json").unwrap();
    let cases: Vec<Vec<std::ffi::OsString>> = vec![
        vec!["--bogus".into()],
        vec!["--manager".into(), "oracle".into()],
        vec!["--runs".into(), "0".into()],
        vec!["--config".into(), dir.path().join("missing.json").into()],
        vec!["--config".into(), bad.into()],
        vec!["--config".into(), garbled.into()],
    ];
    for args in cases {
        let out = cli().args(&args).arg("--out").arg(dir.path().join("o")).output().unwrap();
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}
