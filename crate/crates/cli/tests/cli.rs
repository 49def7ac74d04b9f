//! End-to-end tests of the command-line interface and the harness surfaces
//! that back it.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Duration;

use zonemerge::{gen_random_pta, load_model, run_single, GenParams};
use zonemerge_core::explorer::{layer_bfs, ExplorationLimits, HeuristicConfig, RunStatus};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_zonemerge"))
}

fn models_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("zonemerge-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn synth_reports_the_result_and_exits_zero() {
    let out = bin()
        .args(["synth", "--model"])
        .arg(models_dir().join("threshold.json"))
        .args(["--goal", "l4", "--heuristic", "OQM"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{out:?}");
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("result: 0 <= p AND p <= 1"), "{stdout}");
    assert!(stdout.contains("status: Completed"), "{stdout}");
}

#[test]
fn synth_writes_stats_json_and_graph_export() {
    let dir = scratch("synth");
    let stats = dir.join("stats.json");
    let graph = dir.join("graph.dot");
    let out = bin()
        .args(["synth", "--model"])
        .arg(models_dir().join("threshold.json"))
        .args(["--heuristic", "Nomerge", "--stats-json"])
        .arg(&stats)
        .arg("--export-graph")
        .arg(&graph)
        .output()
        .unwrap();
    assert!(out.status.success());

    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(parsed["model"], "threshold");
    assert_eq!(parsed["heuristic"], "Nomerge");
    assert_eq!(parsed["states"], 7);
    assert_eq!(parsed["transitions"], 6);
    assert_eq!(parsed["status"], "Completed");

    // 7 nodes and 6 arrows under Nomerge
    let text = std::fs::read_to_string(&graph).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("label=\"l")).count(), 7);
    assert_eq!(text.lines().filter(|l| l.contains(" -> ")).count(), 6);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn merged_graph_export_has_five_nodes() {
    let dir = scratch("merged-graph");
    let graph = dir.join("merged.dot");
    let out = bin()
        .args(["synth", "--model"])
        .arg(models_dir().join("threshold.json"))
        .args(["--goal", "l4", "--heuristic", "OVM", "--export-graph"])
        .arg(&graph)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&graph).unwrap();
    assert_eq!(text.lines().filter(|l| l.contains("label=\"l")).count(), 5);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bad_heuristic_code_exits_with_a_parse_error() {
    let out = bin()
        .args(["synth", "--model"])
        .arg(models_dir().join("threshold.json"))
        .args(["--heuristic", "XQM"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("XQM"), "{stderr}");
}

#[test]
fn limit_hits_exit_with_a_distinct_code() {
    let out = bin()
        .args(["synth", "--model"])
        .arg(models_dir().join("threshold.json"))
        .args([
            "--goal",
            "l4",
            "--heuristic",
            "Nomerge",
            "--max-states",
            "2",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn bench_then_summarize_round_trips() {
    let dir = scratch("bench");
    let csv = dir.join("out.csv");
    let status = bin()
        .args(["bench", "--models"])
        .arg(models_dir())
        .args([
            "--heuristics",
            "Nomerge,OQM,RVMr",
            "--timeout",
            "60",
            "--out",
        ])
        .arg(&csv)
        .args(["--jobs", "2"])
        .status()
        .unwrap();
    assert!(status.success());

    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "model,goal,heuristic,status,time_ms,states,transitions,merges,mergeability_tests,result"
    );
    // 13 committed models x 3 heuristics
    assert_eq!(lines.len() - 1, 39);

    let out = bin()
        .args(["summarize", "--in"])
        .arg(&csv)
        .args(["--out", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.starts_with("heuristic,wins_time,"));
    assert_eq!(summary.lines().count(), 4);

    let md = bin()
        .args(["summarize", "--in"])
        .arg(&csv)
        .args(["--out", "markdown"])
        .output()
        .unwrap();
    assert!(String::from_utf8(md.stdout)
        .unwrap()
        .starts_with("| heuristic |"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn gen_writes_parseable_documents() {
    let dir = scratch("gen");
    let status = bin()
        .args(["gen", "--seed", "5", "--count", "3", "--out"])
        .arg(&dir)
        .status()
        .unwrap();
    assert!(status.success());
    for seed in 5..8 {
        let (pta, goals) = load_model(&dir.join(format!("gen{seed}.json"))).unwrap();
        assert_eq!(pta.name(), format!("gen{seed}"));
        assert!(!goals.is_empty());
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

/// Regression floor for the generator: at least 30 of the first 100 seeds
/// terminate under Nomerge within 2000 states.
#[test]
fn generator_seed_family_keeps_enough_terminating_models() {
    let sizes = GenParams::default();
    let limits = ExplorationLimits {
        max_states: Some(2000),
        ..Default::default()
    };
    let mut terminating = 0;
    for seed in 0..100 {
        let text = gen_random_pta(seed, &sizes).unwrap();
        let pta = zonemerge_core::parse_model(&text).unwrap();
        let completed = layer_bfs(&pta, HeuristicConfig::NOMERGE, limits, &BTreeSet::new())
            .map(|(_, stats)| stats.status == RunStatus::Completed)
            .unwrap_or(false);
        if completed {
            terminating += 1;
        }
    }
    assert!(terminating >= 30, "only {terminating}/100 seeds terminate");
}

/// Every reached symbolic state is concretely reachable: for sampled
/// valuations inside a state's parameter projection, the instantiated
/// automaton reaches that state's location.
#[test]
fn reached_states_are_concretely_reachable() {
    use zonemerge::{concrete_oracle, sample_valuations, OracleOutcome, SplitMix64};
    use zonemerge_core::synthesis::ParamConstraint;

    for name in [
        "threshold.json",
        "diamond.json",
        "gate.json",
        "twoparams.json",
    ] {
        let (pta, _) = load_model(&models_dir().join(name)).unwrap();
        let (zg, stats) = layer_bfs(
            &pta,
            HeuristicConfig::NOMERGE,
            ExplorationLimits::default(),
            &BTreeSet::new(),
        )
        .unwrap();
        assert_eq!(stats.status, RunStatus::Completed);
        let mut rng = SplitMix64::new(0xfeed);
        for id in zg.live_ids() {
            let state = zg.state(id).unwrap();
            let projection =
                ParamConstraint::new(pta.space().clone(), [state.constr.project_params()]);
            let goal: BTreeSet<_> = [state.loc].into();
            for v in sample_valuations(&projection, &pta, &mut rng, 2, true, 7, 4) {
                let outcome = concrete_oracle(&pta, &goal, &v, 20000).unwrap();
                assert_eq!(
                    outcome,
                    OracleOutcome::Reached,
                    "{name}: location {} not reachable for a projected valuation",
                    pta.location(state.loc).name
                );
            }
        }
    }
}

/// A run that cannot finish reports the timeout as its execution time.
#[test]
fn timed_out_runs_report_the_timeout() {
    let dir = scratch("timeout");
    // a diverging exploration: the two-clock model with an unreachable goal
    let text = std::fs::read_to_string(models_dir().join("drift.json")).unwrap();
    let text = text
        .replace(
            r#"{ "name": "l1", "invariant": ["x <= p"] }"#,
            r#"{ "name": "l1", "invariant": ["x <= p"] }, { "name": "nowhere" }"#,
        )
        .replace(r#""goal": ["l1"]"#, r#""goal": ["nowhere"]"#);
    let path = dir.join("diverging.json");
    std::fs::write(&path, text).unwrap();

    let out = run_single(
        &path,
        None,
        "Nomerge",
        ExplorationLimits {
            wall_timeout: Some(Duration::from_secs(1)),
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(out.record.status, "Timeout");
    assert_eq!(out.record.time_ms, 1000);
    std::fs::remove_dir_all(&dir).unwrap();
}
