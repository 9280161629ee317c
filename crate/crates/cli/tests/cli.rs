use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use artemis_cli::manifest::sha256_file;
use artemis_cli::{exit, run_pipeline, ArtifactStatus, RunManifest, RunRecord, RunStatus, Stage};
use artemis_server::Store;
use serde_json::{json, Value};

fn artemis(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_artemis"))
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "warn")
        .env_remove("ARTEMIS_SERVER_URL")
        .output()
        .expect("spawn artemis")
}

fn write_manifest(dir: &Path, manifest: &Value) -> std::path::PathBuf {
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(manifest).unwrap()).unwrap();
    path
}

fn small_manifest(output_dir: &str) -> Value {
    json!({
        "seed": 42,
        "output_dir": output_dir,
        "stages": ["synthesize", "analyze", "train", "evaluate", "compare", "simulate"],
        "synthesize": {"count": 4000},
        "train": {"models": ["mlp", "tree"], "epochs": 8},
        "compare": {"subsets": 10}
    })
}

fn read_record(dir: &Path) -> RunRecord {
    serde_json::from_str(&fs::read_to_string(dir.join("run.json")).unwrap()).unwrap()
}

#[test]
fn manifest_run_writes_every_artifact_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write_manifest(tmp.path(), &small_manifest("first"));
    let out = artemis(&["run", "--config", manifest.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let again = artemis(&["run", "--config", manifest.to_str().unwrap(), "--output", "second"], tmp.path());
    assert!(again.status.success(), "{}", String::from_utf8_lossy(&again.stderr));

    let first = read_record(&tmp.path().join("first"));
    let second = read_record(&tmp.path().join("second"));
    assert_eq!(first.status, RunStatus::Complete);
    let names: Vec<&str> = first.artifacts.iter().map(|a| a.path.as_str()).collect();
    for expected in [
        "synthetic.csv",
        "analysis.json",
        "holdout.csv",
        "model-mlp.json",
        "history-mlp.json",
        "model-tree.json",
        "metrics-mlp.json",
        "roc-mlp.csv",
        "metrics-tree.json",
        "roc-tree.csv",
        "comparison.json",
        "mission.jsonl",
    ] {
        assert!(names.contains(&expected), "{expected} missing from {names:?}");
    }
    assert_eq!(first.artifacts, second.artifacts, "rerun digests differ");
    for a in &first.artifacts {
        let (sha, bytes) = sha256_file(&tmp.path().join("first").join(&a.path)).unwrap();
        assert_eq!((sha.as_str(), bytes), (a.sha256.as_str(), a.bytes), "{}", a.path);
        assert_eq!(a.status, ArtifactStatus::Complete);
    }

    let metrics: Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("first/metrics-mlp.json")).unwrap()).unwrap();
    let accuracy = metrics["accuracy"].as_f64().expect("accuracy field");
    assert!((0.0..=1.0).contains(&accuracy));
    assert_eq!(metrics["classes"].as_array().unwrap().len(), 5);
    assert_eq!(metrics["roc"].as_array().unwrap().len(), 5);
    let mission = fs::read_to_string(tmp.path().join("first/mission.jsonl")).unwrap();
    assert_eq!(mission.lines().count(), 12);
}

#[test]
fn stages_run_alone_match_the_pipeline_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest: RunManifest = serde_json::from_value(json!({
        "seed": 42,
        "output_dir": tmp.path().join("run"),
        "stages": ["synthesize", "train"],
        "synthesize": {"count": 2000},
        "train": {"models": ["tree"]}
    }))
    .unwrap();
    let outcome = run_pipeline(&manifest).unwrap();
    assert!(outcome.error.is_none());

    let out = artemis(
        &["--seed", "42", "synthesize", "--count", "2000", "--output", "alone.csv"],
        tmp.path(),
    );
    assert!(out.status.success());
    let out = artemis(
        &["train", "tree", "--seed", "42", "--input", "alone.csv", "--output", "tree.json", "--holdout", "holdout.csv"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for (alone, piped) in [
        ("alone.csv", "run/synthetic.csv"),
        ("tree.json", "run/model-tree.json"),
        ("holdout.csv", "run/holdout.csv"),
    ] {
        assert_eq!(
            fs::read(tmp.path().join(alone)).unwrap(),
            fs::read(tmp.path().join(piped)).unwrap(),
            "{alone} vs {piped}"
        );
    }
}

#[test]
fn different_seeds_give_different_data() {
    let tmp = tempfile::tempdir().unwrap();
    for seed in ["1", "2"] {
        let out = artemis(
            &["synthesize", "--seed", seed, "--count", "500", "--output", &format!("s{seed}.csv")],
            tmp.path(),
        );
        assert!(out.status.success());
    }
    assert_ne!(fs::read(tmp.path().join("s1.csv")).unwrap(), fs::read(tmp.path().join("s2.csv")).unwrap());
}

#[test]
fn missing_input_exits_with_data_status_and_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = artemis(&["train", "mlp", "--input", "no-such-table.csv", "--output", "m.json"], tmp.path());
    assert_eq!(out.status.code(), Some(exit::DATA));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-table.csv"));
    assert!(!tmp.path().join("m.json").exists());
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(artemis(&["frobnicate"], tmp.path()).status.code(), Some(exit::USAGE));
    assert_eq!(artemis(&["train", "forest", "--input", "a", "--output", "b"], tmp.path()).status.code(), Some(exit::USAGE));
    assert_eq!(artemis(&["synthesize", "--output", "x.csv", "--mix", "1,2"], tmp.path()).status.code(), Some(exit::USAGE));
    let help = artemis(&["--help"], tmp.path());
    assert_eq!(help.status.code(), Some(exit::OK));
    let text = String::from_utf8_lossy(&help.stdout);
    for sub in ["preprocess", "analyze", "synthesize", "train", "evaluate", "compare", "simulate", "serve", "run"] {
        assert!(text.contains(sub), "help lacks {sub}");
    }
}

#[test]
fn unclean_table_is_rejected_before_training() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("raw.csv"),
        "temperature,heartrate,resprate,o2sat,sbp,dbp,pain,acuity,chiefcomplaint\n98.6,75,16,98,120,80,0,5,\n98.6,,16,98,120,80,0,4,\n",
    )
    .unwrap();
    let out = artemis(&["train", "tree", "--input", "raw.csv", "--output", "t.json"], tmp.path());
    assert_eq!(out.status.code(), Some(exit::DATA));
    assert!(String::from_utf8_lossy(&out.stderr).contains("row 2"));
}

#[test]
fn preprocess_reports_each_drop_category() {
    let tmp = tempfile::tempdir().unwrap();
    let rows = [
        "temperature,heartrate,resprate,o2sat,sbp,dbp,pain,acuity,chiefcomplaint",
        "98.6,75,16,98,120,80,0,5,cough",
        "98.6,75,16,98,120,80,0,5,cough",
        "99.1,80,18,97,125,82,2,4,",
        "99.1,,18,97,125,82,2,4,",
        "99.1,80,18,97,900,82,2,4,",
        "100.2,95,20,95,110,70,5,3,fever",
    ];
    fs::write(tmp.path().join("raw.csv"), rows.join("\n") + "\n").unwrap();
    let out = artemis(
        &["preprocess", "--input", "raw.csv", "--output", "clean.csv", "--report", "report.json"],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["input_count"], 6);
    assert_eq!(report["duplicate_count"], 1);
    assert_eq!(report["missing_count"], 1);
    assert_eq!(report["outlier_count"], 1);
    assert_eq!(report["output_count"], 3);
    let clean = fs::read_to_string(tmp.path().join("clean.csv")).unwrap();
    assert_eq!(clean.lines().count(), 4);

    let out = artemis(&["analyze", "--input", "clean.csv", "--output", "analysis.json"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let analysis: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("analysis.json")).unwrap()).unwrap();
    assert_eq!(analysis["records"], 3);
    assert_eq!(analysis["correlations"].as_array().unwrap().len(), 6);
}

#[test]
fn failed_stage_leaves_labelled_partial_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    // Nothing listens on the discard port, so every delivery fails.
    let manifest = write_manifest(
        tmp.path(),
        &json!({
            "seed": 3,
            "output_dir": "out",
            "stages": ["synthesize", "train", "simulate"],
            "synthesize": {"count": 1500},
            "train": {"models": ["tree"]},
            "simulate": {
                "server_url": "http://127.0.0.1:9",
                "retry": {"base_ms": 1, "factor": 1, "max_attempts": 1}
            }
        }),
    );
    let out = artemis(&["run", "--config", manifest.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(exit::RUNTIME), "{}", String::from_utf8_lossy(&out.stderr));
    let record = read_record(&tmp.path().join("out"));
    assert_eq!(record.status, RunStatus::Failed);
    assert_eq!(record.failed_stage, Some(Stage::Simulate));
    let partial = record.artifacts.iter().find(|a| a.stage == Stage::Simulate).expect("partial log recorded");
    assert_eq!(partial.path, "mission.jsonl.partial");
    assert_eq!(partial.status, ArtifactStatus::Partial);
    assert!(tmp.path().join("out/mission.jsonl.partial").exists());
    assert!(!tmp.path().join("out/mission.jsonl").exists());
    assert!(record
        .artifacts
        .iter()
        .filter(|a| a.stage != Stage::Simulate)
        .all(|a| a.status == ArtifactStatus::Complete));
}

#[test]
fn manifest_without_a_dataset_source_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = write_manifest(tmp.path(), &json!({"seed": 1, "output_dir": "out", "stages": ["train"]}));
    let out = artemis(&["run", "--config", manifest.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(exit::USAGE));
    let manifest = write_manifest(tmp.path(), &json!({"seed": 1, "output_dir": "out", "stages": ["bake"]}));
    let out = artemis(&["run", "--config", manifest.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(exit::DATA));
}

#[test]
fn simulate_delivers_reports_to_a_live_server() {
    let tmp = tempfile::tempdir().unwrap();
    let out = artemis(&["synthesize", "--count", "1500", "--output", "s.csv"], tmp.path());
    assert!(out.status.success());
    let out = artemis(&["train", "tree", "--input", "s.csv", "--output", "tree.json"], tmp.path());
    assert!(out.status.success());

    let runtime = tokio::runtime::Runtime::new().unwrap();
    let store = Arc::new(Store::in_memory());
    let listener = runtime.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
    let server = runtime.spawn(artemis_server::http::serve(listener, store.clone(), async {
        let _ = stopped.await;
    }));

    let url = format!("http://{addr}");
    let out = artemis(
        &["simulate", "--model", "tree.json", "--output", "mission.jsonl", "--server-url", &url],
        tmp.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let victims = store.list_victims(None, None);
    assert_eq!(victims.len(), 12);
    let log = fs::read_to_string(tmp.path().join("mission.jsonl")).unwrap();
    for line in log.lines() {
        let entry: Value = serde_json::from_str(line).unwrap();
        assert_eq!(entry["delivered"], true);
    }
    stop.send(()).unwrap();
    runtime.block_on(server).unwrap().unwrap();
}
