//! End-to-end checks of the `botdna` binary: stage-by-stage subcommand
//! flow, exit codes, and artifact shapes.

use std::path::Path;
use std::process::Command;

fn botdna() -> Command {
    Command::new(env!("CARGO_BIN_EXE_botdna"))
}

fn write_config(dir: &Path, accounts: usize) -> std::path::PathBuf {
    let out = dir.join("out");
    let config = serde_json::json!({
        "k": 4,
        "threads": 1,
        "input": {"path": out.join("trace.jsonl"), "format": "jsonl"},
        "year_range": [2015, 2016],
        "events": [{
            "name": "christmas", "month": 12, "day": 25, "window_days": 5,
            "emojis": ["\u{1F384}"]
        }],
        "synthetic": {
            "seed": 17,
            "families": [
                {"name": "unique_tweeters", "accounts": accounts, "length_range": [24, 48],
                 "blocks": [["TXMKZQL", 6], ["TXMKZQP", 1], ["TXMKZDL", 1]]},
                {"name": "url_duplicators", "accounts": accounts, "length_range": [24, 48],
                 "blocks": [["TUMKZQL", 1], ["TUMKZDL", 5], ["TUMKZDP", 2], ["TUMKZEL", 1]]},
                {"name": "content_multipliers", "accounts": accounts, "length_range": [24, 48],
                 "blocks": [["RUIJHQP", 3], ["YUVJHQN", 2], ["TUIJHDP", 2], ["RXIJHQL", 1]],
                 "bursts": [{"month": 12, "day": 25, "year": 2015, "participants": 3,
                             "emoji": "\u{1F384}"}]},
                {"name": "informed_contributors", "accounts": accounts, "length_range": [24, 48],
                 "blocks": [["TUIKZQP", 3], ["TUMJHQP", 2], ["TUVKZDP", 2], ["TXIKZQP", 1]]}
            ]
        }
    });
    let path = dir.join("config.json");
    std::fs::write(&path, serde_json::to_string_pretty(&config).unwrap()).unwrap();
    path
}

#[test]
fn stage_subcommands_compose_like_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 5);
    let out = dir.path().join("out");
    let run = |sub: &str| {
        let status = botdna()
            .args([sub, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success(), "{} failed", sub);
    };
    run("synth");
    for stage in [
        "ingest",
        "encode",
        "similarity",
        "cluster",
        "profile",
        "align",
        "mutations",
        "evolve",
        "events",
    ] {
        run(stage);
    }
    for artifact in [
        "corpus.jsonl",
        "sequences.jsonl",
        "similarity.bin",
        "assignment.csv",
        "profiles.json",
        "aligned.jsonl",
        "mutation_stats.json",
        "evolution.json",
        "events_christmas.json",
    ] {
        assert!(out.join(artifact).exists(), "{} missing", artifact);
    }
}

#[test]
fn pipeline_writes_manifest_with_eight_stages_plus_events() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 10);
    let out = dir.path().join("out");
    assert!(botdna()
        .args(["synth", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    assert!(botdna()
        .args(["pipeline", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let stages: Vec<&str> = manifest["stages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["stage"].as_str().unwrap())
        .collect();
    assert_eq!(
        stages,
        vec![
            "ingest",
            "encode",
            "similarity",
            "cluster",
            "profile",
            "align",
            "mutations",
            "evolve",
            "events"
        ]
    );
    // Every recorded file exists and has a 64-hex hash.
    for stage in manifest["stages"].as_array().unwrap() {
        for file in stage["files"].as_array().unwrap() {
            assert!(out.join(file["path"].as_str().unwrap()).exists());
            assert_eq!(file["sha256"].as_str().unwrap().len(), 64);
        }
    }
}

#[test]
fn pipeline_without_events_has_eight_stages() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = write_config(dir.path(), 10);
    // Strip the events section.
    let mut config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&config_path).unwrap()).unwrap();
    config.as_object_mut().unwrap().remove("events");
    std::fs::write(&config_path, config.to_string()).unwrap();

    let out = dir.path().join("out");
    for sub in ["synth", "pipeline"] {
        assert!(botdna()
            .args([sub, "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap()
            .success());
    }
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["stages"].as_array().unwrap().len(), 8);
}

#[test]
fn cluster_k_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 5);
    let out = dir.path().join("out");
    for sub in ["synth", "ingest", "encode", "similarity"] {
        assert!(botdna()
            .args([sub, "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap()
            .success());
    }
    assert!(botdna()
        .args(["cluster", "--k", "2", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let assignment = std::fs::read_to_string(out.join("assignment.csv")).unwrap();
    let max_family = assignment
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<usize>().unwrap())
        .max()
        .unwrap();
    assert_eq!(max_family, 2);
}

#[test]
fn unknown_flag_exits_one_with_usage() {
    let output = botdna().arg("--definitely-not-a-flag").output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.to_lowercase().contains("usage"), "stderr: {}", stderr);
}

#[test]
fn validation_error_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("bad.json");
    std::fs::write(&config_path, r#"{"k": 0}"#).unwrap();
    let output = botdna()
        .args(["pipeline", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn missing_input_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        serde_json::json!({"input": {"path": dir.path().join("absent.jsonl"), "format": "jsonl"}})
            .to_string(),
    )
    .unwrap();
    let output = botdna()
        .args(["pipeline", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn corrupt_rows_complete_with_nonzero_skip_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    std::fs::create_dir_all(&out).unwrap();
    // Two valid accounts plus garbage rows.
    let mut trace = String::new();
    for account in ["a", "b"] {
        for t in 0..6 {
            trace.push_str(&format!(
                "{}\n",
                serde_json::json!({
                    "account_id": account,
                    "timestamp": 1_433_160_000 + t * 3600,
                    "action": "tweet",
                    "has_url": false, "media": "none",
                    "has_hashtag": false, "has_emoji": false,
                    "text": format!("post {}", t)
                })
            ));
        }
    }
    trace.push_str("THIS IS NOT JSON\n");
    trace.push_str("{\"account_id\":\"c\"}\n");
    std::fs::write(out.join("trace.jsonl"), &trace).unwrap();

    let config_path = dir.path().join("config.json");
    std::fs::write(
        &config_path,
        serde_json::json!({
            "k": 2,
            "input": {"path": out.join("trace.jsonl"), "format": "jsonl"}
        })
        .to_string(),
    )
    .unwrap();
    let status = botdna()
        .args(["pipeline", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("skip_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["rows_total"], 14);
    assert_eq!(report["rows_skipped"], 2);
}
