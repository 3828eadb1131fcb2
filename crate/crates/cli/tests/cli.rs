use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use simplex_influence::SimplicialComplex;

fn ismnet(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ismnet"))
        .current_dir(dir)
        .env("RUST_LOG", "warn")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = ismnet(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

/// Two triangles sharing node 2 plus a tail: enough 0-simplices for a split.
const BOWTIE: &str = "0 1\n1 2\n0 2\n2 3\n3 4\n2 4\n4 5\n5 6\n6 7\n7 8\n8 9\n9 5\n";

fn workdir(edges: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.edges"), edges).unwrap();
    dir
}

const BASE: [&str; 10] = ["--input", "g.edges", "--out", "out", "--runs", "300", "--max-order", "2", "--beta-ratio", "1"];

fn with<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    BASE.iter().copied().chain(extra.iter().copied()).collect()
}

#[test]
fn full_pipeline_on_a_toy_graph() {
    let dir = workdir(BOWTIE);
    let d = dir.path();
    for cmd in ["lift", "features", "label", "train", "rank", "baseline"] {
        ok(d, &with(&[cmd]));
    }
    let out = d.join("out");
    for f in [
        "complex/layer_2.csv",
        "features/h0.csv",
        "labels/h0_b1.00_b20.00.csv",
        "labels/h0_b1.00_b20.00.json",
        "models/h0/member0.json",
        "models/h0/member0.bin",
        "models/h0/train_log.json",
        "predictions/ismnet_h0.csv",
        "predictions/ranking_h0.txt",
        "baselines/hd_h0.csv",
        "manifests/rank.json",
    ] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let ranking = fs::read_to_string(out.join("predictions/ranking_h0.txt")).unwrap();
    assert_eq!(ranking.lines().count(), 10);

    let stdout = ok(
        d,
        &with(&[
            "evaluate",
            "--pred",
            "out/predictions/ismnet_h0.csv",
            "--truth",
            "out/labels/h0_b1.00_b20.00.csv",
            "--all",
        ]),
    );
    let tau: f64 = stdout.trim().strip_prefix("tau=").unwrap().parse().unwrap();
    assert!((-1.0..=1.0).contains(&tau));
    let table = fs::read_to_string(out.join("evaluation.csv")).unwrap();
    assert!(table.starts_with("method,beta_ratio,beta2_ratio,tau\n"));
    assert!(table.contains("ismnet,1.00,0.00,"));

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifests/train.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "train");
    assert!(manifest["seeds"].as_array().is_some_and(|s| !s.is_empty()));
}

#[test]
fn lift_reports_one_triangle_for_k3() {
    let dir = workdir("0 1\n1 2\n0 2\n");
    ok(dir.path(), &["--input", "g.edges", "--max-order", "2", "--out", "cx", "lift"]);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("cx/complex/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["counts"], serde_json::json!([3, 3, 1]));
    let loaded = SimplicialComplex::load(&dir.path().join("cx/complex")).unwrap();
    assert_eq!(loaded.count(2), Some(1));
}

#[test]
fn evaluating_a_file_against_itself_gives_one() {
    let dir = workdir(BOWTIE);
    let d = dir.path();
    ok(d, &with(&["lift"]));
    ok(d, &with(&["label"]));
    let labels = "out/labels/h0_b1.00_b20.00.csv";
    let stdout = ok(d, &with(&["evaluate", "--pred", labels, "--truth", labels, "--all"]));
    assert_eq!(stdout.trim(), "tau=1");
}

#[test]
fn evaluate_refuses_mismatched_hashes_without_force() {
    let dir = workdir(BOWTIE);
    let d = dir.path();
    ok(d, &with(&["lift"]));
    ok(d, &with(&["label"]));
    ok(d, &with(&["baseline", "--method", "dc"]));
    let labels = "out/labels/h0_b1.00_b20.00.csv";
    let side = d.join("out/baselines/dc_h0.json");
    let mut meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(&side).unwrap()).unwrap();
    meta["config_hash"] = "0000".into();
    fs::write(&side, meta.to_string()).unwrap();
    let args = ["evaluate", "--pred", "out/baselines/dc_h0.csv", "--truth", labels, "--all"];
    let refused = ismnet(d, &with(&args));
    assert_eq!(refused.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("--force"));
    let forced: Vec<&str> = with(&args).into_iter().chain(["--force"]).collect();
    ok(d, &forced);
}

#[test]
fn exit_codes_separate_usage_and_config_errors() {
    let dir = workdir(BOWTIE);
    let d = dir.path();
    assert_eq!(ismnet(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(ismnet(d, &["lift", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(ismnet(d, &["--help"]).status.code(), Some(0));
    assert_eq!(ismnet(d, &["--input", "g.edges", "--gamma=-1", "lift"]).status.code(), Some(3));
    assert_eq!(ismnet(d, &["--input", "g.edges", "--max-order", "0", "lift"]).status.code(), Some(3));
    fs::write(d.join("bad.toml"), "unknown_key = 1\n").unwrap();
    assert_eq!(ismnet(d, &["--config", "bad.toml", "lift"]).status.code(), Some(3));
    assert_eq!(ismnet(d, &["--input", "missing.edges", "lift"]).status.code(), Some(3));
    fs::write(d.join("bad.edges"), "0 1\n1\n").unwrap();
    assert_eq!(ismnet(d, &["--input", "bad.edges", "lift"]).status.code(), Some(1));
}

#[test]
fn reruns_are_byte_identical() {
    let runs: Vec<Vec<(String, Vec<u8>)>> = (0..2)
        .map(|_| {
            let dir = workdir(BOWTIE);
            let d = dir.path();
            for cmd in ["lift", "label", "train", "rank"] {
                ok(d, &with(&[cmd]));
            }
            [
                "labels/h0_b1.00_b20.00.csv",
                "models/h0/member0.bin",
                "models/h0/train_log.json",
                "predictions/ismnet_h0.csv",
                "predictions/ranking_h0.txt",
            ]
            .iter()
            .map(|f| (f.to_string(), fs::read(d.join("out").join(f)).unwrap()))
            .collect()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
}

#[test]
fn thread_count_does_not_change_labels() {
    let read = |threads: &str| {
        let dir = workdir(BOWTIE);
        let d = dir.path();
        ok(d, &with(&["--threads", threads, "lift"]));
        ok(d, &with(&["--threads", threads, "label"]));
        fs::read(d.join("out/labels/h0_b1.00_b20.00.csv")).unwrap()
    };
    assert_eq!(read("1"), read("3"));
}

#[test]
fn report_collects_present_families() {
    let dir = workdir(BOWTIE);
    let d = dir.path();
    fs::create_dir_all(d.join("res")).unwrap();
    fs::write(d.join("res/evaluation.csv"), "method,beta_ratio,beta2_ratio,tau\nismnet,1.00,0.00,0.5\n").unwrap();
    let strict = ismnet(d, &["--out", "out", "report", "--results", "res"]);
    assert_eq!(strict.status.code(), Some(1));
    ok(d, &["--out", "out", "report", "--results", "res", "--allow-missing"]);
    let beta = fs::read_to_string(d.join("out/report/tau_vs_beta.csv")).unwrap();
    assert_eq!(beta, "method,beta_ratio,tau\nismnet,1.00,0.5\n");
}
