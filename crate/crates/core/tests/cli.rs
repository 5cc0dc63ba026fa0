//! Black-box tests of the `sggd` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sggd(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sggd"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn overhead_prints_the_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sggd(&["overhead", "--n", "5"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("{\"n\":5,"), "{text}");
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["adjacent_gate_total"], 20);
    assert_eq!(v["twirled_zz_gate_count"], 10);
}

#[test]
fn overhead_rejects_tiny_registers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sggd(&["overhead", "--n", "1"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn werner_writes_landscape_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sggd(
        &["werner", "--cost", "c1", "--lambda", "1.0", "--out", "results/"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let dir = tmp.path().join("results");
    for f in ["landscape.csv", "summary.json", "manifest.json", "run_info.json"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let csv = fs::read_to_string(dir.join("landscape.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("param0,sample_id,c0,g,c1,c2"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 256);
    for p in ["p=-0.25", "p=0.25"] {
        let n = rows.iter().filter(|r| r.split(',').nth(1) == Some(p)).count();
        assert_eq!(n, 256, "{p}");
    }
    // c2 was not requested, so its cells stay empty.
    assert!(rows.iter().all(|r| r.ends_with(',')));
}

#[test]
fn missing_config_names_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = sggd(&["classify2d", "--config", "missing.json"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("missing.json"), "{}", stderr(&out));
}

#[test]
fn schema_errors_exit_with_one_and_name_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("bad.json"),
        r#"{"experiment":"werner","cost":{"kind":"c9"}}"#,
    )
    .unwrap();
    let out = sggd(&["werner", "--config", "bad.json", "--out", "r"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("cost.kind"), "{}", stderr(&out));
    assert!(!tmp.path().join("r").exists());
}

#[test]
fn syntax_errors_report_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("bad.json"),
        "{\"experiment\":\"werner\",\n  \"seed\": }\n",
    )
    .unwrap();
    let out = sggd(&["werner", "--config", "bad.json"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn config_for_another_experiment_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.json"), r#"{"experiment":"werner"}"#).unwrap();
    let out = sggd(&["catdog", "--config", "c.json"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bad_flags_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(sggd(&["werner", "--cost", "c7"], tmp.path()).status.code(), Some(1));
    assert_eq!(sggd(&["frobnicate"], tmp.path()).status.code(), Some(1));
    assert_eq!(sggd(&["--help"], tmp.path()).status.code(), Some(0));
}

#[test]
fn existing_output_directory_is_never_reused() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("taken")).unwrap();
    fs::write(tmp.path().join("taken/keep.txt"), "x").unwrap();
    let out = sggd(&["werner", "--out", "taken"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(fs::read_to_string(tmp.path().join("taken/keep.txt")).unwrap(), "x");
    assert!(!tmp.path().join("taken/summary.json").exists());
}

#[test]
fn flags_override_the_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.json"),
        r#"{"experiment":"werner","seed":3,"cost":{"kind":"c1","lambda":2.0},"grid":{"points":16}}"#,
    )
    .unwrap();
    let out = sggd(
        &["werner", "--config", "c.json", "--seed", "11", "--lambda", "0.5"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let dir = tmp.path().join("results/werner-seed11");
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seeds"], serde_json::json!([11]));
    assert_eq!(manifest["config"]["cost"]["lambda"], 0.5);
    assert_eq!(manifest["config"]["grid"]["points"], 16);
}

#[test]
fn landscape_subcommand_follows_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("c.json"),
        r#"{"experiment":"catdog","grid":{"points":8}}"#,
    )
    .unwrap();
    let out = sggd(&["landscape", "--config", "c.json", "--out", "l"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(tmp.path().join("l/landscape.csv")).unwrap();
    assert!(csv.starts_with("param0,param1,sample_id,c0,g,c1,c2\n"));
    // The training table belongs to the full catdog run only.
    assert!(!tmp.path().join("l/train").exists());

    fs::write(tmp.path().join("o.json"), r#"{"experiment":"overhead"}"#).unwrap();
    let out = sggd(&["landscape", "--config", "o.json"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}
