//! Run directories on disk: every number in `summary.json` is recomputed
//! from the CSV files next to it, the manifest lists exactly the files
//! present, and the JSON documents are canonical.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde_json::Value;
use sggd::config::ExperimentConfig;
use sggd::experiments::combine_3class;
use sggd::io::{canonical_json, config_hash};
use sggd::run::run_to_dir;

type Table = (Vec<String>, Vec<Vec<String>>);

fn read_csv(path: &Path) -> Table {
    let mut r = csv::Reader::from_path(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(str::to_string).collect())
        .collect();
    (header, rows)
}

fn col(t: &Table, name: &str) -> usize {
    t.0.iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"))
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn files_under(root: &Path) -> BTreeSet<String> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeSet<String>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/"));
            }
        }
    }
    let mut out = BTreeSet::new();
    walk(root, root, &mut out);
    out
}

/// Run `config` into a fresh directory and check the parts every run shares.
fn run(config: &str) -> (tempfile::TempDir, std::path::PathBuf, Value) {
    let cfg = ExperimentConfig::from_json(config).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    run_to_dir(&cfg, &dir).unwrap();

    let manifest = read_json(&dir.join("manifest.json"));
    let listed: BTreeSet<String> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap().to_string())
        .collect();
    assert_eq!(listed, files_under(&dir));
    assert_eq!(
        manifest["config_hash"].as_str().unwrap(),
        config_hash(&manifest["config"]).unwrap()
    );
    assert_eq!(manifest["config"], serde_json::to_value(&cfg).unwrap());

    for doc in ["summary.json", "manifest.json"] {
        let text = fs::read_to_string(dir.join(doc)).unwrap();
        let reparsed: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(canonical_json(&reparsed), text, "{doc} is not canonical");
    }
    let summary = read_json(&dir.join("summary.json"));
    assert_eq!(summary["config"], manifest["config"]);
    (tmp, dir, summary)
}

/// Grid minimum and argmin of every landscape column, per sample.
fn audit_landscape(dir: &Path, summary: &Value, params: usize) {
    let t = read_csv(&dir.join("landscape.csv"));
    let sid = col(&t, "sample_id");
    let land = summary["landscape"].as_object().unwrap();
    let ids: BTreeSet<&str> = t.1.iter().map(|r| r[sid].as_str()).collect();
    assert_eq!(ids.len(), land.len());
    for (id, cols) in land {
        let rows: Vec<&Vec<String>> = t.1.iter().filter(|r| &r[sid] == id).collect();
        for (name, entry) in cols.as_object().unwrap() {
            let c = col(&t, name);
            let mut best: Option<(f64, &Vec<String>)> = None;
            for r in &rows {
                let v = num(&r[c]);
                if best.is_none_or(|(b, _)| v < b) {
                    best = Some((v, r));
                }
            }
            let (min, row) = best.unwrap();
            assert_eq!(entry["min"].as_f64().unwrap(), min, "{id}/{name}");
            let argmin: Vec<f64> = (0..params).map(|k| num(&row[k])).collect();
            let expected: Vec<f64> = entry["argmin"]
                .as_array()
                .unwrap()
                .iter()
                .map(|x| x.as_f64().unwrap())
                .collect();
            assert_eq!(expected, argmin, "{id}/{name}");
        }
    }
}

fn accuracy(t: &Table) -> f64 {
    let (a, b) = (col(t, "true_label"), col(t, "pred_label"));
    t.1.iter().filter(|r| r[a] == r[b]).count() as f64 / t.1.len() as f64
}

fn audit_train_log(path: &Path, run: &Value) {
    let t = read_csv(path);
    assert_eq!(t.0, ["epoch", "c0", "penalty", "lambda", "cost"]);
    assert_eq!(run["epochs"].as_u64().unwrap() as usize, t.1.len());
    for (k, r) in t.1.iter().enumerate() {
        assert_eq!(r[0], k.to_string());
    }
    let last = t.1.last().unwrap();
    assert_eq!(run["last_logged_c0"].as_f64().unwrap(), num(&last[1]));
    assert_eq!(run["last_logged_penalty"].as_f64().unwrap(), num(&last[2]));
    assert_eq!(run["last_logged_cost"].as_f64().unwrap(), num(&last[4]));
}

#[test]
fn werner_summary_matches_landscape() {
    let (_tmp, dir, summary) = run(r#"{"experiment":"werner","grid":{"points":64}}"#);
    let t = read_csv(&dir.join("landscape.csv"));
    assert_eq!(t.1.len(), 2 * 64);
    audit_landscape(&dir, &summary, 1);
}

#[test]
fn rescaled_landscape_peaks_at_one() {
    let (_tmp, dir, _) = run(r#"{"experiment":"werner","grid":{"points":32,"rescale":true}}"#);
    let t = read_csv(&dir.join("landscape.csv"));
    let sid = col(&t, "sample_id");
    for name in ["c0", "g", "c1"] {
        let c = col(&t, name);
        for id in ["p=-0.25", "p=0.25"] {
            let max =
                t.1.iter()
                    .filter(|r| r[sid] == id)
                    .map(|r| num(&r[c]))
                    .fold(f64::MIN, f64::max);
            assert!((max - 1.0).abs() < 1e-15, "{id}/{name}: {max}");
        }
    }
}

#[test]
fn werner2_summary_matches_landscape() {
    let (_tmp, dir, summary) = run(r#"{"experiment":"werner2","variant":"cnot_ix","grid":{"points":16}}"#);
    audit_landscape(&dir, &summary, 2);
    let t = read_csv(&dir.join("landscape.csv"));
    assert_eq!(t.0, ["param0", "param1", "sample_id", "c0", "g", "c1", "c2"]);
    // Four p values plus the penalty-only sample.
    assert_eq!(t.1.len(), 5 * 16 * 16);
}

#[test]
fn catdog_summary_matches_files() {
    let (_tmp, dir, summary) = run(r#"{"experiment":"catdog","epochs":60,"grid":{"points":16}}"#);
    audit_landscape(&dir, &summary, 2);
    let training = summary["training"].as_array().unwrap();
    // full, half and the four single inputs, each under c0 and c1.
    assert_eq!(training.len(), 6 * 2);
    for run in training {
        let sub = format!(
            "train/{}/{}",
            run["subset"].as_str().unwrap(),
            run["cost"].as_str().unwrap()
        );
        audit_train_log(&dir.join(&sub).join("train_log.csv"), run);
        let preds = read_csv(&dir.join(&sub).join("predictions.csv"));
        assert_eq!(preds.1.len(), 4);
        assert_eq!(run["test_accuracy"].as_f64().unwrap(), accuracy(&preds));

        let inputs: Vec<&str> = run["inputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        let seen: Vec<&Vec<String>> = preds
            .1
            .iter()
            .filter(|r| inputs.contains(&format!("{}{}", num(&r[0]) as u8, num(&r[1]) as u8).as_str()))
            .collect();
        assert_eq!(seen.len(), inputs.len());
        let hits = seen.iter().filter(|r| r[2] == r[3]).count() as f64 / seen.len() as f64;
        assert_eq!(run["train_accuracy"].as_f64().unwrap(), hits);
    }
}

#[test]
fn classify2d_summary_matches_files() {
    let (_tmp, dir, summary) = run(
        r#"{"experiment":"classify2d","seed":3,"epochs":30,"dataset":{"samples_per_class":12},"grid":{"points":16}}"#,
    );
    let data = read_csv(&dir.join("data.csv"));
    assert_eq!(data.1.len(), 24);
    let mut acc = Vec::new();
    for kind in ["c0", "c2"] {
        let run = &summary["runs"][kind];
        audit_train_log(&dir.join(kind).join("train_log.csv"), run);
        let preds = read_csv(&dir.join(kind).join("predictions.csv"));
        assert_eq!(preds.0, ["x0", "x1", "true_label", "pred_label", "raw_output"]);
        assert_eq!(preds.1.len(), 16 * 16);
        for r in &preds.1 {
            let expected = if num(&r[4]) >= 0.0 { "1" } else { "-1" };
            assert_eq!(r[3], expected);
        }
        let test = accuracy(&preds);
        assert_eq!(run["test_accuracy"].as_f64().unwrap(), test);
        let train = read_csv(&dir.join(kind).join("train_predictions.csv"));
        assert_eq!(train.1.len(), 24);
        assert_eq!(run["train_accuracy"].as_f64().unwrap(), accuracy(&train));
        acc.push(test);
    }
    assert_eq!(summary["accuracy_gain"].as_f64().unwrap(), acc[1] - acc[0]);
}

#[test]
fn classify3c_summary_matches_files() {
    let (_tmp, dir, summary) =
        run(r#"{"experiment":"classify3c","epochs":8,"dataset":{"samples_per_class":6},"grid":{"points":16}}"#);
    let mut acc = Vec::new();
    for kind in ["c0", "c2"] {
        let run = &summary["runs"][kind];
        audit_train_log(&dir.join(kind).join("inner/train_log.csv"), &run["inner"]);
        audit_train_log(&dir.join(kind).join("outer/train_log.csv"), &run["outer"]);
        let preds = read_csv(&dir.join(kind).join("predictions.csv"));
        let outputs = read_csv(&dir.join(kind).join("branch_outputs.csv"));
        assert_eq!(outputs.0, ["x0", "x1", "inner_output", "outer_output"]);
        assert_eq!(preds.1.len(), outputs.1.len());
        for (p, o) in preds.1.iter().zip(&outputs.1) {
            assert_eq!(p[..2], o[..2]);
            assert_eq!(p[4], o[2]);
            let class = combine_3class(num(&o[2]) >= 0.0, num(&o[3]) >= 0.0);
            assert_eq!(p[3], class.to_string());
        }
        let test = accuracy(&preds);
        assert_eq!(run["test_accuracy"].as_f64().unwrap(), test);
        acc.push(test);
    }
    assert_eq!(summary["accuracy_gain"].as_f64().unwrap(), acc[1] - acc[0]);
}

#[test]
fn overhead_run_records_the_report() {
    let (_tmp, _dir, summary) = run(r#"{"experiment":"overhead","n":6}"#);
    assert_eq!(summary["overhead"]["n"], 6);
    assert_eq!(summary["overhead"]["twirled_zz_gate_count"], 15);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let config =
        r#"{"experiment":"classify2d","seed":5,"epochs":10,"dataset":{"samples_per_class":8},"grid":{"points":8}}"#;
    let (_a, dir_a, _) = run(config);
    let (_b, dir_b, _) = run(config);
    let files = files_under(&dir_a);
    assert_eq!(files, files_under(&dir_b));
    for f in files.iter().filter(|f| *f != "run_info.json") {
        assert_eq!(
            fs::read(dir_a.join(f)).unwrap(),
            fs::read(dir_b.join(f)).unwrap(),
            "{f}"
        );
    }
}
