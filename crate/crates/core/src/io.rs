//! Result files.
//!
//! Floats are written with 17 significant digits so every `f64` survives a
//! round trip. JSON objects are written with sorted keys, which makes a
//! document re-serialize to the same bytes after parsing. A run writes
//! into a fresh directory; if anything fails the directory is removed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Result, SggdError};
use crate::experiments::{LandscapeTable, Prediction};
use crate::train::TrainReport;

/// `x` with 17 significant digits. Non-finite values become `NaN`, `inf`
/// or `-inf`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn write_json(value: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize| "  ".repeat(n);
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(f64::NAN);
                if x.is_finite() {
                    out.push_str(&format_float(x));
                } else {
                    out.push_str("null");
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_json(item, indent + 1, out);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String((*key).clone()).to_string());
                out.push_str(": ");
                write_json(&map[*key], indent + 1, out);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Pretty JSON with sorted keys and 17-digit floats, newline-terminated.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_json(value, 0, &mut out);
    out.push('\n');
    out
}

/// [`canonical_json`] of any serializable value.
pub fn to_canonical_json(value: &impl Serialize) -> Result<String> {
    let v = serde_json::to_value(value)
        .map_err(|e| SggdError::InvalidArgument(format!("value is not representable as JSON: {e}")))?;
    Ok(canonical_json(&v))
}

/// Hex SHA-256 of the canonical form of `config`. Key order in the
/// original document does not matter.
pub fn config_hash(config: &impl Serialize) -> Result<String> {
    let text = to_canonical_json(config)?;
    let digest = Sha256::digest(text.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| SggdError::InvalidArgument(format!("csv encoding failed: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(&row).map_err(fail)?;
    }
    w.into_inner()
        .map_err(|e| SggdError::InvalidArgument(format!("csv encoding failed: {e}")))
}

fn cell(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

/// `param0[,param1],sample_id,c0,g,c1,c2`; costs that were not computed
/// are empty cells.
pub fn landscape_csv(table: &LandscapeTable) -> Result<Vec<u8>> {
    let params: Vec<String> = (0..table.param_count).map(|k| format!("param{k}")).collect();
    let mut header: Vec<&str> = params.iter().map(String::as_str).collect();
    header.extend(["sample_id", "c0", "g", "c1", "c2"]);
    csv_bytes(
        &header,
        table.rows.iter().map(|r| {
            let mut row: Vec<String> = r.params.iter().map(|&p| format_float(p)).collect();
            row.push(r.sample_id.clone());
            row.extend([cell(r.c0), cell(r.g), cell(r.c1), cell(r.c2)]);
            row
        }),
    )
}

/// `epoch,c0,penalty,lambda,cost`.
pub fn train_log_csv(report: &TrainReport) -> Result<Vec<u8>> {
    csv_bytes(
        &["epoch", "c0", "penalty", "lambda", "cost"],
        report.records.iter().map(|r| {
            vec![
                r.epoch.to_string(),
                format_float(r.c0),
                format_float(r.penalty),
                format_float(r.lambda),
                format_float(r.cost),
            ]
        }),
    )
}

/// `x0,x1,true_label,pred_label,raw_output`.
pub fn predictions_csv(preds: &[Prediction]) -> Result<Vec<u8>> {
    csv_bytes(
        &["x0", "x1", "true_label", "pred_label", "raw_output"],
        preds.iter().map(|p| {
            vec![
                format_float(p.x0),
                format_float(p.x1),
                p.true_label.to_string(),
                p.pred_label.to_string(),
                format_float(p.raw_output),
            ]
        }),
    )
}

/// A CSV with a header and one row of floats per record.
pub fn float_table_csv(header: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>> {
    csv_bytes(
        header,
        rows.iter().map(|r| r.iter().map(|&x| format_float(x)).collect()),
    )
}

/// Identity of a run. Everything except `output_dir` and the timing is
/// a function of the config, so two runs of one config agree on it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub tool_version: String,
    /// Files written by the run, relative to the output directory, sorted.
    pub files: Vec<String>,
    pub config: Value,
    #[serde(skip)]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub timing: RunTiming,
}

/// Wall-clock facts about a run. Kept out of every file that must be
/// reproducible.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RunTiming {
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub wall_time_s: f64,
}

/// Name of the manifest file.
pub const MANIFEST_FILE: &str = "manifest.json";
/// Name of the file holding the output directory and timing.
pub const RUN_INFO_FILE: &str = "run_info.json";

/// An output directory being filled. Dropping it before
/// [`finish`](Self::finish) deletes the directory.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    files: Vec<String>,
    done: bool,
}

impl OutputDir {
    /// Create `root`. It must not exist yet; missing parents are created.
    pub fn create(root: &Path) -> Result<Self> {
        if root.exists() {
            return Err(SggdError::OutputExists(root.display().to_string()));
        }
        if let Some(parent) = root.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| SggdError::io(parent, e))?;
        }
        fs::create_dir(root).map_err(|e| match e.kind() {
            std::io::ErrorKind::AlreadyExists => SggdError::OutputExists(root.display().to_string()),
            _ => SggdError::io(root, e),
        })?;
        Ok(Self {
            root: root.to_path_buf(),
            files: Vec::new(),
            done: false,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Write `bytes` to `rel` (slash-separated, inside the directory).
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        if rel.is_empty() || rel.starts_with('/') || rel.split('/').any(|c| c == ".." || c.is_empty()) {
            return Err(SggdError::InvalidArgument(format!("bad output file name {rel:?}")));
        }
        if self.files.iter().any(|f| f == rel) {
            return Err(SggdError::InvalidArgument(format!("output file {rel} written twice")));
        }
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| SggdError::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| SggdError::io(&path, e))?;
        self.files.push(rel.to_string());
        Ok(())
    }

    /// Write the manifest and run info and keep the directory.
    pub fn finish(mut self, mut manifest: RunManifest) -> Result<RunManifest> {
        manifest.output_dir = self.root.clone();
        let mut files = self.files.clone();
        files.extend([MANIFEST_FILE.to_string(), RUN_INFO_FILE.to_string()]);
        files.sort();
        manifest.files = files;
        let info = serde_json::json!({
            "output_dir": self.root.display().to_string(),
            "started_unix_s": manifest.timing.started_unix_s,
            "finished_unix_s": manifest.timing.finished_unix_s,
            "wall_time_s": manifest.timing.wall_time_s,
        });
        self.write(RUN_INFO_FILE, canonical_json(&info).as_bytes())?;
        self.write(MANIFEST_FILE, to_canonical_json(&manifest)?.as_bytes())?;
        self.done = true;
        Ok(manifest)
    }
}

impl Drop for OutputDir {
    fn drop(&mut self) {
        if !self.done {
            let _ = fs::remove_dir_all(&self.root);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::LandscapeRow;
    use proptest::prelude::*;

    #[test]
    fn floats_use_seventeen_digits() {
        assert_eq!(format_float(0.25), "2.5000000000000000e-1");
        assert_eq!(format_float(-3.0), "-3.0000000000000000e0");
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    proptest! {
        #[test]
        fn float_text_round_trips(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let back: f64 = format_float(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn canonical_json_is_a_fixed_point() {
        let v = serde_json::json!({"b": [1.5, 2, {"z": 0.1, "a": null}], "a": "x\"y", "c": 1e-300});
        let text = canonical_json(&v);
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(canonical_json(&back), text);
        assert!(text.find("\"a\"").unwrap() < text.find("\"b\"").unwrap());
    }

    #[test]
    fn config_hash_ignores_key_order() {
        let a: Value = serde_json::from_str(r#"{"x":1,"y":{"p":0.5,"q":2}}"#).unwrap();
        let b: Value = serde_json::from_str(r#"{"y":{"q":2,"p":0.5},"x":1}"#).unwrap();
        assert_eq!(config_hash(&a).unwrap(), config_hash(&b).unwrap());
        assert_eq!(config_hash(&a).unwrap().len(), 64);
    }

    #[test]
    fn landscape_csv_leaves_missing_cells_empty() {
        let t = LandscapeTable {
            param_count: 1,
            rows: vec![LandscapeRow {
                params: vec![0.5],
                sample_id: "p=0.25".into(),
                c0: Some(1.0),
                g: None,
                c1: None,
                c2: Some(0.0),
            }],
            rescaled: false,
        };
        let text = String::from_utf8(landscape_csv(&t).unwrap()).unwrap();
        assert_eq!(
            text,
            "param0,sample_id,c0,g,c1,c2\n5.0000000000000000e-1,p=0.25,1.0000000000000000e0,,,0.0000000000000000e0\n"
        );
    }

    #[test]
    fn output_dir_is_never_reused_and_cleans_up() {
        let tmp = tempfile::tempdir().unwrap();
        let root = tmp.path().join("run");
        {
            let mut d = OutputDir::create(&root).unwrap();
            d.write("a/b.csv", b"x\n").unwrap();
            assert!(root.join("a/b.csv").exists());
        }
        assert!(!root.exists(), "unfinished directory should be removed");
        let d = OutputDir::create(&root).unwrap();
        assert!(matches!(OutputDir::create(&root), Err(SggdError::OutputExists(_))));
        let m = d
            .finish(RunManifest {
                experiment: "werner".into(),
                config_hash: String::new(),
                seeds: vec![0],
                tool_version: "0".into(),
                files: Vec::new(),
                config: Value::Null,
                output_dir: PathBuf::new(),
                timing: RunTiming::default(),
            })
            .unwrap();
        assert_eq!(m.files, vec![MANIFEST_FILE.to_string(), RUN_INFO_FILE.to_string()]);
        assert!(root.join(MANIFEST_FILE).exists());
    }
}
