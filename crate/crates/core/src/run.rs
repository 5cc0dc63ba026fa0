//! Running a resolved config: the experiment itself, the files it
//! produces and the summary document.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::config::{ExperimentConfig, ExperimentId};
use crate::cost::{predictions, CostKind, CostSpec};
use crate::error::Result;
use crate::experiments::{
    calibrate_catdog, catdog_observable, catdog_samples, catdog_subsets, periodic_minima, run_catdog, run_classify2d,
    run_classify3c, run_werner_2param, run_werner_landscape, symmetrization_overhead, theta_grid, train_catdog,
    ClassifierRun, Classify3cRun, Column, LandscapeTable, Prediction, CATDOG_INPUTS,
};
use crate::io::{float_table_csv, landscape_csv, predictions_csv, train_log_csv, OutputDir, RunManifest, RunTiming};
use crate::symmetry::SymmetryGroup;
use crate::train::{TrainReport, TrainSettings};

/// Merge tolerance for minimum regions in two-parameter summaries.
pub const MINIMA_TOLERANCE: f64 = 1e-2;

/// Files (relative path, contents) and the summary of one run.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub files: Vec<(String, Vec<u8>)>,
    pub summary: Value,
    pub seeds: Vec<u64>,
}

fn config_value(config: &ExperimentConfig) -> Value {
    serde_json::to_value(config).expect("configs serialize")
}

fn base_summary(config: &ExperimentConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("experiment".into(), json!(config.experiment.name()));
    m.insert("seed".into(), json!(config.seed()));
    m.insert("config".into(), config_value(config));
    m
}

/// Run the experiment a config describes.
pub fn execute(config: &ExperimentConfig) -> Result<RunOutput> {
    match config.experiment {
        ExperimentId::Werner | ExperimentId::Werner2 => execute_landscape(config),
        ExperimentId::Catdog => execute_catdog(config),
        ExperimentId::Classify2d => execute_classify2d(config),
        ExperimentId::Classify3c => execute_classify3c(config),
        ExperimentId::Overhead => execute_overhead(config),
    }
}

/// Only the landscape scan of a landscape experiment.
pub fn execute_landscape(config: &ExperimentConfig) -> Result<RunOutput> {
    let table = landscape_table(config)?;
    let mut summary = base_summary(config);
    summary.insert("landscape".into(), landscape_summary(config, &table));
    let table = if config.rescale() { table.rescale() } else { table };
    Ok(RunOutput {
        files: vec![("landscape.csv".into(), landscape_csv(&table)?)],
        summary: Value::Object(summary),
        seeds: vec![config.seed()],
    })
}

fn landscape_table(config: &ExperimentConfig) -> Result<LandscapeTable> {
    let lambda = config.lambda();
    let grid = config.grid_points();
    match config.experiment {
        ExperimentId::Werner => {
            let mut kinds = vec![CostKind::C0];
            if config.cost_kind() != CostKind::C0 {
                kinds.push(config.cost_kind());
            }
            run_werner_landscape(&config.p_values(), &kinds, lambda, grid)
        }
        ExperimentId::Werner2 => run_werner_2param(
            config.variant.unwrap_or(crate::experiments::Werner2Variant::DoubleCnot),
            &config.p_values(),
            lambda,
            grid,
        ),
        ExperimentId::Catdog => Ok(run_catdog(lambda, grid)?.0),
        other => Err(crate::SggdError::schema(
            "experiment",
            format!("`{}` has no landscape", other.name()),
        )),
    }
}

fn column_name(c: Column) -> &'static str {
    match c {
        Column::C0 => "c0",
        Column::G => "g",
        Column::C1 => "c1",
        Column::C2 => "c2",
    }
}

/// Per sample and column: the grid minimum and where it is. Two-parameter
/// scans also list the minimum regions of every column.
fn landscape_summary(config: &ExperimentConfig, table: &LandscapeTable) -> Value {
    let n = config.grid_points();
    let axis = theta_grid(n);
    let mut samples = serde_json::Map::new();
    for id in table.sample_ids() {
        let rows: Vec<_> = table.sample_rows(id).collect();
        let mut cols = serde_json::Map::new();
        for col in Column::ALL {
            let values: Vec<f64> = rows.iter().filter_map(|r| col_value(col, r)).collect();
            if values.len() != rows.len() || values.is_empty() {
                continue;
            }
            let (k, min) = values
                .iter()
                .copied()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("non-empty");
            let mut entry = serde_json::Map::new();
            entry.insert("min".into(), json!(min));
            entry.insert("argmin".into(), json!(rows[k].params));
            if table.param_count == 2 {
                let regions: Vec<Value> = periodic_minima(&values, n, MINIMA_TOLERANCE)
                    .iter()
                    .map(|m| json!({"params": [axis[m.i], axis[m.j]], "value": m.value, "size": m.size}))
                    .collect();
                entry.insert("minimum_regions".into(), Value::Array(regions));
            }
            cols.insert(column_name(col).into(), Value::Object(entry));
        }
        samples.insert(id.to_string(), Value::Object(cols));
    }
    Value::Object(samples)
}

fn col_value(col: Column, r: &crate::experiments::LandscapeRow) -> Option<f64> {
    match col {
        Column::C0 => r.c0,
        Column::G => r.g,
        Column::C1 => r.c1,
        Column::C2 => r.c2,
    }
}

fn train_summary(report: &TrainReport) -> Value {
    let last = report.records.last();
    json!({
        "cost": report.cost.name(),
        "epochs": report.records.len(),
        "initial_params": report.initial_params,
        "final_params": report.final_params,
        "train_accuracy": report.train_accuracy,
        "test_accuracy": report.test_accuracy,
        "last_logged_c0": last.map(|r| r.c0),
        "last_logged_penalty": last.map(|r| r.penalty),
        "last_logged_cost": last.map(|r| r.cost),
        "lambda_probe_ratio": report.lambda_probe_ratio,
    })
}

fn execute_catdog(config: &ExperimentConfig) -> Result<RunOutput> {
    let mut out = execute_landscape(config)?;
    let cal = calibrate_catdog()?;
    let (circuit, obs) = (crate::circuits::catdog_ansatz(), catdog_observable());
    let settings = TrainSettings::new(config.epochs(), config.optimizer(), config.seed());
    let mut kinds = vec![CostKind::C0];
    if config.cost_kind() != CostKind::C0 {
        kinds.push(config.cost_kind());
    }
    let mut rows = Vec::new();
    for (subset_id, subset) in catdog_subsets() {
        for &kind in &kinds {
            let spec = if kind == CostKind::C0 {
                CostSpec::new(kind, SymmetryGroup::swap2())
            } else {
                config.cost_spec(SymmetryGroup::swap2())
            };
            let report = train_catdog(&subset, &spec, &settings)?;
            let model = crate::experiments::model_observable(&circuit, &report.final_params, &obs, &spec)?;
            let all = catdog_samples(&cal, &[0, 1, 2, 3]);
            let raw = predictions(&model, &all);
            let preds: Vec<Prediction> = (0..4)
                .map(|k| Prediction {
                    x0: (k >> 1) as f64,
                    x1: (k & 1) as f64,
                    true_label: all[k].target as i32,
                    pred_label: if raw[k] >= 0.0 { 1 } else { -1 },
                    raw_output: raw[k],
                })
                .collect();
            let dir = format!("train/{subset_id}/{}", kind.name());
            out.files
                .push((format!("{dir}/train_log.csv"), train_log_csv(&report)?));
            out.files
                .push((format!("{dir}/predictions.csv"), predictions_csv(&preds)?));
            let mut s = train_summary(&report);
            s["subset"] = json!(subset_id);
            s["inputs"] = json!(subset.iter().map(|&k| CATDOG_INPUTS[k]).collect::<Vec<_>>());
            rows.push(s);
        }
    }
    let summary = out.summary.as_object_mut().expect("summary is an object");
    summary.insert(
        "calibration".into(),
        json!({
            "odd_parity_target": cal.odd_parity_target,
            "cost_at_origin": cal.cost_at_origin,
            "rejected_cost": cal.rejected_cost,
        }),
    );
    summary.insert("training".into(), Value::Array(rows));
    Ok(out)
}

fn classifier_files(prefix: &str, run: &ClassifierRun, train_preds: &[Prediction]) -> Result<Vec<(String, Vec<u8>)>> {
    Ok(vec![
        (format!("{prefix}/train_log.csv"), train_log_csv(&run.report)?),
        (format!("{prefix}/predictions.csv"), predictions_csv(&run.predictions)?),
        (format!("{prefix}/train_predictions.csv"), predictions_csv(train_preds)?),
    ])
}

fn execute_classify2d(config: &ExperimentConfig) -> Result<RunOutput> {
    let settings = config.classify2d_settings();
    let outcome = run_classify2d(&settings, config.seed())?;
    let mut files = vec![(
        "data.csv".to_string(),
        float_table_csv(
            &["x0", "x1", "label"],
            &outcome
                .data
                .iter()
                .map(|p| vec![p.x0, p.x1, p.label as f64])
                .collect::<Vec<_>>(),
        )?,
    )];
    let mut runs = serde_json::Map::new();
    for run in [&outcome.c0, &outcome.guided] {
        let name = run.report.cost.name();
        files.extend(classifier_files(name, run, &run.train_predictions)?);
        runs.insert(name.into(), train_summary(&run.report));
    }
    let mut summary = base_summary(config);
    summary.insert("runs".into(), Value::Object(runs));
    summary.insert(
        "accuracy_gain".into(),
        json!(
            outcome.guided.report.test_accuracy.unwrap_or(f64::NAN)
                - outcome.c0.report.test_accuracy.unwrap_or(f64::NAN)
        ),
    );
    Ok(RunOutput {
        files,
        summary: Value::Object(summary),
        seeds: vec![config.seed()],
    })
}

fn branch_files(prefix: &str, run: &Classify3cRun) -> Result<Vec<(String, Vec<u8>)>> {
    let outputs: Vec<Vec<f64>> = run
        .predictions
        .iter()
        .zip(&run.outer_outputs)
        .map(|(p, &o)| vec![p.x0, p.x1, p.raw_output, o])
        .collect();
    Ok(vec![
        (format!("{prefix}/inner/train_log.csv"), train_log_csv(&run.inner)?),
        (format!("{prefix}/outer/train_log.csv"), train_log_csv(&run.outer)?),
        (format!("{prefix}/predictions.csv"), predictions_csv(&run.predictions)?),
        (
            format!("{prefix}/branch_outputs.csv"),
            float_table_csv(&["x0", "x1", "inner_output", "outer_output"], &outputs)?,
        ),
    ])
}

fn execute_classify3c(config: &ExperimentConfig) -> Result<RunOutput> {
    let settings = config.classify3c_settings();
    let outcome = run_classify3c(&settings, config.seed())?;
    let mut files = vec![(
        "data.csv".to_string(),
        float_table_csv(
            &["x0", "x1", "label"],
            &outcome
                .data
                .iter()
                .map(|p| vec![p.x0, p.x1, p.label as f64])
                .collect::<Vec<_>>(),
        )?,
    )];
    let mut runs = serde_json::Map::new();
    for run in [&outcome.c0, &outcome.guided] {
        let name = run.inner.cost.name();
        files.extend(branch_files(name, run)?);
        runs.insert(
            name.into(),
            json!({
                "test_accuracy": run.accuracy,
                "inner": train_summary(&run.inner),
                "outer": train_summary(&run.outer),
            }),
        );
    }
    let mut summary = base_summary(config);
    summary.insert("runs".into(), Value::Object(runs));
    summary.insert(
        "accuracy_gain".into(),
        json!(outcome.guided.accuracy - outcome.c0.accuracy),
    );
    Ok(RunOutput {
        files,
        summary: Value::Object(summary),
        seeds: vec![config.seed()],
    })
}

fn execute_overhead(config: &ExperimentConfig) -> Result<RunOutput> {
    let report = symmetrization_overhead(config.n.unwrap_or(4))?;
    let mut summary = base_summary(config);
    summary.insert(
        "overhead".into(),
        serde_json::to_value(report).expect("report serializes"),
    );
    Ok(RunOutput {
        files: Vec::new(),
        summary: Value::Object(summary),
        seeds: vec![config.seed()],
    })
}

fn unix_seconds(t: SystemTime) -> f64 {
    t.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Run `config` and write everything into the fresh directory `dir`.
pub fn run_to_dir(config: &ExperimentConfig, dir: &Path) -> Result<RunManifest> {
    write_run(config, dir, execute)
}

/// Create `dir`, run `produce` and write its files, the summary and the
/// manifest. The directory is removed again if any step fails.
pub fn write_run(
    config: &ExperimentConfig,
    dir: &Path,
    produce: impl FnOnce(&ExperimentConfig) -> Result<RunOutput>,
) -> Result<RunManifest> {
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut out_dir = OutputDir::create(dir)?;
    let output = produce(config)?;
    for (rel, bytes) in &output.files {
        out_dir.write(rel, bytes)?;
    }
    out_dir.write("summary.json", crate::io::canonical_json(&output.summary).as_bytes())?;
    let manifest = RunManifest {
        experiment: config.experiment.name().into(),
        config_hash: crate::io::config_hash(config)?,
        seeds: output.seeds,
        tool_version: env!("CARGO_PKG_VERSION").into(),
        files: Vec::new(),
        config: config_value(config),
        output_dir: dir.to_path_buf(),
        timing: RunTiming {
            started_unix_s: unix_seconds(started),
            finished_unix_s: unix_seconds(SystemTime::now()),
            wall_time_s: clock.elapsed().as_secs_f64(),
        },
    };
    out_dir.finish(manifest)
}
