//! The reproduction experiments.
//!
//! Werner landscapes in one and two parameters, the cat–dog bitstring
//! task, the biased 2D classifiers (two and three classes) and the
//! gate-count analyzer for symmetrized ZZ gates. Every experiment is a
//! pure function of its settings and seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::{
    catdog_ansatz, cnot_ix_ansatz, conjugated_observable, double_cnot_ansatz, embed, hardware_efficient_ansatz,
    werner_ansatz, ParamCircuit,
};
use crate::cost::{mse, predictions, CostKind, CostSpec, LambdaSchedule, Sample};
use crate::error::{Result, SggdError};
use crate::linalg::{gates, hs_norm_sq, kron, Operator};
use crate::states::{
    basis_state, binary_encode, label_2class, label_3class, werner_state, DataPoint2D, QuantumState, RotationEncoding,
};
use crate::symmetry::SymmetryGroup;
use crate::train::{train, Optimizer, TrainReport, TrainSettings};

/// Grid size of the one-parameter Werner scan.
pub const LANDSCAPE_GRID: usize = 256;
/// Grid size per axis of the two-parameter scans and the test grid.
pub const HEATMAP_GRID: usize = 64;
/// Rejection-sampling budget for the biased datasets.
pub const REJECTION_CAP: usize = 1_000_000;

/// `n` evenly spaced points on `[0, π]`, both ends included.
pub fn theta_grid(n: usize) -> Vec<f64> {
    linspace(0.0, PI, n)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// One grid point of one sample in a landscape scan. Costs that were not
/// requested stay `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeRow {
    pub params: Vec<f64>,
    pub sample_id: String,
    pub c0: Option<f64>,
    pub g: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Column {
    C0,
    G,
    C1,
    C2,
}

impl Column {
    pub const ALL: [Column; 4] = [Column::C0, Column::G, Column::C1, Column::C2];

    fn get(self, row: &LandscapeRow) -> Option<f64> {
        match self {
            Column::C0 => row.c0,
            Column::G => row.g,
            Column::C1 => row.c1,
            Column::C2 => row.c2,
        }
    }

    fn slot(self, row: &mut LandscapeRow) -> &mut Option<f64> {
        match self {
            Column::C0 => &mut row.c0,
            Column::G => &mut row.g,
            Column::C1 => &mut row.c1,
            Column::C2 => &mut row.c2,
        }
    }
}

/// Cost curves over a parameter grid, sample by sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandscapeTable {
    pub param_count: usize,
    pub rows: Vec<LandscapeRow>,
    pub rescaled: bool,
}

impl LandscapeTable {
    /// Sample ids in first-appearance order.
    pub fn sample_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for r in &self.rows {
            if ids.last() != Some(&r.sample_id.as_str()) && !ids.contains(&r.sample_id.as_str()) {
                ids.push(&r.sample_id);
            }
        }
        ids
    }

    pub fn sample_rows<'a>(&'a self, id: &'a str) -> impl Iterator<Item = &'a LandscapeRow> + 'a {
        self.rows.iter().filter(move |r| r.sample_id == id)
    }

    /// Values of one column for one sample, in grid order. Missing cells
    /// are skipped.
    pub fn curve(&self, id: &str, column: Column) -> Vec<f64> {
        self.sample_rows(id).filter_map(|r| column.get(r)).collect()
    }

    /// Each curve divided by its own maximum. Curves whose maximum is not
    /// positive are left as they are.
    pub fn rescale(&self) -> Self {
        let mut out = self.clone();
        for id in self.sample_ids() {
            for col in Column::ALL {
                let max = self.curve(id, col).into_iter().fold(f64::NEG_INFINITY, f64::max);
                if !(max > 0.0) {
                    continue;
                }
                for row in out.rows.iter_mut().filter(|r| r.sample_id == id) {
                    if let Some(v) = col.slot(row) {
                        *v /= max;
                    }
                }
            }
        }
        out.rescaled = true;
        out
    }
}

/// Which costs a scan computes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Columns {
    pub c0: bool,
    pub g: bool,
    pub c1: bool,
    pub c2: bool,
}

impl Columns {
    pub fn from_kinds(kinds: &[CostKind]) -> Self {
        let mut c = Columns::default();
        for k in kinds {
            match k {
                CostKind::C0 => c.c0 = true,
                CostKind::C1 => {
                    c.c1 = true;
                    c.g = true;
                }
                CostKind::C2 => c.c2 = true,
            }
        }
        c
    }

    fn penalty_only() -> Self {
        Columns {
            g: true,
            ..Columns::default()
        }
    }
}

/// A scan sample: a dataset (possibly empty for penalty-only curves).
#[derive(Clone, Debug)]
pub struct ScanSample {
    pub id: String,
    pub data: Vec<Sample>,
    pub columns: Columns,
}

/// Evaluate every sample at every grid point. `grid` lists parameter
/// vectors; rows come out sample-major, grid order inside each sample.
pub fn scan(
    circuit: &ParamCircuit,
    obs: &Operator,
    group: &SymmetryGroup,
    lambda: f64,
    grid: &[Vec<f64>],
    samples: &[ScanSample],
) -> Result<LandscapeTable> {
    let mut per_sample: Vec<Vec<LandscapeRow>> = vec![Vec::with_capacity(grid.len()); samples.len()];
    for params in grid {
        let obs_tilde = conjugated_observable(circuit, params, obs)?;
        let twirled = group.twirl(&obs_tilde)?;
        let g = hs_norm_sq(&twirled.sub(&obs_tilde));
        for (sample, rows) in samples.iter().zip(per_sample.iter_mut()) {
            let cols = sample.columns;
            let needs_data = cols.c0 || cols.c1 || cols.c2;
            if needs_data && sample.data.is_empty() {
                return Err(SggdError::EmptyDataset);
            }
            let c0 = (cols.c0 || cols.c1).then(|| mse(&predictions(&obs_tilde, &sample.data), &sample.data));
            rows.push(LandscapeRow {
                params: params.clone(),
                sample_id: sample.id.clone(),
                c0: c0.filter(|_| cols.c0),
                g: cols.g.then_some(g),
                c1: c0.filter(|_| cols.c1).map(|c| c + lambda * g),
                c2: cols.c2.then(|| mse(&predictions(&twirled, &sample.data), &sample.data)),
            });
        }
    }
    Ok(LandscapeTable {
        param_count: grid.first().map_or(0, Vec::len),
        rows: per_sample.into_iter().flatten().collect(),
        rescaled: false,
    })
}

fn grid_1d(n: usize) -> Vec<Vec<f64>> {
    theta_grid(n).into_iter().map(|t| vec![t]).collect()
}

fn grid_2d(n: usize) -> Vec<Vec<f64>> {
    let axis = theta_grid(n);
    axis.iter()
        .flat_map(|&a| axis.iter().map(move |&b| vec![a, b]))
        .collect()
}

/// Label attached to a Werner sample: `+1` for `p ≥ 0`, `-1` otherwise.
pub fn werner_target(p: f64) -> f64 {
    if p >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn werner_sample_id(p: f64) -> String {
    format!("p={p}")
}

fn werner_samples(p_values: &[f64], columns: Columns) -> Result<Vec<ScanSample>> {
    p_values
        .iter()
        .map(|&p| {
            Ok(ScanSample {
                id: werner_sample_id(p),
                data: vec![Sample {
                    state: werner_state(p)?,
                    target: werner_target(p),
                }],
                columns,
            })
        })
        .collect()
}

/// Werner cost curves over `θ ∈ [0, π]`, one sample per `p`.
pub fn run_werner_landscape(p_values: &[f64], kinds: &[CostKind], lambda: f64, grid: usize) -> Result<LandscapeTable> {
    let samples = werner_samples(p_values, Columns::from_kinds(kinds))?;
    scan(
        &werner_ansatz(),
        &gates::swap(),
        &SymmetryGroup::local_unitary_pair(2)?,
        lambda,
        &grid_1d(grid),
        &samples,
    )
}

/// The two-parameter Werner ansätze.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Werner2Variant {
    DoubleCnot,
    CnotIx,
}

impl Werner2Variant {
    pub fn circuit(self) -> ParamCircuit {
        match self {
            Werner2Variant::DoubleCnot => double_cnot_ansatz(),
            Werner2Variant::CnotIx => cnot_ix_ansatz(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Werner2Variant::DoubleCnot => "double_cnot",
            Werner2Variant::CnotIx => "cnot_ix",
        }
    }
}

/// Sample id of the penalty-only landscape in two-parameter scans.
pub const PENALTY_SAMPLE: &str = "penalty";

/// Heatmaps of `c0`, `g` and `c1` over `[0, π]²` for each `p`, followed by
/// the penalty-only landscape.
pub fn run_werner_2param(
    variant: Werner2Variant,
    p_values: &[f64],
    lambda: f64,
    grid: usize,
) -> Result<LandscapeTable> {
    let columns = Columns::from_kinds(&[CostKind::C0, CostKind::C1]);
    let mut samples = werner_samples(p_values, columns)?;
    samples.push(ScanSample {
        id: PENALTY_SAMPLE.into(),
        data: Vec::new(),
        columns: Columns::penalty_only(),
    });
    scan(
        &variant.circuit(),
        &gates::swap(),
        &SymmetryGroup::local_unitary_pair(2)?,
        lambda,
        &grid_2d(grid),
        &samples,
    )
}

/// A local-minimum region of a π-periodic square grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridMinimum {
    /// Grid indices of the lowest point of the region.
    pub i: usize,
    pub j: usize,
    pub value: f64,
    /// Number of grid points in the region.
    pub size: usize,
}

/// Minimum regions of `values` laid out row-major on an `n × n` grid over
/// `[0, π]²` whose last index repeats the first (period π in both axes).
///
/// Starting from each grid point that is no higher than its eight
/// neighbours, the region is the connected set of points at most `tol`
/// above it. Regions that reach a point more than `tol` below their start
/// drain into a deeper basin and are dropped. Each region is reported once,
/// lowest first; flat valleys sampled between grid points count as one.
pub fn periodic_minima(values: &[f64], n: usize, tol: f64) -> Vec<GridMinimum> {
    assert_eq!(values.len(), n * n, "grid values do not match an {n}×{n} grid");
    assert!(n >= 3, "periodic grid needs at least three points per axis");
    let m = n - 1;
    let at = |k: usize| values[(k / m) * n + k % m];
    let neighbours = |k: usize| {
        let (i, j) = ((k / m) as isize, (k % m) as isize);
        let wrap = |x: isize| x.rem_euclid(m as isize) as usize;
        let mut out = Vec::with_capacity(8);
        for di in -1isize..=1 {
            for dj in -1isize..=1 {
                if di != 0 || dj != 0 {
                    out.push(wrap(i + di) * m + wrap(j + dj));
                }
            }
        }
        out
    };
    let mut starts: Vec<usize> = (0..m * m)
        .filter(|&k| neighbours(k).iter().all(|&q| at(k) <= at(q)))
        .collect();
    starts.sort_by(|&a, &b| at(a).total_cmp(&at(b)).then(a.cmp(&b)));
    let mut covered = vec![false; m * m];
    let mut regions = Vec::new();
    for start in starts {
        if covered[start] {
            continue;
        }
        let level = at(start) + tol;
        let mut in_region = vec![false; m * m];
        in_region[start] = true;
        let mut stack = vec![start];
        let mut members = Vec::new();
        while let Some(k) = stack.pop() {
            members.push(k);
            for q in neighbours(k) {
                if !in_region[q] && at(q) <= level {
                    in_region[q] = true;
                    stack.push(q);
                }
            }
        }
        let drains = members.iter().any(|&k| at(k) < at(start) - tol);
        for &k in &members {
            covered[k] = true;
        }
        if !drains {
            regions.push(GridMinimum {
                i: start / m,
                j: start % m,
                value: at(start),
                size: members.len(),
            });
        }
    }
    regions
}

/// Grid index closest to `x` on `theta_grid(n)`.
pub fn nearest_index(x: f64, n: usize) -> usize {
    let step = PI / (n - 1) as f64;
    ((x / step).round() as usize).min(n - 1)
}

/// The cat–dog inputs `|00>, |01>, |10>, |11>` in that order.
pub const CATDOG_INPUTS: [&str; 4] = ["00", "01", "10", "11"];

/// Input subsets of the cat–dog scans: the full set, the half set
/// `{00, 01}` and each single input.
pub fn catdog_subsets() -> Vec<(String, Vec<usize>)> {
    let mut out = vec![("full".to_string(), vec![0, 1, 2, 3]), ("half".to_string(), vec![0, 1])];
    out.extend((0..4).map(|k| (format!("single_{}", CATDOG_INPUTS[k]), vec![k])));
    out
}

/// `I ⊗ Z`.
pub fn catdog_observable() -> Operator {
    kron(&Operator::identity(2), &gates::pauli_z())
}

/// How the XOR labels map onto targets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CatdogCalibration {
    /// Target for inputs of odd parity; even parity gets the opposite.
    pub odd_parity_target: f64,
    /// Full-data `c0` at `(θ, φ) = (0, 0)` under the chosen convention.
    pub cost_at_origin: f64,
    /// The same cost under the rejected convention.
    pub rejected_cost: f64,
}

fn catdog_data(odd_target: f64, subset: &[usize]) -> Vec<Sample> {
    subset
        .iter()
        .map(|&k| {
            let parity = (k >> 1) ^ (k & 1);
            Sample {
                state: basis_state(4, k),
                target: if parity == 1 { odd_target } else { -odd_target },
            }
        })
        .collect()
}

/// Try both sign conventions for the XOR labels and keep the one under
/// which the full-data cost vanishes at the origin of the ansatz.
pub fn calibrate_catdog() -> Result<CatdogCalibration> {
    let obs_tilde = conjugated_observable(&catdog_ansatz(), &[0.0, 0.0], &catdog_observable())?;
    let cost = |s: f64| {
        let data = catdog_data(s, &[0, 1, 2, 3]);
        mse(&predictions(&obs_tilde, &data), &data)
    };
    let (plus, minus) = (cost(1.0), cost(-1.0));
    Ok(if plus <= minus {
        CatdogCalibration {
            odd_parity_target: 1.0,
            cost_at_origin: plus,
            rejected_cost: minus,
        }
    } else {
        CatdogCalibration {
            odd_parity_target: -1.0,
            cost_at_origin: minus,
            rejected_cost: plus,
        }
    })
}

/// Labelled cat–dog samples for a subset of input indices.
pub fn catdog_samples(calibration: &CatdogCalibration, subset: &[usize]) -> Vec<Sample> {
    catdog_data(calibration.odd_parity_target, subset)
}

/// `c0`, `g` and `c1` landscapes for every input subset.
pub fn run_catdog(lambda: f64, grid: usize) -> Result<(LandscapeTable, CatdogCalibration)> {
    let cal = calibrate_catdog()?;
    let columns = Columns::from_kinds(&[CostKind::C0, CostKind::C1]);
    let samples: Vec<ScanSample> = catdog_subsets()
        .into_iter()
        .map(|(id, subset)| ScanSample {
            id,
            data: catdog_samples(&cal, &subset),
            columns,
        })
        .collect();
    let table = scan(
        &catdog_ansatz(),
        &catdog_observable(),
        &SymmetryGroup::swap2(),
        lambda,
        &grid_2d(grid),
        &samples,
    )?;
    Ok((table, cal))
}

/// Sign classification accuracy of a model on labelled samples.
pub fn sign_accuracy(model: &Operator, data: &[Sample]) -> f64 {
    let preds = predictions(model, data);
    let hits = preds
        .iter()
        .zip(data)
        .filter(|(p, s)| (**p >= 0.0) == (s.target >= 0.0))
        .count();
    hits as f64 / data.len() as f64
}

/// Train the cat–dog ansatz on a subset and score it on all four inputs.
/// The report's accuracies are those of the trained model on the subset
/// (train) and on the full input set (test).
pub fn train_catdog(subset: &[usize], spec: &CostSpec, settings: &TrainSettings) -> Result<TrainReport> {
    let cal = calibrate_catdog()?;
    let circuit = catdog_ansatz();
    let obs = catdog_observable();
    let data = catdog_samples(&cal, subset);
    let mut report = train(&circuit, &obs, &data, spec, settings)?;
    let model = model_observable(&circuit, &report.final_params, &obs, spec)?;
    report.train_accuracy = Some(sign_accuracy(&model, &data));
    report.test_accuracy = Some(sign_accuracy(&model, &catdog_samples(&cal, &[0, 1, 2, 3])));
    Ok(report)
}

/// The observable whose expectation is the trained model's output: `Õ`
/// for `c0`/`c1`, `T(Õ)` for `c2`.
pub fn model_observable(circuit: &ParamCircuit, params: &[f64], obs: &Operator, spec: &CostSpec) -> Result<Operator> {
    let obs_tilde = conjugated_observable(circuit, params, obs)?;
    match spec.kind {
        CostKind::C2 => spec.group.twirl(&obs_tilde),
        _ => Ok(obs_tilde),
    }
}

/// Seeds of the random streams derived from one run seed. The data
/// stream never touches the training generator.
const DATA_STREAM: u64 = 1;

fn data_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DATA_STREAM);
    rng
}

/// Draw points uniformly from the right half `x0 ∈ [0.5, 1]`,
/// `x1 ∈ [0, 1]` until each class in `classes` has `per_class` members.
/// Points are returned in acceptance order.
pub fn sample_right_half(
    rng: &mut impl Rng,
    per_class: usize,
    classes: &[i32],
    label: impl Fn(&DataPoint2D) -> i32,
) -> Result<Vec<DataPoint2D>> {
    if per_class == 0 || classes.is_empty() {
        return Err(SggdError::InvalidArgument("sample counts must be positive".into()));
    }
    let mut counts = vec![0usize; classes.len()];
    let mut out = Vec::with_capacity(per_class * classes.len());
    for _ in 0..REJECTION_CAP {
        let x0 = 0.5 + 0.5 * rng.gen::<f64>();
        let x1 = rng.gen::<f64>();
        let mut p = DataPoint2D::new(x0, x1, 0);
        p.label = label(&p);
        if let Some(k) = classes.iter().position(|&c| c == p.label) {
            if counts[k] < per_class {
                counts[k] += 1;
                out.push(p);
                if counts.iter().all(|&c| c == per_class) {
                    return Ok(out);
                }
            }
        }
    }
    Err(SggdError::SamplingCap(REJECTION_CAP))
}

/// The `n × n` test grid over `[0, 1]²`, `x0` major.
pub fn test_grid(n: usize, label: impl Fn(&DataPoint2D) -> i32) -> Vec<DataPoint2D> {
    let axis = linspace(0.0, 1.0, n);
    axis.iter()
        .flat_map(|&a| axis.iter().map(move |&b| (a, b)))
        .map(|(a, b)| {
            let mut p = DataPoint2D::new(a, b, 0);
            p.label = label(&p);
            p
        })
        .collect()
}

/// One test-grid prediction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub x0: f64,
    pub x1: f64,
    pub true_label: i32,
    pub pred_label: i32,
    pub raw_output: f64,
}

/// A trained model with its test-grid predictions.
#[derive(Clone, Debug)]
pub struct ClassifierRun {
    pub report: TrainReport,
    pub predictions: Vec<Prediction>,
    /// The trained model on its own training points.
    pub train_predictions: Vec<Prediction>,
}

pub fn accuracy(preds: &[Prediction]) -> f64 {
    let hits = preds.iter().filter(|p| p.pred_label == p.true_label).count();
    hits as f64 / preds.len() as f64
}

/// Settings of the 2-class task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Classify2dSettings {
    pub samples_per_class: usize,
    pub encoding: RotationEncoding,
    pub layers: usize,
    pub epochs: usize,
    pub optimizer: Optimizer,
    pub test_grid: usize,
    /// Cost of the symmetry-guided run; the baseline always uses `c0`.
    pub guided: CostKind,
    /// Penalty weight of the guided run.
    pub schedule: LambdaSchedule,
}

impl Default for Classify2dSettings {
    fn default() -> Self {
        Self {
            samples_per_class: 140,
            encoding: RotationEncoding {
                frequencies: vec![1.0, 2.0],
            },
            layers: 5,
            epochs: 500,
            optimizer: Optimizer::Adam { lr: 0.01 },
            test_grid: HEATMAP_GRID,
            guided: CostKind::C2,
            schedule: LambdaSchedule::Constant { lambda: 1.0 },
        }
    }
}

/// The outcome of the 2-class comparison.
#[derive(Clone, Debug)]
pub struct Classify2dOutcome {
    pub data: Vec<DataPoint2D>,
    pub c0: ClassifierRun,
    pub guided: ClassifierRun,
}

/// The baseline trains on plain `c0`; the guided run uses `schedule`.
fn guided_spec(kind: CostKind, group: &SymmetryGroup, schedule: &LambdaSchedule) -> CostSpec {
    let spec = CostSpec::new(kind, group.clone());
    if kind == CostKind::C0 {
        spec
    } else {
        spec.with_schedule(schedule.clone())
    }
}

fn check_settings(samples_per_class: usize, epochs: usize, lr: f64, grid: usize) -> Result<()> {
    if samples_per_class == 0 {
        return Err(SggdError::InvalidArgument("samples_per_class must be positive".into()));
    }
    if epochs == 0 {
        return Err(SggdError::InvalidArgument("epochs must be positive".into()));
    }
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(SggdError::InvalidArgument(format!(
            "learning rate must be positive, got {lr}"
        )));
    }
    if grid == 0 {
        return Err(SggdError::InvalidArgument("test grid must be non-empty".into()));
    }
    Ok(())
}

/// Train the rotation-encoded classifier under `c0` and under the guided
/// cost (`c2` by default) on the same biased data from the same initial
/// point.
pub fn run_classify2d(settings: &Classify2dSettings, seed: u64) -> Result<Classify2dOutcome> {
    check_settings(
        settings.samples_per_class,
        settings.epochs,
        settings.optimizer.lr(),
        settings.test_grid,
    )?;
    let enc = &settings.encoding;
    if enc.frequencies.is_empty() {
        return Err(SggdError::InvalidArgument(
            "encoding needs at least one frequency".into(),
        ));
    }
    let width = enc.width();
    let circuit = hardware_efficient_ansatz(width, settings.layers)?;
    let obs = embed(&gates::pauli_z(), &[0], width)?;
    let group = SymmetryGroup::register_swap(enc.register_len())?;

    let points = sample_right_half(&mut data_rng(seed), settings.samples_per_class, &[1, -1], label_2class)?;
    let data: Vec<Sample> = points
        .iter()
        .map(|p| Sample {
            state: enc.encode(p),
            target: p.label as f64,
        })
        .collect();
    let grid = test_grid(settings.test_grid, label_2class);
    let grid_states: Vec<QuantumState> = grid.iter().map(|p| enc.encode(p)).collect();

    let train_settings = TrainSettings::new(settings.epochs, settings.optimizer, seed);
    let run = |kind: CostKind| -> Result<ClassifierRun> {
        let spec = guided_spec(kind, &group, &settings.schedule);
        let mut report = train(&circuit, &obs, &data, &spec, &train_settings)?;
        let model = model_observable(&circuit, &report.final_params, &obs, &spec)?;
        let predict = |p: &DataPoint2D, s: &QuantumState| {
            let raw = crate::states::expectation_unchecked(s, &model);
            Prediction {
                x0: p.x0,
                x1: p.x1,
                true_label: p.label,
                pred_label: if raw >= 0.0 { 1 } else { -1 },
                raw_output: raw,
            }
        };
        let predictions: Vec<Prediction> = grid.iter().zip(&grid_states).map(|(p, s)| predict(p, s)).collect();
        let train_predictions: Vec<Prediction> = points.iter().zip(&data).map(|(p, s)| predict(p, &s.state)).collect();
        report.train_accuracy = Some(accuracy(&train_predictions));
        report.test_accuracy = Some(accuracy(&predictions));
        Ok(ClassifierRun {
            report,
            predictions,
            train_predictions,
        })
    };
    Ok(Classify2dOutcome {
        c0: run(CostKind::C0)?,
        guided: run(settings.guided)?,
        data: points,
    })
}

/// Settings of the 3-class task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Classify3cSettings {
    pub samples_per_class: usize,
    pub bits: u32,
    pub layers: usize,
    pub epochs: usize,
    pub optimizer: Optimizer,
    pub test_grid: usize,
    /// Cost of the symmetry-guided run; the baseline always uses `c0`.
    pub guided: CostKind,
    /// Penalty weight of the guided run.
    pub schedule: LambdaSchedule,
}

impl Default for Classify3cSettings {
    fn default() -> Self {
        Self {
            samples_per_class: 100,
            bits: 4,
            layers: 3,
            epochs: 300,
            optimizer: Optimizer::Adam { lr: 0.05 },
            test_grid: HEATMAP_GRID,
            guided: CostKind::C2,
            schedule: LambdaSchedule::Constant { lambda: 1.0 },
        }
    }
}

/// Combine the two branch decisions into a class. An inner hit wins even
/// when the outer branch disagrees.
pub fn combine_3class(in_inner: bool, in_outer: bool) -> i32 {
    match (in_inner, in_outer) {
        (true, _) => 0,
        (false, true) => 1,
        (false, false) => 2,
    }
}

/// Both branches of one 3-class model.
#[derive(Clone, Debug)]
pub struct Classify3cRun {
    pub inner: TrainReport,
    pub outer: TrainReport,
    /// Test-grid predictions; `raw_output` is the inner branch output.
    pub predictions: Vec<Prediction>,
    /// Outer-branch outputs in test-grid order.
    pub outer_outputs: Vec<f64>,
    pub accuracy: f64,
}

#[derive(Clone, Debug)]
pub struct Classify3cOutcome {
    pub data: Vec<DataPoint2D>,
    pub c0: Classify3cRun,
    pub guided: Classify3cRun,
}

/// Distinct seeds for the two branches of one run, shared between the
/// `c0` and `c2` models.
fn branch_seed(seed: u64, branch: u64) -> u64 {
    seed.wrapping_add((branch + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Train the two binary-encoded branches under `c0` and under the guided
/// cost.
pub fn run_classify3c(settings: &Classify3cSettings, seed: u64) -> Result<Classify3cOutcome> {
    check_settings(
        settings.samples_per_class,
        settings.epochs,
        settings.optimizer.lr(),
        settings.test_grid,
    )?;
    if settings.bits == 0 || 2 * settings.bits as usize > crate::circuits::MAX_QUBITS {
        return Err(SggdError::InvalidArgument(format!(
            "bits per coordinate must be in 1..={}, got {}",
            crate::circuits::MAX_QUBITS / 2,
            settings.bits
        )));
    }
    let bits = settings.bits;
    let width = 2 * bits as usize;
    let circuit = hardware_efficient_ansatz(width, settings.layers)?;
    let obs = embed(&gates::pauli_z(), &[0], width)?;
    let group = SymmetryGroup::register_swap(bits as usize)?;

    let points = sample_right_half(
        &mut data_rng(seed),
        settings.samples_per_class,
        &[0, 1, 2],
        label_3class,
    )?;
    let branch_data = |inside: fn(i32) -> bool| -> Vec<Sample> {
        points
            .iter()
            .map(|p| Sample {
                state: binary_encode(p.x0, p.x1, bits),
                target: if inside(p.label) { 1.0 } else { -1.0 },
            })
            .collect()
    };
    let inner_data = branch_data(|l| l == 0);
    let outer_data = branch_data(|l| l <= 1);
    let grid = test_grid(settings.test_grid, label_3class);

    let run = |kind: CostKind| -> Result<Classify3cRun> {
        let spec = guided_spec(kind, &group, &settings.schedule);
        let branch = |data: &[Sample], k: u64| -> Result<(TrainReport, Operator)> {
            let ts = TrainSettings::new(settings.epochs, settings.optimizer, branch_seed(seed, k));
            let mut report = train(&circuit, &obs, data, &spec, &ts)?;
            let model = model_observable(&circuit, &report.final_params, &obs, &spec)?;
            report.train_accuracy = Some(sign_accuracy(&model, data));
            Ok((report, model))
        };
        let (mut inner, inner_model) = branch(&inner_data, 0)?;
        let (mut outer, outer_model) = branch(&outer_data, 1)?;
        // Basis-state inputs read the model's diagonal.
        let mut predictions = Vec::with_capacity(grid.len());
        let mut outer_outputs = Vec::with_capacity(grid.len());
        for p in &grid {
            let idx = crate::states::binary_index(p.x0, p.x1, bits);
            let a = inner_model.get(idx, idx).re;
            let b = outer_model.get(idx, idx).re;
            predictions.push(Prediction {
                x0: p.x0,
                x1: p.x1,
                true_label: p.label,
                pred_label: combine_3class(a >= 0.0, b >= 0.0),
                raw_output: a,
            });
            outer_outputs.push(b);
        }
        let acc = accuracy(&predictions);
        inner.test_accuracy = Some(acc);
        outer.test_accuracy = Some(acc);
        Ok(Classify3cRun {
            inner,
            outer,
            predictions,
            outer_outputs,
            accuracy: acc,
        })
    };
    Ok(Classify3cOutcome {
        c0: run(CostKind::C0)?,
        guided: run(settings.guided)?,
        data: points,
    })
}

/// Swap and ZZ gates needed for one `Z_i Z_j` on a line of qubits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ZzCost {
    pub swap_gates: u64,
    pub adjacent_zz: u64,
}

impl ZzCost {
    pub fn total(&self) -> u64 {
        self.swap_gates + self.adjacent_zz
    }
}

/// Neighbouring qubits need only the ZZ gate; otherwise the pair is
/// brought together and apart with `2(2|i-j| - 3)` adjacent swaps.
pub fn zz_decomposition_cost(i: usize, j: usize) -> Result<ZzCost> {
    let k = i.abs_diff(j) as u64;
    match k {
        0 => Err(SggdError::InvalidArgument(format!(
            "ZZ gate needs two distinct qubits, got {i} and {j}"
        ))),
        1 => Ok(ZzCost {
            swap_gates: 0,
            adjacent_zz: 1,
        }),
        _ => Ok(ZzCost {
            swap_gates: 2 * (2 * k - 3),
            adjacent_zz: 1,
        }),
    }
}

/// Gate counts for twirling one ZZ gate over all qubit permutations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OverheadReport {
    pub n: u64,
    /// Distinct `Z_i Z_j` terms, `n(n-1)/2`.
    pub twirled_zz_gate_count: u64,
    /// Closed form `(2n³ - 9n² + 7n) / 3`.
    pub adjacent_gate_total: i64,
    /// `(n-1) + 2(n-2) + 6(n-3) + 10(n-4) + ... + (4(n-1)-6)`, summed term
    /// by term.
    pub series_total: i64,
    /// `Σ_{k=1}^{n-1} 2(2k-3)(n-k)`: the swap count formula applied to every
    /// distance, including adjacent pairs.
    pub uniform_series_total: i64,
    pub series_matches_closed_form: bool,
    pub uniform_series_matches_closed_form: bool,
    /// The closed form is not a valid gate count (negative) for this `n`.
    pub closed_form_negative: bool,
}

/// Closed form and explicit sums for the adjacent-gate cost of a twirled
/// ZZ gate on `n` qubits.
pub fn symmetrization_overhead(n: u64) -> Result<OverheadReport> {
    if n < 2 {
        return Err(SggdError::InvalidArgument(format!("overhead needs n ≥ 2, got {n}")));
    }
    if n > 100_000 {
        return Err(SggdError::SizeOverflow(format!("overhead for n = {n}")));
    }
    let ni = n as i64;
    let closed = (2 * ni.pow(3) - 9 * ni.pow(2) + 7 * ni) / 3;
    let series: i64 = (ni - 1) + (2..ni).map(|k| 2 * (2 * k - 3) * (ni - k)).sum::<i64>();
    let uniform: i64 = (1..ni).map(|k| 2 * (2 * k - 3) * (ni - k)).sum();
    Ok(OverheadReport {
        n,
        twirled_zz_gate_count: n * (n - 1) / 2,
        adjacent_gate_total: closed,
        series_total: series,
        uniform_series_total: uniform,
        series_matches_closed_form: series == closed,
        uniform_series_matches_closed_form: uniform == closed,
        closed_form_negative: closed < 0,
    })
}

/// Default `p` values of the one-parameter Werner scan.
pub fn default_werner_p_values() -> Vec<f64> {
    vec![-0.25, 0.25]
}

/// Default `p` values of the two-parameter scans.
pub fn default_werner2_p_values() -> Vec<f64> {
    vec![-0.5, 0.25, 0.75, 1.0]
}

/// A λ schedule helper for experiments that take a single constant.
pub fn constant_lambda(lambda: f64) -> LambdaSchedule {
    LambdaSchedule::Constant { lambda }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::werner_penalty_analytic;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn werner_landscape_shape_and_minima() {
        let t = run_werner_landscape(&[0.25, -0.25], &[CostKind::C0, CostKind::C1], 1.0, LANDSCAPE_GRID).unwrap();
        assert_eq!(t.rows.len(), 2 * LANDSCAPE_GRID);
        assert_eq!(t.sample_ids(), vec!["p=0.25", "p=-0.25"]);
        let argmin = |v: &[f64]| v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let mid = nearest_index(FRAC_PI_2, LANDSCAPE_GRID);
        let c0 = t.curve("p=0.25", Column::C0);
        let k = argmin(&c0);
        assert!(k == 0 || k == LANDSCAPE_GRID - 1, "argmin {k}");
        assert!((c0[0] - 0.25).abs() < 1e-12);
        // π/2 falls halfway between two points of an even grid.
        let c1 = t.curve("p=0.25", Column::C1);
        assert!(argmin(&c1).abs_diff(mid) <= 1);
        assert!(argmin(&t.curve("p=-0.25", Column::C0)).abs_diff(mid) <= 1);
        assert!(t.curve("p=0.25", Column::C2).is_empty());
        for (row, theta) in t.sample_rows("p=0.25").zip(theta_grid(LANDSCAPE_GRID)) {
            assert!((row.g.unwrap() - werner_penalty_analytic(theta)).abs() < 1e-9);
        }
    }

    #[test]
    fn rescaled_curves_peak_at_one() {
        let t = run_werner_landscape(&[0.25], &[CostKind::C0, CostKind::C1, CostKind::C2], 1.0, 32).unwrap();
        let r = t.rescale();
        assert!(r.rescaled);
        for col in Column::ALL {
            let max = r.curve("p=0.25", col).into_iter().fold(f64::MIN, f64::max);
            assert!((max - 1.0).abs() < 1e-12, "{col:?}");
        }
    }

    #[test]
    fn double_cnot_penalty_has_one_zero() {
        let n = HEATMAP_GRID;
        let t = run_werner_2param(Werner2Variant::DoubleCnot, &[0.25], 1.0, n).unwrap();
        let g = t.curve(PENALTY_SAMPLE, Column::G);
        assert_eq!(g.len(), n * n);
        assert!(g.iter().all(|&v| v >= -1e-12));
        let mid = nearest_index(FRAC_PI_2, n);
        let minima = periodic_minima(&g, n, 1e-2);
        assert_eq!(minima.len(), 1, "{minima:?}");
        assert!(minima[0].i.abs_diff(mid) <= 1 && minima[0].j.abs_diff(mid) <= 1);
        let exact = crate::cost::penalty(
            &double_cnot_ansatz(),
            &[FRAC_PI_2, FRAC_PI_2],
            &gates::swap(),
            &SymmetryGroup::local_unitary_pair(2).unwrap(),
            None,
        )
        .unwrap();
        assert!(exact <= 1e-12);
    }

    #[test]
    fn cnot_ix_penalty_has_two_minimum_regions() {
        let n = HEATMAP_GRID;
        let t = run_werner_2param(Werner2Variant::CnotIx, &[], 1.0, n).unwrap();
        let g = t.curve(PENALTY_SAMPLE, Column::G);
        let minima = periodic_minima(&g, n, 1e-2);
        assert_eq!(minima.len(), 2, "{minima:?}");
        let mid = nearest_index(FRAC_PI_2, n);
        assert!(minima[0].i.abs_diff(mid) <= 1 && minima[0].j.abs_diff(mid) <= 1);
        assert!((minima[1].value - 8.0 / 3.0).abs() < 1e-2);
        let valley = crate::cost::penalty(
            &cnot_ix_ansatz(),
            &[FRAC_PI_2, 0.0],
            &gates::swap(),
            &SymmetryGroup::local_unitary_pair(2).unwrap(),
            None,
        )
        .unwrap();
        assert!((valley - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_minima_identifies_wrapped_edges() {
        let n = 9;
        let axis = theta_grid(n);
        let values: Vec<f64> = axis
            .iter()
            .flat_map(|&a| axis.iter().map(move |&b| a.sin().powi(2) + b.sin().powi(2)))
            .collect();
        let minima = periodic_minima(&values, n, 1e-12);
        assert_eq!(minima.len(), 1);
        assert_eq!((minima[0].i, minima[0].j), (0, 0));
    }

    #[test]
    fn catdog_calibration_keeps_xor_labels() {
        let cal = calibrate_catdog().unwrap();
        assert_eq!(cal.odd_parity_target, 1.0);
        assert!(cal.cost_at_origin < 1e-12);
        assert!((cal.rejected_cost - 4.0).abs() < 1e-12);
        let (t, _) = run_catdog(1.0, 16).unwrap();
        assert_eq!(
            t.sample_ids(),
            vec!["full", "half", "single_00", "single_01", "single_10", "single_11"]
        );
        assert!(t.curve("full", Column::C0)[0] < 1e-12);
    }

    #[test]
    fn catdog_penalty_minima() {
        let circuit = catdog_ansatz();
        let g = |a: f64, b: f64| {
            crate::cost::penalty(&circuit, &[a, b], &catdog_observable(), &SymmetryGroup::swap2(), None).unwrap()
        };
        assert!(g(0.0, 0.0) <= 1e-9);
        assert!(g(0.0, FRAC_PI_2) <= 1e-9);
        assert!(g(PI, FRAC_PI_2 + PI) <= 1e-9);
        assert!(g(PI / 4.0, PI / 4.0) > 0.1);
    }

    #[test]
    fn half_data_penalty_training_classifies_everything() {
        let spec = CostSpec::new(CostKind::C1, SymmetryGroup::swap2());
        for seed in 0..5 {
            let settings = TrainSettings::new(400, Optimizer::Adam { lr: 0.05 }, seed);
            let report = train_catdog(&[0, 1], &spec, &settings).unwrap();
            assert_eq!(
                report.test_accuracy,
                Some(1.0),
                "seed {seed}: {:?}",
                report.final_params
            );
        }
    }

    #[test]
    fn rejection_sampler_fills_classes_from_right_half() {
        let pts = sample_right_half(&mut data_rng(3), 140, &[1, -1], label_2class).unwrap();
        assert_eq!(pts.len(), 280);
        assert!(pts.iter().all(|p| p.x0 >= 0.5));
        assert_eq!(pts.iter().filter(|p| p.label == 1).count(), 140);
        let err = sample_right_half(&mut data_rng(3), 1, &[7], label_2class).unwrap_err();
        assert!(matches!(err, SggdError::SamplingCap(REJECTION_CAP)));
    }

    #[test]
    fn test_grid_labels() {
        let g = test_grid(64, label_2class);
        assert_eq!(g.len(), 4096);
        assert_eq!(label_2class(&DataPoint2D::new(0.55, 0.5, 0)), 1);
        let g3 = test_grid(64, label_3class);
        for p in &g3 {
            assert_eq!(p.label, label_3class(&p.swapped()));
        }
    }

    #[test]
    fn combination_rule() {
        assert_eq!(combine_3class(true, true), 0);
        assert_eq!(combine_3class(false, true), 1);
        assert_eq!(combine_3class(false, false), 2);
        assert_eq!(combine_3class(true, false), 0);
    }

    #[test]
    fn overhead_values() {
        let r4 = symmetrization_overhead(4).unwrap();
        assert_eq!(r4.adjacent_gate_total, 4);
        assert_eq!(r4.twirled_zz_gate_count, 6);
        assert_eq!(symmetrization_overhead(5).unwrap().adjacent_gate_total, 20);
        for n in 2..=3 {
            let r = symmetrization_overhead(n).unwrap();
            assert_eq!(r.adjacent_gate_total, -2);
            assert!(r.closed_form_negative);
        }
        for n in 4..=12 {
            let r = symmetrization_overhead(n).unwrap();
            assert!(r.uniform_series_matches_closed_form);
            assert_eq!(r.series_total - r.adjacent_gate_total, 3 * (n as i64 - 1));
        }
        assert!(symmetrization_overhead(1).is_err());
        assert_eq!(zz_decomposition_cost(1, 3).unwrap().swap_gates, 2);
        assert_eq!(zz_decomposition_cost(4, 3).unwrap().total(), 1);
    }
}
