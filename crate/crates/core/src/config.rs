//! Experiment configuration.
//!
//! A config is a JSON object. Only `experiment` is required; every other
//! field has a per-experiment default, and fields that an experiment does
//! not read are rejected rather than ignored. [`ExperimentConfig::resolve`]
//! fills the defaults in, and the resolved document is what gets echoed
//! into the run manifest and hashed.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::error::Category;

use crate::cost::{CostKind, CostSpec, LambdaSchedule, PostProcessing};
use crate::error::{Result, SggdError};
use crate::experiments::{
    default_werner2_p_values, default_werner_p_values, Classify2dSettings, Classify3cSettings, Werner2Variant,
    HEATMAP_GRID, LANDSCAPE_GRID,
};
use crate::states::RotationEncoding;
use crate::symmetry::SymmetryGroup;
use crate::train::Optimizer;

/// Largest register the classifiers may request. Dense operators on more
/// qubits stop being a desk-scale computation.
pub const MAX_CLASSIFIER_QUBITS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Werner,
    Werner2,
    Catdog,
    Classify2d,
    Classify3c,
    Overhead,
}

impl ExperimentId {
    pub fn name(self) -> &'static str {
        match self {
            Self::Werner => "werner",
            Self::Werner2 => "werner2",
            Self::Catdog => "catdog",
            Self::Classify2d => "classify2d",
            Self::Classify3c => "classify3c",
            Self::Overhead => "overhead",
        }
    }

    /// Experiments whose main output is a landscape scan.
    pub fn is_landscape(self) -> bool {
        matches!(self, Self::Werner | Self::Werner2 | Self::Catdog)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Constant,
    Ramp,
    Auto,
}

/// Only the right half `x0 ≥ 0.5` is implemented.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BiasRegion {
    RightHalf,
}

/// `lambda` is the constant weight, the end point of a ramp, or the
/// fraction used by the automatic rule.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<CostKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<ScheduleKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ramp_epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub post_processing: Option<PostProcessing>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_class: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bias_region: Option<BiasRegion>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    /// Rotation-encoding frequencies (2-class task).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    /// Bits per coordinate (3-class task).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rescale: Option<bool>,
}

/// A parsed config. After [`resolve`](Self::resolve) every field the
/// experiment reads is `Some` and every other field is `None`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Werner2Variant>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<CostConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<Optimizer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<DatasetConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
}

fn reject<T>(field: &Option<T>, key: &str, exp: ExperimentId) -> Result<()> {
    match field {
        Some(_) => Err(SggdError::schema(
            key,
            format!("not used by experiment `{}`", exp.name()),
        )),
        None => Ok(()),
    }
}

fn positive(value: usize, key: &str) -> Result<usize> {
    if value == 0 {
        return Err(SggdError::schema(key, "must be positive"));
    }
    Ok(value)
}

fn finite_non_negative(value: f64, key: &str) -> Result<f64> {
    if !(value >= 0.0 && value.is_finite()) {
        return Err(SggdError::schema(
            key,
            format!("must be a finite non-negative number, got {value}"),
        ));
    }
    Ok(value)
}

impl ExperimentConfig {
    /// The default config of an experiment, already resolved.
    pub fn defaults(experiment: ExperimentId) -> Self {
        Self::bare(experiment).resolve().expect("built-in defaults are valid")
    }

    /// A config naming only the experiment.
    pub fn bare(experiment: ExperimentId) -> Self {
        Self {
            experiment,
            variant: None,
            seed: None,
            cost: None,
            optimizer: None,
            epochs: None,
            dataset: None,
            model: None,
            grid: None,
            p_values: None,
            n: None,
        }
    }

    /// Parse and resolve a config document.
    pub fn from_json(text: &str) -> Result<Self> {
        Self::parse(text)?.resolve()
    }

    /// Parse a config document without filling defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let raw: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            match inner.classify() {
                Category::Data => SggdError::schema(
                    if path == "." { "<root>".to_string() } else { path },
                    strip_position(&inner.to_string()),
                ),
                _ => SggdError::ConfigParse {
                    line: inner.line(),
                    column: inner.column(),
                    message: strip_position(&inner.to_string()),
                },
            }
        })?;
        Ok(raw)
    }

    /// Read and parse a config file without filling defaults.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| SggdError::io(path, e))?;
        Self::parse(&text)
    }

    /// Fill defaults, reject fields the experiment does not use, and
    /// validate values.
    pub fn resolve(mut self) -> Result<Self> {
        use ExperimentId::*;
        let exp = self.experiment;
        self.seed.get_or_insert(0);

        let trains = matches!(exp, Catdog | Classify2d | Classify3c);
        if !trains {
            reject(&self.optimizer, "optimizer", exp)?;
            reject(&self.epochs, "epochs", exp)?;
        }
        if !matches!(exp, Classify2d | Classify3c) {
            reject(&self.dataset, "dataset", exp)?;
            reject(&self.model, "model", exp)?;
        }
        if exp != Werner2 {
            reject(&self.variant, "variant", exp)?;
        }
        if !matches!(exp, Werner | Werner2) {
            reject(&self.p_values, "p_values", exp)?;
        }
        if exp != Overhead {
            reject(&self.n, "n", exp)?;
        }
        if exp == Overhead {
            reject(&self.cost, "cost", exp)?;
            reject(&self.grid, "grid", exp)?;
            let n = *self.n.get_or_insert(4);
            if n < 2 {
                return Err(SggdError::schema("n", format!("needs n ≥ 2, got {n}")));
            }
            return Ok(self);
        }

        if exp == Werner2 {
            self.variant.get_or_insert(Werner2Variant::DoubleCnot);
        }
        if trains {
            let (lr, epochs) = match exp {
                Catdog => (0.05, 400),
                Classify2d => (0.01, 500),
                _ => (0.05, 300),
            };
            let opt = *self.optimizer.get_or_insert(Optimizer::Adam { lr });
            if !(opt.lr() > 0.0 && opt.lr().is_finite()) {
                return Err(SggdError::schema(
                    "optimizer.lr",
                    format!("must be positive, got {}", opt.lr()),
                ));
            }
            positive(*self.epochs.get_or_insert(epochs), "epochs")?;
        }

        let cost = self.cost.get_or_insert_with(CostConfig::default);
        let default_kind = match exp {
            Classify2d | Classify3c => CostKind::C2,
            _ => CostKind::C1,
        };
        let kind = *cost.kind.get_or_insert(default_kind);
        if matches!(exp, Classify2d | Classify3c) && kind == CostKind::C0 {
            return Err(SggdError::schema(
                "cost.kind",
                "the classifiers compare c0 against c1 or c2; pick one of those",
            ));
        }
        finite_non_negative(*cost.lambda.get_or_insert(1.0), "cost.lambda")?;
        let schedule = *cost.schedule.get_or_insert(ScheduleKind::Constant);
        if !trains && schedule != ScheduleKind::Constant {
            return Err(SggdError::schema("cost.schedule", "landscape scans use a constant λ"));
        }
        if schedule == ScheduleKind::Ramp {
            finite_non_negative(*cost.ramp_start.get_or_insert(0.0), "cost.ramp_start")?;
            let default_len = self.epochs.unwrap_or(1);
            positive(*cost.ramp_epochs.get_or_insert(default_len), "cost.ramp_epochs")?;
        } else {
            reject(&cost.ramp_start, "cost.ramp_start", exp)
                .and(reject(&cost.ramp_epochs, "cost.ramp_epochs", exp))
                .map_err(|_| SggdError::schema("cost.schedule", "ramp_start and ramp_epochs need the ramp schedule"))?;
        }
        if cost.post_processing.is_some() && exp != Catdog {
            return Err(SggdError::schema(
                "cost.post_processing",
                format!("not used by experiment `{}`", exp.name()),
            ));
        }
        if let Some(pp) = &cost.post_processing {
            if pp.coeffs.is_empty() || pp.coeffs.iter().any(|c| !c.is_finite()) {
                return Err(SggdError::schema(
                    "cost.post_processing.coeffs",
                    "needs finite coefficients",
                ));
            }
        }
        self.cost_spec_schedule()
            .validate()
            .map_err(|e| SggdError::schema("cost", e.to_string()))?;

        let grid = self.grid.get_or_insert_with(GridConfig::default);
        let points = *grid
            .points
            .get_or_insert(if exp == Werner { LANDSCAPE_GRID } else { HEATMAP_GRID });
        if points < 3 {
            return Err(SggdError::schema(
                "grid.points",
                format!("needs at least 3 points, got {points}"),
            ));
        }
        if exp.is_landscape() {
            grid.rescale.get_or_insert(false);
        } else if grid.rescale.is_some() {
            return Err(SggdError::schema(
                "grid.rescale",
                format!("not used by experiment `{}`", exp.name()),
            ));
        }

        if matches!(exp, Werner | Werner2) {
            let ps = self.p_values.get_or_insert_with(|| {
                if exp == Werner {
                    default_werner_p_values()
                } else {
                    default_werner2_p_values()
                }
            });
            if let Some(p) = ps.iter().find(|p| !(-1.0..=1.0).contains(*p)) {
                return Err(SggdError::schema(
                    "p_values",
                    format!("Werner parameter {p} outside [-1, 1]"),
                ));
            }
        }

        if matches!(exp, Classify2d | Classify3c) {
            let ds = self.dataset.get_or_insert_with(DatasetConfig::default);
            let per_class = if exp == Classify2d { 140 } else { 100 };
            positive(
                *ds.samples_per_class.get_or_insert(per_class),
                "dataset.samples_per_class",
            )?;
            ds.bias_region.get_or_insert(BiasRegion::RightHalf);
            let model = self.model.get_or_insert_with(ModelConfig::default);
            if exp == Classify2d {
                if model.bits.is_some() {
                    return Err(SggdError::schema("model.bits", "not used by experiment `classify2d`"));
                }
                positive(*model.layers.get_or_insert(5), "model.layers")?;
                let freqs = model.frequencies.get_or_insert_with(|| vec![1.0, 2.0]);
                if freqs.is_empty() || freqs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
                    return Err(SggdError::schema(
                        "model.frequencies",
                        "needs positive finite frequencies",
                    ));
                }
                if 2 * freqs.len() > MAX_CLASSIFIER_QUBITS {
                    return Err(SggdError::schema(
                        "model.frequencies",
                        format!("at most {} frequencies", MAX_CLASSIFIER_QUBITS / 2),
                    ));
                }
            } else {
                if model.frequencies.is_some() {
                    return Err(SggdError::schema(
                        "model.frequencies",
                        "not used by experiment `classify3c`",
                    ));
                }
                positive(
                    *model.layers.get_or_insert(Classify3cSettings::default().layers),
                    "model.layers",
                )?;
                let bits = *model.bits.get_or_insert(4);
                if bits == 0 || 2 * bits as usize > MAX_CLASSIFIER_QUBITS {
                    return Err(SggdError::schema(
                        "model.bits",
                        format!("must be in 1..={}, got {bits}", MAX_CLASSIFIER_QUBITS / 2),
                    ));
                }
            }
        }
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn cost_config(&self) -> &CostConfig {
        self.cost.as_ref().expect("resolved config has a cost section")
    }

    pub fn cost_kind(&self) -> CostKind {
        self.cost_config().kind.unwrap_or(CostKind::C1)
    }

    pub fn lambda(&self) -> f64 {
        self.cost_config().lambda.unwrap_or(1.0)
    }

    pub fn epochs(&self) -> usize {
        self.epochs.unwrap_or(1)
    }

    pub fn optimizer(&self) -> Optimizer {
        self.optimizer.unwrap_or(Optimizer::Adam { lr: 0.01 })
    }

    pub fn grid_points(&self) -> usize {
        self.grid.as_ref().and_then(|g| g.points).unwrap_or(HEATMAP_GRID)
    }

    pub fn rescale(&self) -> bool {
        self.grid.as_ref().and_then(|g| g.rescale).unwrap_or(false)
    }

    pub fn p_values(&self) -> Vec<f64> {
        self.p_values.clone().unwrap_or_default()
    }

    fn cost_spec_schedule(&self) -> LambdaSchedule {
        let c = self.cost_config();
        let lambda = c.lambda.unwrap_or(1.0);
        match c.schedule.unwrap_or(ScheduleKind::Constant) {
            ScheduleKind::Constant => LambdaSchedule::Constant { lambda },
            ScheduleKind::Ramp => LambdaSchedule::LinearRamp {
                start: c.ramp_start.unwrap_or(0.0),
                end: lambda,
                epochs: c.ramp_epochs.unwrap_or(1),
            },
            ScheduleKind::Auto => LambdaSchedule::AutoFraction { fraction: lambda },
        }
    }

    /// The training cost described by the `cost` section.
    pub fn cost_spec(&self, group: SymmetryGroup) -> CostSpec {
        let mut spec = CostSpec::new(self.cost_kind(), group).with_schedule(self.cost_spec_schedule());
        spec.post_processing = self.cost_config().post_processing.clone();
        spec
    }

    pub fn classify2d_settings(&self) -> Classify2dSettings {
        let d = Classify2dSettings::default();
        let model = self.model.clone().unwrap_or_default();
        Classify2dSettings {
            samples_per_class: self
                .dataset
                .as_ref()
                .and_then(|ds| ds.samples_per_class)
                .unwrap_or(d.samples_per_class),
            encoding: RotationEncoding {
                frequencies: model.frequencies.unwrap_or(d.encoding.frequencies),
            },
            layers: model.layers.unwrap_or(d.layers),
            epochs: self.epochs.unwrap_or(d.epochs),
            optimizer: self.optimizer.unwrap_or(d.optimizer),
            test_grid: self.grid_points(),
            guided: self.cost_kind(),
            schedule: self.cost_spec_schedule(),
        }
    }

    pub fn classify3c_settings(&self) -> Classify3cSettings {
        let d = Classify3cSettings::default();
        let model = self.model.clone().unwrap_or_default();
        Classify3cSettings {
            samples_per_class: self
                .dataset
                .as_ref()
                .and_then(|ds| ds.samples_per_class)
                .unwrap_or(d.samples_per_class),
            bits: model.bits.unwrap_or(d.bits),
            layers: model.layers.unwrap_or(d.layers),
            epochs: self.epochs.unwrap_or(d.epochs),
            optimizer: self.optimizer.unwrap_or(d.optimizer),
            test_grid: self.grid_points(),
            guided: self.cost_kind(),
            schedule: self.cost_spec_schedule(),
        }
    }
}

/// serde_json appends " at line L column C" to its messages; the position
/// is reported separately.
fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(i) => message[..i].to_string(),
        None => message.to_string(),
    }
}
