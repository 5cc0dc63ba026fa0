//! Training costs, penalty weights and finite-difference gradients.
//!
//! * `c0`: mean squared error of `tr(ρ(x) Õ(θ))` against the targets.
//! * `c1`: `c0 + λ g(θ)` where `g` is the symmetry-constraint penalty.
//! * `c2`: mean squared error with the twirled observable `T(Õ(θ))`.

use serde::{Deserialize, Serialize};

use crate::circuits::{BoundCircuit, ParamCircuit};
use crate::error::{Result, SggdError};
use crate::linalg::{check_dims, Operator, C64};
use crate::states::{expectation_unchecked, QuantumState};
use crate::symmetry::{modified_penalty, sce_residual, PenaltyVariant, SymmetryGroup};

/// Default central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Guard added to the penalty-gradient norm in the automatic λ rule.
pub const AUTO_LAMBDA_GUARD: f64 = 1e-12;

/// An input state with its real-valued target.
#[derive(Clone, Debug)]
pub struct Sample {
    pub state: QuantumState,
    pub target: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    C0,
    C1,
    C2,
}

impl CostKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::C0 => "c0",
            Self::C1 => "c1",
            Self::C2 => "c2",
        }
    }
}

/// Rule assigning the penalty weight λ to each epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaSchedule {
    Constant {
        lambda: f64,
    },
    /// Linear interpolation from `start` to `end` over `epochs`, then flat.
    LinearRamp {
        start: f64,
        end: f64,
        epochs: usize,
    },
    /// `fraction · max |∇c0| / (|∇g| + 1e-12)` over a probe set of
    /// parameter vectors drawn at the start of training.
    AutoFraction {
        fraction: f64,
    },
}

impl Default for LambdaSchedule {
    fn default() -> Self {
        Self::Constant { lambda: 1.0 }
    }
}

impl LambdaSchedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(SggdError::InvalidArgument(m));
        match *self {
            Self::Constant { lambda } if !(lambda >= 0.0 && lambda.is_finite()) => {
                bad(format!("λ must be a finite non-negative number, got {lambda}"))
            }
            Self::LinearRamp { start, end, epochs } => {
                if !(start >= 0.0 && end >= 0.0 && start.is_finite() && end.is_finite()) {
                    bad(format!("ramp endpoints must be non-negative, got {start} and {end}"))
                } else if epochs == 0 {
                    bad("ramp length must be positive".into())
                } else {
                    Ok(())
                }
            }
            Self::AutoFraction { fraction } if !(fraction > 0.0 && fraction <= 1.0) => {
                bad(format!("λ fraction must lie in (0, 1], got {fraction}"))
            }
            _ => Ok(()),
        }
    }

    pub fn needs_probe(&self) -> bool {
        matches!(self, Self::AutoFraction { .. })
    }
}

/// λ at `epoch`. `probe_ratio` is the probe-set maximum of
/// `|∇c0| / (|∇g| + 1e-12)` and is only read by the automatic rule.
pub fn lambda_at(schedule: &LambdaSchedule, epoch: usize, probe_ratio: f64) -> f64 {
    match *schedule {
        LambdaSchedule::Constant { lambda } => lambda,
        LambdaSchedule::LinearRamp { start, end, epochs } => {
            start + (end - start) * (epoch as f64 / epochs as f64).min(1.0)
        }
        LambdaSchedule::AutoFraction { fraction } => fraction * probe_ratio,
    }
}

/// Taylor coefficients of an output post-processing polynomial and the
/// projection used by its penalty.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PostProcessing {
    pub coeffs: Vec<f64>,
    #[serde(default)]
    pub variant: PenaltyVariant,
}

#[derive(Clone, Debug)]
pub struct CostSpec {
    pub kind: CostKind,
    pub schedule: LambdaSchedule,
    pub group: SymmetryGroup,
    pub post_processing: Option<PostProcessing>,
}

impl CostSpec {
    pub fn new(kind: CostKind, group: SymmetryGroup) -> Self {
        Self {
            kind,
            schedule: LambdaSchedule::default(),
            group,
            post_processing: None,
        }
    }

    pub fn with_schedule(mut self, schedule: LambdaSchedule) -> Self {
        self.schedule = schedule;
        self
    }
}

/// `tr(ρ_i A)` for every sample.
pub fn predictions(obs: &Operator, dataset: &[Sample]) -> Vec<f64> {
    dataset.iter().map(|s| expectation_unchecked(&s.state, obs)).collect()
}

/// Mean squared error of `preds` against the dataset targets, summed in
/// dataset order.
pub fn mse(preds: &[f64], dataset: &[Sample]) -> f64 {
    let total: f64 = preds.iter().zip(dataset).map(|(p, s)| (p - s.target).powi(2)).sum();
    total / dataset.len() as f64
}

fn check_dataset(circuit: &ParamCircuit, dataset: &[Sample], obs: &Operator) -> Result<()> {
    if dataset.is_empty() {
        return Err(SggdError::EmptyDataset);
    }
    check_dims(circuit.dim(), obs.dim())?;
    for s in dataset {
        check_dims(circuit.dim(), s.state.dim())?;
    }
    obs.require_hermitian()
}

/// The costs at one parameter point, sharing the circuit evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub c0: f64,
    pub penalty: f64,
    /// `c2` when the cost spec asks for it, otherwise `c0 + λ g`.
    pub cost: f64,
}

/// Evaluate `c0`, the penalty and the cost named by `spec` at one point.
pub fn evaluate(
    circuit: &ParamCircuit,
    params: &[f64],
    dataset: &[Sample],
    obs: &Operator,
    spec: &CostSpec,
    lambda: f64,
) -> Result<Evaluation> {
    check_dataset(circuit, dataset, obs)?;
    let bound = circuit.bind(params)?;
    let obs_tilde = bound.conjugate(obs)?;
    let c0 = mse(&predictions(&obs_tilde, dataset), dataset);
    let (penalty, twirled) = match &spec.post_processing {
        Some(pp) => (
            modified_penalty(&spec.group, &bound.unitary(), obs, &pp.coeffs, pp.variant)?,
            None,
        ),
        None => {
            let twirled = spec.group.twirl(&obs_tilde)?;
            let penalty = crate::linalg::hs_norm_sq(&twirled.sub(&obs_tilde));
            (penalty, Some(twirled))
        }
    };
    let cost = match spec.kind {
        CostKind::C0 => c0,
        CostKind::C1 => c0 + lambda * penalty,
        CostKind::C2 => {
            let twirled = match twirled {
                Some(t) => t,
                None => spec.group.twirl(&obs_tilde)?,
            };
            mse(&predictions(&twirled, dataset), dataset)
        }
    };
    Ok(Evaluation { c0, penalty, cost })
}

/// Mean squared error of the raw model.
pub fn cost_c0(circuit: &ParamCircuit, params: &[f64], dataset: &[Sample], obs: &Operator) -> Result<f64> {
    check_dataset(circuit, dataset, obs)?;
    let bound = circuit.bind(params)?;
    if let Some(preds) = pure_predictions(&bound, obs, dataset, None) {
        return Ok(mse(&preds, dataset));
    }
    Ok(mse(&predictions(&bound.conjugate(obs)?, dataset), dataset))
}

/// Predictions from evolved state vectors, averaged over `S† |ψ>` for each
/// group element when `elements` is given. `None` unless every sample is
/// pure.
fn pure_predictions(
    bound: &BoundCircuit,
    obs: &Operator,
    dataset: &[Sample],
    elements: Option<&[Operator]>,
) -> Option<Vec<f64>> {
    if dataset.iter().any(|s| !matches!(s.state, QuantumState::Pure(_))) {
        return None;
    }
    let obs = nonzero_entries(obs);
    // Entries of S† from those of S.
    let inverses: Option<Vec<Vec<_>>> = elements.map(|es| {
        es.iter()
            .map(|e| {
                nonzero_entries(e)
                    .into_iter()
                    .map(|(i, j, z)| (j, i, z.conj()))
                    .collect()
            })
            .collect()
    });
    let evolve = |mut v: Vec<C64>| {
        bound.apply(&mut v);
        let acc: C64 = obs.iter().map(|&(i, j, o)| v[i].conj() * o * v[j]).sum();
        acc.re
    };
    let preds = dataset
        .iter()
        .map(|s| {
            let QuantumState::Pure(psi) = &s.state else {
                unreachable!("checked above");
            };
            match &inverses {
                None => evolve(psi.clone()),
                Some(inv) => {
                    let total: f64 = inv
                        .iter()
                        .map(|entries| {
                            let mut moved = vec![C64::new(0.0, 0.0); psi.len()];
                            for &(i, j, z) in entries {
                                moved[i] += z * psi[j];
                            }
                            evolve(moved)
                        })
                        .sum();
                    total / inv.len() as f64
                }
            }
        })
        .collect();
    Some(preds)
}

fn nonzero_entries(op: &Operator) -> Vec<(usize, usize, C64)> {
    let n = op.dim();
    let mut out = Vec::new();
    for (k, &z) in op.as_slice().iter().enumerate() {
        if z != C64::new(0.0, 0.0) {
            out.push((k / n, k % n, z));
        }
    }
    out
}

/// Symmetry-constraint penalty `g(θ)`, or its post-processed variant.
pub fn penalty(
    circuit: &ParamCircuit,
    params: &[f64],
    obs: &Operator,
    group: &SymmetryGroup,
    post_processing: Option<&PostProcessing>,
) -> Result<f64> {
    check_dims(circuit.dim(), obs.dim())?;
    let bound = circuit.bind(params)?;
    match post_processing {
        Some(pp) => modified_penalty(group, &bound.unitary(), obs, &pp.coeffs, pp.variant),
        None => {
            obs.require_hermitian()?;
            Ok(sce_residual(group, &bound.conjugate(obs)?)?.penalty)
        }
    }
}

fn require_kind(spec: &CostSpec, kind: CostKind) -> Result<()> {
    if spec.kind != kind {
        return Err(SggdError::InvalidArgument(format!(
            "cost spec is {}, expected {}",
            spec.kind.name(),
            kind.name()
        )));
    }
    Ok(())
}

/// `c0 + λ g` with the penalty computed once for the whole dataset.
pub fn cost_c1(
    circuit: &ParamCircuit,
    params: &[f64],
    dataset: &[Sample],
    obs: &Operator,
    spec: &CostSpec,
    lambda: f64,
) -> Result<f64> {
    require_kind(spec, CostKind::C1)?;
    Ok(evaluate(circuit, params, dataset, obs, spec, lambda)?.cost)
}

/// Mean squared error of the model with observable `T(Õ(θ))`.
pub fn cost_c2(
    circuit: &ParamCircuit,
    params: &[f64],
    dataset: &[Sample],
    obs: &Operator,
    spec: &CostSpec,
) -> Result<f64> {
    require_kind(spec, CostKind::C2)?;
    check_dataset(circuit, dataset, obs)?;
    let bound = circuit.bind(params)?;
    if let Some(elements) = spec.group.elements() {
        if let Some(preds) = pure_predictions(&bound, obs, dataset, Some(elements)) {
            return Ok(mse(&preds, dataset));
        }
    }
    let twirled = spec.group.twirl(&bound.conjugate(obs)?)?;
    Ok(mse(&predictions(&twirled, dataset), dataset))
}

/// Central differences `(c(θ + h e_i) − c(θ − h e_i)) / 2h`.
pub fn gradient_fd(mut cost: impl FnMut(&[f64]) -> Result<f64>, params: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(SggdError::InvalidArgument(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let mut p = params.to_vec();
    let mut grad = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        p[i] = params[i] + step;
        let up = cost(&p)?;
        p[i] = params[i] - step;
        let down = cost(&p)?;
        p[i] = params[i];
        grad.push((up - down) / (2.0 * step));
    }
    Ok(grad)
}
