//! Optimizers and the full-batch training loop.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuits::ParamCircuit;
use crate::cost::{evaluate, gradient_fd, lambda_at, penalty, CostKind, CostSpec, Sample, AUTO_LAMBDA_GUARD, FD_STEP};
use crate::error::{Result, SggdError};
use crate::linalg::{Operator, C64};
use crate::states::{pure_expectation, QuantumState};

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPS: f64 = 1e-8;

/// Number of random parameter vectors used by the automatic λ rule.
pub const LAMBDA_PROBES: usize = 64;

/// Adam moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub step: u64,
}

impl AdamState {
    pub fn new(n: usize) -> Self {
        Self {
            m: vec![0.0; n],
            v: vec![0.0; n],
            step: 0,
        }
    }
}

/// One bias-corrected Adam update, in place.
pub fn adam_step(state: &mut AdamState, params: &mut [f64], grads: &[f64], lr: f64) {
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - ADAM_BETA1.powi(t);
    let c2 = 1.0 - ADAM_BETA2.powi(t);
    for i in 0..params.len() {
        let g = grads[i];
        state.m[i] = ADAM_BETA1 * state.m[i] + (1.0 - ADAM_BETA1) * g;
        state.v[i] = ADAM_BETA2 * state.v[i] + (1.0 - ADAM_BETA2) * g * g;
        let m_hat = state.m[i] / c1;
        let v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + ADAM_EPS);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Optimizer {
    Adam {
        lr: f64,
    },
    /// Plain gradient descent.
    Gd {
        lr: f64,
    },
}

impl Optimizer {
    pub fn lr(self) -> f64 {
        match self {
            Self::Adam { lr } | Self::Gd { lr } => lr,
        }
    }
}

/// How training gradients are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradientMethod {
    /// Reverse-mode differentiation when the circuit, cost and data allow
    /// it (rotation gates only, `c0` or `c2` with a finite group, pure
    /// input states); central differences otherwise.
    #[default]
    Auto,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSettings {
    pub epochs: usize,
    pub optimizer: Optimizer,
    pub seed: u64,
    /// Starting point; drawn uniformly from `[-π, π)` when absent.
    pub init: Option<Vec<f64>>,
    pub gradient: GradientMethod,
    pub fd_step: f64,
}

impl TrainSettings {
    pub fn new(epochs: usize, optimizer: Optimizer, seed: u64) -> Self {
        Self {
            epochs,
            optimizer,
            seed,
            init: None,
            gradient: GradientMethod::Auto,
            fd_step: FD_STEP,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub c0: f64,
    pub penalty: f64,
    pub lambda: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainReport {
    pub cost: CostKind,
    pub records: Vec<EpochRecord>,
    pub initial_params: Vec<f64>,
    pub final_params: Vec<f64>,
    pub train_accuracy: Option<f64>,
    pub test_accuracy: Option<f64>,
    pub seed: u64,
    /// Probe-set maximum used by the automatic λ rule.
    pub lambda_probe_ratio: Option<f64>,
    pub wall_time_s: f64,
}

/// Uniform draw from `[-π, π)^n`.
pub fn random_params(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-PI..PI)).collect()
}

/// Inputs for reverse-mode gradients: every sample state moved by every
/// group element, `S† |ψ>`.
struct AdjointPlan {
    states: Vec<Vec<C64>>,
    orbit: usize,
}

fn adjoint_plan(
    circuit: &ParamCircuit,
    spec: &CostSpec,
    dataset: &[Sample],
    method: GradientMethod,
) -> Option<AdjointPlan> {
    if method != GradientMethod::Auto || !circuit.is_rotation_only() || spec.post_processing.is_some() {
        return None;
    }
    let pure: Vec<&Vec<C64>> = dataset
        .iter()
        .map(|s| match &s.state {
            QuantumState::Pure(v) => Some(v),
            QuantumState::Mixed(_) => None,
        })
        .collect::<Option<_>>()?;
    let elements: Vec<Operator> = match spec.kind {
        CostKind::C0 => vec![Operator::identity(circuit.dim())],
        CostKind::C2 => spec.group.elements()?.iter().map(Operator::adjoint).collect(),
        CostKind::C1 => return None,
    };
    let states = pure
        .iter()
        .flat_map(|v| elements.iter().map(move |s| s.apply(v)))
        .collect();
    Some(AdjointPlan {
        states,
        orbit: elements.len(),
    })
}

fn adjoint_gradient(
    plan: &AdjointPlan,
    circuit: &ParamCircuit,
    params: &[f64],
    dataset: &[Sample],
    obs: &Operator,
) -> Result<Vec<f64>> {
    let bound = circuit.bind(params)?;
    let values: Vec<f64> = plan
        .states
        .iter()
        .map(|psi| {
            let mut v = psi.clone();
            bound.apply(&mut v);
            pure_expectation(&v, obs)
        })
        .collect();
    let n = dataset.len() as f64;
    let mut weights = Vec::with_capacity(values.len());
    for (chunk, sample) in values.chunks(plan.orbit).zip(dataset) {
        let pred = chunk.iter().sum::<f64>() / plan.orbit as f64;
        let w = 2.0 * (pred - sample.target) / (n * plan.orbit as f64);
        weights.extend(std::iter::repeat_n(w, plan.orbit));
    }
    circuit.expectation_gradient(params, &plan.states, &weights, obs)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Probe-set maximum of `|∇c0| / (|∇g| + 1e-12)`.
fn probe_ratio(
    rng: &mut impl Rng,
    circuit: &ParamCircuit,
    dataset: &[Sample],
    obs: &Operator,
    spec: &CostSpec,
    step: f64,
) -> Result<f64> {
    let c0_spec = CostSpec {
        kind: CostKind::C0,
        ..spec.clone()
    };
    let mut best: f64 = 0.0;
    for _ in 0..LAMBDA_PROBES {
        let p = random_params(rng, circuit.param_count());
        let g0 = gradient_fd(|q| Ok(evaluate(circuit, q, dataset, obs, &c0_spec, 0.0)?.c0), &p, step)?;
        let gg = gradient_fd(
            |q| penalty(circuit, q, obs, &spec.group, spec.post_processing.as_ref()),
            &p,
            step,
        )?;
        best = best.max(norm(&g0) / (norm(&gg) + AUTO_LAMBDA_GUARD));
    }
    Ok(best)
}

/// Full-batch training. Deterministic for a fixed seed: the initial point
/// and the λ probe set come from one seeded generator and all reductions
/// run in dataset order.
pub fn train(
    circuit: &ParamCircuit,
    obs: &Operator,
    dataset: &[Sample],
    spec: &CostSpec,
    settings: &TrainSettings,
) -> Result<TrainReport> {
    if settings.epochs == 0 {
        return Err(SggdError::InvalidArgument("training needs at least one epoch".into()));
    }
    if dataset.is_empty() {
        return Err(SggdError::EmptyDataset);
    }
    spec.schedule.validate()?;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let initial = match &settings.init {
        Some(p) => {
            if p.len() != circuit.param_count() {
                return Err(SggdError::ParamCount {
                    expected: circuit.param_count(),
                    found: p.len(),
                });
            }
            p.clone()
        }
        None => random_params(&mut rng, circuit.param_count()),
    };
    let ratio = if spec.schedule.needs_probe() && spec.kind == CostKind::C1 {
        Some(probe_ratio(&mut rng, circuit, dataset, obs, spec, settings.fd_step)?)
    } else {
        None
    };
    let plan = adjoint_plan(circuit, spec, dataset, settings.gradient);

    let mut params = initial.clone();
    let mut adam = AdamState::new(params.len());
    let mut records = Vec::with_capacity(settings.epochs);
    for epoch in 0..settings.epochs {
        let lambda = lambda_at(&spec.schedule, epoch, ratio.unwrap_or(0.0));
        let ev = evaluate(circuit, &params, dataset, obs, spec, lambda)?;
        let grad = if ev.cost.is_finite() {
            match &plan {
                Some(plan) => adjoint_gradient(plan, circuit, &params, dataset, obs)?,
                None => gradient_fd(
                    |q| Ok(evaluate(circuit, q, dataset, obs, spec, lambda)?.cost),
                    &params,
                    settings.fd_step,
                )?,
            }
        } else {
            Vec::new()
        };
        let bad = [ev.c0, ev.penalty, ev.cost]
            .into_iter()
            .chain(grad.iter().copied())
            .find(|x| !x.is_finite());
        if let Some(value) = bad.or((grad.len() != params.len()).then_some(f64::NAN)) {
            return Err(SggdError::Diverged {
                epoch,
                value,
                partial: Box::new(TrainReport {
                    cost: spec.kind,
                    records,
                    initial_params: initial,
                    final_params: params,
                    train_accuracy: None,
                    test_accuracy: None,
                    seed: settings.seed,
                    lambda_probe_ratio: ratio,
                    wall_time_s: started.elapsed().as_secs_f64(),
                }),
            });
        }
        records.push(EpochRecord {
            epoch,
            c0: ev.c0,
            penalty: ev.penalty,
            lambda,
            cost: ev.cost,
        });
        match settings.optimizer {
            Optimizer::Adam { lr } => adam_step(&mut adam, &mut params, &grad, lr),
            Optimizer::Gd { lr } => params.iter_mut().zip(&grad).for_each(|(p, g)| *p -= lr * g),
        }
    }
    Ok(TrainReport {
        cost: spec.kind,
        records,
        initial_params: initial,
        final_params: params,
        train_accuracy: None,
        test_accuracy: None,
        seed: settings.seed,
        lambda_probe_ratio: ratio,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{hardware_efficient_ansatz, werner_ansatz};
    use crate::linalg::{gates, kron};
    use crate::states::{werner_state, DataPoint2D, RotationEncoding};
    use crate::symmetry::SymmetryGroup;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn adam_zero_gradient_keeps_params() {
        let mut st = AdamState::new(2);
        let mut p = vec![0.3, -1.0];
        adam_step(&mut st, &mut p, &[0.0, 0.0], 0.01);
        assert_eq!(p, vec![0.3, -1.0]);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn adam_first_step_closed_form() {
        let mut st = AdamState::new(1);
        let mut p = vec![0.0];
        adam_step(&mut st, &mut p, &[2.0], 0.01);
        let expected = -0.01 * 2.0 / (2.0 + ADAM_EPS);
        assert!((p[0] - expected).abs() < 1e-15);
        let before = p[0];
        adam_step(&mut st, &mut p, &[2.0], 0.01);
        assert!(p[0] < before);
    }

    fn werner_data(p: f64, target: f64) -> Vec<Sample> {
        vec![Sample {
            state: werner_state(p).unwrap(),
            target,
        }]
    }

    fn werner_run(p: f64, kind: CostKind, epochs: usize) -> f64 {
        let spec = CostSpec::new(kind, SymmetryGroup::local_unitary_pair(2).unwrap());
        let mut settings = TrainSettings::new(epochs, Optimizer::Gd { lr: 0.1 }, 0);
        settings.init = Some(vec![1.0]);
        let report = train(
            &werner_ansatz(),
            &gates::swap(),
            &werner_data(p, 1.0_f64.copysign(p)),
            &spec,
            &settings,
        )
        .unwrap();
        assert_eq!(report.records.len(), epochs);
        report.final_params[0]
    }

    #[test]
    fn werner_entangled_sample_finds_identity() {
        let theta = werner_run(-0.25, CostKind::C0, 500);
        assert!((theta - FRAC_PI_2).abs() <= 0.05, "θ = {theta}");
    }

    #[test]
    fn werner_biased_sample_approaches_cnot() {
        // Near θ = 0 the cost is 0.25 + (π²/16)·θ⁴ to leading order, so plain
        // gradient descent follows θ⁻² ≈ θ₀⁻² + 2·lr·(π²/4)·t and is still
        // about 0.064 away after 500 epochs; 1000 epochs get within 0.05.
        let theta = werner_run(0.25, CostKind::C0, 500);
        let quartic = (1.0 + 2.0 * 0.1 * PI * PI / 4.0 * 500.0_f64).powf(-0.5);
        assert!((theta - quartic).abs() < 0.005, "θ = {theta}, quartic model {quartic}");
        let theta = werner_run(0.25, CostKind::C0, 1000);
        assert!(theta.abs().min((theta - PI).abs()) <= 0.05, "θ = {theta}");
    }

    #[test]
    fn werner_penalty_rescues_biased_sample() {
        let theta = werner_run(0.25, CostKind::C1, 500);
        assert!((theta - FRAC_PI_2).abs() <= 0.05, "θ = {theta}");
    }

    #[test]
    fn training_is_deterministic() {
        let spec = CostSpec::new(CostKind::C1, SymmetryGroup::local_unitary_pair(2).unwrap());
        let settings = TrainSettings::new(20, Optimizer::Adam { lr: 0.05 }, 42);
        let data = werner_data(0.25, 1.0);
        let a = train(&werner_ansatz(), &gates::swap(), &data, &spec, &settings).unwrap();
        let b = train(&werner_ansatz(), &gates::swap(), &data, &spec, &settings).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.final_params, b.final_params);
        assert_eq!(a.initial_params, b.initial_params);
    }

    #[test]
    fn adjoint_and_finite_difference_training_agree() {
        let enc = RotationEncoding::single();
        let data: Vec<Sample> = [(0.6, 0.3, 1.0), (0.9, 0.8, -1.0), (0.7, 0.55, 1.0)]
            .iter()
            .map(|&(x, y, t)| Sample {
                state: enc.encode(&DataPoint2D::new(x, y, 0)),
                target: t,
            })
            .collect();
        let obs = kron(&gates::pauli_z(), &Operator::identity(2));
        let circuit = hardware_efficient_ansatz(2, 2).unwrap();
        for kind in [CostKind::C0, CostKind::C2] {
            let spec = CostSpec::new(kind, SymmetryGroup::swap2());
            let mut settings = TrainSettings::new(5, Optimizer::Gd { lr: 0.1 }, 3);
            let auto = train(&circuit, &obs, &data, &spec, &settings).unwrap();
            settings.gradient = GradientMethod::FiniteDifference;
            let fd = train(&circuit, &obs, &data, &spec, &settings).unwrap();
            for (a, b) in auto.final_params.iter().zip(&fd.final_params) {
                assert!((a - b).abs() < 1e-8, "{kind:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn auto_lambda_uses_probe_ratio() {
        let spec = CostSpec::new(CostKind::C1, SymmetryGroup::local_unitary_pair(2).unwrap())
            .with_schedule(crate::cost::LambdaSchedule::AutoFraction { fraction: 1.0 / 3.0 });
        let settings = TrainSettings::new(3, Optimizer::Adam { lr: 0.01 }, 1);
        let r = train(
            &werner_ansatz(),
            &gates::swap(),
            &werner_data(0.25, 1.0),
            &spec,
            &settings,
        )
        .unwrap();
        let ratio = r.lambda_probe_ratio.unwrap();
        assert!(ratio > 0.0);
        assert!(r
            .records
            .iter()
            .all(|rec| (rec.lambda - ratio / 3.0).abs() < 1e-12 * ratio));
    }

    #[test]
    fn non_finite_targets_abort_with_partial_report() {
        let spec = CostSpec::new(CostKind::C0, SymmetryGroup::trivial(4));
        let settings = TrainSettings::new(10, Optimizer::Gd { lr: 0.1 }, 0);
        let err = train(
            &werner_ansatz(),
            &gates::swap(),
            &werner_data(0.25, f64::NAN),
            &spec,
            &settings,
        )
        .unwrap_err();
        match err {
            SggdError::Diverged { epoch, partial, .. } => {
                assert_eq!(epoch, 0);
                assert!(partial.records.is_empty());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
