//! Quantum states, classical data encodings and expectation values.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SggdError};
use crate::linalg::{gates, hermitian_eigenvalues, Operator, C64, ONE, STRUCTURE_TOL, ZERO};

/// A pure statevector or a density matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Pure(Vec<C64>),
    Mixed(Operator),
}

impl QuantumState {
    pub fn pure(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(SggdError::InvalidState("empty statevector".into()));
        }
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > STRUCTURE_TOL {
            return Err(SggdError::InvalidState(format!("statevector norm {norm}")));
        }
        Ok(Self::Pure(amplitudes))
    }

    pub fn mixed(rho: Operator) -> Result<Self> {
        rho.require_hermitian()?;
        let tr = rho.trace();
        if (tr - ONE).norm() > STRUCTURE_TOL {
            return Err(SggdError::InvalidState(format!("density matrix trace {tr}")));
        }
        let min = hermitian_eigenvalues(&rho)?[0];
        if min < -STRUCTURE_TOL {
            return Err(SggdError::InvalidState(format!(
                "density matrix has negative eigenvalue {min:e}"
            )));
        }
        Ok(Self::Mixed(rho))
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(v) => v.len(),
            Self::Mixed(rho) => rho.dim(),
        }
    }

    pub fn density_matrix(&self) -> Operator {
        match self {
            Self::Pure(v) => Operator::outer(v, v),
            Self::Mixed(rho) => rho.clone(),
        }
    }

    /// `S ρ S†` for a unitary `s`.
    pub fn transformed(&self, s: &Operator) -> Self {
        match self {
            Self::Pure(v) => Self::Pure(s.apply(v)),
            Self::Mixed(rho) => Self::Mixed(s.matmul(rho).matmul(&s.adjoint())),
        }
    }
}

pub fn basis_state(dim: usize, index: usize) -> QuantumState {
    assert!(index < dim, "basis index {index} out of range for dimension {dim}");
    let mut v = vec![ZERO; dim];
    v[index] = ONE;
    QuantumState::Pure(v)
}

/// Two-qubit Werner state `((2-p)/6) I + ((2p-1)/6) SWAP`, `p ∈ [-1, 1]`.
pub fn werner_state(p: f64) -> Result<QuantumState> {
    if !(-1.0..=1.0).contains(&p) {
        return Err(SggdError::InvalidArgument(format!(
            "Werner parameter {p} outside [-1, 1]"
        )));
    }
    let rho = Operator::identity(4)
        .scale_real((2.0 - p) / 6.0)
        .add(&gates::swap().scale_real((2.0 * p - 1.0) / 6.0));
    QuantumState::mixed(rho)
}

/// A labelled point of the unit square.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataPoint2D {
    pub x0: f64,
    pub x1: f64,
    pub label: i32,
}

impl DataPoint2D {
    /// Coordinates are clamped into `[0, 1]`.
    pub fn new(x0: f64, x1: f64, label: i32) -> Self {
        Self {
            x0: x0.clamp(0.0, 1.0),
            x1: x1.clamp(0.0, 1.0),
            label,
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            x0: self.x1,
            x1: self.x0,
            label: self.label,
        }
    }

    /// Distance to the centre `(1/2, 1/2)`.
    pub fn radius(&self) -> f64 {
        ((self.x0 - 0.5).powi(2) + (self.x1 - 0.5).powi(2)).sqrt()
    }
}

fn ry_column(angle: f64) -> [C64; 2] {
    [C64::new((angle / 2.0).cos(), 0.0), C64::new((angle / 2.0).sin(), 0.0)]
}

fn product_state(factors: &[[C64; 2]]) -> Vec<C64> {
    factors.iter().fold(vec![ONE], |acc, f| {
        acc.iter().flat_map(|a| [a * f[0], a * f[1]]).collect()
    })
}

/// `RY(π x0)|0> ⊗ RY(π x1)|0>`.
pub fn rotation_encode(point: &DataPoint2D) -> QuantumState {
    RotationEncoding::single().encode(point)
}

/// Product-state encoding of a 2D point with one qubit per
/// (coordinate, frequency) pair. Qubit layout is all `x0` qubits first,
/// then all `x1` qubits; each qubit is prepared as `RY(π k x)|0>` with `k`
/// its frequency. Swapping the two coordinates is the register swap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationEncoding {
    pub frequencies: Vec<f64>,
}

impl RotationEncoding {
    /// One qubit per coordinate, angle `π x`.
    pub fn single() -> Self {
        Self { frequencies: vec![1.0] }
    }

    pub fn width(&self) -> usize {
        2 * self.frequencies.len()
    }

    pub fn register_len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn encode(&self, point: &DataPoint2D) -> QuantumState {
        let factors: Vec<[C64; 2]> = [point.x0, point.x1]
            .iter()
            .flat_map(|&x| self.frequencies.iter().map(move |k| ry_column(PI * k * x)))
            .collect();
        QuantumState::Pure(product_state(&factors))
    }
}

/// `min(floor(v 2^bits), 2^bits - 1)`.
pub fn binary_digits(v: f64, bits: u32) -> usize {
    let top = (1usize << bits) - 1;
    ((v.clamp(0.0, 1.0) * (1u64 << bits) as f64).floor() as usize).min(top)
}

/// Basis index of `|b(x), b(y)>`, most significant bit first.
pub fn binary_index(x: f64, y: f64, bits: u32) -> usize {
    (binary_digits(x, bits) << bits) | binary_digits(y, bits)
}

/// Computational-basis state `|b(x), b(y)>` on `2 bits` qubits.
pub fn binary_encode(x: f64, y: f64, bits: u32) -> QuantumState {
    basis_state(1 << (2 * bits), binary_index(x, y, bits))
}

/// `tr(ρ O)` (or `<ψ|O|ψ>`) for a Hermitian observable.
pub fn expectation(state: &QuantumState, obs: &Operator) -> Result<f64> {
    crate::linalg::check_dims(obs.dim(), state.dim())?;
    obs.require_hermitian()?;
    Ok(expectation_unchecked(state, obs))
}

/// [`expectation`] without the dimension and hermiticity checks.
pub fn expectation_unchecked(state: &QuantumState, obs: &Operator) -> f64 {
    match state {
        QuantumState::Pure(v) => pure_expectation(v, obs),
        QuantumState::Mixed(rho) => {
            // tr(ρ O) = Σ_ij ρ_ji O_ij
            let n = rho.dim();
            let mut acc = ZERO;
            for i in 0..n {
                for j in 0..n {
                    acc += rho.get(j, i) * obs.get(i, j);
                }
            }
            acc.re
        }
    }
}

pub(crate) fn pure_expectation(v: &[C64], obs: &Operator) -> f64 {
    let mut acc = ZERO;
    for (i, vi) in v.iter().enumerate() {
        if *vi == ZERO {
            continue;
        }
        let row: C64 = obs.row(i).iter().zip(v).map(|(o, x)| o * x).sum();
        acc += vi.conj() * row;
    }
    acc.re
}

/// `+1` inside the disc of radius 0.2 around the centre, `-1` otherwise.
pub fn label_2class(point: &DataPoint2D) -> i32 {
    if point.radius() < 0.2 {
        1
    } else {
        -1
    }
}

/// Class 0 inside radius 0.2, class 2 beyond radius 0.4, class 1 between.
pub fn label_3class(point: &DataPoint2D) -> i32 {
    let r = point.radius();
    if r < 0.2 {
        0
    } else if r > 0.4 {
        2
    } else {
        1
    }
}
